// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ndtpf/gmmn.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "ndtpf/error.hpp"
#include "ndtpf/rng.hpp"

namespace ndtpf {

void NetworkShape::validate() const {
  if (cond_dim < 1 || noise_dim < 0 || hidden_units < 1 || hidden_layers < 1)
    throw InvalidArgument("bad network shape");
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  out.blocks.reserve(blocks.size());
  for (const auto& b : blocks)
    out.blocks.push_back(Eigen::MatrixXd::Zero(b.rows(), b.cols()));
  return out;
}

std::size_t ParamSet::count() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += static_cast<std::size_t>(b.size());
  return n;
}

std::string ParamSet::block_name(std::size_t index, std::size_t total) {
  if (index + 2 == total) return "out.w";
  if (index + 1 == total) return "out.b";
  static const char* kParts[] = {"w_lin", "b_lin", "w_gate", "b_gate"};
  return "h" + std::to_string(index / 4) + "." + kParts[index % 4];
}

namespace {

Eigen::MatrixXd glorot(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-limit, limit);
  return m;
}

std::vector<std::pair<int, int>> block_shapes(const NetworkShape& s) {
  std::vector<std::pair<int, int>> shapes;
  int fan_in = s.input_dim();
  for (int l = 0; l < s.hidden_layers; ++l) {
    shapes.emplace_back(s.hidden_units, fan_in);
    shapes.emplace_back(s.hidden_units, 1);
    shapes.emplace_back(s.hidden_units, fan_in);
    shapes.emplace_back(s.hidden_units, 1);
    fan_in = s.hidden_units;
  }
  shapes.emplace_back(s.cond_dim, fan_in);
  shapes.emplace_back(s.cond_dim, 1);
  return shapes;
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return (1.0 + (-z.array()).exp()).inverse().matrix();
}

}  // namespace

GmmnModel::GmmnModel(NetworkShape shape, std::uint64_t seed, bool zero_output)
    : shape_(shape), seed_(seed) {
  shape_.validate();
  Rng rng(seed);
  const auto shapes = block_shapes(shape_);
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto [rows, cols] = shapes[i];
    const bool is_bias = cols == 1 && (i % 2 == 1);
    const bool is_output = i + 2 >= shapes.size();
    if (is_bias || (is_output && zero_output))
      params_.blocks.push_back(Eigen::MatrixXd::Zero(rows, cols));
    else
      params_.blocks.push_back(glorot(rows, cols, rng));
  }
}

GmmnModel::GmmnModel(NetworkShape shape, std::uint64_t seed, ParamSet params)
    : shape_(shape), seed_(seed), params_(std::move(params)) {
  shape_.validate();
  const auto shapes = block_shapes(shape_);
  if (shapes.size() != params_.blocks.size())
    throw InvalidArgument("parameter block count does not match shape");
  for (std::size_t i = 0; i < shapes.size(); ++i)
    if (params_.blocks[i].rows() != shapes[i].first ||
        params_.blocks[i].cols() != shapes[i].second)
      throw InvalidArgument("parameter block " +
                            ParamSet::block_name(i, shapes.size()) +
                            " has the wrong shape");
}

struct GmmnModel::Cache {
  std::vector<Eigen::MatrixXd> inputs;  // input of each hidden layer
  std::vector<Eigen::MatrixXd> linear;  // Z1
  std::vector<Eigen::MatrixXd> gate;    // sigmoid(Z2)
  Eigen::MatrixXd last;                 // input of the output layer
};

Eigen::MatrixXd GmmnModel::run(const Eigen::MatrixXd& cond,
                               const Eigen::MatrixXd& noise,
                               Cache* cache) const {
  if (cond.cols() != shape_.cond_dim || noise.cols() != shape_.noise_dim ||
      cond.rows() != noise.rows())
    throw InvalidArgument("forward: input dimension mismatch");
  if (!cond.allFinite()) throw InvalidArgument("forward: non-finite condition");
  Eigen::MatrixXd x(cond.rows(), shape_.input_dim());
  x << cond, noise;
  const auto& p = params_.blocks;
  for (int l = 0; l < shape_.hidden_layers; ++l) {
    const std::size_t base = 4 * static_cast<std::size_t>(l);
    Eigen::MatrixXd z1 = x * p[base].transpose();
    z1.rowwise() += p[base + 1].col(0).transpose();
    Eigen::MatrixXd z2 = x * p[base + 2].transpose();
    z2.rowwise() += p[base + 3].col(0).transpose();
    Eigen::MatrixXd s = sigmoid(z2);
    Eigen::MatrixXd a = z1.cwiseProduct(s);
    if (cache) {
      cache->inputs.push_back(std::move(x));
      cache->linear.push_back(std::move(z1));
      cache->gate.push_back(std::move(s));
    }
    x = std::move(a);
  }
  const std::size_t out = p.size() - 2;
  Eigen::MatrixXd y = x * p[out].transpose();
  y.rowwise() += p[out + 1].col(0).transpose();
  if (shape_.residual) y += cond;
  if (cache) cache->last = std::move(x);
  return y;
}

Eigen::MatrixXd GmmnModel::forward(const Eigen::MatrixXd& cond,
                                   const Eigen::MatrixXd& noise) const {
  return run(cond, noise, nullptr);
}

Eigen::VectorXd GmmnModel::forward(const Eigen::VectorXd& cond,
                                   const Eigen::VectorXd& noise) const {
  return run(cond.transpose(), noise.transpose(), nullptr).row(0).transpose();
}

ParamSet GmmnModel::backward(const Eigen::MatrixXd& cond,
                             const Eigen::MatrixXd& noise,
                             const Eigen::MatrixXd& out_grad) const {
  Cache cache;
  run(cond, noise, &cache);
  if (out_grad.rows() != cond.rows() || out_grad.cols() != shape_.cond_dim)
    throw InvalidArgument("backward: gradient shape mismatch");
  const auto& p = params_.blocks;
  ParamSet g = params_.zeros_like();
  const std::size_t out = p.size() - 2;
  g.blocks[out] = out_grad.transpose() * cache.last;
  g.blocks[out + 1] = out_grad.colwise().sum().transpose();
  Eigen::MatrixXd da = out_grad * p[out];
  for (int l = shape_.hidden_layers - 1; l >= 0; --l) {
    const std::size_t base = 4 * static_cast<std::size_t>(l);
    const auto& s = cache.gate[l];
    const Eigen::MatrixXd dz1 = da.cwiseProduct(s);
    const Eigen::MatrixXd dz2 = da.cwiseProduct(cache.linear[l])
                                    .cwiseProduct(s)
                                    .cwiseProduct((1.0 - s.array()).matrix());
    const auto& x = cache.inputs[l];
    g.blocks[base] = dz1.transpose() * x;
    g.blocks[base + 1] = dz1.colwise().sum().transpose();
    g.blocks[base + 2] = dz2.transpose() * x;
    g.blocks[base + 3] = dz2.colwise().sum().transpose();
    if (l > 0) da = dz1 * p[base] + dz2 * p[base + 2];
  }
  return g;
}

AdaGrad::AdaGrad(const ParamSet& like, double lr)
    : learning_rate(lr), accumulators(like.zeros_like()) {}

void AdaGrad::step(ParamSet& weights, const ParamSet& grads) {
  if (grads.blocks.size() != weights.blocks.size() ||
      accumulators.blocks.size() != weights.blocks.size())
    throw InvalidArgument("AdaGrad: parameter layout mismatch");
  for (std::size_t i = 0; i < grads.blocks.size(); ++i) {
    if (grads.blocks[i].rows() != weights.blocks[i].rows() ||
        grads.blocks[i].cols() != weights.blocks[i].cols())
      throw InvalidArgument("AdaGrad: block shape mismatch");
    if (!grads.blocks[i].allFinite())
      throw NumericError("AdaGrad: non-finite gradient in block " +
                         ParamSet::block_name(i, grads.blocks.size()));
  }
  for (std::size_t i = 0; i < grads.blocks.size(); ++i) {
    auto acc = accumulators.blocks[i].array();
    const auto g = grads.blocks[i].array();
    acc += g.square();
    weights.blocks[i].array() -= learning_rate * g / (acc.sqrt() + epsilon);
  }
}

Eigen::MatrixXd noise_table(std::uint64_t seed, std::size_t rows,
                            int noise_dim) {
  const CounterRng rng(seed);
  Eigen::MatrixXd n(static_cast<Eigen::Index>(rows), noise_dim);
  for (std::size_t r = 0; r < rows; ++r)
    for (int d = 0; d < noise_dim; ++d)
      n(static_cast<Eigen::Index>(r), d) =
          rng.symmetric(r * static_cast<std::uint64_t>(noise_dim) +
                        static_cast<std::uint64_t>(d));
  return n;
}

namespace {

Eigen::MatrixXd gather(const Eigen::MatrixXd& m,
                       std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) =
        m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

}  // namespace

TrainResult train(const TrainingPairs& pairs, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.cmmd.validate();
  cfg.shape.validate();
  const std::size_t n = pairs.size();
  if (n == 0) throw InvalidArgument("train: no training pairs");
  if (pairs.conditions.cols() != cfg.shape.cond_dim ||
      pairs.targets.cols() != cfg.shape.cond_dim ||
      static_cast<std::size_t>(pairs.targets.rows()) != n)
    throw InvalidArgument("train: pair dimensions do not match the network");
  if (cfg.epochs < 0 || cfg.batch_size < 1)
    throw InvalidArgument("train: epochs >= 0 and batch_size >= 1 required");
  if (!pairs.conditions.allFinite() || !pairs.targets.allFinite())
    throw InvalidArgument("train: non-finite training data");

  TrainResult result{GmmnModel(cfg.shape, derive_seed(cfg.seed, 0),
                               cfg.zero_output_init),
                     {},
                     {}};
  GmmnModel& model = result.model;
  const Eigen::MatrixXd noise =
      noise_table(derive_seed(cfg.seed, 1), n, cfg.shape.noise_dim);
  std::optional<RffBasis> basis;
  if (cfg.cmmd.mode == CmmdMode::kRff)
    basis.emplace(cfg.shape.cond_dim, cfg.cmmd.sigma_in, cfg.cmmd.rff_dim,
                  derive_seed(cfg.seed, 3));

  const std::size_t batch = std::min<std::size_t>(
      static_cast<std::size_t>(cfg.batch_size), n);
  if (cfg.cmmd.mode == CmmdMode::kExact &&
      (batch < 2 || n % batch == 1))
    result.warnings.push_back(
        "exact-mode batch with fewer than 2 segments; loss is defined but "
        "carries no conditional structure");

  AdaGrad optimizer(model.params(), cfg.learning_rate);
  std::vector<std::size_t> order(n);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng shuffle(derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = n - 1; i > 0; --i)
      std::swap(order[i], order[static_cast<std::size_t>(
                              shuffle.uniform_int(0, static_cast<long>(i)))]);

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      const std::span<const std::size_t> idx(order.data() + start, len);
      const Eigen::MatrixXd cond = gather(pairs.conditions, idx);
      const Eigen::MatrixXd target = gather(pairs.targets, idx);
      const Eigen::MatrixXd z = gather(noise, idx);

      const Eigen::MatrixXd weights =
          basis ? cmmd_weights_rff(cond, cfg.cmmd, *basis)
                : cmmd_weights_exact(cond, cfg.cmmd);
      const Eigen::MatrixXd filtered = model.forward(cond, z);
      const double loss =
          cmmd_loss(weights, target, filtered, cfg.cmmd.sigma_out);
      if (!std::isfinite(loss))
        throw NumericError("non-finite CMMD loss in epoch " +
                           std::to_string(epoch + 1));
      const Eigen::MatrixXd dout =
          cmmd_grad(weights, target, filtered, cfg.cmmd.sigma_out);
      optimizer.step(model.mutable_params(), model.backward(cond, z, dout));
      loss_sum += loss;
      ++batches;
    }
    const double mean = loss_sum / static_cast<double>(batches);
    result.loss_history.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return result;
}

namespace {

void write_block(std::ostream& out, const std::string& name,
                 const Eigen::MatrixXd& m) {
  out << "block " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  char buf[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%a", m(r, c));
      out << (c ? " " : "") << buf;
    }
    out << '\n';
  }
}

double parse_hex(const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size() || !std::isfinite(v))
    throw FormatError("model file: bad value '" + tok + "'");
  return v;
}

std::pair<std::string, Eigen::MatrixXd> read_block(std::istream& in,
                                                   const std::string& line) {
  std::istringstream head(line);
  std::string kw, name;
  long rows = -1, cols = -1;
  if (!(head >> kw >> name >> rows >> cols) || kw != "block" || rows < 0 ||
      cols < 0)
    throw FormatError("model file: malformed block header '" + line + "'");
  Eigen::MatrixXd m(rows, cols);
  for (long r = 0; r < rows; ++r) {
    std::string row_line;
    if (!std::getline(in, row_line))
      throw FormatError("model file: truncated in block " + name);
    std::istringstream row(row_line);
    for (long c = 0; c < cols; ++c) {
      std::string tok;
      if (!(row >> tok))
        throw FormatError("model file: short row in block " + name);
      m(r, c) = parse_hex(tok);
    }
  }
  return {name, std::move(m)};
}

}  // namespace

void write_model(std::ostream& out, const GmmnModel& model,
                 const MsNormalizer* normalizer) {
  const auto& s = model.shape();
  out << "#GMMN v1 cond=" << s.cond_dim << " noise=" << s.noise_dim
      << " hidden=" << s.hidden_units << 'x' << s.hidden_layers
      << " residual=" << (s.residual ? 1 : 0) << " seed=" << model.seed()
      << '\n';
  const auto& blocks = model.params().blocks;
  for (std::size_t i = 0; i < blocks.size(); ++i)
    write_block(out, ParamSet::block_name(i, blocks.size()), blocks[i]);
  if (normalizer) {
    const auto k = static_cast<Eigen::Index>(normalizer->size());
    Eigen::MatrixXd bins(k, 1), lo(k, 1), hi(k, 1);
    for (Eigen::Index i = 0; i < k; ++i) {
      bins(i, 0) = static_cast<double>(normalizer->bins()[i]);
      lo(i, 0) = normalizer->min()[i];
      hi(i, 0) = normalizer->max()[i];
    }
    write_block(out, "norm.bins", bins);
    write_block(out, "norm.min", lo);
    write_block(out, "norm.max", hi);
  }
  out << "end\n";
}

void save_model(const std::string& path, const GmmnModel& model,
                const MsNormalizer* normalizer) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_model(out, model, normalizer);
  if (!out) throw IoError("write failed: " + path);
}

SavedModel read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("model file is empty");
  std::istringstream header(line);
  std::string magic, version;
  header >> magic >> version;
  if (magic != "#GMMN") throw FormatError("missing #GMMN header");
  if (version != "v1")
    throw FormatError("unsupported model version '" + version + "'");
  std::map<std::string, std::string> fields;
  std::string tok;
  while (header >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw FormatError("malformed model header");
    fields[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  NetworkShape shape;
  std::uint64_t seed = 0;
  try {
    shape.cond_dim = std::stoi(fields.at("cond"));
    shape.noise_dim = std::stoi(fields.at("noise"));
    const std::string hidden = fields.at("hidden");
    const auto x = hidden.find('x');
    if (x == std::string::npos) throw FormatError("bad hidden field");
    shape.hidden_units = std::stoi(hidden.substr(0, x));
    shape.hidden_layers = std::stoi(hidden.substr(x + 1));
    shape.residual = fields.at("residual") == "1";
    seed = std::stoull(fields.at("seed"));
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception&) {
    throw FormatError("model header lacks or mangles a required field");
  }

  std::map<std::string, Eigen::MatrixXd> blocks;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line == "end") {
      ended = true;
      break;
    }
    auto [name, m] = read_block(in, line);
    blocks[name] = std::move(m);
  }
  if (!ended) throw FormatError("model file truncated (no end marker)");

  ParamSet params;
  const std::size_t total = 4 * static_cast<std::size_t>(shape.hidden_layers) + 2;
  for (std::size_t i = 0; i < total; ++i) {
    const auto name = ParamSet::block_name(i, total);
    auto it = blocks.find(name);
    if (it == blocks.end()) throw FormatError("model file lacks block " + name);
    params.blocks.push_back(std::move(it->second));
  }
  SavedModel saved{GmmnModel(shape, seed, std::move(params)), std::nullopt};
  if (blocks.count("norm.bins")) {
    const auto& b = blocks["norm.bins"];
    const auto& lo = blocks["norm.min"];
    const auto& hi = blocks["norm.max"];
    if (lo.rows() != b.rows() || hi.rows() != b.rows())
      throw FormatError("normalizer blocks differ in size");
    std::vector<std::size_t> bins;
    std::vector<double> mins, maxs;
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      bins.push_back(static_cast<std::size_t>(b(i, 0)));
      mins.push_back(lo(i, 0));
      maxs.push_back(hi(i, 0));
    }
    saved.normalizer.emplace(std::move(bins), std::move(mins), std::move(maxs));
  }
  return saved;
}

SavedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return read_model(in);
  } catch (const InvalidArgument& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace ndtpf
