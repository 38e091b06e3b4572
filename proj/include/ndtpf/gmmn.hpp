// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ndtpf/cmmd.hpp"
#include "ndtpf/modspec.hpp"

namespace ndtpf {

inline constexpr int kDefaultNoiseDim = 10;

struct NetworkShape {
  int cond_dim = 1;
  int noise_dim = kDefaultNoiseDim;
  int hidden_units = 128;
  int hidden_layers = 3;
  bool residual = true;

  int input_dim() const noexcept { return cond_dim + noise_dim; }
  void validate() const;
};

// Parameter storage shared by the model, its gradients and AdaGrad state.
// Hidden layer l owns blocks 4l..4l+3 (w_lin, b_lin, w_gate, b_gate); the
// output layer owns the last two (w_out, b_out). Biases are n x 1.
struct ParamSet {
  std::vector<Eigen::MatrixXd> blocks;

  ParamSet zeros_like() const;
  std::size_t count() const;
  static std::string block_name(std::size_t index, std::size_t total);
};

class GmmnModel {
 public:
  GmmnModel(NetworkShape shape, std::uint64_t seed, bool zero_output = true);
  GmmnModel(NetworkShape shape, std::uint64_t seed, ParamSet params);

  const NetworkShape& shape() const noexcept { return shape_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const ParamSet& params() const noexcept { return params_; }
  ParamSet& mutable_params() noexcept { return params_; }

  // Rows of `cond` / `noise` are segments. Output has cond_dim columns.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& cond,
                          const Eigen::MatrixXd& noise) const;
  Eigen::VectorXd forward(const Eigen::VectorXd& cond,
                          const Eigen::VectorXd& noise) const;

  // Gradient of sum_ij out_grad_ij * out_ij with respect to every parameter.
  ParamSet backward(const Eigen::MatrixXd& cond, const Eigen::MatrixXd& noise,
                    const Eigen::MatrixXd& out_grad) const;

 private:
  struct Cache;
  Eigen::MatrixXd run(const Eigen::MatrixXd& cond,
                      const Eigen::MatrixXd& noise, Cache* cache) const;

  NetworkShape shape_;
  std::uint64_t seed_;
  ParamSet params_;
};

struct AdaGrad {
  double learning_rate = 0.005;
  double epsilon = 1e-8;
  ParamSet accumulators;

  explicit AdaGrad(const ParamSet& like, double lr = 0.005);
  // acc += g^2; w -= lr g / (sqrt(acc) + eps). Throws NumericError on a
  // non-finite gradient before touching anything.
  void step(ParamSet& weights, const ParamSet& grads);
};

// One training example: a segment's normalized condition and target bins.
struct TrainingPairs {
  Eigen::MatrixXd conditions;  // N x cond_dim
  Eigen::MatrixXd targets;     // N x cond_dim

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(conditions.rows());
  }
};

struct TrainConfig {
  CmmdConfig cmmd;
  NetworkShape shape;
  int epochs = 10;
  int batch_size = 512;
  double learning_rate = 0.005;
  std::uint64_t seed = 0;
  bool zero_output_init = false;
};

struct TrainResult {
  GmmnModel model;
  std::vector<double> loss_history;  // mean batch loss per epoch
  std::vector<std::string> warnings;
};

using EpochCallback = std::function<void(int epoch, double loss)>;

TrainResult train(const TrainingPairs& pairs, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Fixed prior noise table: row i is n(i) ~ U[-1, 1)^noise_dim.
Eigen::MatrixXd noise_table(std::uint64_t seed, std::size_t rows,
                            int noise_dim);

// Model file v1 with optional normalizer and filtered-bin blocks.
struct SavedModel {
  GmmnModel model;
  std::optional<MsNormalizer> normalizer;
};

void write_model(std::ostream& out, const GmmnModel& model,
                 const MsNormalizer* normalizer = nullptr);
void save_model(const std::string& path, const GmmnModel& model,
                const MsNormalizer* normalizer = nullptr);
SavedModel read_model(std::istream& in);
SavedModel load_model(const std::string& path);

}  // namespace ndtpf
