// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ndtpf/modspec.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "ndtpf/error.hpp"

namespace ndtpf {

void StftConfig::validate() const {
  if (window_frames < 4 || window_frames % 2 != 0)
    throw InvalidArgument("window_frames must be even and >= 4");
  if (window_frames != 2 * hop_frames)
    throw InvalidArgument("window_frames must equal 2 * hop_frames");
}

void ModulationSpectrum::validate() const {
  config.validate();
  const auto bins = static_cast<std::size_t>(config.bins());
  if (log_power.rows == 0) throw InvalidArgument("spectrum has no segments");
  if (log_power.cols != bins || phase.cols != bins ||
      phase.rows != log_power.rows ||
      log_power.data.size() != log_power.rows * bins ||
      phase.data.size() != phase.rows * bins)
    throw InvalidArgument("inconsistent modulation spectrum shapes");
  if (offset < 0 || offset >= config.hop_frames)
    throw InvalidArgument("offset outside [0, hop)");
  if (source_length == 0) throw InvalidArgument("source_length must be >= 1");
  if (segment_count(source_length, config, offset) != log_power.rows)
    throw InvalidArgument("segment count does not match source length");
}

namespace {

// Precomputed periodic Hann window and DFT twiddles for one window length.
struct DftTables {
  int n = 0;
  std::vector<double> window;
  std::vector<double> cos_table;  // cos(2 pi j / n), j = 0..n-1
  std::vector<double> sin_table;

  explicit DftTables(int len) : n(len), window(len), cos_table(len), sin_table(len) {
    for (int j = 0; j < n; ++j) {
      const double angle = 2.0 * std::numbers::pi * j / n;
      window[j] = 0.5 - 0.5 * std::cos(angle);
      cos_table[j] = std::cos(angle);
      sin_table[j] = std::sin(angle);
    }
  }
};

const DftTables& tables_for(int n) {
  thread_local std::map<int, DftTables> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, DftTables(n)).first;
  return it->second;
}

std::size_t head_padding(const StftConfig& cfg, int offset) {
  return static_cast<std::size_t>(cfg.window_frames - cfg.hop_frames + offset);
}

void check_offset(const StftConfig& cfg, int offset) {
  if (offset < 0 || offset >= cfg.hop_frames)
    throw InvalidArgument("offset must lie in [0, hop_frames)");
}

double wrap_phase(double phi) {
  return phi <= -std::numbers::pi ? std::numbers::pi : phi;
}

}  // namespace

std::size_t segment_count(std::size_t length, const StftConfig& cfg,
                          int offset) {
  // The last signal sample p = head + length - 1 must satisfy p <= T' * hop,
  // where no missing frame would have contributed.
  cfg.validate();
  check_offset(cfg, offset);
  if (length == 0) throw InvalidArgument("empty contour");
  const std::size_t hop = static_cast<std::size_t>(cfg.hop_frames);
  const std::size_t last = head_padding(cfg, offset) + length - 1;
  return (last + hop - 1) / hop;
}

ComplexFrames stft(const MeanRemovedContour& mrc, const StftConfig& cfg,
                   int offset) {
  cfg.validate();
  check_offset(cfg, offset);
  const std::size_t length = mrc.centered.size();
  if (length == 0) throw InvalidArgument("empty contour");

  const int n = cfg.window_frames;
  const int bins = cfg.bins();
  const auto& tab = tables_for(n);
  const std::size_t hop = static_cast<std::size_t>(cfg.hop_frames);
  const std::size_t head = head_padding(cfg, offset);
  const std::size_t segments = segment_count(length, cfg, offset);

  ComplexFrames frames(segments, static_cast<std::size_t>(bins));
  std::vector<double> seg(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < segments; ++k) {
    const std::size_t start = k * hop;
    for (int j = 0; j < n; ++j) {
      const std::size_t p = start + static_cast<std::size_t>(j);
      const double x =
          (p >= head && p - head < length) ? mrc.centered[p - head] : 0.0;
      seg[j] = x * tab.window[j];
    }
    for (int m = 0; m < bins; ++m) {
      double re = 0.0, im = 0.0;
      for (int j = 0; j < n; ++j) {
        const int idx = (m * j) % n;
        re += seg[j] * tab.cos_table[idx];
        im -= seg[j] * tab.sin_table[idx];
      }
      frames(k, m) = {re, im};
    }
  }
  return frames;
}

ModulationSpectrum extract_ms(const MeanRemovedContour& mrc,
                              const StftConfig& cfg, int offset) {
  const ComplexFrames frames = stft(mrc, cfg, offset);
  ModulationSpectrum ms;
  ms.config = cfg;
  ms.offset = offset;
  ms.source_mean = mrc.mean;
  ms.source_length = mrc.centered.size();
  ms.frame_shift_ms = mrc.frame_shift_ms;
  ms.log_power = SegmentMatrix<double>(frames.rows, frames.cols);
  ms.phase = SegmentMatrix<double>(frames.rows, frames.cols);
  for (std::size_t i = 0; i < frames.data.size(); ++i) {
    const auto x = frames.data[i];
    ms.log_power.data[i] = std::log(std::norm(x) + kPowerFloor);
    ms.phase.data[i] =
        std::abs(x) < kPhaseMagnitudeFloor ? 0.0 : wrap_phase(std::arg(x));
  }
  return ms;
}

F0Contour reconstruct(const ModulationSpectrum& ms) {
  ms.validate();
  const auto& cfg = ms.config;
  const int n = cfg.window_frames;
  const int half = n / 2;
  const auto& tab = tables_for(n);
  const std::size_t hop = static_cast<std::size_t>(cfg.hop_frames);
  const std::size_t segments = ms.segments();
  const std::size_t padded = (segments + 1) * hop;

  std::vector<double> acc(padded, 0.0);
  std::vector<double> window_sum(padded, 0.0);
  std::vector<double> re(static_cast<std::size_t>(half + 1));
  std::vector<double> im(static_cast<std::size_t>(half + 1));
  for (std::size_t k = 0; k < segments; ++k) {
    for (int m = 0; m <= half; ++m) {
      const double power = std::exp(ms.log_power(k, m)) - kPowerFloor;
      const double mag = std::sqrt(std::max(power, 0.0));
      re[m] = mag * std::cos(ms.phase(k, m));
      im[m] = mag * std::sin(ms.phase(k, m));
    }
    const std::size_t start = k * hop;
    for (int j = 0; j < n; ++j) {
      // Real inverse DFT using conjugate symmetry; DC and Nyquist are real.
      double sum = re[0] + ((j % 2 == 0) ? re[half] : -re[half]);
      for (int m = 1; m < half; ++m) {
        const int idx = (m * j) % n;
        sum += 2.0 * (re[m] * tab.cos_table[idx] - im[m] * tab.sin_table[idx]);
      }
      acc[start + j] += tab.window[j] * sum / n;
      window_sum[start + j] += tab.window[j] * tab.window[j];
    }
  }

  const std::size_t head = head_padding(cfg, ms.offset);
  std::vector<double> values(ms.source_length);
  for (std::size_t t = 0; t < ms.source_length; ++t) {
    const std::size_t p = head + t;
    values[t] = acc[p] / window_sum[p] + ms.source_mean;
  }
  return F0Contour(std::move(values), ms.frame_shift_ms);
}

std::vector<ModulationSpectrum> augment_offsets(const MeanRemovedContour& mrc,
                                                const StftConfig& cfg) {
  cfg.validate();
  std::vector<ModulationSpectrum> out;
  out.reserve(static_cast<std::size_t>(cfg.hop_frames));
  for (int o = 0; o < cfg.hop_frames; ++o) out.push_back(extract_ms(mrc, cfg, o));
  return out;
}

MsNormalizer::MsNormalizer(std::vector<std::size_t> bins,
                           std::vector<double> min, std::vector<double> max)
    : bins_(std::move(bins)), min_(std::move(min)), max_(std::move(max)) {
  if (bins_.size() != min_.size() || bins_.size() != max_.size())
    throw InvalidArgument("normalizer arrays differ in length");
  for (std::size_t i = 0; i < bins_.size(); ++i)
    if (!(max_[i] > min_[i]))
      throw InvalidArgument("degenerate normalizer range for bin " +
                            std::to_string(bins_[i]));
}

double MsNormalizer::apply(std::size_t slot, double value) const {
  return kLow + (kHigh - kLow) * (value - min_.at(slot)) /
                    (max_.at(slot) - min_.at(slot));
}

double MsNormalizer::invert(std::size_t slot, double value) const {
  return min_.at(slot) +
         (value - kLow) * (max_.at(slot) - min_.at(slot)) / (kHigh - kLow);
}

MsNormalizer fit_normalizer(std::span<const ModulationSpectrum> corpus,
                            std::vector<std::size_t> bins) {
  if (corpus.empty()) throw InvalidArgument("normalizer corpus is empty");
  const std::size_t nbins = corpus.front().bins();
  if (bins.empty())
    for (std::size_t b = 0; b < nbins; ++b) bins.push_back(b);
  std::vector<double> lo(bins.size(), std::numeric_limits<double>::infinity());
  std::vector<double> hi(bins.size(), -std::numeric_limits<double>::infinity());
  for (const auto& ms : corpus) {
    for (std::size_t s = 0; s < bins.size(); ++s) {
      if (bins[s] >= ms.bins())
        throw InvalidArgument("bin " + std::to_string(bins[s]) +
                              " out of range");
      for (std::size_t k = 0; k < ms.segments(); ++k) {
        const double v = ms.log_power(k, bins[s]);
        lo[s] = std::min(lo[s], v);
        hi[s] = std::max(hi[s], v);
      }
    }
  }
  return MsNormalizer(std::move(bins), std::move(lo), std::move(hi));
}

void write_ms(std::ostream& out, const ModulationSpectrum& ms) {
  const auto old_precision = out.precision();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "#MS v1 T'=" << ms.segments() << " M=" << ms.config.window_frames / 2
      << " window=" << ms.config.window_frames
      << " hop=" << ms.config.hop_frames << " offset=" << ms.offset
      << " mean=" << ms.source_mean << " srclen=" << ms.source_length << '\n';
  for (const auto* mat : {&ms.log_power, &ms.phase}) {
    for (std::size_t k = 0; k < mat->rows; ++k) {
      for (std::size_t m = 0; m < mat->cols; ++m)
        out << (m ? " " : "") << (*mat)(k, m);
      out << '\n';
    }
  }
  out.precision(old_precision);
}

void save_ms(const std::string& path,
             std::span<const ModulationSpectrum> records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& ms : records) write_ms(out, ms);
  if (!out) throw IoError("write failed: " + path);
}

namespace {

std::map<std::string, std::string> parse_header_fields(std::istringstream& in) {
  std::map<std::string, std::string> fields;
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw FormatError("malformed header field '" + tok + "'");
    fields[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return fields;
}

template <typename T>
T header_value(const std::map<std::string, std::string>& fields,
               const std::string& key) {
  const auto it = fields.find(key);
  if (it == fields.end()) throw FormatError("MS header lacks " + key);
  std::istringstream in(it->second);
  T v{};
  if (!(in >> v) || !in.eof())
    throw FormatError("bad MS header value " + key + "=" + it->second);
  return v;
}

void read_matrix(std::istream& in, SegmentMatrix<double>& mat,
                 const char* what) {
  for (std::size_t k = 0; k < mat.rows; ++k) {
    std::string line;
    if (!std::getline(in, line))
      throw FormatError(std::string("truncated MS ") + what + " block");
    std::istringstream row(line);
    for (std::size_t m = 0; m < mat.cols; ++m) {
      std::string tok;
      if (!(row >> tok))
        throw FormatError(std::string("short row in MS ") + what + " block");
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(v))
        throw FormatError(std::string("bad value in MS ") + what + " block");
      mat(k, m) = v;
    }
    std::string extra;
    if (row >> extra)
      throw FormatError(std::string("long row in MS ") + what + " block");
  }
}

}  // namespace

bool read_ms(std::istream& in, ModulationSpectrum& ms) {
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) break;
  if (line.empty()) return false;
  std::istringstream header(line);
  std::string magic, version;
  header >> magic >> version;
  if (magic != "#MS" || version != "v1")
    throw FormatError("missing #MS v1 header");
  const auto fields = parse_header_fields(header);
  const auto segments = header_value<std::size_t>(fields, "T'");
  const auto m = header_value<int>(fields, "M");
  ms = ModulationSpectrum{};
  ms.config.window_frames = header_value<int>(fields, "window");
  ms.config.hop_frames = header_value<int>(fields, "hop");
  ms.offset = header_value<int>(fields, "offset");
  ms.source_mean = header_value<double>(fields, "mean");
  ms.source_length = header_value<std::size_t>(fields, "srclen");
  if (m != ms.config.window_frames / 2)
    throw FormatError("MS header M inconsistent with window");
  const auto bins = static_cast<std::size_t>(m + 1);
  ms.log_power = SegmentMatrix<double>(segments, bins);
  ms.phase = SegmentMatrix<double>(segments, bins);
  read_matrix(in, ms.log_power, "log-power");
  read_matrix(in, ms.phase, "phase");
  try {
    ms.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return true;
}

std::vector<ModulationSpectrum> load_ms(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<ModulationSpectrum> out;
  ModulationSpectrum ms;
  while (read_ms(in, ms)) out.push_back(std::move(ms));
  if (out.empty()) throw FormatError(path + ": no MS records");
  return out;
}

}  // namespace ndtpf
