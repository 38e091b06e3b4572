// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ndtpf/f0core.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "ndtpf/error.hpp"

namespace ndtpf {

double hz_to_semitone(double hz) {
  if (!(hz > 0.0) || !std::isfinite(hz))
    throw DomainError("f0 must be a positive finite frequency, got " +
                      std::to_string(hz));
  return 69.0 + 12.0 * std::log2(hz / 440.0);
}

double semitone_to_hz(double semitone) {
  if (!std::isfinite(semitone))
    throw DomainError("semitone value must be finite");
  return 440.0 * std::exp2((semitone - 69.0) / 12.0);
}

F0Contour::F0Contour(std::vector<double> values, std::vector<bool> voicing,
                     double frame_shift_ms)
    : values_(std::move(values)),
      voicing_(std::move(voicing)),
      frame_shift_ms_(frame_shift_ms) {
  if (values_.empty()) throw InvalidArgument("contour must have T >= 1");
  if (values_.size() != voicing_.size())
    throw InvalidArgument("values and voicing differ in length");
  if (!(frame_shift_ms_ > 0.0) || !std::isfinite(frame_shift_ms_))
    throw InvalidArgument("frame_shift_ms must be > 0");
  for (std::size_t t = 0; t < values_.size(); ++t)
    if (!std::isfinite(values_[t]))
      throw DomainError("non-finite pitch at frame " + std::to_string(t));
}

F0Contour::F0Contour(std::vector<double> values, double frame_shift_ms)
    : F0Contour(values, std::vector<bool>(values.size(), true),
                frame_shift_ms) {}

F0Contour F0Contour::with_values(std::vector<double> values) const {
  return F0Contour(std::move(values), voicing_, frame_shift_ms_);
}

F0Contour interpolate_unvoiced(std::span<const RawFrame> raw,
                               double frame_shift_ms) {
  const std::size_t n = raw.size();
  std::vector<double> values(n, 0.0);
  std::vector<bool> voicing(n, false);
  std::vector<std::size_t> voiced_idx;
  for (std::size_t t = 0; t < n; ++t) {
    if (raw[t].voiced) {
      values[t] = hz_to_semitone(raw[t].f0_hz);
      voicing[t] = true;
      voiced_idx.push_back(t);
    } else if (raw[t].f0_hz < 0.0 || !std::isfinite(raw[t].f0_hz)) {
      throw DomainError("negative or non-finite f0 at frame " +
                        std::to_string(t));
    }
  }
  if (voiced_idx.empty()) throw DomainError("no voiced frames");

  for (std::size_t t = 0; t < voiced_idx.front(); ++t)
    values[t] = values[voiced_idx.front()];
  for (std::size_t t = voiced_idx.back() + 1; t < n; ++t)
    values[t] = values[voiced_idx.back()];
  for (std::size_t k = 0; k + 1 < voiced_idx.size(); ++k) {
    const std::size_t a = voiced_idx[k], b = voiced_idx[k + 1];
    const double va = values[a], vb = values[b];
    for (std::size_t t = a + 1; t < b; ++t) {
      const double frac = static_cast<double>(t - a) / static_cast<double>(b - a);
      values[t] = va + (vb - va) * frac;
    }
  }
  return F0Contour(std::move(values), std::move(voicing), frame_shift_ms);
}

MeanRemovedContour remove_mean(const F0Contour& contour) {
  const auto& v = contour.values();
  const double mean =
      std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  MeanRemovedContour out;
  out.mean = mean;
  out.centered.resize(v.size());
  for (std::size_t t = 0; t < v.size(); ++t) out.centered[t] = v[t] - mean;
  out.voicing = contour.voicing();
  out.frame_shift_ms = contour.frame_shift_ms();
  return out;
}

F0Contour restore_mean(const MeanRemovedContour& mrc) {
  if (mrc.centered.empty()) throw InvalidArgument("contour must have T >= 1");
  std::vector<double> values(mrc.centered.size());
  for (std::size_t t = 0; t < values.size(); ++t)
    values[t] = mrc.centered[t] + mrc.mean;
  std::vector<bool> voicing = mrc.voicing;
  if (voicing.size() != values.size()) voicing.assign(values.size(), true);
  return F0Contour(std::move(values), std::move(voicing), mrc.frame_shift_ms);
}

namespace {

double parse_double(const std::string& token, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw FormatError("line " + std::to_string(line) + ": bad number '" +
                      token + "'");
  }
  if (used != token.size() || !std::isfinite(v))
    throw FormatError("line " + std::to_string(line) +
                      ": non-finite or malformed value '" + token + "'");
  return v;
}

}  // namespace

std::vector<RawFrame> parse_f0_text(std::istream& in, double* frame_shift_ms) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing #F0 v1 header");
  std::istringstream header(line);
  std::string magic, version, shift_field;
  header >> magic >> version >> shift_field;
  if (magic != "#F0" || version != "v1")
    throw FormatError("missing #F0 v1 header");
  const std::string key = "frame_shift_ms=";
  if (shift_field.rfind(key, 0) != 0)
    throw FormatError("header lacks frame_shift_ms");
  const double shift = parse_double(shift_field.substr(key.size()), 1);
  if (!(shift > 0.0)) throw FormatError("frame_shift_ms must be > 0");
  if (frame_shift_ms) *frame_shift_ms = shift;

  std::vector<RawFrame> frames;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream fields(line);
    std::string hz_tok, v_tok, extra;
    if (!(fields >> hz_tok >> v_tok) || (fields >> extra))
      throw FormatError("line " + std::to_string(lineno) +
                        ": expected '<f0_hz> <voiced>'");
    RawFrame f;
    f.f0_hz = parse_double(hz_tok, lineno);
    if (v_tok == "1") {
      f.voiced = true;
    } else if (v_tok != "0") {
      throw FormatError("line " + std::to_string(lineno) +
                        ": voiced flag must be 0 or 1");
    }
    if (f.voiced && !(f.f0_hz > 0.0))
      throw FormatError("line " + std::to_string(lineno) +
                        ": voiced frame needs f0_hz > 0");
    frames.push_back(f);
  }
  if (frames.empty()) throw FormatError("no frames");
  return frames;
}

F0Contour read_f0(std::istream& in) {
  double shift = kDefaultFrameShiftMs;
  const auto frames = parse_f0_text(in, &shift);
  return interpolate_unvoiced(frames, shift);
}

F0Contour load_f0(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return read_f0(in);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_f0(std::ostream& out, const F0Contour& contour) {
  const auto old_precision = out.precision();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "#F0 v1 frame_shift_ms=" << contour.frame_shift_ms() << '\n';
  for (std::size_t t = 0; t < contour.size(); ++t) {
    if (contour.voicing()[t])
      out << semitone_to_hz(contour[t]) << " 1\n";
    else
      out << "0 0\n";
  }
  out.precision(old_precision);
}

void save_f0(const std::string& path, const F0Contour& contour) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_f0(out, contour);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace ndtpf
