// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ndtpf {

inline constexpr double kDefaultFrameShiftMs = 5.0;

// 69 + 12 log2(hz / 440). Throws DomainError for hz <= 0 or non-finite.
double hz_to_semitone(double hz);
double semitone_to_hz(double semitone);

struct RawFrame {
  double f0_hz = 0.0;
  bool voiced = false;
};

// Continuous pitch contour in MIDI semitones at a fixed frame shift.
class F0Contour {
 public:
  F0Contour(std::vector<double> values, std::vector<bool> voicing,
            double frame_shift_ms = kDefaultFrameShiftMs);
  // All frames voiced.
  explicit F0Contour(std::vector<double> values,
                     double frame_shift_ms = kDefaultFrameShiftMs);

  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<bool>& voicing() const noexcept { return voicing_; }
  double frame_shift_ms() const noexcept { return frame_shift_ms_; }
  double operator[](std::size_t t) const { return values_[t]; }

  // Same voicing and frame shift, new values.
  F0Contour with_values(std::vector<double> values) const;

 private:
  std::vector<double> values_;
  std::vector<bool> voicing_;
  double frame_shift_ms_;
};

struct MeanRemovedContour {
  std::vector<double> centered;
  double mean = 0.0;
  std::vector<bool> voicing;
  double frame_shift_ms = kDefaultFrameShiftMs;
};

// Linear interpolation in the semitone domain across unvoiced gaps, edge hold
// at both ends. Throws DomainError("no voiced frames") if nothing is voiced.
F0Contour interpolate_unvoiced(std::span<const RawFrame> raw,
                               double frame_shift_ms = kDefaultFrameShiftMs);

MeanRemovedContour remove_mean(const F0Contour& contour);
F0Contour restore_mean(const MeanRemovedContour& mrc);

// F0 text format v1:
//   #F0 v1 frame_shift_ms=<float>
//   <f0_hz> <voiced 0|1>      (one line per frame, f0_hz = 0 when unvoiced)
std::vector<RawFrame> parse_f0_text(std::istream& in, double* frame_shift_ms);
F0Contour read_f0(std::istream& in);
F0Contour load_f0(const std::string& path);
void write_f0(std::ostream& out, const F0Contour& contour);
void save_f0(const std::string& path, const F0Contour& contour);

}  // namespace ndtpf
