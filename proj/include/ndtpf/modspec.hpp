// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ndtpf/f0core.hpp"

namespace ndtpf {

// Periodic Hann analysis with 50% overlap. window = 2 * hop keeps the
// overlap-add normalization bounded away from zero on the signal span.
struct StftConfig {
  int window_frames = 96;
  int hop_frames = 48;

  int bins() const noexcept { return window_frames / 2 + 1; }
  void validate() const;
};

// Row-major T' x (M+1) matrix.
template <typename T>
struct SegmentMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  SegmentMatrix() = default;
  SegmentMatrix(std::size_t r, std::size_t c, T fill = T{})
      : rows(r), cols(c), data(r * c, fill) {}
  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  std::span<T> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const T> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
};

using ComplexFrames = SegmentMatrix<std::complex<double>>;

inline constexpr double kPowerFloor = 1e-12;
inline constexpr double kPhaseMagnitudeFloor = 1e-15;

struct ModulationSpectrum {
  SegmentMatrix<double> log_power;
  SegmentMatrix<double> phase;
  StftConfig config;
  int offset = 0;
  double source_mean = 0.0;
  std::size_t source_length = 0;
  double frame_shift_ms = kDefaultFrameShiftMs;

  std::size_t segments() const noexcept { return log_power.rows; }
  std::size_t bins() const noexcept { return log_power.cols; }
  void validate() const;
};

// Segment count for a contour of `length` frames analysed at `offset`.
std::size_t segment_count(std::size_t length, const StftConfig& cfg,
                          int offset);

// Head padding is (window - hop + offset) zeros; segment k starts at k * hop
// of the padded signal. Only bins 0..M are kept.
ComplexFrames stft(const MeanRemovedContour& mrc, const StftConfig& cfg,
                   int offset);

ModulationSpectrum extract_ms(const MeanRemovedContour& mrc,
                              const StftConfig& cfg, int offset);

// Inverse STFT with the stored phase. Frames are re-windowed and
// overlap-added with sum(w^2) normalization (least-squares inverse), so a
// modified frame tapers to zero at its edges. Trims padding, restores mean.
F0Contour reconstruct(const ModulationSpectrum& ms);

// One spectrum per analysis offset 0..hop-1.
std::vector<ModulationSpectrum> augment_offsets(const MeanRemovedContour& mrc,
                                                const StftConfig& cfg);

// Per-bin affine map of [min, max] onto [0.01, 0.99]. Values outside the
// fitted range extrapolate linearly.
class MsNormalizer {
 public:
  static constexpr double kLow = 0.01;
  static constexpr double kHigh = 0.99;

  MsNormalizer() = default;
  MsNormalizer(std::vector<std::size_t> bins, std::vector<double> min,
               std::vector<double> max);

  const std::vector<std::size_t>& bins() const noexcept { return bins_; }
  const std::vector<double>& min() const noexcept { return min_; }
  const std::vector<double>& max() const noexcept { return max_; }
  std::size_t size() const noexcept { return bins_.size(); }

  // `slot` indexes bins(), not the modulation frequency.
  double apply(std::size_t slot, double value) const;
  double invert(std::size_t slot, double value) const;

 private:
  std::vector<std::size_t> bins_;
  std::vector<double> min_;
  std::vector<double> max_;
};

// Fits over every segment of every spectrum in the corpus. Empty `bins`
// means all bins. Throws InvalidArgument naming a degenerate bin.
MsNormalizer fit_normalizer(std::span<const ModulationSpectrum> corpus,
                            std::vector<std::size_t> bins = {});

// MS text format v1.
void write_ms(std::ostream& out, const ModulationSpectrum& ms);
void save_ms(const std::string& path,
             std::span<const ModulationSpectrum> records);
// Reads one record; returns false at clean end of stream.
bool read_ms(std::istream& in, ModulationSpectrum& ms);
std::vector<ModulationSpectrum> load_ms(const std::string& path);

}  // namespace ndtpf
