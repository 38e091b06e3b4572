// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ndtpf/cmmd.hpp"
#include "ndtpf/f0core.hpp"
#include "ndtpf/modspec.hpp"

namespace ndtpf {

// Biased V-statistic: mean k(a,a') + mean k(b,b') - 2 mean k(a,b).
double eval_mmd(const SampleSet& a, const SampleSet& b, double sigma);

struct VariationStats {
  std::vector<double> per_frame_std;  // population std across takes
  double mean_std = 0.0;
  double max_std = 0.0;
  double max_deviation_from_first = 0.0;
};

VariationStats eval_variation(std::span<const F0Contour> takes);

// Rows are (segment, offset-0) log-power values of `bins` over all contours.
SampleSet ms_samples(std::span<const F0Contour> contours,
                     const StftConfig& stft,
                     const std::vector<std::size_t>& bins);

// Largest |reconstruct(extract_ms(x)) - x| over the contours.
double reconstruction_error(std::span<const F0Contour> contours,
                            const StftConfig& stft);

struct EvalReport {
  double mmd_squared = 0.0;
  double mean_std = 0.0;
  double max_std = 0.0;
  double max_deviation = 0.0;
  double reconstruction_error = 0.0;
  std::size_t natural_count = 0;
  std::size_t take_count = 0;

  void write(std::ostream& out) const;
};

}  // namespace ndtpf
