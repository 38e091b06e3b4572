// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ndtpf/f0core.hpp"
#include "ndtpf/gmmn.hpp"
#include "ndtpf/modspec.hpp"

namespace ndtpf {

// The filtered bins are normalizer.bins(); the default training setup uses
// {1} only.
struct PostfilterConfig {
  MsNormalizer normalizer;
  StftConfig stft;
  // Required. A missing seed is rejected rather than drawn from a clock.
  std::optional<std::uint64_t> noise_seed;
};

// Prior noise for segment `segment` of a take seeded with `seed`.
Eigen::MatrixXd segment_noise(std::uint64_t seed, std::size_t segments,
                              int noise_dim);

// Replaces the selected bins of each segment's MS with the network output,
// keeps every other bin and all phases, and resynthesizes at offset 0.
F0Contour filter_contour(const GmmnModel& model, const F0Contour& contour,
                         const PostfilterConfig& cfg);

// Take i is filter_contour with noise seed derive_seed(noise_seed, i).
std::vector<F0Contour> sample_variations(const GmmnModel& model,
                                         const F0Contour& contour,
                                         const PostfilterConfig& cfg,
                                         int n_takes);

}  // namespace ndtpf
