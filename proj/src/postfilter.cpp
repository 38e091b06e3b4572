// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ndtpf/postfilter.hpp"

#include "ndtpf/error.hpp"
#include "ndtpf/rng.hpp"

namespace ndtpf {

Eigen::MatrixXd segment_noise(std::uint64_t seed, std::size_t segments,
                              int noise_dim) {
  return noise_table(seed, segments, noise_dim);
}

F0Contour filter_contour(const GmmnModel& model, const F0Contour& contour,
                         const PostfilterConfig& cfg) {
  if (!cfg.noise_seed)
    throw InvalidArgument("post-filter requires an explicit noise seed");
  const auto& norm = cfg.normalizer;
  const auto nbins = norm.size();
  if (nbins == 0) {
    const F0Contour out = reconstruct(extract_ms(remove_mean(contour), cfg.stft, 0));
    return contour.with_values(out.values());
  }
  if (static_cast<int>(nbins) != model.shape().cond_dim)
    throw InvalidArgument("model condition dimension " +
                          std::to_string(model.shape().cond_dim) +
                          " does not match " + std::to_string(nbins) +
                          " filtered bins");
  for (const auto b : norm.bins())
    if (b >= static_cast<std::size_t>(cfg.stft.bins()))
      throw InvalidArgument("filtered bin " + std::to_string(b) +
                            " outside 0..M");

  const MeanRemovedContour mrc = remove_mean(contour);
  ModulationSpectrum ms = extract_ms(mrc, cfg.stft, 0);
  const std::size_t segments = ms.segments();
  Eigen::MatrixXd cond(static_cast<Eigen::Index>(segments),
                       static_cast<Eigen::Index>(nbins));
  for (std::size_t k = 0; k < segments; ++k)
    for (std::size_t s = 0; s < nbins; ++s)
      cond(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(s)) =
          norm.apply(s, ms.log_power(k, norm.bins()[s]));
  const Eigen::MatrixXd noise =
      segment_noise(*cfg.noise_seed, segments, model.shape().noise_dim);
  const Eigen::MatrixXd filtered = model.forward(cond, noise);
  for (std::size_t k = 0; k < segments; ++k)
    for (std::size_t s = 0; s < nbins; ++s)
      ms.log_power(k, norm.bins()[s]) = norm.invert(
          s, filtered(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(s)));
  F0Contour out = reconstruct(ms);
  return contour.with_values(out.values());
}

std::vector<F0Contour> sample_variations(const GmmnModel& model,
                                         const F0Contour& contour,
                                         const PostfilterConfig& cfg,
                                         int n_takes) {
  if (n_takes < 1) throw InvalidArgument("n_takes must be >= 1");
  if (!cfg.noise_seed)
    throw InvalidArgument("post-filter requires an explicit noise seed");
  std::vector<F0Contour> takes;
  takes.reserve(static_cast<std::size_t>(n_takes));
  for (int i = 0; i < n_takes; ++i) {
    PostfilterConfig take_cfg = cfg;
    take_cfg.noise_seed =
        derive_seed(*cfg.noise_seed, static_cast<std::uint64_t>(i));
    takes.push_back(filter_contour(model, contour, take_cfg));
  }
  return takes;
}

}  // namespace ndtpf
