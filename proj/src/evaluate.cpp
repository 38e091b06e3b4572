// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ndtpf/evaluate.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "ndtpf/error.hpp"

namespace ndtpf {

double eval_mmd(const SampleSet& a, const SampleSet& b, double sigma) {
  if (a.rows() == 0 || b.rows() == 0)
    throw InvalidArgument("MMD of an empty sample set");
  return gram(a, a, sigma).mean() + gram(b, b, sigma).mean() -
         2.0 * gram(a, b, sigma).mean();
}

VariationStats eval_variation(std::span<const F0Contour> takes) {
  if (takes.size() < 2) throw InvalidArgument("need at least two takes");
  const std::size_t len = takes.front().size();
  for (const auto& t : takes)
    if (t.size() != len) throw InvalidArgument("takes differ in length");
  VariationStats st;
  st.per_frame_std.resize(len);
  const auto n = static_cast<double>(takes.size());
  for (std::size_t f = 0; f < len; ++f) {
    double mean = 0.0;
    double k = 0.0;
    for (const auto& t : takes) mean += (t[f] - mean) / ++k;
    double var = 0.0;
    for (const auto& t : takes) var += (t[f] - mean) * (t[f] - mean);
    st.per_frame_std[f] = std::sqrt(var / n);
    st.mean_std += st.per_frame_std[f];
    st.max_std = std::max(st.max_std, st.per_frame_std[f]);
    for (const auto& t : takes)
      st.max_deviation_from_first =
          std::max(st.max_deviation_from_first, std::abs(t[f] - takes[0][f]));
  }
  st.mean_std /= static_cast<double>(len);
  return st;
}

SampleSet ms_samples(std::span<const F0Contour> contours,
                     const StftConfig& stft,
                     const std::vector<std::size_t>& bins) {
  std::vector<ModulationSpectrum> spectra;
  std::size_t rows = 0;
  for (const auto& c : contours) {
    spectra.push_back(extract_ms(remove_mean(c), stft, 0));
    rows += spectra.back().segments();
  }
  SampleSet out(static_cast<Eigen::Index>(rows),
                static_cast<Eigen::Index>(bins.size()));
  Eigen::Index r = 0;
  for (const auto& ms : spectra)
    for (std::size_t k = 0; k < ms.segments(); ++k, ++r)
      for (std::size_t s = 0; s < bins.size(); ++s) {
        if (bins[s] >= ms.bins()) throw InvalidArgument("bin out of range");
        out(r, static_cast<Eigen::Index>(s)) = ms.log_power(k, bins[s]);
      }
  return out;
}

double reconstruction_error(std::span<const F0Contour> contours,
                            const StftConfig& stft) {
  double worst = 0.0;
  for (const auto& c : contours) {
    const F0Contour back = reconstruct(extract_ms(remove_mean(c), stft, 0));
    for (std::size_t t = 0; t < c.size(); ++t)
      worst = std::max(worst, std::abs(back[t] - c[t]));
  }
  return worst;
}

void EvalReport::write(std::ostream& out) const {
  const auto old = out.precision();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "natural_contours " << natural_count << '\n'
      << "takes " << take_count << '\n'
      << "mmd_squared " << mmd_squared << '\n'
      << "std_mean " << mean_std << '\n'
      << "std_max " << max_std << '\n'
      << "max_deviation_from_first " << max_deviation << '\n'
      << "reconstruction_error " << reconstruction_error << '\n';
  out.precision(old);
}

}  // namespace ndtpf
