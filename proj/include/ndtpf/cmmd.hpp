// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace ndtpf {

// Sample sets are row-major in spirit: one row per segment, one column per
// MS dimension.
using SampleSet = Eigen::MatrixXd;

enum class CmmdMode { kExact, kRff };

struct CmmdConfig {
  double lambda = 0.01;
  double sigma_in = 100.0;
  double sigma_out = 1.0;
  int rff_dim = 1024;
  CmmdMode mode = CmmdMode::kExact;

  void validate() const;
};

// exp(-||a - b||^2 / sigma^2)
double gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b,
                       double sigma);

// Entry (i, j) = k(A.row(i), B.row(j)).
Eigen::MatrixXd gram(const SampleSet& a, const SampleSet& b, double sigma);

// Random Fourier features for the Gaussian kernel above:
// w ~ N(0, (2 / sigma^2) I), b ~ U[0, 2 pi), phi(x) = sqrt(2 / D) cos(Wx + b).
class RffBasis {
 public:
  RffBasis(int input_dim, double sigma, int features, std::uint64_t seed);

  int features() const noexcept { return static_cast<int>(weights_.rows()); }
  int input_dim() const noexcept { return static_cast<int>(weights_.cols()); }
  // Rows of the result are phi(x_i).
  Eigen::MatrixXd map(const SampleSet& x) const;

 private:
  Eigen::MatrixXd weights_;  // D x d
  Eigen::VectorXd phases_;   // D
};

// L = (H + lambda I)^-1 H (H + lambda I)^-1 with H the condition Gram.
Eigen::MatrixXd cmmd_weights_exact(const SampleSet& cond,
                                   const CmmdConfig& cfg);

// Same with H ~= Phi^T Phi. With B = (lambda I_D + Phi Phi^T)^-1 Phi, the
// Woodbury identity collapses L to B^T B.
Eigen::MatrixXd cmmd_weights_rff(const SampleSet& cond, const CmmdConfig& cfg,
                                 const RffBasis& basis);

// (1/T'^2) {tr(L K_nn) + tr(L K_ff) - 2 tr(L K_nf)}
double cmmd_loss(const Eigen::MatrixXd& weights, const SampleSet& natural,
                 const SampleSet& filtered, double sigma_out);

// d loss / d filtered, one row per segment. `weights` is constant in the
// filtered samples.
SampleSet cmmd_grad(const Eigen::MatrixXd& weights, const SampleSet& natural,
                    const SampleSet& filtered, double sigma_out);

double cmmd_exact(const SampleSet& cond, const SampleSet& natural,
                  const SampleSet& filtered, const CmmdConfig& cfg);
double cmmd_rff(const SampleSet& cond, const SampleSet& natural,
                const SampleSet& filtered, const CmmdConfig& cfg,
                const RffBasis& basis);

}  // namespace ndtpf
