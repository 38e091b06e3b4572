// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ndtpf/cmmd.hpp"

#include <cmath>
#include <numbers>

#include "ndtpf/error.hpp"
#include "ndtpf/rng.hpp"

namespace ndtpf {

void CmmdConfig::validate() const {
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  if (!(sigma_in > 0.0) || !(sigma_out > 0.0))
    throw InvalidArgument("kernel bandwidths must be > 0");
  if (rff_dim < 1) throw InvalidArgument("rff_dim must be >= 1");
}

double gaussian_kernel(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b,
                       double sigma) {
  if (a.size() != b.size()) throw InvalidArgument("kernel dimension mismatch");
  return std::exp(-(a - b).squaredNorm() / (sigma * sigma));
}

Eigen::MatrixXd gram(const SampleSet& a, const SampleSet& b, double sigma) {
  if (a.rows() == 0 || b.rows() == 0)
    throw InvalidArgument("gram of an empty sample set");
  if (a.cols() != b.cols()) throw InvalidArgument("gram dimension mismatch");
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be > 0");
  const double inv = 1.0 / (sigma * sigma);
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      k(i, j) = std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv);
  return k;
}

RffBasis::RffBasis(int input_dim, double sigma, int features,
                   std::uint64_t seed)
    : weights_(features, input_dim), phases_(features) {
  if (input_dim < 1 || features < 1 || !(sigma > 0.0))
    throw InvalidArgument("bad random feature basis parameters");
  Rng rng(seed);
  const double scale = std::sqrt(2.0) / sigma;
  for (int r = 0; r < features; ++r) {
    for (int c = 0; c < input_dim; ++c) weights_(r, c) = scale * rng.normal();
    phases_(r) = 2.0 * std::numbers::pi * rng.uniform();
  }
}

Eigen::MatrixXd RffBasis::map(const SampleSet& x) const {
  if (x.cols() != weights_.cols())
    throw InvalidArgument("random feature input dimension mismatch");
  Eigen::MatrixXd proj = x * weights_.transpose();
  proj.rowwise() += phases_.transpose();
  return std::sqrt(2.0 / static_cast<double>(features())) *
         proj.array().cos().matrix();
}

namespace {

void check_sets(const SampleSet& cond, const SampleSet& natural,
                const SampleSet& filtered) {
  if (cond.rows() == 0) throw InvalidArgument("CMMD needs T' >= 1");
  if (natural.rows() != cond.rows() || filtered.rows() != cond.rows())
    throw InvalidArgument("CMMD sets differ in segment count");
  if (natural.cols() != filtered.cols())
    throw InvalidArgument("natural and filtered dimensions differ");
}

}  // namespace

Eigen::MatrixXd cmmd_weights_exact(const SampleSet& cond,
                                   const CmmdConfig& cfg) {
  cfg.validate();
  const Eigen::MatrixXd h = gram(cond, cond, cfg.sigma_in);
  Eigen::MatrixXd reg = h;
  reg.diagonal().array() += cfg.lambda;
  const Eigen::LDLT<Eigen::MatrixXd> solver(reg);
  if (solver.info() != Eigen::Success)
    throw NumericError("factorization of H + lambda I failed");
  const Eigen::MatrixXd left = solver.solve(h);              // H~^-1 H
  Eigen::MatrixXd l = solver.solve(left.transpose()).transpose();
  return 0.5 * (l + l.transpose());
}

Eigen::MatrixXd cmmd_weights_rff(const SampleSet& cond, const CmmdConfig& cfg,
                                 const RffBasis& basis) {
  cfg.validate();
  const Eigen::MatrixXd phi = basis.map(cond).transpose();  // D x T'
  Eigen::MatrixXd inner = phi * phi.transpose();
  inner.diagonal().array() += cfg.lambda;
  const Eigen::LLT<Eigen::MatrixXd> solver(inner);
  if (solver.info() != Eigen::Success)
    throw NumericError("factorization of lambda I + Phi Phi^T failed");
  const Eigen::MatrixXd b = solver.solve(phi);
  return b.transpose() * b;
}

double cmmd_loss(const Eigen::MatrixXd& weights, const SampleSet& natural,
                 const SampleSet& filtered, double sigma_out) {
  check_sets(natural, natural, filtered);
  const auto t = static_cast<double>(natural.rows());
  const Eigen::MatrixXd k_nn = gram(natural, natural, sigma_out);
  const Eigen::MatrixXd k_ff = gram(filtered, filtered, sigma_out);
  const Eigen::MatrixXd k_nf = gram(natural, filtered, sigma_out);
  // tr(L K) = sum_ij L_ij K_ji
  const double t_nn = (weights.array() * k_nn.transpose().array()).sum();
  const double t_ff = (weights.array() * k_ff.transpose().array()).sum();
  const double t_nf = (weights.array() * k_nf.transpose().array()).sum();
  return (t_nn + t_ff - 2.0 * t_nf) / (t * t);
}

SampleSet cmmd_grad(const Eigen::MatrixXd& weights, const SampleSet& natural,
                    const SampleSet& filtered, double sigma_out) {
  check_sets(natural, natural, filtered);
  const Eigen::Index n = filtered.rows();
  const auto t = static_cast<double>(n);
  const Eigen::MatrixXd k_ff = gram(filtered, filtered, sigma_out);
  const Eigen::MatrixXd k_nf = gram(natural, filtered, sigma_out);
  const double scale = 4.0 / (sigma_out * sigma_out * t * t);
  // grad_j = scale * [sum_i L_ij k(f_i, f_j) (f_i - f_j)
  //                   - sum_i L_ij k(n_i, f_j) (n_i - f_j)]
  SampleSet grad = SampleSet::Zero(n, filtered.cols());
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = weights(i, j) * k_ff(i, j);
      const double d = weights(i, j) * k_nf(i, j);
      grad.row(j) += c * (filtered.row(i) - filtered.row(j)) -
                     d * (natural.row(i) - filtered.row(j));
    }
    grad.row(j) *= scale;
  }
  return grad;
}

double cmmd_exact(const SampleSet& cond, const SampleSet& natural,
                  const SampleSet& filtered, const CmmdConfig& cfg) {
  check_sets(cond, natural, filtered);
  return cmmd_loss(cmmd_weights_exact(cond, cfg), natural, filtered,
                   cfg.sigma_out);
}

double cmmd_rff(const SampleSet& cond, const SampleSet& natural,
                const SampleSet& filtered, const CmmdConfig& cfg,
                const RffBasis& basis) {
  check_sets(cond, natural, filtered);
  return cmmd_loss(cmmd_weights_rff(cond, cfg, basis), natural, filtered,
                   cfg.sigma_out);
}

}  // namespace ndtpf
