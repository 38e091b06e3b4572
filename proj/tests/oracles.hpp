// Copyright 2026 The ndtpf Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Independent reference implementations. Nothing here calls into the
// library's numeric code; plain loops over std::vector only.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat zeros(std::size_t r, std::size_t c) {
  return Mat(r, std::vector<double>(c, 0.0));
}

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat out = zeros(a.size(), b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j)
        out[i][j] += a[i][k] * b[k][j];
  return out;
}

// Gauss-Jordan with partial pivoting.
inline Mat inverse(Mat a) {
  const std::size_t n = a.size();
  Mat inv = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) throw std::runtime_error("singular");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double d = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

inline double kernel(const std::vector<double>& a, const std::vector<double>& b,
                     double sigma) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-d2 / (sigma * sigma));
}

inline Mat gram(const Mat& a, const Mat& b, double sigma) {
  Mat g = zeros(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) g[i][j] = kernel(a[i], b[j], sigma);
  return g;
}

inline double trace_product(const Mat& a, const Mat& b) {
  double t = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k) t += a[i][k] * b[k][i];
  return t;
}

// Conditional MMD with explicit inverses.
inline double cmmd(const Mat& cond, const Mat& nat, const Mat& filt,
                   double lambda, double sigma_in, double sigma_out) {
  const std::size_t n = cond.size();
  Mat h = gram(cond, cond, sigma_in);
  Mat ht = h;
  for (std::size_t i = 0; i < n; ++i) ht[i][i] += lambda;
  const Mat hi = inverse(ht);
  const Mat l = matmul(matmul(hi, h), hi);
  const double t = static_cast<double>(n);
  return (trace_product(l, gram(nat, nat, sigma_out)) +
          trace_product(l, gram(filt, filt, sigma_out)) -
          2.0 * trace_product(l, gram(nat, filt, sigma_out))) /
         (t * t);
}

// Biased MMD by double loops.
inline double mmd(const Mat& a, const Mat& b, double sigma) {
  double aa = 0.0, bb = 0.0, ab = 0.0;
  for (const auto& x : a)
    for (const auto& y : a) aa += kernel(x, y, sigma);
  for (const auto& x : b)
    for (const auto& y : b) bb += kernel(x, y, sigma);
  for (const auto& x : a)
    for (const auto& y : b) ab += kernel(x, y, sigma);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  return aa / (na * na) + bb / (nb * nb) - 2.0 * ab / (na * nb);
}

// Direct DFT of a real sequence, bins 0..n/2.
inline std::vector<std::complex<double>> dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * t) /
                         static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

inline std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  return w;
}

// Frequency (Hz) of the largest DFT magnitude, zero-padded to `fft_len`.
inline double peak_frequency(const std::vector<double>& x, double sr,
                             std::size_t fft_len) {
  std::vector<double> padded(fft_len, 0.0);
  for (std::size_t i = 0; i < x.size() && i < fft_len; ++i) padded[i] = x[i];
  const auto spec = dft(padded);
  std::size_t best = 1;
  for (std::size_t k = 1; k < spec.size(); ++k)
    if (std::abs(spec[k]) > std::abs(spec[best])) best = k;
  return static_cast<double>(best) * sr / static_cast<double>(fft_len);
}

// argmax over lag in [0, max_lag] of sum_t x[t] * y[t - lag].
inline long xcorr_peak(const std::vector<double>& x, const std::vector<double>& y,
                       long max_lag) {
  long best = 0;
  double best_v = -1e300;
  for (long lag = 0; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (long t = lag; t < static_cast<long>(x.size()); ++t) {
      const long s = t - lag;
      if (s < static_cast<long>(y.size())) acc += x[t] * y[s];
    }
    if (acc > best_v) {
      best_v = acc;
      best = lag;
    }
  }
  return best;
}

}  // namespace oracle
