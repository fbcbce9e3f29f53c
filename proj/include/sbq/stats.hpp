#pragma once

// Reductions, block standard errors and goodness-of-fit statistics.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "sbq/errors.hpp"

namespace sbq {

/// Pairwise summation over a fixed order.
template <class T>
T pairwise_sum(const T* x, std::size_t n) {
  if (n == 0) return T{};
  if (n <= 16) {
    T s = x[0];
    for (std::size_t i = 1; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

template <class T>
T pairwise_sum(const std::vector<T>& x) {
  return pairwise_sum(x.data(), x.size());
}

struct BlockSummary {
  std::complex<double> mean;
  double stderr_re = 0.0;
  double stderr_im = 0.0;
  std::vector<std::complex<double>> block_means;

  double stderr() const { return std::hypot(stderr_re, stderr_im); }
};

/// Batch means over n_blocks equal contiguous blocks of the first n values.
inline BlockSummary block_summary(const std::vector<std::complex<double>>& values, std::size_t n, std::size_t n_blocks) {
  if (n_blocks < 2 || n < n_blocks) throw statistical_failure_error("block_summary: need at least 2 non-empty blocks");
  BlockSummary s;
  s.block_means.resize(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const std::size_t lo = b * n / n_blocks, hi = (b + 1) * n / n_blocks;
    s.block_means[b] = pairwise_sum(values.data() + lo, hi - lo) / double(hi - lo);
  }
  s.mean = pairwise_sum(values.data(), n) / double(n);
  double vr = 0.0, vi = 0.0;
  for (const auto& m : s.block_means) {
    vr += (m.real() - s.mean.real()) * (m.real() - s.mean.real());
    vi += (m.imag() - s.mean.imag()) * (m.imag() - s.mean.imag());
  }
  const double dof = double(n_blocks) * double(n_blocks - 1);
  s.stderr_re = std::sqrt(vr / dof);
  s.stderr_im = std::sqrt(vi / dof);
  return s;
}

struct ConvergenceDiagnostic {
  std::vector<std::size_t> n;
  std::vector<double> stderr;
  double ratio = 0.0;  // stderr(n/16) / stderr(n), ideally 4
  bool ok = true;
};

/// Standard errors on prefixes n/16, n/8, n/4, n/2, n must shrink like n^{-1/2}:
/// the end-to-end ratio has to lie within a factor `tolerance` of 4.
inline ConvergenceDiagnostic convergence_diagnostic(const std::vector<std::complex<double>>& values, std::size_t n_blocks,
                                                    double tolerance = 1.5) {
  ConvergenceDiagnostic d;
  const std::size_t n = values.size();
  for (int k = 4; k >= 0; --k) {
    const std::size_t m = n >> k;
    d.n.push_back(m);
    d.stderr.push_back(m >= n_blocks ? block_summary(values, m, n_blocks).stderr() : 0.0);
  }
  const double first = d.stderr.front(), last = d.stderr.back();
  if (last == 0.0 && first == 0.0) return d;  // deterministic integrand
  const double scale = std::max(1e-300, std::abs(first) + std::abs(last));
  if (last <= 1e-14 * scale) {
    d.ok = false;
    return d;
  }
  d.ratio = first / last;
  d.ok = d.ratio >= 4.0 / tolerance && d.ratio <= 4.0 * tolerance;
  return d;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Kolmogorov distribution P(K <= x) = 1 - 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 x^2}.
inline double kolmogorov_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x < 0.2) return 0.0;  // below 1e-50
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return 1.0 - 2.0 * s;
}

/// Critical value c with P(K > c) = alpha, by bisection.
inline double kolmogorov_quantile(double alpha) {
  double lo = 0.2, hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - kolmogorov_cdf(mid) > alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct KSResult {
  double statistic = 0.0;   // sup |F_n - F|
  double critical = 0.0;    // alpha-level critical value for D
  bool pass = false;
};

/// One-sample Kolmogorov-Smirnov test with Stephens' finite-sample scaling.
inline KSResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf, double alpha = 0.01) {
  std::sort(sample.begin(), sample.end());
  const double n = double(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - double(i) / n, double(i + 1) / n - f});
  }
  KSResult r;
  r.statistic = d;
  const double sn = std::sqrt(n);
  r.critical = kolmogorov_quantile(alpha) / (sn + 0.12 + 0.11 / sn);
  r.pass = d <= r.critical;
  return r;
}

}  // namespace sbq
