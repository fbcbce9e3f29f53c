#pragma once

// One-dimensional Euclidean Segal-Bargmann transform on Hermite expansions and the
// flat-case Toeplitz identity, checked deterministically and through the same
// weak Monte Carlo architecture as the SU(2) estimators.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "sbq/parallel.hpp"
#include "sbq/quadrature.hpp"
#include "sbq/sde.hpp"
#include "sbq/stats.hpp"
#include "sbq/toeplitz.hpp"

namespace sbq {

inline constexpr int kMaxHermiteDegree = 80;
inline constexpr int kMaxEuclidPotentialDegree = 6;

/// f(x) = sum_n c_n psi_n(x), psi_n = (2^n n! sqrt(pi))^{-1/2} H_n(x) e^{-x^2/2}.
class HermiteExpansion {
 public:
  HermiteExpansion() = default;
  explicit HermiteExpansion(std::vector<cplx> c) : c_(std::move(c)) {
    if (static_cast<int>(c_.size()) - 1 > kMaxHermiteDegree)
      throw parameter_domain_error("HermiteExpansion: degree " + std::to_string(c_.size() - 1) + " exceeds cap " +
                                   std::to_string(kMaxHermiteDegree));
  }

  static HermiteExpansion basis(int n, cplx c = 1.0) {
    std::vector<cplx> v(n + 1, cplx(0.0));
    v[n] = c;
    return HermiteExpansion(std::move(v));
  }

  const std::vector<cplx>& coefficients() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }

  /// Polynomial part p with f(x) = p(x) e^{-x^2/2}; holomorphic in z.
  template <class T>
  std::complex<double> polynomial(T z) const {
    using C = std::complex<double>;
    if (c_.empty()) return 0.0;
    const C zc(z);
    C hm1 = 0.0, h = std::pow(std::numbers::pi, -0.25);
    C acc = c_[0] * h;
    for (int n = 0; n + 1 < static_cast<int>(c_.size()); ++n) {
      const C next = std::sqrt(2.0 / (n + 1)) * zc * h - std::sqrt(double(n) / (n + 1)) * hm1;
      hm1 = h;
      h = next;
      acc += c_[n + 1] * h;
    }
    return acc;
  }

  cplx operator()(double x) const { return polynomial(x) * std::exp(-0.5 * x * x); }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& c : c_) s += std::norm(c);
    return s;
  }

 private:
  std::vector<cplx> c_;
};

inline cplx inner_product_L2(const HermiteExpansion& f1, const HermiteExpansion& f2) {
  cplx s = 0.0;
  for (std::size_t n = 0; n < std::min(f1.coefficients().size(), f2.coefficients().size()); ++n)
    s += std::conj(f1.coefficients()[n]) * f2.coefficients()[n];
  return s;
}

/// C_t f(z) = int (2 pi t)^{-1/2} e^{-(z - y)^2/(2t)} f(y) dy. With tau = 1 + t,
/// completing the square gives (pi tau)^{-1/2} e^{-z^2/(2 tau)} int e^{-u^2} p(z/tau + u sqrt(2t/tau)) du,
/// evaluated exactly by Gauss-Hermite.
class EuclidTransform {
 public:
  EuclidTransform(double t, HermiteExpansion f) : t_(t), tau_(1.0 + t), f_(std::move(f)) {
    if (!(t > 0.0)) throw parameter_domain_error("euclid_transform: t must be positive");
    rule_ = gauss_hermite(f_.degree() / 2 + 1);
  }

  cplx operator()(cplx z) const { return reduced(z) * std::exp(-z * z / (2.0 * tau_)); }

  /// C_t f(z) e^{z^2/(2 tau)}, an entire function of polynomial growth.
  cplx reduced(cplx z) const {
    const double s = std::sqrt(2.0 * t_ / tau_);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < rule_.nodes.size(); ++i) acc += rule_.weights[i] * f_.polynomial(z / tau_ + s * rule_.nodes[i]);
    return acc / std::sqrt(std::numbers::pi * tau_);
  }

  double t() const { return t_; }
  const HermiteExpansion& source() const { return f_; }

 private:
  double t_, tau_;
  HermiteExpansion f_;
  GaussRule rule_;
};

inline EuclidTransform euclid_transform(double t, const HermiteExpansion& f) { return EuclidTransform(t, f); }

/// Flat nu_t(x + iy) = (pi t)^{-1/2} e^{-y^2/t}.
inline double euclid_nu(double t, cplx z) { return std::exp(-z.imag() * z.imag() / t) / std::sqrt(std::numbers::pi * t); }

/// Polynomial in x with coefficients in increasing degree.
struct Polynomial {
  std::vector<double> coeffs;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  Polynomial derivative() const {
    Polynomial d;
    for (std::size_t k = 1; k < coeffs.size(); ++k) d.coeffs.push_back(k * coeffs[k]);
    return d;
  }
};

/// e^{tau d^2/dx^2 / 2} p = sum_k (tau/2)^k p^{(2k)} / k!, a finite sum on polynomials.
inline Polynomial heat_flow(double tau, const Polynomial& p) {
  Polynomial out{std::vector<double>(std::max<std::size_t>(p.coeffs.size(), 1), 0.0)};
  Polynomial d = p;
  double factor = 1.0;
  for (int k = 0; !d.coeffs.empty(); ++k) {
    for (std::size_t i = 0; i < d.coeffs.size(); ++i) out.coeffs[i] += factor * d.coeffs[i];
    d = d.derivative().derivative();
    factor *= 0.5 * tau / (k + 1);
  }
  return out;
}

/// int conj(F1) Vt(Re z) F2 nu_t d^2 z. conj(F1) F2 nu_t carries e^{-x^2/tau - y^2/(t tau)},
/// so both directions are Gauss-Hermite rules applied to the reduced transforms.
inline cplx euclid_nu_inner_product(const EuclidTransform& F1, const EuclidTransform& F2, const Polynomial& Vt) {
  const double t = F1.t(), tau = 1.0 + t;
  const int deg = F1.source().degree() + F2.source().degree() + std::max(0, Vt.degree());
  const GaussRule rule = gauss_hermite(deg / 2 + 2);
  const double sx = std::sqrt(tau), sy = std::sqrt(t * tau);
  cplx acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double x = sx * rule.nodes[i], y = sy * rule.nodes[k];
      const cplx z(x, y);
      acc += rule.weights[i] * rule.weights[k] * std::conj(F1.reduced(z)) * Vt(x) * F2.reduced(z);
    }
  return acc * sx * sy / std::sqrt(std::numbers::pi * t);
}

/// <f1, V f2>_{L^2(R)} by Gauss-Hermite on p1, p2 and V.
inline cplx euclid_schrodinger_entry(const Polynomial& V, const HermiteExpansion& f1, const HermiteExpansion& f2) {
  const GaussRule rule = gauss_hermite((f1.degree() + f2.degree() + std::max(0, V.degree())) / 2 + 2);
  cplx acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i];
    acc += rule.weights[i] * std::conj(f1.polynomial(x)) * V(x) * f2.polynomial(x);
  }
  return acc;
}

/// int Vt(x) E_b[conj(F1(x + ib)) F2(x + ib)] dx, b ~ N(0, t/2): the flat analogue of the
/// subelliptic endpoint estimator. The x integral uses the exact rule for fixed b.
inline ToeplitzEstimate euclid_toeplitz_mc(double t, const Polynomial& Vt, const HermiteExpansion& f1,
                                           const HermiteExpansion& f2, const MonteCarloSettings& mc) {
  const EuclidTransform F1(t, f1), F2(t, f2);
  const double tau = 1.0 + t, sx = std::sqrt(tau);
  const GaussRule rule = gauss_hermite((f1.degree() + f2.degree() + std::max(0, Vt.degree())) / 2 + 2);
  std::vector<cplx> values = parallel_map<cplx>(mc.n_paths, mc.workers, [&](std::size_t i) {
    PathRng rng(derive_seed(mc.master_seed, static_cast<std::uint64_t>(Stream::imag_part), i));
    const double b = std::sqrt(0.5 * t) * rng.normal();
    cplx acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double x = sx * rule.nodes[k];
      const cplx z(x, b);
      acc += rule.weights[k] * std::conj(F1.reduced(z)) * Vt(x) * F2.reduced(z);
    }
    return acc * sx * std::exp(b * b / tau);
  });
  ToeplitzEstimate est;
  est.n_paths = mc.n_paths;
  est.n_steps = 1;
  est.master_seed = mc.master_seed;
  est.seed_streams = {static_cast<std::uint64_t>(Stream::imag_part)};
  const BlockSummary s = block_summary(values, values.size(), mc.n_blocks);
  est.value = s.mean;
  est.stderr_re = s.stderr_re;
  est.stderr_im = s.stderr_im;
  est.block_means = s.block_means;
  est.diagnostic = convergence_diagnostic(values, mc.n_blocks);
  if (!est.diagnostic.ok)
    throw statistical_failure_error("euclid_toeplitz_mc: standard error ratio " + std::to_string(est.diagnostic.ratio));
  return est;
}

struct EuclidToeplitzReport {
  cplx schrodinger;       // <f1, V f2>, V = e^{t Delta/4} Vt
  cplx segal_bargmann;    // int conj(F1) Vt(Re z) F2 nu_t
  double deterministic_error = 0.0;
  ToeplitzEstimate mc;
  bool deterministic_pass = false;
  bool mc_pass = false;
};

inline EuclidToeplitzReport euclid_toeplitz_check(double t, const Polynomial& Vt, const HermiteExpansion& f1,
                                                  const HermiteExpansion& f2, const MonteCarloSettings& mc,
                                                  double tol = 1e-8) {
  if (Vt.degree() > kMaxEuclidPotentialDegree)
    throw parameter_domain_error("euclid_toeplitz_check: potential degree exceeds 6");
  EuclidToeplitzReport r;
  r.schrodinger = euclid_schrodinger_entry(heat_flow(0.5 * t, Vt), f1, f2);
  r.segal_bargmann = euclid_nu_inner_product(EuclidTransform(t, f1), EuclidTransform(t, f2), Vt);
  r.deterministic_error = std::abs(r.schrodinger - r.segal_bargmann);
  r.deterministic_pass = r.deterministic_error <= tol * std::max(1.0, std::abs(r.schrodinger));
  r.mc = euclid_toeplitz_mc(t, Vt, f1, f2, mc);
  r.mc_pass = std::abs(r.mc.value.real() - r.schrodinger.real()) <= 3.0 * r.mc.stderr_re + 1e-12 &&
              std::abs(r.mc.value.imag() - r.schrodinger.imag()) <= 3.0 * r.mc.stderr_im + 1e-12;
  return r;
}

}  // namespace sbq
