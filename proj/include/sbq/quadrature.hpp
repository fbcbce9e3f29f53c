#pragma once

// Quadrature on K = SU(2) (Euler-angle product rule) and on K_C = SL(2,C) in
// polar coordinates g = x exp(i r omega), dg = c_J J(r) dr d omega dx.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "sbq/algebra.hpp"
#include "sbq/spin.hpp"

namespace sbq {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

// Golub-Welsch on a symmetric tridiagonal Jacobi matrix with zero diagonal.
inline GaussRule golub_welsch(const std::vector<double>& offdiag, double mu0) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) jac(k, k + 1) = jac(k + 1, k) = offdiag[k];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    rule.weights[i] = mu0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }
  return rule;
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1], Newton-polished.
inline GaussRule gauss_legendre(int n) {
  if (n < 1) throw parameter_domain_error("gauss_legendre: n must be positive");
  if (n == 1) return {{0.0}, {2.0}};
  std::vector<double> off(n - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  GaussRule rule = detail::golub_welsch(off, 2.0);
  for (int i = 0; i < n; ++i) {
    double x = rule.nodes[i], dp = 1.0;
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      x -= p1 / dp;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

/// Gauss-Legendre on [a, b].
inline GaussRule gauss_legendre(int n, double a, double b) {
  GaussRule r = gauss_legendre(n);
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    r.nodes[i] = m + h * r.nodes[i];
    r.weights[i] *= h;
  }
  return r;
}

/// n-point Gauss-Hermite rule for weight exp(-x^2).
inline GaussRule gauss_hermite(int n) {
  if (n < 1) throw parameter_domain_error("gauss_hermite: n must be positive");
  if (n == 1) return {{0.0}, {std::sqrt(std::numbers::pi)}};
  std::vector<double> off(n - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(0.5 * k);
  GaussRule rule = detail::golub_welsch(off, std::sqrt(std::numbers::pi));
  // Newton polish with orthonormal Hermite functions (no overflow).
  for (int i = 0; i < n; ++i) {
    double x = rule.nodes[i], dpn = 1.0;
    for (int it = 0; it < 3; ++it) {
      double pm1 = 0.0, p = std::pow(std::numbers::pi, -0.25);
      for (int k = 1; k <= n; ++k) {
        const double pk = std::sqrt(2.0 / k) * x * p - std::sqrt((k - 1.0) / k) * pm1;
        pm1 = p;
        p = pk;
      }
      dpn = std::sqrt(2.0 * n) * pm1;
      x -= p / dpn;
    }
    rule.nodes[i] = x;
  }
  // w_i = 1 / sum_k p_k(x_i)^2 for the orthonormal polynomials p_k
  for (int i = 0; i < n; ++i) {
    const double x = rule.nodes[i];
    double pm1 = 0.0, p = std::pow(std::numbers::pi, -0.25), s = p * p;
    for (int k = 1; k < n; ++k) {
      const double pk = std::sqrt(2.0 / k) * x * p - std::sqrt((k - 1.0) / k) * pm1;
      pm1 = p;
      p = pk;
      s += p * p;
    }
    rule.weights[i] = 1.0 / s;
  }
  return rule;
}

/// Product rule for Haar measure dx on SU(2), total mass Vol(K).
struct QuadratureRuleK {
  std::vector<GroupElementK> nodes;
  std::vector<double> weights;
  Spin j_max;

  std::size_t size() const { return nodes.size(); }

  double total_mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  template <class F>
  auto integrate(F&& f) const {
    using R = decltype(f(nodes[0]));
    R acc{};
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

/// Largest spin accepted by the Haar rule. Band-limited pipelines stop at
/// kMaxTwiceSpin; convolutions of truncated heat kernels need more.
inline constexpr int kMaxRuleTwiceSpin = 48;

/// Euler angles x = e^{aX3} e^{bX2} e^{cX3}: a, c uniform on [0, 4pi) (double
/// cover, so half weight), cos b Gauss-Legendre. Exact on single entries up to
/// spin 2 j_max, hence on products of two entries of spin <= j_max.
inline QuadratureRuleK haar_quadrature_K(Spin j_max) {
  if (j_max.twice < 0 || j_max.twice > kMaxRuleTwiceSpin)
    throw spin_cutoff_error("haar_quadrature_K: j_max outside [0, 24]");
  const int n_ang = 2 * j_max.twice + 1;
  const int n_beta = j_max.twice / 2 + 1;
  const GaussRule gl = gauss_legendre(n_beta);
  QuadratureRuleK rule;
  rule.j_max = j_max;
  rule.nodes.reserve(static_cast<std::size_t>(n_ang) * n_ang * n_beta);
  const double step = 4.0 * std::numbers::pi / n_ang;
  for (int ia = 0; ia < n_ang; ++ia)
    for (int ib = 0; ib < n_beta; ++ib)
      for (int ic = 0; ic < n_ang; ++ic) {
        rule.nodes.push_back(euler_zyz(ia * step, std::acos(gl.nodes[ib]), ic * step));
        rule.weights.push_back(kVolumeK * 0.5 * gl.weights[ib] / (static_cast<double>(n_ang) * n_ang));
      }
  return rule;
}

/// Unit-sphere rule: Gauss-Legendre in cos(theta) x uniform in phi, total 4 pi.
struct SphereRule {
  std::vector<std::array<double, 3>> directions;
  std::vector<double> weights;
};

inline SphereRule sphere_rule(int degree) {
  const int n_theta = std::max(1, (degree + 2) / 2);
  const int n_phi = std::max(1, degree + 1);
  const GaussRule gl = gauss_legendre(n_theta);
  SphereRule s;
  for (int i = 0; i < n_theta; ++i) {
    const double ct = gl.nodes[i], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int k = 0; k < n_phi; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / n_phi;
      s.directions.push_back({st * std::cos(phi), st * std::sin(phi), ct});
      s.weights.push_back(gl.weights[i] * 2.0 * std::numbers::pi / n_phi);
    }
  }
  return s;
}

/// Constants of the polar Jacobian J(r) = c_J (sinh(beta r)/beta)^2 and of the
/// K-invariant heat kernel. beta = 1, c_J = 1 for the metric -2 tr(XY): K_C/K is
/// hyperbolic 3-space of curvature -1. The calibrate pipeline re-derives them.
struct PolarCalibration {
  double beta = 1.0;
  double c_J = 1.0;

  double jacobian(double r) const {
    const double s = beta * r < 1e-8 ? r : std::sinh(beta * r) / beta;
    return c_J * s * s;
  }
};

struct KCLevels {
  Spin k_j_max = Spin::from_twice(3);
  int sphere_degree = 4;
  int radial_nodes = 96;
};

/// Tensor rule on the ball |Y| <= R of K_C: K-rule x sphere rule x Gauss radial.
struct QuadratureRuleKC {
  QuadratureRuleK k_rule;
  SphereRule sphere;
  GaussRule radial;  // on [0, R], Jacobian folded in separately
  double R = 0.0;
  PolarCalibration calib;

  std::size_t size() const { return k_rule.size() * sphere.weights.size() * radial.nodes.size(); }

  /// Calls f(g, weight) for every node.
  template <class F>
  void for_each(F&& f) const {
    for (std::size_t ir = 0; ir < radial.nodes.size(); ++ir) {
      const double r = radial.nodes[ir];
      const double wr = radial.weights[ir] * calib.jacobian(r);
      for (std::size_t is = 0; is < sphere.weights.size(); ++is) {
        const auto& d = sphere.directions[is];
        const GroupElementKC a = exp_imaginary(AlgebraVector{{r * d[0], r * d[1], r * d[2]}});
        const double ws = wr * sphere.weights[is];
        for (std::size_t ik = 0; ik < k_rule.size(); ++ik)
          f(GroupElementKC{k_rule.nodes[ik].m * a.m}, ws * k_rule.weights[ik]);
      }
    }
  }

  template <class F>
  auto integrate(F&& f) const {
    using R = decltype(f(GroupElementKC{}));
    R acc{};
    for_each([&](const GroupElementKC& g, double w) { acc += w * f(g); });
    return acc;
  }

  /// Integral of a function of |Y| only: K and sphere factors collapse to Vol(K) 4 pi.
  template <class F>
  auto integrate_radial(F&& f) const {
    using R = decltype(f(0.0));
    R acc{};
    for (std::size_t ir = 0; ir < radial.nodes.size(); ++ir)
      acc += radial.weights[ir] * calib.jacobian(radial.nodes[ir]) * f(radial.nodes[ir]);
    return kVolumeK * 4.0 * std::numbers::pi * acc;
  }
};

/// Fraction of the nu_t radial mass, density ~ r sinh(beta r) e^{-r^2/t}, beyond R.
inline double nu_radial_tail_fraction(double t, double R, double beta = 1.0) {
  const double c = 0.5 * beta * t, st = std::sqrt(t), sp = std::sqrt(std::numbers::pi * t);
  // int_R^inf r e^{-(r-c)^2/t} dr, the common factor e^{c^2/t} cancels in the ratio
  auto shifted = [&](double cc) {
    return 0.5 * t * std::exp(-(R - cc) * (R - cc) / t) + 0.5 * cc * sp * std::erfc((R - cc) / st);
  };
  const double tail = 0.5 * (shifted(c) - shifted(-c));
  const double total = 0.5 * c * sp;  // half the full-line integral of r e^{-(r-c)^2/t}
  return tail / total;
}

/// Cutoff covering an integrand that grows like e^{growth r} against nu_t.
inline double default_radial_cutoff(double t, double growth = 0.0) {
  return std::max({4.0 * std::sqrt(t), 3.0, 0.5 * (growth + 1.0) * t + 8.0 * std::sqrt(t)});
}

struct KCRuleReport {
  bool cutoff_too_small = false;
  double tail_fraction = 0.0;
};

inline QuadratureRuleKC kc_quadrature(double R, const KCLevels& levels, const PolarCalibration& calib = {}) {
  if (!(R > 0.0)) throw parameter_domain_error("kc_quadrature: R must be positive");
  QuadratureRuleKC rule;
  rule.k_rule = haar_quadrature_K(levels.k_j_max);
  rule.sphere = sphere_rule(levels.sphere_degree);
  rule.radial = gauss_legendre(levels.radial_nodes, 0.0, R);
  rule.R = R;
  rule.calib = calib;
  return rule;
}

/// CutoffTooSmall diagnostic: the nu_t tail beyond R exceeds 1e-10 of its mass.
inline KCRuleReport check_cutoff(const QuadratureRuleKC& rule, double t) {
  KCRuleReport rep;
  rep.tail_fraction = nu_radial_tail_fraction(t, rule.R, rule.calib.beta);
  rep.cutoff_too_small = rep.tail_fraction > 1e-10;
  return rep;
}

}  // namespace sbq
