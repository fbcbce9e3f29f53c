#pragma once

// Heat kernels: rho_t on K and its continuation to K_C, the K-invariant kernel
// nu_t on K_C, and exact heat flow on band-limited functions.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sbq/quadrature.hpp"
#include "sbq/repr.hpp"

namespace sbq {

/// Relative tail tolerance a rho evaluation must certify.
inline constexpr double kRhoTailTolerance = 1e-8;
/// Largest amplification e^{tau c_j/2} accepted by backward heat flow.
inline constexpr double kBackwardAmplificationGuard = 1e6;
/// Largest series truncation for rho.
inline constexpr int kMaxRhoTwiceSpin = 200;

struct RhoEvaluation {
  cplx value;
  double tail_bound = 0.0;  // absolute bound on the discarded terms
  Spin jmax;
};

/// rho_t = sum_j (2j+1) e^{-t c_j/2} chi_j / Vol(K), truncated at jmax.
/// |chi_j(x e^{iY})| <= (2j+1) e^{j|Y|} gives the tail bound.
class HeatKernelK {
 public:
  HeatKernelK(double t, Spin jmax) : t_(t), jmax_(jmax) {
    if (!(t > 0.0)) throw parameter_domain_error("HeatKernelK: t must be positive");
    if (jmax.twice < 0 || jmax.twice > kMaxRhoTwiceSpin) throw truncation_error("HeatKernelK: jmax out of range");
    coeff_.resize(jmax.twice + 1);
    for (int n = 0; n <= jmax.twice; ++n) {
      const double j = 0.5 * n;
      coeff_[n] = (n + 1) * std::exp(-0.5 * t * j * (j + 1)) / kVolumeK;
    }
  }

  /// Smallest jmax whose tail on |Y| <= max_radius is below tol relative to the
  /// majorant of the retained terms.
  static HeatKernelK certified(double t, double max_radius = 0.0, double tol = 1e-13) {
    if (!(t > 0.0)) throw parameter_domain_error("HeatKernelK: t must be positive");
    for (int n = 0; n <= kMaxRhoTwiceSpin; ++n) {
      HeatKernelK k(t, Spin{n});
      if (k.tail_bound(max_radius) <= tol * std::max(1.0, k.majorant(max_radius))) return k;
    }
    throw truncation_error("HeatKernelK: no truncation below spin 100 certifies radius " + std::to_string(max_radius));
  }

  double t() const { return t_; }
  Spin jmax() const { return jmax_; }
  const std::vector<double>& coefficients() const { return coeff_; }

  /// Bound on sum_{j > jmax} (2j+1)^2 e^{-t c_j/2} e^{j r} / Vol.
  double tail_bound(double r) const {
    double s = 0.0;
    for (int n = jmax_.twice + 1; n <= jmax_.twice + 4000; ++n) {
      const double j = 0.5 * n;
      const double term = (n + 1.0) * (n + 1.0) * std::exp(-0.5 * t_ * j * (j + 1) + j * r) / kVolumeK;
      s += term;
      // terms decay faster than geometrically once the Gaussian dominates
      if (j * t_ > 2.0 * r + 4.0 && term < 1e-30 * std::max(s, 1e-300)) break;
    }
    return s;
  }

  /// sum_{j <= jmax} (2j+1)^2 e^{-t c_j/2} e^{j r} / Vol.
  double majorant(double r) const {
    double s = 0.0;
    for (int n = 0; n <= jmax_.twice; ++n) s += coeff_[n] * (n + 1) * std::exp(0.5 * n * r);
    return s;
  }

  /// Series value from the trace via the Chebyshev recurrence chi_{n+1} = tr chi_n - chi_{n-1}.
  template <class T>
  T from_trace(T tr) const {
    T u0 = T(1), u1 = tr;
    T acc = coeff_[0] * u0;
    if (jmax_.twice >= 1) acc += coeff_[1] * u1;
    for (int n = 2; n <= jmax_.twice; ++n) {
      const T u2 = tr * u1 - u0;
      u0 = u1;
      u1 = u2;
      acc += coeff_[n] * u1;
    }
    return acc;
  }

  /// Value on K from the series (truncated at jmax).
  double series_on_K(const GroupElementK& x) const { return from_trace(x.m.trace().real()); }

  /// Value on K from the image sum: with x conjugate to exp(theta X_3),
  /// rho_t = e^{t/8} sqrt(8 pi/t) (2/t) / (Vol sin(theta/2))
  ///         * sum_m (theta/2 - 2 pi m) e^{-(theta - 4 pi m)^2/(2t)}.
  /// Every term is a Gaussian in the distance to an image of the identity, so the
  /// value stays positive where the character series cancels to rounding noise.
  double on_K(const GroupElementK& x) const {
    const cplx a = x.m(0, 0), b = x.m(1, 0);
    const double c = a.real(), sn = std::sqrt(a.imag() * a.imag() + std::norm(b));
    return of_angle(2.0 * std::atan2(sn, c));
  }

  /// Image-sum value at rotation angle theta in [0, 2 pi].
  double of_angle(double angle) const {
    const double pi = std::numbers::pi;
    const double theta = std::clamp(angle, 1e-7, 2.0 * pi - 1e-7);
    double sum = 0.0;
    const int m_max = 1 + static_cast<int>(std::sqrt(80.0 * t_) / (4.0 * pi));
    for (int m = -m_max; m <= m_max + 1; ++m) {
      const double d = theta - 4.0 * pi * m;
      sum += (0.5 * theta - 2.0 * pi * m) * std::exp(-d * d / (2.0 * t_));
    }
    return std::exp(t_ / 8.0) * std::sqrt(8.0 * pi / t_) * (2.0 / t_) * sum / (kVolumeK * std::sin(0.5 * theta));
  }

  RhoEvaluation evaluate(const GroupElementKC& g) const {
    const double r = polar_radius(g);
    const double tail = tail_bound(r);
    if (tail > kRhoTailTolerance * std::max(1.0, majorant(r)))
      throw truncation_error("rho_t: tail bound " + std::to_string(tail) + " at |Y| = " + std::to_string(r) +
                             " exceeds tolerance for jmax " + std::to_string(jmax_.value()));
    return {from_trace(g.m.trace()), tail, jmax_};
  }

 private:
  double t_;
  Spin jmax_;
  std::vector<double> coeff_;
};

/// (f * h)(g) = int_K f(g x^{-1}) h(x) dx for class functions given by their rotation
/// angle, at a g of angle theta. Writing x = (cos a, sin a n) as a unit quaternion,
/// dx = Vol (2/pi) sin^2 a da du/2 with u = n . n_g, and tr(g x^{-1})/2 depends on (a, u) only.
class ClassConvolution {
 public:
  explicit ClassConvolution(int n_alpha = 160, int n_u = 160)
      : alpha_(gauss_legendre(n_alpha, 0.0, std::numbers::pi)), u_(gauss_legendre(n_u, -1.0, 1.0)) {}

  template <class F, class H>
  double operator()(F&& f, H&& h, double theta) const {
    const double cg = std::cos(0.5 * theta), sg = std::sin(0.5 * theta);
    double acc = 0.0;
    for (std::size_t i = 0; i < alpha_.nodes.size(); ++i) {
      const double a = alpha_.nodes[i];
      const double ca = std::cos(a), sa = std::sin(a);
      double inner = 0.0;
      for (std::size_t k = 0; k < u_.nodes.size(); ++k) {
        const double c = std::clamp(cg * ca + sg * sa * u_.nodes[k], -1.0, 1.0);
        inner += u_.weights[k] * f(2.0 * std::acos(c));
      }
      acc += alpha_.weights[i] * sa * sa * h(2.0 * a) * inner;
    }
    return kVolumeK * acc / std::numbers::pi;
  }

 private:
  GaussRule alpha_, u_;
};

/// Analytically continued heat kernel with an explicit truncation level.
inline RhoEvaluation rho(double t, const GroupElementKC& g, Spin jmax) { return HeatKernelK(t, jmax).evaluate(g); }

/// Same with jmax chosen from the tail bound at the polar radius of g.
inline RhoEvaluation rho(double t, const GroupElementKC& g) {
  return HeatKernelK::certified(t, polar_radius(g)).evaluate(g);
}

/// nu_t(x e^{iY}) = N(t) (beta r / sinh(beta r)) e^{-r^2/t}, r = |Y|. The mass
/// identity int nu_t dg = Vol(K) fixes N(t) = (c_J pi^{3/2} t^{3/2} e^{beta^2 t/4})^{-1}.
class HeatKernelKC {
 public:
  explicit HeatKernelKC(double t, PolarCalibration calib = {}) : t_(t), calib_(calib) {
    if (!(t > 0.0)) throw parameter_domain_error("HeatKernelKC: t must be positive");
    normalization_ = 1.0 / (calib.c_J * std::pow(std::numbers::pi * t, 1.5) * std::exp(0.25 * calib.beta * calib.beta * t));
  }

  /// Kernel with an explicit normalization (used by calibration).
  HeatKernelKC(double t, PolarCalibration calib, double normalization)
      : t_(t), calib_(calib), normalization_(normalization) {}

  double t() const { return t_; }
  const PolarCalibration& calibration() const { return calib_; }
  double normalization() const { return normalization_; }

  double radial(double r) const {
    const double br = calib_.beta * r;
    const double shape = br < 1e-6 ? 1.0 - br * br / 6.0 : br / std::sinh(br);
    return normalization_ * shape * std::exp(-r * r / t_);
  }

  double operator()(const GroupElementKC& g) const { return radial(polar_radius(g)); }

 private:
  double t_;
  PolarCalibration calib_;
  double normalization_;
};

inline double nu(double t, const GroupElementKC& g) { return HeatKernelKC(t)(g); }

enum class FlowDirection { forward, backward };

/// e^{+-tau Delta/2} on coefficients: spin j is scaled by e^{-+tau c_j/2}.
template <class Domain>
SpinSeries<Domain> heat_flow(double tau, const SpinSeries<Domain>& f, FlowDirection dir) {
  if (!(tau >= 0.0)) throw parameter_domain_error("heat_flow: tau must be non-negative");
  const double sign = dir == FlowDirection::forward ? -1.0 : 1.0;
  if (dir == FlowDirection::backward) {
    const double amp = std::exp(0.5 * tau * f.j_max().casimir());
    if (amp > kBackwardAmplificationGuard)
      throw ill_conditioned_error("backward heat flow amplifies spin " + std::to_string(f.j_max().value()) +
                                  " by " + std::to_string(amp) + " (guard 1e6); the observable is not regular enough");
  }
  return f.map_blocks([&](Spin j, const MatrixXc& c) -> MatrixXc { return std::exp(sign * 0.5 * tau * j.casimir()) * c; });
}

/// Calibration record for one t: beta from spin-1/2 unitarity, N(t) from the mass
/// identity (only the product c_J N(t) is identifiable; c_J is held at 1).
struct CalibrationRecord {
  double t = 0.0;
  double beta = 0.0;
  double c_J = 1.0;
  double normalization = 0.0;
  double analytic_normalization = 0.0;
  double mass_relative_residual = 0.0;
  double unitarity_half_residual = 0.0;
  double unitarity_one_residual = 0.0;
  int iterations = 0;
};

namespace detail {

/// max over entry pairs of |<C_t D_a, C_t D_b>_nu - <D_a, D_b>| / (Vol/(2j+1)).
inline double unitarity_residual(double t, Spin j, const QuadratureRuleKC& rule, const HeatKernelKC& kernel) {
  const int n = j.dim();
  const double damp = std::exp(-t * j.casimir());  // |e^{-t c_j/2}|^2
  MatrixXc gram = MatrixXc::Zero(n * n, n * n);
  rule.for_each([&](const GroupElementKC& g, double w) {
    const MatrixXc d = wigner_matrix(j, g.m);
    const Eigen::Map<const Eigen::VectorXcd> v(d.data(), n * n);
    gram.noalias() += (w * kernel(g) * damp) * (v.conjugate() * v.transpose());
  });
  const double scale = kVolumeK / n;
  gram /= scale;
  return (gram - MatrixXc::Identity(n * n, n * n)).cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Calibration rule for time t: K rule exact through spin 1, sphere degree 4.
inline QuadratureRuleKC calibration_rule(double t, double beta = 1.0, int radial_nodes = 80) {
  KCLevels lv;
  lv.k_j_max = Spin{2};
  lv.sphere_degree = 4;
  lv.radial_nodes = radial_nodes;
  return kc_quadrature(default_radial_cutoff(t, 2.0), lv, PolarCalibration{beta, 1.0});
}

/// Pins beta by a secant/bisection search on the spin-1/2 unitarity identity,
/// with N(t) fixed numerically by the mass identity at each trial beta.
inline CalibrationRecord calibrate(double t, double beta_lo = 0.5, double beta_hi = 1.5, double tol = 1e-12) {
  CalibrationRecord rec;
  rec.t = t;
  auto evaluate = [&](double beta, double* norm_out) {
    const QuadratureRuleKC rule = calibration_rule(t, beta);
    const PolarCalibration cal{beta, 1.0};
    const HeatKernelKC shape(t, cal, 1.0);
    const double mass = rule.integrate_radial([&](double r) { return shape.radial(r); });
    const double norm = kVolumeK / mass;
    if (norm_out) *norm_out = norm;
    const HeatKernelKC kernel(t, cal, norm);
    // signed residual on the diagonal entry D^{1/2}_{00}
    const double damp = std::exp(-t * 0.75);
    double acc = 0.0;
    rule.for_each([&](const GroupElementKC& g, double w) { acc += w * kernel(g) * damp * std::norm(g.m(0, 0)); });
    return acc / (kVolumeK / 2.0) - 1.0;
  };
  double a = beta_lo, b = beta_hi;
  double fa = evaluate(a, nullptr), fb = evaluate(b, nullptr);
  if (fa * fb > 0.0) throw parameter_domain_error("calibrate: unitarity residual does not change sign on the beta bracket");
  int it = 0;
  double c = a;
  for (; it < 200 && b - a > tol; ++it) {
    // Illinois-style regula falsi keeps the bracket
    c = (a * fb - b * fa) / (fb - fa);
    if (!(c > a && c < b)) c = 0.5 * (a + b);
    const double fc = evaluate(c, nullptr);
    if (fc == 0.0) {
      a = b = c;
      break;
    }
    if (fa * fc < 0.0) {
      b = c;
      fb = fc;
      fa *= 0.5;
    } else {
      a = c;
      fa = fc;
      fb *= 0.5;
    }
    if (std::abs(fc) < 1e-15) break;
  }
  rec.beta = c;
  rec.iterations = it;
  evaluate(rec.beta, &rec.normalization);
  const PolarCalibration cal{rec.beta, 1.0};
  rec.analytic_normalization = HeatKernelKC(t, cal).normalization();
  const QuadratureRuleKC rule = calibration_rule(t, rec.beta);
  const HeatKernelKC kernel(t, cal, rec.normalization);
  const double mass = rule.integrate([&](const GroupElementKC& g) { return kernel(g); });
  rec.mass_relative_residual = std::abs(mass / kVolumeK - 1.0);
  rec.unitarity_half_residual = detail::unitarity_residual(t, Spin{1}, rule, kernel);
  rec.unitarity_one_residual = detail::unitarity_residual(t, Spin{2}, rule, kernel);
  return rec;
}

}  // namespace sbq
