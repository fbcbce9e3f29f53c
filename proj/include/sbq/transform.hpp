#pragma once

// Segal-Bargmann transforms C_t and B_{s,t} on band-limited functions, their
// inverse, and quadrature oracles on K_C.

#include <cmath>
#include <numbers>

#include "sbq/heat.hpp"

namespace sbq {

enum class TransformKind { C, B };

struct TransformedPair {
  BandLimited f;
  HolomorphicObservable F;
  double t = 0.0;
  double s = 0.0;
  TransformKind which = TransformKind::C;
};

/// C_t f = analytic continuation of e^{t Delta/2} f; spin j scales by e^{-t c_j/2}.
inline HolomorphicObservable transform_C(double t, const BandLimited& f) {
  if (!(t > 0.0)) throw parameter_domain_error("transform_C: t must be positive");
  return heat_flow(t, f, FlowDirection::forward).as<KCDomain>();
}

/// B_{s,t} has the same coefficient action as C_t; s enters only through the
/// range measure mu_{s,t}, which requires s > t/2.
inline HolomorphicObservable transform_B(double s, double t, const BandLimited& f) {
  if (!(t > 0.0) || !(s > 0.5 * t))
    throw parameter_domain_error("transform_B: requires s > t/2 > 0, got s = " + std::to_string(s) +
                                 ", t = " + std::to_string(t));
  return heat_flow(t, f, FlowDirection::forward).as<KCDomain>();
}

inline TransformedPair make_pair_C(double t, const BandLimited& f) {
  return {f, transform_C(t, f), t, t, TransformKind::C};
}

/// C_t^{-1} on coefficients, guarded against amplification above 1e6.
inline BandLimited inverse_C(double t, const HolomorphicObservable& F) {
  if (!(t > 0.0)) throw parameter_domain_error("inverse_C: t must be positive");
  return heat_flow(t, F.as<KDomain>(), FlowDirection::backward);
}

/// int_{K_C} conj(F1) F2 phi nu_t dg over a polar rule.
template <class Symbol>
cplx nu_weighted_inner_product(const HolomorphicObservable& F1, const HolomorphicObservable& F2, Symbol&& phi,
                               const HeatKernelKC& kernel, const QuadratureRuleKC& rule) {
  cplx acc = 0.0;
  rule.for_each([&](const GroupElementKC& g, double w) { acc += (w * kernel(g)) * std::conj(F1(g)) * F2(g) * phi(g); });
  return acc;
}

inline cplx nu_inner_product(const HolomorphicObservable& F1, const HolomorphicObservable& F2,
                             const HeatKernelKC& kernel, const QuadratureRuleKC& rule) {
  return nu_weighted_inner_product(F1, F2, [](const GroupElementKC&) { return 1.0; }, kernel, rule);
}

/// Polar rule adequate for <F1, F2>_{nu_t} with F_i of spin <= j: K rule exact on
/// products through spin j, sphere degree 2(j1 + j2), radius covering e^{(j1+j2) r}.
inline QuadratureRuleKC transform_rule(double t, Spin j, int radial_nodes = 80, double extra_radius = 0.0) {
  KCLevels lv;
  lv.k_j_max = j;
  lv.sphere_degree = std::max(2, 2 * j.twice);
  lv.radial_nodes = radial_nodes;
  return kc_quadrature(default_radial_cutoff(t, j.twice) + extra_radius, lv);
}

struct InversionOracleResult {
  cplx value;
  double radius = 0.0;
  double last_change = 0.0;
  int steps = 0;
};

/// (C_t^* F)(x0) = int conj(rho_t(g x0^{-1})) F(g) nu_t(g) dg on the ball |Y| <= R,
/// in KAK coordinates g = k1 exp(i r X_3) k2, dg = (4 pi / Vol) sinh^2 r dr dk1 dk2.
/// Using the class-function property of rho the k-integrals become
/// int dm conj(rho(m a_r)) int du F(u^{-1} m a_r u x0). R grows from 4 sqrt(t) in
/// unit steps until the value moves by less than move_tol.
inline InversionOracleResult inverse_C_quadrature(double t, const HolomorphicObservable& F, const GroupElementK& x0,
                                                  double move_tol = 1e-6, int radial_nodes = 48, double max_radius = 12.0) {
  const HeatKernelKC kernel(t);
  const Spin jF = F.j_max();
  const QuadratureRuleK inner = haar_quadrature_K(jF);
  // F coefficient blocks with D(x0) folded in: F(h x0) = sum_j sum (C^j D^j(x0)^T)_{ab} D^j(h)_{ab}
  std::vector<std::pair<Spin, MatrixXc>> blocks;
  for (const auto& [tw, c] : F.coeffs()) blocks.emplace_back(Spin{tw}, c * wigner_matrix(Spin{tw}, x0.m).transpose());
  std::vector<std::vector<MatrixXc>> inner_d(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (const auto& u : inner.nodes) inner_d[b].push_back(wigner_matrix(blocks[b].first, u.m));

  auto integral = [&](double R) {
    const HeatKernelK rho_k = HeatKernelK::certified(t, R, 1e-14);
    const int tw_outer = std::min(kMaxRuleTwiceSpin, (rho_k.jmax().twice + jF.twice + 1) / 2);
    const QuadratureRuleK outer = haar_quadrature_K(Spin{tw_outer});
    const GaussRule radial = gauss_legendre(radial_nodes, 0.0, R);
    cplx total = 0.0;
    for (std::size_t ir = 0; ir < radial.nodes.size(); ++ir) {
      const double r = radial.nodes[ir];
      const GroupElementKC a = exp_imaginary(AlgebraVector{{0.0, 0.0, r}});
      const double sh = std::sinh(r);
      cplx acc_r = 0.0;
      for (std::size_t im = 0; im < outer.size(); ++im) {
        const GroupElementKC h = GroupElementKC::from_k(outer.nodes[im]) * a;
        const cplx rho_v = rho_k.from_trace(h.m.trace());
        cplx avg = 0.0;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
          const MatrixXc dh = wigner_matrix(blocks[b].first, h.m);
          for (std::size_t iu = 0; iu < inner.size(); ++iu) {
            const MatrixXc& du = inner_d[b][iu];
            avg += inner.weights[iu] * blocks[b].second.cwiseProduct(du.adjoint() * dh * du).sum();
          }
        }
        acc_r += outer.weights[im] * std::conj(rho_v) * avg;
      }
      total += radial.weights[ir] * sh * sh * kernel.radial(r) * acc_r;
    }
    return 4.0 * std::numbers::pi / kVolumeK * total;
  };

  InversionOracleResult res;
  double R = 4.0 * std::sqrt(t);
  cplx prev = integral(R);
  res.steps = 1;
  while (R < max_radius) {
    R += 1.0;
    const cplx cur = integral(R);
    ++res.steps;
    res.last_change = std::abs(cur - prev);
    prev = cur;
    if (res.last_change < move_tol) break;
  }
  res.value = prev;
  res.radius = R;
  return res;
}

}  // namespace sbq
