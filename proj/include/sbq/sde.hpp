#pragma once

// Brownian paths in su(2) and geometric Euler integration of dg = g o dZ on
// K and K_C (Ito maps theta and theta_C), evaluated at time 1.

#include <cstdint>
#include <random>
#include <vector>

#include "sbq/algebra.hpp"
#include "sbq/parallel.hpp"

namespace sbq {

/// Steps between re-projections onto the group.
inline constexpr int kReprojectPeriod = 64;

/// Normal generator for one path; mt19937_64 seeded by a derived 64-bit seed.
class PathRng {
 public:
  explicit PathRng(std::uint64_t seed) : eng_(seed) {}
  double normal() { return dist_(eng_); }
  AlgebraVector increment(double sd) { return AlgebraVector{{sd * normal(), sd * normal(), sd * normal()}}; }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

struct BrownianPath {
  int n_steps = 0;
  double dt = 0.0;
  double variance = 0.0;  // per-coordinate variance of the endpoint B_1
  std::uint64_t seed = 0;
  std::vector<AlgebraVector> increments;

  AlgebraVector endpoint() const {
    AlgebraVector s;
    for (const auto& d : increments) s = s + d;
    return s;
  }
};

/// n_steps increments on [0, 1], each coordinate N(0, sigma2 dt).
inline BrownianPath sample_path(double sigma2, int n_steps, std::uint64_t seed) {
  if (!(sigma2 >= 0.0)) throw parameter_domain_error("sample_path: variance must be non-negative");
  if (n_steps < 1) throw parameter_domain_error("sample_path: n_steps must be positive");
  BrownianPath p;
  p.n_steps = n_steps;
  p.dt = 1.0 / n_steps;
  p.variance = sigma2;
  p.seed = seed;
  p.increments.reserve(n_steps);
  PathRng rng(seed);
  const double sd = std::sqrt(sigma2 * p.dt);
  for (int k = 0; k < n_steps; ++k) p.increments.push_back(rng.increment(sd));
  return p;
}

/// Sum of consecutive increments: the same path at n_steps / factor.
inline BrownianPath coarsen(const BrownianPath& p, int factor) {
  if (factor < 1 || p.n_steps % factor != 0) throw parameter_domain_error("coarsen: factor must divide n_steps");
  BrownianPath q = p;
  q.n_steps = p.n_steps / factor;
  q.dt = 1.0 / q.n_steps;
  q.increments.assign(q.n_steps, AlgebraVector{});
  for (int k = 0; k < p.n_steps; ++k) q.increments[k / factor] = q.increments[k / factor] + p.increments[k];
  return q;
}

template <class G>
struct EndpointSample {
  G value;
  cplx weight = 1.0;
  std::uint64_t seed = 0;
  int n_steps = 0;
};

/// theta(A)_1: x_{k+1} = x_k exp(dA_k), re-projected onto SU(2) every 64 steps.
inline EndpointSample<GroupElementK> ito_map_K(const BrownianPath& a, int reproject_every = kReprojectPeriod) {
  GroupElementK x = GroupElementK::identity();
  for (int k = 0; k < a.n_steps; ++k) {
    x = x * exp_algebra(a.increments[k]);
    if ((k + 1) % reproject_every == 0) x = project_to_su2(x.m);
  }
  return {project_to_su2(x.m), 1.0, a.seed, a.n_steps};
}

/// theta_C(A + iB)_1: g_{k+1} = g_k exp(dA_k + i dB_k), det-normalized every 64 steps.
inline EndpointSample<GroupElementKC> ito_map_KC(const BrownianPath& a, const BrownianPath& b,
                                                 int reproject_every = kReprojectPeriod) {
  if (a.n_steps != b.n_steps) throw parameter_domain_error("ito_map_KC: paths differ in n_steps");
  GroupElementKC g = GroupElementKC::identity();
  for (int k = 0; k < a.n_steps; ++k) {
    g = g * exp_complex(ComplexAlgebraVector::from_parts(a.increments[k], b.increments[k]));
    if ((k + 1) % reproject_every == 0) g = normalize_det(g.m);
  }
  return {normalize_det(g.m), 1.0, a.seed, a.n_steps};
}

/// dB'_k = Ad_{theta(A)_k} dB_k with theta(A)_k the state before step k.
inline BrownianPath rotated_path(const BrownianPath& b, const BrownianPath& a) {
  if (a.n_steps != b.n_steps) throw parameter_domain_error("rotated_path: paths differ in n_steps");
  BrownianPath out = b;
  GroupElementK x = GroupElementK::identity();
  for (int k = 0; k < a.n_steps; ++k) {
    out.increments[k] = ad_action(x, b.increments[k]);
    x = x * exp_algebra(a.increments[k]);
    if ((k + 1) % kReprojectPeriod == 0) x = project_to_su2(x.m);
  }
  return out;
}

/// || theta_C(A + iB)_1 - theta_C(i B^{theta(A)})_1 theta(A)_1 ||_F at the paths' resolution.
inline double pathwise_identity_residual(const BrownianPath& a, const BrownianPath& b) {
  const BrownianPath zero_a{a.n_steps, a.dt, 0.0, a.seed, std::vector<AlgebraVector>(a.n_steps)};
  const auto lhs = ito_map_KC(a, b);
  const auto rhs = ito_map_KC(zero_a, rotated_path(b, a));
  const auto x = ito_map_K(a);
  return frobenius_distance(lhs.value.m, (rhs.value * GroupElementKC::from_k(x.value)).m);
}

/// Stream identifiers for derive_seed.
enum class Stream : std::uint64_t { real_part = 1, imag_part = 2 };

/// Streaming endpoint of theta_C(A + iB)_1 with A variance var_a, B variance var_b,
/// identical to ito_map_KC on the stored paths from the same seeds.
inline GroupElementKC sample_endpoint_KC(double var_a, double var_b, int n_steps, std::uint64_t master, std::uint64_t index) {
  PathRng ra(derive_seed(master, static_cast<std::uint64_t>(Stream::real_part), index));
  PathRng rb(derive_seed(master, static_cast<std::uint64_t>(Stream::imag_part), index));
  const double dt = 1.0 / n_steps;
  const double sa = std::sqrt(var_a * dt), sb = std::sqrt(var_b * dt);
  GroupElementKC g = GroupElementKC::identity();
  for (int k = 0; k < n_steps; ++k) {
    const AlgebraVector da = ra.increment(sa);
    const AlgebraVector db = rb.increment(sb);
    g = g * exp_complex(ComplexAlgebraVector::from_parts(da, db));
    if ((k + 1) % kReprojectPeriod == 0) g = normalize_det(g.m);
  }
  return normalize_det(g.m);
}

/// Streaming endpoint of theta(A)_1 with A variance var_a.
inline GroupElementK sample_endpoint_K(double var_a, int n_steps, std::uint64_t master, std::uint64_t index) {
  PathRng ra(derive_seed(master, static_cast<std::uint64_t>(Stream::real_part), index));
  const double sa = std::sqrt(var_a * (1.0 / n_steps));
  GroupElementK x = GroupElementK::identity();
  for (int k = 0; k < n_steps; ++k) {
    x = x * exp_algebra(ra.increment(sa));
    if ((k + 1) % kReprojectPeriod == 0) x = project_to_su2(x.m);
  }
  return project_to_su2(x.m);
}

/// Stored paths matching sample_endpoint_KC for the same (master, index).
inline std::pair<BrownianPath, BrownianPath> sample_path_pair(double var_a, double var_b, int n_steps,
                                                              std::uint64_t master, std::uint64_t index) {
  return {sample_path(var_a, n_steps, derive_seed(master, static_cast<std::uint64_t>(Stream::real_part), index)),
          sample_path(var_b, n_steps, derive_seed(master, static_cast<std::uint64_t>(Stream::imag_part), index))};
}

}  // namespace sbq
