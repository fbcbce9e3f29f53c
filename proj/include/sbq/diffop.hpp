#pragma once

// Left-invariant operators on holomorphic observables and the symbols
// phi_{1,A} = (A^tr)_C nu_t / nu_t.

#include <cmath>
#include <limits>
#include <vector>

#include "sbq/heat.hpp"
#include "sbq/operator.hpp"
#include "sbq/repr.hpp"

namespace sbq {

/// A applied to a holomorphic observable through the representation matrices. On
/// holomorphic F this equals A_C F, since X_C = (X - iJX)/2 and JX F = i X F.
inline HolomorphicObservable complexify_apply(const LeftInvariantOperator& a, const HolomorphicObservable& F) {
  return left_derivative(a, F);
}

struct FiniteDifferenceOptions {
  /// Step is scale * sqrt(t) * eps^{1/(N+4)} for a word of length N.
  double scale = 1.0;
};

namespace detail {

/// Nested central differences of nu along g e^{s_1 Z_1} ... e^{s_N Z_N} at s = 0,
/// Z_l = X_{k_l} or i X_{k_l}.
inline double mixed_central_difference(const HeatKernelKC& kernel, const GroupElementKC& g,
                                       const std::vector<ComplexAlgebraVector>& dirs, double h) {
  const int n = static_cast<int>(dirs.size());
  double acc = 0.0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    Mat2 m = g.m;
    double sign = 1.0;
    for (int l = 0; l < n; ++l) {
      const double e = (mask >> l) & 1 ? -1.0 : 1.0;
      sign *= e;
      ComplexAlgebraVector z = dirs[l];
      for (auto& c : z.coords) c *= e * h;
      m = m * exp_complex(z).m;
    }
    acc += sign * kernel(GroupElementKC{m});
  }
  return acc / std::pow(2.0 * h, n);
}

}  // namespace detail

/// (A^tr)_C nu_t at g by nested central differences with Richardson extrapolation
/// over steps (h, h/2). Each letter X of A^tr becomes X_C = (X - i JX)/2.
inline cplx apply_transpose_to_nu(const LeftInvariantOperator& a, const HeatKernelKC& kernel, const GroupElementKC& g,
                                  const FiniteDifferenceOptions& opt = {}) {
  if (a.degree() > kMaxOperatorDegree)
    throw parameter_domain_error("apply_transpose_to_nu: operator degree " + std::to_string(a.degree()) +
                                 " exceeds the cap 4");
  const LeftInvariantOperator at = transpose(a);
  const double r = polar_radius(g);
  const double eps = std::numeric_limits<double>::epsilon();
  cplx total = 0.0;
  for (const auto& term : at.terms()) {
    const int n = static_cast<int>(term.word.size());
    if (n == 0) {
      total += term.coeff * kernel(g);
      continue;
    }
    const double h = opt.scale * std::sqrt(kernel.t()) * std::pow(eps, 1.0 / (n + 4));
    if (0.5 * h < 1e-6 * (1.0 + r))
      throw step_underflow_error("apply_transpose_to_nu: difference step " + std::to_string(0.5 * h) +
                                 " below 1e-6 (1 + |Y|)");
    // expand prod_l (X_l - i JX_l)/2 into 2^n real/imaginary direction words
    for (int mask = 0; mask < (1 << n); ++mask) {
      std::vector<ComplexAlgebraVector> dirs(n);
      cplx weight = term.coeff;
      for (int l = 0; l < n; ++l) {
        const int k = term.word[l] - 1;
        if ((mask >> l) & 1) {
          dirs[l].coords[k] = cplx(0.0, 1.0);
          weight *= cplx(0.0, -0.5);
        } else {
          dirs[l].coords[k] = 1.0;
          weight *= 0.5;
        }
      }
      const double dh = detail::mixed_central_difference(kernel, g, dirs, h);
      const double dh2 = detail::mixed_central_difference(kernel, g, dirs, 0.5 * h);
      total += weight * ((4.0 * dh2 - dh) / 3.0);
    }
  }
  return total;
}

inline cplx apply_transpose_to_nu(const LeftInvariantOperator& a, double t, const GroupElementKC& g) {
  return apply_transpose_to_nu(a, HeatKernelKC(t), g);
}

/// phi_{1,A}(g) = (A^tr)_C nu_t(g) / nu_t(g).
inline cplx symbol_phi(const LeftInvariantOperator& a, const HeatKernelKC& kernel, const GroupElementKC& g) {
  return apply_transpose_to_nu(a, kernel, g) / kernel(g);
}

/// Closed form of phi_{1,Delta} = -d/dt log nu_t = 3/(2t) + beta^2/4 - r^2/t^2.
inline double laplacian_symbol_exact(double t, double r, double beta = 1.0) {
  return 1.5 / t + 0.25 * beta * beta - r * r / (t * t);
}

}  // namespace sbq
