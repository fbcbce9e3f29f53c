#pragma once

// Irreducible representations of SU(2), analytically continued to SL(2,C).
//
// Spin j acts on homogeneous polynomials of degree n = 2j in (u, v) through
// u -> a u + c v, v -> b u + d v for g = (a b; c d). The basis is
// e_m = u^{j+m} v^{j-m} / sqrt((j+m)!(j-m)!); row/column index i = j - m, so
// index 0 is m = j. D^{1/2}(g) = g and the basis follows Condon-Shortley.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <string>

#include "sbq/algebra.hpp"
#include "sbq/operator.hpp"
#include "sbq/spin.hpp"

namespace sbq {

using MatrixXc = Eigen::MatrixXcd;

namespace detail {

inline double factorial(int n) {
  static const std::array<double, 171> table = [] {
    std::array<double, 171> t{};
    t[0] = 1.0;
    for (int k = 1; k < 171; ++k) t[k] = t[k - 1] * k;
    return t;
  }();
  if (n < 0 || n > 170) throw index_out_of_range_error("factorial argument out of range");
  return table[n];
}

inline double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

/// Index i = j - m from doubled quantum numbers.
inline int index_of(Spin j, int twice_m) {
  if (std::abs(twice_m) > j.twice || (j.twice - twice_m) % 2 != 0)
    throw index_out_of_range_error("magnetic index m=" + std::to_string(0.5 * twice_m) +
                                   " invalid for j=" + std::to_string(j.value()));
  return (j.twice - twice_m) / 2;
}

}  // namespace detail

/// Full spin-j representation matrix D^j(g), any g in GL(2,C).
inline MatrixXc wigner_matrix(Spin j, const Mat2& g) {
  const int n = j.twice;
  const cplx a = g(0, 0), b = g(0, 1), c = g(1, 0), d = g(1, 1);
  std::vector<cplx> pa(n + 1), pb(n + 1), pc(n + 1), pd(n + 1);
  pa[0] = pb[0] = pc[0] = pd[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    pa[k] = pa[k - 1] * a;
    pb[k] = pb[k - 1] * b;
    pc[k] = pc[k - 1] * c;
    pd[k] = pd[k - 1] * d;
  }
  std::vector<double> sf(n + 1);
  for (int k = 0; k <= n; ++k) sf[k] = std::sqrt(detail::factorial(k));
  MatrixXc out(n + 1, n + 1);
  std::vector<cplx> coef(n + 1);
  for (int col = 0; col <= n; ++col) {
    const int p = n - col, q = col;
    std::fill(coef.begin(), coef.end(), cplx(0.0));
    // (a u + c v)^p (b u + d v)^q, coefficient of u^(k+l)
    for (int k = 0; k <= p; ++k) {
      const cplx ak = detail::binomial(p, k) * pa[k] * pc[p - k];
      for (int l = 0; l <= q; ++l) coef[k + l] += ak * detail::binomial(q, l) * pb[l] * pd[q - l];
    }
    const double norm = 1.0 / (sf[p] * sf[q]);
    for (int i = 0; i <= n; ++i) out(i, col) = coef[n - i] * (sf[n - i] * sf[i] * norm);
  }
  return out;
}

/// D^j_{m m'}(g) with m, m' given as doubled integers.
inline cplx wigner_entry_twice(Spin j, int twice_m, int twice_mp, const GroupElementKC& g) {
  const int r = detail::index_of(j, twice_m), c = detail::index_of(j, twice_mp);
  return wigner_matrix(j, g.m)(r, c);
}

inline cplx wigner_entry(Spin j, double m, double mp, const GroupElementKC& g) {
  return wigner_entry_twice(j, static_cast<int>(std::lround(2.0 * m)), static_cast<int>(std::lround(2.0 * mp)), g);
}

/// Lie-algebra representation d pi^j(X) for X in sl(2,C) (ladder matrices).
inline MatrixXc rep_derivative(Spin j, const Mat2& x) {
  const int n = j.twice;
  MatrixXc out = MatrixXc::Zero(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    const int p = n - i, q = i;
    out(i, i) = double(p) * x(0, 0) + double(q) * x(1, 1);
    if (p > 0) out(i + 1, i) = x(1, 0) * std::sqrt(double(p) * (q + 1));
    if (q > 0) out(i - 1, i) = x(0, 1) * std::sqrt(double(q) * (p + 1));
  }
  return out;
}

/// d pi^j(X_k), k in {1, 2, 3}.
inline MatrixXc generator_matrix(Spin j, int k) { return rep_derivative(j, basis_matrix(k - 1)); }

/// Matrix of a left-invariant operator on spin j: sum_terms c d pi(X_k1) ... d pi(X_kN).
inline MatrixXc operator_matrix(Spin j, const LeftInvariantOperator& op) {
  const int n = j.dim();
  std::array<MatrixXc, 3> gens{generator_matrix(j, 1), generator_matrix(j, 2), generator_matrix(j, 3)};
  MatrixXc out = MatrixXc::Zero(n, n);
  for (const auto& term : op.terms()) {
    MatrixXc w = MatrixXc::Identity(n, n);
    for (int k : term.word) w = w * gens[k - 1];
    out += term.coeff * w;
  }
  return out;
}

/// chi_j(g) = sum_{k=0}^{2j} lambda^{2j-2k} from the eigenvalues lambda, 1/lambda.
/// Near lambda = +-1 (|lambda - 1/lambda| < 1e-6) the polynomial is summed directly.
inline cplx character(Spin j, const GroupElementKC& g) {
  const int n = j.twice;
  const cplx tr = g.m.trace();
  const cplx disc = std::sqrt(tr * tr - 4.0);
  cplx lam = 0.5 * (tr + disc);
  if (std::abs(lam) < 1.0) lam = 0.5 * (tr - disc);
  const cplx diff = lam - 1.0 / lam;
  if (std::abs(diff) < 1e-6) {
    const cplx mu = lam * lam;
    cplx acc = 1.0;
    for (int i = 0; i < n; ++i) acc = acc * mu + 1.0;
    return acc * std::pow(lam, -n);
  }
  return (std::pow(lam, n + 1) - std::pow(lam, -(n + 1))) / diff;
}

/// Same value via the Chebyshev recurrence chi_j = U_{2j}(tr/2).
template <class T>
T character_from_trace(int twice_j, T tr) {
  T u0 = T(1), u1 = tr;
  if (twice_j == 0) return u0;
  for (int k = 2; k <= twice_j; ++k) {
    const T u2 = tr * u1 - u0;
    u0 = u1;
    u1 = u2;
  }
  return u1;
}

/// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>, all arguments doubled (Racah formula).
inline double clebsch_gordan(int j1, int m1, int j2, int m2, int J, int M) {
  if (m1 + m2 != M) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(M) > J) return 0.0;
  if (J < std::abs(j1 - j2) || J > j1 + j2) return 0.0;
  if ((j1 + j2 + J) % 2 != 0 || (j1 + m1) % 2 != 0 || (j2 + m2) % 2 != 0 || (J + M) % 2 != 0) return 0.0;
  using detail::factorial;
  const int a = (j1 + j2 - J) / 2, b = (j1 - j2 + J) / 2, c = (-j1 + j2 + J) / 2;
  const int s = (j1 + j2 + J) / 2 + 1;
  const double pre = std::sqrt((J + 1) * factorial(a) * factorial(b) * factorial(c) / factorial(s)) *
                     std::sqrt(factorial((j1 + m1) / 2) * factorial((j1 - m1) / 2) * factorial((j2 + m2) / 2) *
                               factorial((j2 - m2) / 2) * factorial((J + M) / 2) * factorial((J - M) / 2));
  const int d1 = (j1 - m1) / 2, d2 = (j2 + m2) / 2;
  const int e1 = (J - j2 + m1) / 2, e2 = (J - j1 - m2) / 2;
  const int kmin = std::max({0, -e1, -e2});
  const int kmax = std::min({a, d1, d2});
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double den = factorial(k) * factorial(a - k) * factorial(d1 - k) * factorial(d2 - k) *
                       factorial(e1 + k) * factorial(e2 + k);
    sum += (k % 2 == 0 ? 1.0 : -1.0) / den;
  }
  return pre * sum;
}

/// Finite Peter-Weyl expansion f = sum_j sum_{a,b} C^j_{ab} D^j_{ab}. Tag selects the
/// domain: KDomain (functions on K) or KCDomain (their holomorphic continuation).
template <class Domain>
class SpinSeries {
 public:
  using Coefficients = std::map<int, MatrixXc>;  // keyed by 2j

  SpinSeries() = default;
  explicit SpinSeries(Coefficients c) : coeffs_(std::move(c)) {
    for (const auto& [tw, m] : coeffs_) {
      check_spin_cutoff(Spin{tw}, "SpinSeries");
      if (m.rows() != tw + 1 || m.cols() != tw + 1)
        throw index_out_of_range_error("coefficient block has wrong size for spin " + std::to_string(0.5 * tw));
    }
  }

  static SpinSeries constant(cplx c) { return SpinSeries(Coefficients{{0, MatrixXc::Constant(1, 1, c)}}); }

  /// Single matrix entry D^j with row/column indices (index 0 is m = j).
  static SpinSeries matrix_entry(Spin j, int row, int col, cplx c = 1.0) {
    SpinSeries f;
    f.add_term(j, row, col, c);
    return f;
  }

  static SpinSeries character(Spin j) {
    check_spin_cutoff(j, "character");
    return SpinSeries(Coefficients{{j.twice, MatrixXc::Identity(j.dim(), j.dim())}});
  }

  void add_term(Spin j, int row, int col, cplx c) {
    check_spin_cutoff(j, "add_term");
    if (row < 0 || col < 0 || row > j.twice || col > j.twice)
      throw index_out_of_range_error("matrix-entry index out of range for spin " + std::to_string(j.value()));
    auto it = coeffs_.find(j.twice);
    if (it == coeffs_.end()) it = coeffs_.emplace(j.twice, MatrixXc::Zero(j.dim(), j.dim())).first;
    it->second(row, col) += c;
  }

  const Coefficients& coeffs() const { return coeffs_; }

  MatrixXc coefficient(Spin j) const {
    auto it = coeffs_.find(j.twice);
    return it == coeffs_.end() ? MatrixXc::Zero(j.dim(), j.dim()) : it->second;
  }

  bool empty() const { return coeffs_.empty(); }

  Spin j_max() const { return coeffs_.empty() ? Spin{0} : Spin{coeffs_.rbegin()->first}; }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [tw, c] : coeffs_) m = std::max(m, c.cwiseAbs().maxCoeff());
    return m;
  }

  /// Applies fn(spin, block) -> block to every spin component.
  template <class Fn>
  SpinSeries map_blocks(Fn&& fn) const {
    Coefficients out;
    for (const auto& [tw, c] : coeffs_) out.emplace(tw, fn(Spin{tw}, c));
    return SpinSeries(std::move(out));
  }

  /// Same coefficients viewed on another domain (restriction or continuation).
  template <class Other>
  SpinSeries<Other> as() const {
    return SpinSeries<Other>(coeffs_);
  }

  cplx evaluate(const Mat2& g) const {
    cplx acc = 0.0;
    for (const auto& [tw, c] : coeffs_) acc += c.cwiseProduct(wigner_matrix(Spin{tw}, g)).sum();
    return acc;
  }

  cplx operator()(const GroupElementK& x) const { return evaluate(x.m); }

  cplx operator()(const GroupElementKC& g) const
    requires Domain::holomorphic
  {
    return evaluate(g.m);
  }

  friend SpinSeries operator+(const SpinSeries& a, const SpinSeries& b) {
    Coefficients out = a.coeffs_;
    for (const auto& [tw, c] : b.coeffs_) {
      auto it = out.find(tw);
      if (it == out.end())
        out.emplace(tw, c);
      else
        it->second += c;
    }
    return SpinSeries(std::move(out));
  }

  friend SpinSeries operator*(cplx s, const SpinSeries& a) {
    return a.map_blocks([s](Spin, const MatrixXc& c) -> MatrixXc { return s * c; });
  }

  friend SpinSeries operator-(const SpinSeries& a, const SpinSeries& b) { return a + cplx(-1.0) * b; }

  /// Largest coefficient difference, treating absent blocks as zero.
  friend double max_coefficient_distance(const SpinSeries& a, const SpinSeries& b) {
    return (a - b).max_abs_coefficient();
  }

 private:
  Coefficients coeffs_;
};

struct KDomain {
  static constexpr bool holomorphic = false;
};
struct KCDomain {
  static constexpr bool holomorphic = true;
};

/// Band-limited function on K.
using BandLimited = SpinSeries<KDomain>;
/// Holomorphic function on K_C given by continued matrix entries.
using HolomorphicObservable = SpinSeries<KCDomain>;

/// Exact action of a left-invariant operator: C^j -> C^j M^T with M the operator matrix.
template <class Domain>
SpinSeries<Domain> left_derivative(const LeftInvariantOperator& op, const SpinSeries<Domain>& f) {
  return f.map_blocks([&](Spin j, const MatrixXc& c) -> MatrixXc { return c * operator_matrix(j, op).transpose(); });
}

/// Pointwise product, expanded with Clebsch-Gordan coefficients:
/// D^{j1}_{m1 n1} D^{j2}_{m2 n2} = sum_J <j1 m1; j2 m2|J M><j1 n1; j2 n2|J N> D^J_{M N}.
template <class Domain>
SpinSeries<Domain> multiply(const SpinSeries<Domain>& f, const SpinSeries<Domain>& g) {
  typename SpinSeries<Domain>::Coefficients out;
  for (const auto& [t1, c1] : f.coeffs())
    for (const auto& [t2, c2] : g.coeffs()) {
      if (t1 + t2 > kMaxTwiceSpin) throw spin_cutoff_error("multiply: product spin exceeds cutoff 12");
      for (int tJ = std::abs(t1 - t2); tJ <= t1 + t2; tJ += 2) {
        MatrixXc blk = MatrixXc::Zero(tJ + 1, tJ + 1);
        bool any = false;
        for (int a = 0; a <= t1; ++a)
          for (int b = 0; b <= t1; ++b) {
            if (c1(a, b) == cplx(0.0)) continue;
            const int m1 = t1 - 2 * a, n1 = t1 - 2 * b;
            for (int c = 0; c <= t2; ++c)
              for (int d = 0; d <= t2; ++d) {
                if (c2(c, d) == cplx(0.0)) continue;
                const int m2 = t2 - 2 * c, n2 = t2 - 2 * d;
                const int M = m1 + m2, N = n1 + n2;
                if (std::abs(M) > tJ || std::abs(N) > tJ) continue;
                const double w = clebsch_gordan(t1, m1, t2, m2, tJ, M) * clebsch_gordan(t1, n1, t2, n2, tJ, N);
                if (w == 0.0) continue;
                blk((tJ - M) / 2, (tJ - N) / 2) += w * c1(a, b) * c2(c, d);
                any = true;
              }
          }
        if (!any) continue;
        auto it = out.find(tJ);
        if (it == out.end())
          out.emplace(tJ, blk);
        else
          it->second += blk;
      }
    }
  return SpinSeries<Domain>(std::move(out));
}

/// <f1, f2>_{L^2(K)} = sum_j Vol(K)/(2j+1) sum_{ab} conj(C1^j_{ab}) C2^j_{ab}.
template <class Domain>
cplx inner_product_K(const SpinSeries<Domain>& f1, const SpinSeries<Domain>& f2) {
  cplx acc = 0.0;
  for (const auto& [tw, c1] : f1.coeffs()) {
    auto it = f2.coeffs().find(tw);
    if (it == f2.coeffs().end()) continue;
    acc += kVolumeK / (tw + 1) * (c1.conjugate().cwiseProduct(it->second)).sum();
  }
  return acc;
}

template <class Domain>
double norm_squared_K(const SpinSeries<Domain>& f) {
  return inner_product_K(f, f).real();
}

}  // namespace sbq
