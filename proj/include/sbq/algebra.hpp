#pragma once

// Lie group / Lie algebra arithmetic for K = SU(2) and K_C = SL(2,C).
//
// Conventions: X_k = -(i/2) sigma_k, inner product <X,Y> = -2 tr(XY), so the
// X_k are orthonormal, [X_1,X_2] = X_3 (cyclic), and the Casimir sum_k X_k^2
// acts on spin j by -j(j+1).

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "sbq/errors.hpp"

namespace sbq {

using cplx = std::complex<double>;

/// Riemannian volume of SU(2) under <X,Y> = -2 tr(XY): the group is a round
/// 3-sphere of radius 2 (exp(s X_3) closes at s = 4 pi), volume 2 pi^2 2^3.
inline constexpr double kVolumeK = 16.0 * std::numbers::pi * std::numbers::pi;

/// Dense 2x2 complex matrix, row-major (a b; c d).
struct Mat2 {
  std::array<cplx, 4> e{};

  constexpr cplx& operator()(int r, int c) { return e[2 * r + c]; }
  constexpr const cplx& operator()(int r, int c) const { return e[2 * r + c]; }

  static constexpr Mat2 identity() { return Mat2{{cplx(1), cplx(0), cplx(0), cplx(1)}}; }
  static constexpr Mat2 zero() { return Mat2{}; }

  cplx det() const { return e[0] * e[3] - e[1] * e[2]; }
  cplx trace() const { return e[0] + e[3]; }

  Mat2 adjoint() const {
    return Mat2{{std::conj(e[0]), std::conj(e[2]), std::conj(e[1]), std::conj(e[3])}};
  }

  /// Inverse of a determinant-one matrix.
  Mat2 inverse_sl2() const { return Mat2{{e[3], -e[1], -e[2], e[0]}}; }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& z : e) s += std::norm(z);
    return std::sqrt(s);
  }

  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    return Mat2{{x.e[0] * y.e[0] + x.e[1] * y.e[2], x.e[0] * y.e[1] + x.e[1] * y.e[3],
                 x.e[2] * y.e[0] + x.e[3] * y.e[2], x.e[2] * y.e[1] + x.e[3] * y.e[3]}};
  }
  friend Mat2 operator+(const Mat2& x, const Mat2& y) {
    Mat2 r;
    for (int i = 0; i < 4; ++i) r.e[i] = x.e[i] + y.e[i];
    return r;
  }
  friend Mat2 operator-(const Mat2& x, const Mat2& y) {
    Mat2 r;
    for (int i = 0; i < 4; ++i) r.e[i] = x.e[i] - y.e[i];
    return r;
  }
  friend Mat2 operator*(cplx s, const Mat2& x) {
    Mat2 r;
    for (int i = 0; i < 4; ++i) r.e[i] = s * x.e[i];
    return r;
  }
};

inline double frobenius_distance(const Mat2& a, const Mat2& b) { return (a - b).frobenius_norm(); }

/// Basis X_k = -(i/2) sigma_k, k = 0,1,2 (i.e. X_1, X_2, X_3).
inline Mat2 basis_matrix(int k) {
  const cplx mi2(0.0, -0.5);
  switch (k) {
    case 0: return Mat2{{0.0, mi2, mi2, 0.0}};
    case 1: return Mat2{{0.0, cplx(-0.5, 0.0), cplx(0.5, 0.0), 0.0}};
    case 2: return Mat2{{mi2, 0.0, 0.0, -mi2}};
    default: throw index_out_of_range_error("basis index must be 0, 1 or 2");
  }
}

/// Element of su(2) in the orthonormal basis {X_1, X_2, X_3}.
struct AlgebraVector {
  std::array<double, 3> coords{};

  double dot(const AlgebraVector& o) const {
    return coords[0] * o.coords[0] + coords[1] * o.coords[1] + coords[2] * o.coords[2];
  }
  double norm() const { return std::sqrt(dot(*this)); }

  /// sum_k y_k X_k as a traceless anti-Hermitian matrix.
  Mat2 matrix() const {
    const double y1 = coords[0], y2 = coords[1], y3 = coords[2];
    return Mat2{{cplx(0.0, -0.5 * y3), cplx(-0.5 * y2, -0.5 * y1), cplx(0.5 * y2, -0.5 * y1),
                 cplx(0.0, 0.5 * y3)}};
  }

  /// Coordinates of a traceless anti-Hermitian matrix: y_k = <X_k, M> = i tr(sigma_k M).
  static AlgebraVector from_matrix(const Mat2& m) {
    const cplx i(0.0, 1.0);
    const cplx s1 = m(0, 1) + m(1, 0);
    const cplx s2 = cplx(0.0, 1.0) * (m(0, 1) - m(1, 0));  // tr(sigma_2 M) = i(M01 - M10)
    const cplx s3 = m(0, 0) - m(1, 1);
    return AlgebraVector{{(i * s1).real(), (i * s2).real(), (i * s3).real()}};
  }

  friend AlgebraVector operator+(const AlgebraVector& a, const AlgebraVector& b) {
    return {{a.coords[0] + b.coords[0], a.coords[1] + b.coords[1], a.coords[2] + b.coords[2]}};
  }
  friend AlgebraVector operator-(const AlgebraVector& a, const AlgebraVector& b) {
    return {{a.coords[0] - b.coords[0], a.coords[1] - b.coords[1], a.coords[2] - b.coords[2]}};
  }
  friend AlgebraVector operator*(double s, const AlgebraVector& a) {
    return {{s * a.coords[0], s * a.coords[1], s * a.coords[2]}};
  }
};

/// Inner product <X,Y> = -2 tr(XY) evaluated on matrices.
inline double killing_inner(const Mat2& x, const Mat2& y) { return (-2.0 * (x * y).trace()).real(); }

/// Element Z = sum_k z_k X_k of sl(2,C) = su(2) + i su(2).
struct ComplexAlgebraVector {
  std::array<cplx, 3> coords{};

  static ComplexAlgebraVector from_parts(const AlgebraVector& re, const AlgebraVector& im) {
    return {{cplx(re.coords[0], im.coords[0]), cplx(re.coords[1], im.coords[1]),
             cplx(re.coords[2], im.coords[2])}};
  }

  Mat2 matrix() const {
    const cplx mi2(0.0, -0.5);
    const cplx z1 = coords[0], z2 = coords[1], z3 = coords[2];
    return Mat2{{mi2 * z3, mi2 * z1 - 0.5 * z2, mi2 * z1 + 0.5 * z2, -mi2 * z3}};
  }
};

/// x in SU(2).
struct GroupElementK {
  Mat2 m = Mat2::identity();

  static GroupElementK identity() { return {}; }

  /// Validating constructor: unitary and det 1 within tol.
  static GroupElementK from_matrix(const Mat2& m, double tol = 1e-12) {
    if (frobenius_distance(m.adjoint() * m, Mat2::identity()) > tol || std::abs(m.det() - 1.0) > tol)
      throw non_invertible_error("matrix is not in SU(2)");
    return GroupElementK{m};
  }

  GroupElementK inverse() const { return GroupElementK{m.adjoint()}; }
  friend GroupElementK operator*(const GroupElementK& a, const GroupElementK& b) {
    return GroupElementK{a.m * b.m};
  }
};

/// g in SL(2,C).
struct GroupElementKC {
  Mat2 m = Mat2::identity();

  static GroupElementKC identity() { return {}; }

  static GroupElementKC from_matrix(const Mat2& m, double tol = 1e-10) {
    if (std::abs(m.det() - 1.0) > tol) throw non_invertible_error("matrix does not have determinant 1");
    return GroupElementKC{m};
  }
  static GroupElementKC from_k(const GroupElementK& x) { return GroupElementKC{x.m}; }

  GroupElementKC inverse() const { return GroupElementKC{m.inverse_sl2()}; }
  friend GroupElementKC operator*(const GroupElementKC& a, const GroupElementKC& b) {
    return GroupElementKC{a.m * b.m};
  }
};

namespace detail {

/// cos(sqrt(w)) and sin(sqrt(w))/sqrt(w), entire in w.
inline std::pair<cplx, cplx> cos_sinc_sqrt(cplx w) {
  if (std::abs(w) < 0.05) {
    // Taylor to w^6; remainder below 1e-17 on this disc.
    const cplx w2 = w * w, w3 = w2 * w, w4 = w2 * w2, w5 = w4 * w, w6 = w3 * w3;
    const cplx c = 1.0 - w / 2.0 + w2 / 24.0 - w3 / 720.0 + w4 / 40320.0 - w5 / 3628800.0 + w6 / 479001600.0;
    const cplx s = 1.0 - w / 6.0 + w2 / 120.0 - w3 / 5040.0 + w4 / 362880.0 - w5 / 39916800.0 +
                   w6 / 6227020800.0;
    return {c, s};
  }
  const cplx x = std::sqrt(w);
  return {std::cos(x), std::sin(x) / x};
}

}  // namespace detail

/// exp(scale * Y) for Y in su(2), closed form (Y^2 = -|Y|^2/4 I).
inline GroupElementK exp_algebra(const AlgebraVector& y, double scale = 1.0) {
  const AlgebraVector sy = scale * y;
  const double w = 0.25 * sy.dot(sy);
  const auto [c, s] = detail::cos_sinc_sqrt(cplx(w, 0.0));
  Mat2 r = s * sy.matrix();
  r.e[0] += c;
  r.e[3] += c;
  return GroupElementK{r};
}

/// exp(Z) for Z in sl(2,C); Z^2 = -(z.z)/4 I with z.z the complex bilinear square.
inline GroupElementKC exp_complex(const ComplexAlgebraVector& z) {
  const cplx w = 0.25 * (z.coords[0] * z.coords[0] + z.coords[1] * z.coords[1] + z.coords[2] * z.coords[2]);
  const auto [c, s] = detail::cos_sinc_sqrt(w);
  Mat2 r = s * z.matrix();
  r.e[0] += c;
  r.e[3] += c;
  return GroupElementKC{r};
}

/// exp(iY) for Y in su(2): a positive Hermitian matrix.
inline GroupElementKC exp_imaginary(const AlgebraVector& y) {
  return exp_complex(ComplexAlgebraVector::from_parts(AlgebraVector{}, y));
}

/// Polar radius |Y| of g = x e^{iY}, from the traceless part of g^dagger g = e^{2iY}.
inline double polar_radius(const GroupElementKC& g) {
  const Mat2 p = g.m.adjoint() * g.m;
  const double v3 = 0.5 * (p(0, 0) - p(1, 1)).real();
  const double sh = std::sqrt(std::norm(p(1, 0)) + v3 * v3);
  return std::asinh(sh);
}

struct PolarDecomposition {
  GroupElementK x;
  AlgebraVector y;
};

/// g = x exp(iY). g^dagger g = exp(2iY) = cosh r + sinh r (yhat . sigma), whose
/// positive logarithm is unique, so no branch restriction is needed.
inline PolarDecomposition polar_decompose(const GroupElementKC& g) {
  const cplx d = g.m.det();
  if (!std::isfinite(std::abs(d)) || std::abs(d - 1.0) > 1e-8 * std::max(1.0, g.m.frobenius_norm() * g.m.frobenius_norm()))
    throw non_invertible_error("polar_decompose: matrix is singular or not in SL(2,C)");
  const Mat2 p = g.m.adjoint() * g.m;
  // sinh(r) * yhat
  const std::array<double, 3> v{p(1, 0).real(), p(1, 0).imag(), 0.5 * (p(0, 0) - p(1, 1)).real()};
  const double sh = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  const double scale = sh < 1e-300 ? 1.0 : std::asinh(sh) / sh;
  // iY = sum_k y_k sigma_k / 2, so 2iY = r yhat.sigma with y = r yhat.
  AlgebraVector y{{scale * v[0], scale * v[1], scale * v[2]}};
  const GroupElementKC inv_pos = exp_imaginary(-1.0 * y);
  Mat2 x = g.m * inv_pos.m;
  // Restore exact SU(2) form against rounding.
  const cplx a = 0.5 * (x(0, 0) + std::conj(x(1, 1)));
  const cplx b = 0.5 * (x(1, 0) - std::conj(x(0, 1)));
  const double n = std::sqrt(std::norm(a) + std::norm(b));
  x = Mat2{{a / n, -std::conj(b) / n, b / n, std::conj(a) / n}};
  return {GroupElementK{x}, y};
}

/// Ad_x Y = x Y x^{-1}.
inline AlgebraVector ad_action(const GroupElementK& x, const AlgebraVector& y) {
  return AlgebraVector::from_matrix(x.m * y.matrix() * x.m.adjoint());
}

/// Nearest SU(2) element (quaternion projection) of an almost-unitary matrix.
inline GroupElementK project_to_su2(const Mat2& m) {
  const cplx a = 0.5 * (m(0, 0) + std::conj(m(1, 1)));
  const cplx b = 0.5 * (m(1, 0) - std::conj(m(0, 1)));
  const double n = std::sqrt(std::norm(a) + std::norm(b));
  return GroupElementK{Mat2{{a / n, -std::conj(b) / n, b / n, std::conj(a) / n}}};
}

/// Rescale to determinant one.
inline GroupElementKC normalize_det(const Mat2& m) {
  const cplx s = 1.0 / std::sqrt(m.det());
  return GroupElementKC{s * m};
}

/// Euler-angle parametrization x = exp(alpha X_3) exp(beta X_2) exp(gamma X_3).
inline GroupElementK euler_zyz(double alpha, double beta, double gamma) {
  const cplx ea = std::polar(1.0, -0.5 * (alpha + gamma));
  const cplx eb = std::polar(1.0, -0.5 * (alpha - gamma));
  const double c = std::cos(0.5 * beta), s = std::sin(0.5 * beta);
  return GroupElementK{Mat2{{ea * c, -eb * s, std::conj(eb) * s, std::conj(ea) * c}}};
}

}  // namespace sbq
