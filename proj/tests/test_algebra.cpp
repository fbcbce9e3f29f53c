#include <gtest/gtest.h>

#include <random>

#include "sbq/algebra.hpp"
#include "test_util.hpp"

using namespace sbq;
using sbq::testing::expm_series;

TEST(Algebra, BasisIsOrthonormal) {
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l)
      EXPECT_NEAR(killing_inner(basis_matrix(k), basis_matrix(l)), k == l ? 1.0 : 0.0, 1e-15);
}

TEST(Algebra, BracketIsCyclic) {
  const Mat2 x1 = basis_matrix(0), x2 = basis_matrix(1), x3 = basis_matrix(2);
  EXPECT_LT(frobenius_distance(x1 * x2 - x2 * x1, x3), 1e-15);
  EXPECT_LT(frobenius_distance(x2 * x3 - x3 * x2, x1), 1e-15);
}

TEST(Algebra, CoordinateRoundTrip) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const AlgebraVector y = sbq::testing::random_algebra(rng, 1.0);
    const AlgebraVector z = AlgebraVector::from_matrix(y.matrix());
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(y.coords[k], z.coords[k], 1e-14);
  }
}

TEST(Algebra, ExpAlgebraSpecialValues) {
  const double pi = std::numbers::pi;
  EXPECT_LT(frobenius_distance(exp_algebra(AlgebraVector{}).m, Mat2::identity()), 1e-15);
  const AlgebraVector x3{{0, 0, 1}};
  EXPECT_LT(frobenius_distance(exp_algebra(x3, 4 * pi).m, Mat2::identity()), 1e-12);
  EXPECT_LT(frobenius_distance(exp_algebra(x3, 2 * pi).m, cplx(-1.0) * Mat2::identity()), 1e-12);
  EXPECT_LT(frobenius_distance(expm_series(cplx(4 * pi) * x3.matrix()), Mat2::identity()), 1e-12);
}

TEST(Algebra, ExpMatchesPowerSeries) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const AlgebraVector y = sbq::testing::random_algebra(rng, 2.0);
    EXPECT_LT(frobenius_distance(exp_algebra(y).m, expm_series(y.matrix())), 1e-12);
    const AlgebraVector small = sbq::testing::random_algebra(rng, 1e-3);
    EXPECT_LT(frobenius_distance(exp_algebra(small).m, expm_series(small.matrix())), 1e-15);
  }
}

TEST(Algebra, ExpComplexMatchesPowerSeries) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto z = ComplexAlgebraVector::from_parts(sbq::testing::random_algebra(rng, 1.5),
                                                    sbq::testing::random_algebra(rng, 1.5));
    const GroupElementKC g = exp_complex(z);
    EXPECT_LT(frobenius_distance(g.m, expm_series(z.matrix())), 1e-10 * g.m.frobenius_norm());
    EXPECT_NEAR(std::abs(g.m.det() - 1.0), 0.0, 1e-10);
    ComplexAlgebraVector mz;
    for (int k = 0; k < 3; ++k) mz.coords[k] = -z.coords[k];
    EXPECT_LT(frobenius_distance((g * exp_complex(mz)).m, Mat2::identity()), 1e-10);
  }
}

TEST(Algebra, ExpImaginaryIsDiagonalOnX3) {
  const double r = 1.7;
  const GroupElementKC g = exp_imaginary(AlgebraVector{{0, 0, r}});
  EXPECT_NEAR(std::abs(g.m(0, 0) - std::exp(r / 2)), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(g.m(1, 1) - std::exp(-r / 2)), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(g.m(0, 1)), 0.0, 1e-15);
}

TEST(Algebra, PolarIdentityAndImaginary) {
  const auto p = polar_decompose(GroupElementKC::identity());
  EXPECT_LT(frobenius_distance(p.x.m, Mat2::identity()), 1e-15);
  EXPECT_LT(p.y.norm(), 1e-15);
  const AlgebraVector y0{{0.3, -0.8, 1.1}};
  const auto q = polar_decompose(exp_imaginary(y0));
  EXPECT_LT(frobenius_distance(q.x.m, Mat2::identity()), 1e-12);
  EXPECT_LT((q.y - y0).norm(), 1e-12);
}

TEST(Algebra, PolarRoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    const GroupElementK x = sbq::testing::random_k(rng);
    AlgebraVector y = sbq::testing::random_algebra(rng, 1.0);
    y = (u(rng) / y.norm()) * y;
    const GroupElementKC g{x.m * exp_imaginary(y).m};
    const auto p = polar_decompose(g);
    EXPECT_LT(frobenius_distance(p.x.m, x.m), 1e-9);
    EXPECT_LT((p.y - y).norm(), 1e-9);
    EXPECT_NEAR(polar_radius(g), y.norm(), 1e-9);
    EXPECT_LT(frobenius_distance((GroupElementKC::from_k(p.x) * exp_imaginary(p.y)).m, g.m), 1e-10 * g.m.frobenius_norm());
  }
}

TEST(Algebra, PolarRejectsSingular) {
  const Mat2 s{{1.0, 2.0, 0.5, 1.0}};  // det 0
  EXPECT_THROW(polar_decompose(GroupElementKC{s}), non_invertible_error);
}

TEST(Algebra, AdActionPreservesNormAndRotates) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const GroupElementK x = sbq::testing::random_k(rng);
    const AlgebraVector y = sbq::testing::random_algebra(rng, 1.0), z = sbq::testing::random_algebra(rng, 1.0);
    EXPECT_NEAR(ad_action(x, y).norm(), y.norm(), 1e-13);
    EXPECT_NEAR(ad_action(x, y).dot(ad_action(x, z)), y.dot(z), 1e-13);
  }
  const AlgebraVector y{{0.4, -1.2, 0.7}};
  const auto same = ad_action(GroupElementK::identity(), y);
  EXPECT_LT((same - y).norm(), 1e-15);
  // SO(3) oracle: exp(theta X_3) rotates the (X_1, X_2) plane by theta.
  const double th = 0.9;
  const auto r = ad_action(exp_algebra(AlgebraVector{{0, 0, th}}), y);
  EXPECT_NEAR(r.coords[0], std::cos(th) * 0.4 - std::sin(th) * -1.2, 1e-13);
  EXPECT_NEAR(r.coords[1], std::sin(th) * 0.4 + std::cos(th) * -1.2, 1e-13);
  EXPECT_NEAR(r.coords[2], 0.7, 1e-13);
}

TEST(Algebra, GroupClosureOverManyCompositions) {
  std::mt19937_64 rng(6);
  GroupElementK x = GroupElementK::identity();
  for (int i = 0; i < 10000; ++i) x = x * exp_algebra(sbq::testing::random_algebra(rng, 0.3));
  EXPECT_LT(frobenius_distance(x.m.adjoint() * x.m, Mat2::identity()), 1e-10);
  EXPECT_NEAR(std::abs(x.m.det() - 1.0), 0.0, 1e-10);
}

TEST(Algebra, ProjectionsRestoreMembership) {
  std::mt19937_64 rng(7);
  const GroupElementK x = sbq::testing::random_k(rng);
  Mat2 m = x.m;
  m.e[1] += 1e-7;
  const GroupElementK p = project_to_su2(m);
  EXPECT_LT(frobenius_distance(p.m.adjoint() * p.m, Mat2::identity()), 1e-14);
  EXPECT_LT(frobenius_distance(p.m, x.m), 1e-6);
  const GroupElementKC g = normalize_det(cplx(1.3, 0.2) * x.m);
  EXPECT_NEAR(std::abs(g.m.det() - 1.0), 0.0, 1e-14);
}

TEST(Algebra, EulerAnglesCompose) {
  const double a = 0.3, b = 1.1, c = -0.7;
  const Mat2 ref = exp_algebra(AlgebraVector{{0, 0, a}}).m * exp_algebra(AlgebraVector{{0, b, 0}}).m *
                   exp_algebra(AlgebraVector{{0, 0, c}}).m;
  EXPECT_LT(frobenius_distance(euler_zyz(a, b, c).m, ref), 1e-14);
}

TEST(Algebra, VolumeFromGeodesicRadius) {
  // exp(s X_3) first returns to the identity at s = 4 pi: K is a 3-sphere of radius 2.
  const double radius = 4.0 * std::numbers::pi / (2.0 * std::numbers::pi);
  EXPECT_NEAR(kVolumeK, 2.0 * std::numbers::pi * std::numbers::pi * radius * radius * radius, 1e-12);
}
