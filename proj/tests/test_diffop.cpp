#include <gtest/gtest.h>

#include <random>

#include "sbq/diffop.hpp"
#include "sbq/transform.hpp"
#include "test_util.hpp"

using namespace sbq;
using sbq::testing::random_k;
using sbq::testing::random_kc;

TEST(Operator, TransposeStructure) {
  EXPECT_EQ(transpose(LeftInvariantOperator::generator(1)), LeftInvariantOperator::word({1}, -1.0));
  EXPECT_EQ(transpose(LeftInvariantOperator::word({1, 2})), LeftInvariantOperator::word({2, 1}));
  EXPECT_EQ(transpose(LeftInvariantOperator::word({1, 2, 3}, cplx(0, 2))), LeftInvariantOperator::word({3, 2, 1}, cplx(0, -2)));
  const auto a = LeftInvariantOperator::word({3, 1, 1, 2}, cplx(0.5, 1)) + LeftInvariantOperator::generator(2);
  EXPECT_EQ(transpose(transpose(a)), a);
  EXPECT_EQ(a.degree(), 4);
  EXPECT_THROW(LeftInvariantOperator::word({4}), index_out_of_range_error);
}

TEST(Operator, IdentityWordActsTrivially) {
  BandLimited f = BandLimited::matrix_entry(Spin{3}, 1, 2, cplx(1.0, -2.0));
  EXPECT_EQ(max_coefficient_distance(left_derivative(LeftInvariantOperator::identity(), f), f), 0.0);
}

TEST(Operator, TransposeIsAdjointOnK) {
  // int_K (A f) h dx = int_K f (A^tr h) dx
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> letter(1, 3), len(1, 3);
  BandLimited f = BandLimited::matrix_entry(Spin{2}, 0, 1, 1.0);
  f.add_term(Spin{3}, 2, 1, cplx(0.5, 0.3));
  BandLimited h = BandLimited::matrix_entry(Spin{2}, 2, 1, cplx(0.0, 1.0));
  h.add_term(Spin{3}, 0, 3, 2.0);
  const auto rule = haar_quadrature_K(Spin{3});
  std::vector<LeftInvariantOperator> ops{LeftInvariantOperator::generator(1), LeftInvariantOperator::generator(2),
                                         LeftInvariantOperator::generator(3)};
  for (int i = 0; i < 10; ++i) {
    std::vector<int> w(len(rng));
    for (int& x : w) x = letter(rng);
    ops.push_back(LeftInvariantOperator({{1.0, w}}));
  }
  for (const auto& a : ops) {
    const BandLimited af = left_derivative(a, f), ath = left_derivative(transpose(a), h);
    const cplx lhs = rule.integrate([&](const GroupElementK& x) { return af(x) * h(x); });
    const cplx rhs = rule.integrate([&](const GroupElementK& x) { return f(x) * ath(x); });
    EXPECT_LT(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Complexify, CasimirOnTransforms) {
  for (int tw = 0; tw <= 4; ++tw) {
    const auto F = transform_C(0.5, BandLimited::matrix_entry(Spin{tw}, 0, tw));
    const auto LF = complexify_apply(LeftInvariantOperator::laplacian(), F);
    EXPECT_LT(max_coefficient_distance(LF.as<KDomain>(), (cplx(-Spin{tw}.casimir()) * F).as<KDomain>()), 1e-14);
  }
  const auto F = transform_C(0.5, BandLimited::character(Spin{2}));
  EXPECT_EQ(max_coefficient_distance(complexify_apply(LeftInvariantOperator::identity(), F).as<KDomain>(), F.as<KDomain>()), 0.0);
}

TEST(Complexify, MatchesHolomorphicFiniteDifferences) {
  // X_C F = (X F - i JX F)/2 by directional differences at 20 points
  std::mt19937_64 rng(2);
  HolomorphicObservable F = transform_C(0.5, BandLimited::matrix_entry(Spin{2}, 0, 1, 1.0));
  F = F + transform_C(0.5, BandLimited::matrix_entry(Spin{3}, 3, 0, cplx(0.3, -0.2)));
  const double h = 1e-4;
  for (int i = 0; i < 20; ++i) {
    const GroupElementKC g = random_kc(rng, 0.7);
    for (int k = 1; k <= 3; ++k) {
      AlgebraVector e;
      e.coords[k - 1] = 1.0;
      const cplx xf = (F(g * GroupElementKC::from_k(exp_algebra(e, h))) - F(g * GroupElementKC::from_k(exp_algebra(e, -h)))) / (2 * h);
      const cplx jxf = (F(g * exp_imaginary(h * e)) - F(g * exp_imaginary(-h * e))) / (2 * h);
      const cplx fd = 0.5 * (xf - cplx(0, 1) * jxf);
      const cplx exact = complexify_apply(LeftInvariantOperator::generator(k), F)(g);
      EXPECT_LT(std::abs(fd - exact), 1e-6 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST(Symbol, IdentityGivesNu) {
  std::mt19937_64 rng(3);
  const GroupElementKC g = random_kc(rng, 1.0);
  EXPECT_DOUBLE_EQ(apply_transpose_to_nu(LeftInvariantOperator::identity(), 0.5, g).real(), nu(0.5, g));
}

TEST(Symbol, LaplacianMatchesClosedForm) {
  std::mt19937_64 rng(4);
  const LeftInvariantOperator lap = LeftInvariantOperator::laplacian();
  for (double t : {0.5, 1.0}) {
    const HeatKernelKC kernel(t);
    for (int i = 0; i < 20; ++i) {
      const GroupElementKC g = random_kc(rng, 1.2);
      const cplx phi = symbol_phi(lap, kernel, g);
      const double exact = laplacian_symbol_exact(t, polar_radius(g));
      EXPECT_NEAR(phi.real(), exact, 1e-6 * std::max(1.0, std::abs(exact)));
      EXPECT_NEAR(phi.imag(), 0.0, 1e-6 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST(Symbol, GeneratorSymbolImaginaryOnFiber) {
  // On g = e^{iY}: X_k nu = 0, JX_k nu is real, so (-X_k)_C nu = (i/2) JX_k nu.
  std::mt19937_64 rng(5);
  const double t = 0.7;
  const HeatKernelKC kernel(t);
  for (int k = 1; k <= 3; ++k)
    for (int i = 0; i < 5; ++i) {
      const AlgebraVector y = sbq::testing::random_algebra(rng, 0.8);
      const GroupElementKC g = exp_imaginary(y);
      const cplx phi = symbol_phi(LeftInvariantOperator::generator(k), kernel, g);
      EXPECT_NEAR(phi.real(), 0.0, 1e-8);
      // radial oracle: d/ds log nu(|Y + s e_k|) = (y_k / r) (log nu)'(r)
      const double r = y.norm();
      const double dlog = 1.0 / r - 1.0 / std::tanh(r) - 2.0 * r / t;
      EXPECT_NEAR(phi.imag(), 0.5 * (y.coords[k - 1] / r) * dlog, 1e-7);
    }
}

TEST(Symbol, LaplacianProfileIsLinearInRSquared) {
  const double t = 1.0;
  const HeatKernelKC kernel(t);
  std::vector<double> r2, val;
  for (int i = 0; i <= 30; ++i) {
    const double r = 0.1 * i;
    const GroupElementKC g = GroupElementKC::from_k(euler_zyz(0.3, 1.0, -0.4)) * exp_imaginary(AlgebraVector{{0.6 * r, 0.0, 0.8 * r}});
    r2.push_back(r * r);
    val.push_back(symbol_phi(LeftInvariantOperator::laplacian(), kernel, g).real());
  }
  // least squares line
  const int n = static_cast<int>(r2.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += r2[i];
    sy += val[i];
    sxx += r2[i] * r2[i];
    sxy += r2[i] * val[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx), icpt = (sy - slope * sx) / n;
  double worst = 0;
  for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(val[i] - (icpt + slope * r2[i])));
  EXPECT_LT(worst, 1e-4);
  EXPECT_NEAR(slope, -1.0 / (t * t), 1e-5);
  EXPECT_NEAR(icpt, 1.5 / t + 0.25, 1e-5);
}

TEST(Symbol, DegreeCapAndStepUnderflow) {
  const auto deg5 = LeftInvariantOperator::word({1, 2, 3, 1, 2});
  EXPECT_THROW(apply_transpose_to_nu(deg5, 0.5, GroupElementKC::identity()), parameter_domain_error);
  EXPECT_THROW(apply_transpose_to_nu(LeftInvariantOperator::laplacian(), 1e-12, GroupElementKC::identity()),
               step_underflow_error);
  EXPECT_NO_THROW(apply_transpose_to_nu(LeftInvariantOperator::word({1, 2, 3, 3}), 0.5, GroupElementKC::identity()));
}
