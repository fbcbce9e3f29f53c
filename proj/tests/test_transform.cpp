#include <gtest/gtest.h>

#include <random>

#include "sbq/diffop.hpp"
#include "sbq/transform.hpp"
#include "test_util.hpp"

using namespace sbq;
using sbq::testing::random_k;
using sbq::testing::random_kc;

namespace {

BandLimited random_band_limited(std::mt19937_64& rng, int max_twice) {
  std::normal_distribution<double> n(0.0, 1.0);
  BandLimited f;
  for (int tw = 0; tw <= max_twice; ++tw)
    for (int a = 0; a <= tw; ++a)
      for (int b = 0; b <= tw; ++b) f.add_term(Spin{tw}, a, b, cplx(n(rng), n(rng)));
  return f;
}

std::vector<BandLimited> entries_up_to(int max_twice) {
  std::vector<BandLimited> out;
  for (int tw = 0; tw <= max_twice; ++tw)
    for (int a = 0; a <= tw; ++a)
      for (int b = 0; b <= tw; ++b) out.push_back(BandLimited::matrix_entry(Spin{tw}, a, b));
  return out;
}

}  // namespace

TEST(Transform, ConstantsAndCoefficients) {
  const BandLimited c = BandLimited::constant(cplx(2.0, -1.0));
  const auto F = transform_C(0.7, c);
  EXPECT_LT(std::abs(F(GroupElementKC::identity()) - cplx(2.0, -1.0)), 1e-15);
  const auto chi1 = BandLimited::character(Spin{2});
  const double t = 0.6;
  const GroupElementKC g = exp_imaginary(AlgebraVector{{0.2, 0.5, -0.3}});
  EXPECT_LT(std::abs(transform_C(t, chi1)(g) - std::exp(-t) * character(Spin{2}, g)), 1e-14);
}

TEST(Transform, CharacterImageMatchesConvolutionIntegral) {
  // (C_t f)(g) = int_K rho_t(g x^{-1}) f(x) dx, evaluated by quadrature
  std::mt19937_64 rng(1);
  const double t = 0.5;
  const auto f = BandLimited::character(Spin{2});
  const GroupElementKC g = random_kc(rng, 0.5);
  const auto k = HeatKernelK::certified(t, 2.0, 1e-15);
  const auto rule = haar_quadrature_K(Spin{std::min(48, (k.jmax().twice + 3) / 2 + 1)});
  const cplx v = rule.integrate([&](const GroupElementK& x) {
    return k.from_trace((g * GroupElementKC::from_k(x.inverse())).m.trace()) * f(x);
  });
  EXPECT_LT(std::abs(v - transform_C(t, f)(g)), 1e-8);
}

TEST(Transform, BMatchesCAndChecksDomain) {
  std::mt19937_64 rng(2);
  const BandLimited f = random_band_limited(rng, 3);
  const double t = 0.5;
  EXPECT_EQ(max_coefficient_distance(transform_B(0.4, t, f).as<KDomain>(), transform_B(2.0, t, f).as<KDomain>()), 0.0);
  EXPECT_EQ(max_coefficient_distance(transform_B(t, t, f).as<KDomain>(), transform_C(t, f).as<KDomain>()), 0.0);
  EXPECT_THROW(transform_B(0.25, t, f), parameter_domain_error);
  EXPECT_THROW(transform_B(0.1, t, f), parameter_domain_error);
}

TEST(Transform, InverseRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 5; ++i) {
    const BandLimited f = random_band_limited(rng, 6);
    EXPECT_LT(max_coefficient_distance(inverse_C(0.5, transform_C(0.5, f)), f), 1e-12 * f.max_abs_coefficient());
  }
  EXPECT_LT(max_coefficient_distance(inverse_C(1.0, transform_C(1.0, BandLimited::constant(3.0))), BandLimited::constant(3.0)),
            1e-15);
  EXPECT_THROW(inverse_C(2.0, HolomorphicObservable::character(Spin{20})), ill_conditioned_error);
}

TEST(Transform, IntertwiningIsExact) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> letter(1, 3), len(0, 4);
  std::normal_distribution<double> n(0.0, 1.0);
  const BandLimited f = random_band_limited(rng, 4);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<LeftInvariantOperator::Term> terms;
    for (int k = 0; k < 3; ++k) {
      std::vector<int> w(len(rng));
      for (int& x : w) x = letter(rng);
      terms.push_back({cplx(n(rng), n(rng)), w});
    }
    const LeftInvariantOperator a(terms);
    const auto lhs = transform_C(0.7, left_derivative(a, f));
    const auto rhs = complexify_apply(a, transform_C(0.7, f));
    EXPECT_LT(max_coefficient_distance(lhs.as<KDomain>(), rhs.as<KDomain>()), 1e-12 * std::max(1.0, rhs.max_abs_coefficient()));
  }
}

TEST(Transform, UnitarityByQuadrature) {
  const auto fs = entries_up_to(3);
  for (double t : {0.2, 0.5, 1.0}) {
    const auto rule = transform_rule(t, Spin{3});
    const HeatKernelKC kernel(t);
    double worst = 0.0;
    // Gram matrix of all entries through spin 3/2
    const int n = static_cast<int>(fs.size());
    std::vector<HolomorphicObservable> Fs;
    for (const auto& f : fs) Fs.push_back(transform_C(t, f));
    MatrixXc gram = MatrixXc::Zero(n, n);
    std::vector<cplx> vals(n);
    rule.for_each([&](const GroupElementKC& g, double w) {
      const double wn = w * kernel(g);
      int idx = 0;
      for (int tw = 0; tw <= 3; ++tw) {
        const MatrixXc d = wigner_matrix(Spin{tw}, g.m);
        const double damp = std::exp(-0.5 * t * Spin{tw}.casimir());
        for (int a = 0; a <= tw; ++a)
          for (int b = 0; b <= tw; ++b) vals[idx++] = damp * d(a, b);
      }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gram(i, j) += wn * std::conj(vals[i]) * vals[j];
    });
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const cplx exact = inner_product_K(fs[i], fs[j]);
        worst = std::max(worst, std::abs(gram(i, j) - exact) / std::abs(inner_product_K(fs[i], fs[i])));
      }
    EXPECT_LT(worst, 1e-5) << t;
    // spot check through the public path
    const cplx v = nu_inner_product(Fs[1], Fs[1], kernel, rule);
    EXPECT_NEAR(v.real() / inner_product_K(fs[1], fs[1]).real(), 1.0, 1e-5);
  }
}

TEST(Transform, InversionIntegralOracle) {
  std::mt19937_64 rng(5);
  const double t = 1.0;
  BandLimited f = BandLimited::matrix_entry(Spin{1}, 0, 1, cplx(1.0, 0.5));
  f.add_term(Spin{2}, 1, 2, 0.7);
  f.add_term(Spin{0}, 0, 0, -0.4);
  const auto F = transform_C(t, f);
  const GroupElementK x0 = random_k(rng);
  const auto res = inverse_C_quadrature(t, F, x0);
  const cplx exact = inverse_C(t, F)(x0);
  EXPECT_LT(res.last_change, 1e-6);
  EXPECT_LT(std::abs(res.value - exact), 1e-4 * std::max(1.0, std::abs(exact)));
}
