#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "sbq/repr.hpp"
#include "sbq/sde.hpp"
#include "sbq/stats.hpp"

using namespace sbq;

namespace {

std::vector<cplx> character_samples_K(Spin j, double var_a, int n_steps, int n_paths, std::uint64_t master) {
  return parallel_map<cplx>(n_paths, 1, [&](std::size_t i) {
    return character(j, GroupElementKC::from_k(sample_endpoint_K(var_a, n_steps, master, i)));
  });
}

std::vector<cplx> character_samples_KC(Spin j, double var_a, double var_b, int n_steps, int n_paths,
                                       std::uint64_t master) {
  return parallel_map<cplx>(n_paths, 1, [&](std::size_t i) {
    return character(j, sample_endpoint_KC(var_a, var_b, n_steps, master, i));
  });
}

}  // namespace

TEST(Sde, IncrementVarianceAndNormality) {
  const double sigma2 = 0.7;
  std::vector<double> first;
  double sq = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_path(sigma2, 16, derive_seed(5, 1, i));
    const auto e = p.endpoint();
    first.push_back(e.coords[0]);
    for (double c : e.coords) sq += c * c;
  }
  const double var = sq / (3.0 * n);
  // variance of the sample variance of 3n normals is 2 sigma^4 / (3n)
  EXPECT_NEAR(var, sigma2, 5.0 * sigma2 * std::sqrt(2.0 / (3.0 * n)));
  const auto ks = ks_test(first, [&](double x) { return normal_cdf(x / std::sqrt(sigma2)); });
  EXPECT_TRUE(ks.pass) << ks.statistic << " > " << ks.critical;
}

TEST(Sde, KsRejectsWrongVariance) {
  std::vector<double> xs;
  for (int i = 0; i < 4000; ++i) xs.push_back(sample_path(1.0, 1, derive_seed(9, 1, i)).endpoint().coords[1]);
  EXPECT_FALSE(ks_test(xs, [](double x) { return normal_cdf(x / std::sqrt(2.0)); }).pass);
}

TEST(Sde, KolmogorovQuantileKnownValues) {
  // tabulated asymptotic critical values
  EXPECT_NEAR(kolmogorov_quantile(0.05), 1.3581, 1e-4);
  EXPECT_NEAR(kolmogorov_quantile(0.01), 1.6276, 1e-4);
}

TEST(Sde, ZeroVarianceGivesIdentity) {
  const auto a = sample_path(0.0, 50, 1), b = sample_path(0.0, 50, 2);
  for (const auto& d : a.increments)
    for (double c : d.coords) EXPECT_EQ(c, 0.0);
  EXPECT_LT(frobenius_distance(ito_map_K(a).value.m, Mat2::identity()), 1e-15);
  EXPECT_LT(frobenius_distance(ito_map_KC(a, b).value.m, Mat2::identity()), 1e-15);
  EXPECT_THROW(sample_path(-1.0, 4, 0), parameter_domain_error);
}

TEST(Sde, CoarsenPreservesEndpoint) {
  const auto p = sample_path(1.0, 64, 17);
  const auto q = coarsen(p, 8);
  EXPECT_EQ(q.n_steps, 8);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(q.endpoint().coords[k], p.endpoint().coords[k], 1e-14);
  EXPECT_THROW(coarsen(p, 5), parameter_domain_error);
}

TEST(Sde, RealEndpointMoments) {
  // E chi_j(theta(A)_1) = d_j exp(-sigma^2 c_j / 2)
  const double t = 0.8;
  for (int tw : {1, 2}) {
    const Spin j{tw};
    const auto v = character_samples_K(j, t, 100, 20000, 11);
    const auto s = block_summary(v, v.size(), 100);
    const double exact = j.dim() * std::exp(-0.5 * t * j.casimir());
    EXPECT_NEAR(s.mean.real(), exact, 4.0 * s.stderr_re + 2e-3) << "spin " << tw;
    EXPECT_NEAR(s.mean.imag(), 0.0, 1e-12);
  }
}

TEST(Sde, ComplexEndpointMoments) {
  // generator ((a - b)/2) Delta on holomorphic functions
  const double t = 1.0;
  struct Case {
    double a, b;
  };
  for (const Case c : {Case{0.0, 0.5 * t}, Case{0.6, 0.5 * t}}) {
    const Spin j{1};
    const auto v = character_samples_KC(j, c.a, c.b, 100, 20000, 23);
    const auto s = block_summary(v, v.size(), 100);
    const double exact = j.dim() * std::exp(-0.5 * (c.a - c.b) * j.casimir());
    EXPECT_NEAR(s.mean.real(), exact, 4.0 * s.stderr_re + 3e-3 * exact) << c.a;
    EXPECT_NEAR(s.mean.imag(), 0.0, 4.0 * s.stderr_im + 1e-3);
  }
}

TEST(Sde, StreamingMatchesStoredPaths) {
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto [a, b] = sample_path_pair(0.3, 0.5, 130, 77, i);
    const auto stored = ito_map_KC(a, b);
    const auto streamed = sample_endpoint_KC(0.3, 0.5, 130, 77, i);
    EXPECT_EQ(frobenius_distance(stored.value.m, streamed.m), 0.0);
    const auto xk = ito_map_K(a).value;
    EXPECT_EQ(frobenius_distance(xk.m, sample_endpoint_K(0.3, 130, 77, i).m), 0.0);
  }
}

TEST(Sde, RotatedPathPreservesIncrementNorms) {
  const auto a = sample_path(1.0, 200, 3), b = sample_path(0.5, 200, 4);
  const auto r = rotated_path(b, a);
  for (int k = 0; k < 200; ++k) {
    double n0 = 0.0, n1 = 0.0;
    for (int c = 0; c < 3; ++c) {
      n0 += b.increments[k].coords[c] * b.increments[k].coords[c];
      n1 += r.increments[k].coords[c] * r.increments[k].coords[c];
    }
    EXPECT_NEAR(n1, n0, 1e-14);
  }
}

TEST(Sde, RotatedPathIsBrownian) {
  std::vector<double> xs;
  for (int i = 0; i < 3000; ++i) {
    const auto [a, b] = sample_path_pair(1.0, 0.5, 32, 101, i);
    xs.push_back(rotated_path(b, a).endpoint().coords[0]);
  }
  const auto ks = ks_test(xs, [](double x) { return normal_cdf(x / std::sqrt(0.5)); });
  EXPECT_TRUE(ks.pass) << ks.statistic << " > " << ks.critical;
}

TEST(Sde, PathwiseIdentityExactWithoutRealPart) {
  const auto a = sample_path(0.0, 100, 1), b = sample_path(0.5, 100, 2);
  EXPECT_LT(pathwise_identity_residual(a, b), 1e-13);
}

TEST(Sde, PathwiseIdentityFirstOrderForSmoothPaths) {
  auto constant = [](const AlgebraVector& v, int n) {
    BrownianPath p{n, 1.0 / n, 0.0, 0, {}};
    p.increments.assign(n, AlgebraVector{{v.coords[0] / n, v.coords[1] / n, v.coords[2] / n}});
    return p;
  };
  const AlgebraVector av{{0.8, -0.3, 0.5}}, bv{{0.2, 0.6, -0.4}};
  const double r1 = pathwise_identity_residual(constant(av, 100), constant(bv, 100));
  const double r2 = pathwise_identity_residual(constant(av, 200), constant(bv, 200));
  EXPECT_GT(r1, 0.0);
  EXPECT_NEAR(r1 / r2, 2.0, 0.2);
}

TEST(Sde, PathwiseIdentityConvergesOnBrownianPaths) {
  double fine = 0.0, coarse = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto [a, b] = sample_path_pair(0.5, 0.5, 1024, 5, i);
    fine += pathwise_identity_residual(a, b);
    coarse += pathwise_identity_residual(coarsen(a, 16), coarsen(b, 16));
  }
  // strong order 1/2: a 16-fold refinement shrinks the residual about 4-fold
  EXPECT_LT(fine, 0.5 * coarse);
}

TEST(Sde, ReprojectionKeepsGroupConstraints) {
  const auto [a, b] = sample_path_pair(1.0, 0.5, 5000, 8, 0);
  const auto x = ito_map_K(a).value;
  EXPECT_LT(frobenius_distance(x.m * x.m.adjoint(), Mat2::identity()), 1e-10);
  const auto g = ito_map_KC(a, b).value;
  EXPECT_LT(std::abs(g.m.det() - 1.0), 1e-10);
}

TEST(Sde, SeedsAreDistinctAndWorkerIndependent) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 3; ++s)
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, s, i));
  EXPECT_EQ(seen.size(), 3000u);
  auto run = [](unsigned w) {
    return parallel_map<cplx>(257, w, [](std::size_t i) { return sample_endpoint_KC(0.2, 0.5, 20, 9, i).m.trace(); });
  };
  EXPECT_EQ(run(1), run(4));
}

TEST(Sde, ParallelForPropagatesExceptions) {
  EXPECT_THROW(parallel_for(100, 3, [](std::size_t i) {
                 if (i == 57) throw std::runtime_error("x");
               }),
               std::runtime_error);
}

TEST(Stats, BlockSummaryAndDiagnostic) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  std::vector<cplx> v(64000);
  for (auto& x : v) x = cplx(nd(rng), 2.0 * nd(rng));
  const auto s = block_summary(v, v.size(), 100);
  EXPECT_NEAR(s.stderr_re, 1.0 / std::sqrt(64000.0), 0.3 / std::sqrt(64000.0));
  EXPECT_NEAR(s.stderr_im, 2.0 / std::sqrt(64000.0), 0.6 / std::sqrt(64000.0));
  EXPECT_TRUE(convergence_diagnostic(v, 100).ok);
  // a constant-after-prefix sequence does not shrink like n^{-1/2}
  std::vector<cplx> bad(v.begin(), v.end());
  for (std::size_t i = 4000; i < bad.size(); ++i) bad[i] = cplx(0.0);
  EXPECT_FALSE(convergence_diagnostic(bad, 100).ok);
  EXPECT_THROW(block_summary(v, 10, 100), statistical_failure_error);
}

TEST(Stats, PairwiseSumIsOrderStable) {
  std::vector<double> x(1000, 0.1);
  EXPECT_NEAR(pairwise_sum(x), 100.0, 1e-12);
}
