#pragma once

// Toeplitz matrix elements <F1, T_phi F2> on the Segal-Bargmann side: weak Monte
// Carlo estimators over subelliptic endpoints, deterministic K_C quadrature, and
// the exact Schroedinger-side matrix elements they are compared against.

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "sbq/diffop.hpp"
#include "sbq/parallel.hpp"
#include "sbq/sde.hpp"
#include "sbq/stats.hpp"
#include "sbq/transform.hpp"

namespace sbq {

enum class EstimateMethod { monte_carlo, quadrature };

inline std::string to_string(EstimateMethod m) { return m == EstimateMethod::monte_carlo ? "MC" : "quadrature"; }

struct ToeplitzEstimate {
  cplx value;
  double stderr_re = 0.0;
  double stderr_im = 0.0;
  std::size_t n_paths = 0;
  int n_steps = 0;
  std::uint64_t master_seed = 0;
  /// Streams passed to derive_seed(master_seed, stream, path_index).
  std::vector<std::uint64_t> seed_streams;
  EstimateMethod method = EstimateMethod::monte_carlo;
  std::vector<cplx> block_means;
  ConvergenceDiagnostic diagnostic;
  /// Quadrature only: |value(2R) - value(R)|.
  double r_stability = 0.0;
  double radius = 0.0;

  double stderr() const { return std::hypot(stderr_re, stderr_im); }
};

struct MonteCarloSettings {
  std::size_t n_paths = 200000;
  int n_steps = 100;
  std::uint64_t master_seed = 1;
  unsigned workers = 1;
  std::size_t n_blocks = 100;
};

/// Exact <f1, M_V A f2>_{L^2(K)}.
inline cplx schrodinger_entry(const BandLimited& V, const LeftInvariantOperator& A, const BandLimited& f1,
                              const BandLimited& f2) {
  return inner_product_K(f1, multiply(V, left_derivative(A, f2)));
}

inline cplx schrodinger_entry(const BandLimited& V, const BandLimited& f1, const BandLimited& f2) {
  return inner_product_K(f1, multiply(V, f2));
}

/// Endpoints of theta_C(A + iB)_1 shared across estimates with the same law, seed and size.
class EndpointCache {
 public:
  static EndpointCache& instance() {
    static EndpointCache c;
    return c;
  }

  std::shared_ptr<const std::vector<Mat2>> get(double var_a, double var_b, int n_steps, std::uint64_t master,
                                               std::size_t n_paths, unsigned workers) {
    const Key key{var_a, var_b, n_steps, master, n_paths};
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = store_.find(key);
      if (it != store_.end()) return it->second;
    }
    auto pts = std::make_shared<std::vector<Mat2>>(parallel_map<Mat2>(
        n_paths, workers, [&](std::size_t i) { return sample_endpoint_KC(var_a, var_b, n_steps, master, i).m; }));
    std::lock_guard<std::mutex> lock(mu_);
    if (store_.size() >= kCapacity) store_.clear();
    return store_.emplace(key, std::move(pts)).first->second;
  }

  void clear() {
    std::lock_guard<std::mutex> lock(mu_);
    store_.clear();
  }

 private:
  using Key = std::tuple<double, double, int, std::uint64_t, std::size_t>;
  static constexpr std::size_t kCapacity = 8;
  std::mutex mu_;
  std::map<Key, std::shared_ptr<const std::vector<Mat2>>> store_;
};

namespace detail {

/// Spin blocks of a holomorphic observable. F(w x) = sum_{c,b} [D(w)^T C]_{cb} D(x)_{cb},
/// so F(w x) = <E(w), phi(x)> with E and phi flattened over (spin, c, b).
struct FeatureBlocks {
  std::vector<std::pair<Spin, MatrixXc>> blocks;
  Eigen::Index size = 0;

  explicit FeatureBlocks(const HolomorphicObservable& F) {
    for (const auto& [tw, c] : F.coeffs()) {
      blocks.emplace_back(Spin{tw}, c);
      size += c.size();
    }
  }

  Eigen::VectorXcd endpoint_features(const Mat2& w) const {
    Eigen::VectorXcd e(size);
    Eigen::Index off = 0;
    for (const auto& [j, c] : blocks) {
      const MatrixXc m = wigner_matrix(j, w).transpose() * c;
      e.segment(off, m.size()) = Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
      off += m.size();
    }
    return e;
  }

  Eigen::VectorXcd group_features(const Mat2& x) const {
    Eigen::VectorXcd e(size);
    Eigen::Index off = 0;
    for (const auto& [j, c] : blocks) {
      const MatrixXc m = wigner_matrix(j, x);
      e.segment(off, m.size()) = Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
      off += m.size();
    }
    return e;
  }

  int max_twice() const { return blocks.empty() ? 0 : blocks.back().first.twice; }
};

/// G = int_K Vt(x) conj(phi_1(x)) phi_2(x)^T dx with a rule exact for the integrand.
inline MatrixXc gram_matrix(const BandLimited& Vt, const FeatureBlocks& a, const FeatureBlocks& b) {
  const int total = Vt.j_max().twice + a.max_twice() + b.max_twice();
  const QuadratureRuleK rule = haar_quadrature_K(Spin{(total + 1) / 2});
  MatrixXc G = MatrixXc::Zero(a.size, b.size);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const cplx v = Vt(rule.nodes[i]);
    if (v == cplx(0.0)) continue;
    G.noalias() += (rule.weights[i] * v) * a.group_features(rule.nodes[i].m).conjugate() *
                   b.group_features(rule.nodes[i].m).transpose();
  }
  // entries that vanish by the Clebsch-Gordan selection rules are set to exact zero
  const double floor = 1e-13 * kVolumeK * std::max(1.0, Vt.max_abs_coefficient());
  G = G.unaryExpr([floor](cplx z) { return std::abs(z) < floor ? cplx(0.0) : z; });
  return G;
}

}  // namespace detail

/// int_K Vt(x) E_w[conj(F1(w x)) F2(w x)] dx, w ~ theta_C(A + iB)_1 with A variance
/// var_a and B variance t/2. var_a = 0 samples the subelliptic kernel mu_{t/2,t}.
inline ToeplitzEstimate toeplitz_entry_weak_mc(double t, double var_a, const BandLimited& Vt,
                                               const HolomorphicObservable& F1, const HolomorphicObservable& F2,
                                               const MonteCarloSettings& mc) {
  if (!(t > 0.0)) throw parameter_domain_error("toeplitz: t must be positive");
  if (!(var_a >= 0.0)) throw parameter_domain_error("toeplitz: real-part variance must be non-negative");
  if (mc.n_blocks < 30) throw parameter_domain_error("toeplitz: at least 30 blocks are required");
  if (mc.n_paths < 16 * mc.n_blocks)
    throw parameter_domain_error("toeplitz: n_paths must be at least 16 n_blocks for the convergence diagnostic");
  ToeplitzEstimate est;
  est.n_paths = mc.n_paths;
  est.n_steps = mc.n_steps;
  est.master_seed = mc.master_seed;
  est.seed_streams = {static_cast<std::uint64_t>(Stream::real_part), static_cast<std::uint64_t>(Stream::imag_part)};
  est.method = EstimateMethod::monte_carlo;

  const detail::FeatureBlocks a(F1), b(F2);
  const MatrixXc G = (a.size == 0 || b.size == 0 || Vt.empty()) ? MatrixXc::Zero(a.size, b.size)
                                                                : detail::gram_matrix(Vt, a, b);
  std::vector<cplx> values(mc.n_paths, cplx(0.0));
  if (G.size() > 0 && G.cwiseAbs().maxCoeff() > 0.0) {
    const auto pts = EndpointCache::instance().get(var_a, 0.5 * t, mc.n_steps, mc.master_seed, mc.n_paths, mc.workers);
    parallel_for(mc.n_paths, mc.workers, [&](std::size_t i) {
      const Mat2& w = (*pts)[i];
      values[i] = a.endpoint_features(w).dot(G * b.endpoint_features(w));
    });
  }
  const BlockSummary s = block_summary(values, values.size(), mc.n_blocks);
  est.value = s.mean;
  est.stderr_re = s.stderr_re;
  est.stderr_im = s.stderr_im;
  est.block_means = s.block_means;
  est.diagnostic = convergence_diagnostic(values, mc.n_blocks);
  if (!est.diagnostic.ok)
    throw statistical_failure_error("toeplitz: standard error ratio over a 16-fold sample increase is " +
                                    std::to_string(est.diagnostic.ratio) + ", expected 4 within a factor 1.5");
  return est;
}

/// <F1, T_{phi_V} F2> with V = e^{t Delta/4} Vt, estimated from subelliptic endpoints.
inline ToeplitzEstimate toeplitz_entry_mult_mc(double t, const BandLimited& Vt, const BandLimited& f1,
                                               const BandLimited& f2, const MonteCarloSettings& mc) {
  return toeplitz_entry_weak_mc(t, 0.0, Vt, transform_C(t, f1), transform_C(t, f2), mc);
}

/// <F1, T_{phi_{V,A}} F2>; F2 is replaced by A_C F2. Target schrodinger_entry(V, A, f1, f2).
inline ToeplitzEstimate toeplitz_entry_diff_mc(double t, const BandLimited& Vt, const LeftInvariantOperator& A,
                                               const BandLimited& f1, const BandLimited& f2,
                                               const MonteCarloSettings& mc) {
  if (A.degree() > kMaxOperatorDegree) throw parameter_domain_error("toeplitz_entry_diff_mc: operator degree exceeds 4");
  return toeplitz_entry_weak_mc(t, 0.0, Vt, transform_C(t, f1), complexify_apply(A, transform_C(t, f2)), mc);
}

/// The s-family: endpoints of theta_C(A + iB)_1 with A variance s - t/2 give
/// <f1, (e^{s Delta/2} Vt) f2>, which tends to the s = t/2 value as s -> t/2.
struct SFamilyDiagnostic {
  double s = 0.0;
  ToeplitzEstimate estimate;
  cplx exact_at_s;
  cplx exact_at_limit;
};

inline SFamilyDiagnostic toeplitz_s_family(double s, double t, const BandLimited& Vt, const BandLimited& f1,
                                           const BandLimited& f2, const MonteCarloSettings& mc) {
  if (!(s > 0.5 * t)) throw parameter_domain_error("toeplitz_s_family: requires s > t/2");
  SFamilyDiagnostic d;
  d.s = s;
  d.estimate = toeplitz_entry_weak_mc(t, s - 0.5 * t, Vt, transform_C(t, f1), transform_C(t, f2), mc);
  d.exact_at_s = schrodinger_entry(heat_flow(s, Vt, FlowDirection::forward), f1, f2);
  d.exact_at_limit = schrodinger_entry(heat_flow(0.5 * t, Vt, FlowDirection::forward), f1, f2);
  return d;
}

/// int_{K_C} conj(F1) phi F2 nu_t dg on a polar rule of radius R, repeated at 2R
/// (with twice the radial nodes) for the stability report.
template <class Symbol>
ToeplitzEstimate toeplitz_entry_quadrature(double t, Symbol&& phi, const HolomorphicObservable& F1,
                                           const HolomorphicObservable& F2, const KCLevels& levels, double R) {
  const HeatKernelKC kernel(t);
  const QuadratureRuleKC rule = kc_quadrature(R, levels);
  if (const auto rep = check_cutoff(rule, t); rep.cutoff_too_small)
    throw truncation_error("toeplitz_entry_quadrature: cutoff too small, nu_t tail fraction " +
                           std::to_string(rep.tail_fraction) + " beyond R = " + std::to_string(R));
  KCLevels wide = levels;
  wide.radial_nodes = 2 * levels.radial_nodes;
  const QuadratureRuleKC rule2 = kc_quadrature(2.0 * R, wide);
  ToeplitzEstimate est;
  est.method = EstimateMethod::quadrature;
  est.value = nu_weighted_inner_product(F1, F2, phi, kernel, rule);
  est.r_stability = std::abs(nu_weighted_inner_product(F1, F2, phi, kernel, rule2) - est.value);
  est.radius = R;
  return est;
}

/// Levels and radius for quadrature of conj(F1) phi F2 nu_t with F_i of spin <= j and a
/// symbol growing at most like a polynomial in |Y|.
inline std::pair<KCLevels, double> toeplitz_quadrature_levels(double t, Spin j, int radial_nodes = 96) {
  KCLevels lv;
  lv.k_j_max = j;
  lv.sphere_degree = std::max(2, 2 * j.twice);
  lv.radial_nodes = radial_nodes;
  return {lv, default_radial_cutoff(t, j.twice) + 1.0};
}

/// Lower estimate of sup_K |Vt|: maximum over the nodes of a fine Haar rule and +-1.
inline double sup_abs_on_K(const BandLimited& Vt) {
  double m = std::max(std::abs(Vt(GroupElementK::identity())), std::abs(Vt(GroupElementK{Mat2{{-1.0, 0.0, 0.0, -1.0}}})));
  const QuadratureRuleK rule = haar_quadrature_K(Spin{std::min(kMaxRuleTwiceSpin, std::max(8, 4 * Vt.j_max().twice))});
  for (const auto& x : rule.nodes) m = std::max(m, std::abs(Vt(x)));
  return m;
}

struct BoundednessReport {
  ToeplitzEstimate estimate;
  double sup_v = 0.0;
  double norm_squared = 0.0;
  double bound = 0.0;  // sup|Vt| ||f||^2 + 3 stderr
  bool pass = false;
};

/// |<F, T_{phi_V} F>| <= sup|Vt| ||f||^2 + 3 stderr.
inline BoundednessReport boundedness_check(double t, const BandLimited& Vt, const BandLimited& f,
                                           const MonteCarloSettings& mc) {
  BoundednessReport r;
  r.estimate = toeplitz_entry_mult_mc(t, Vt, f, f, mc);
  r.sup_v = sup_abs_on_K(Vt);
  r.norm_squared = norm_squared_K(f);
  r.bound = r.sup_v * r.norm_squared + 3.0 * r.estimate.stderr();
  r.pass = std::abs(r.estimate.value) <= r.bound;
  return r;
}

}  // namespace sbq
