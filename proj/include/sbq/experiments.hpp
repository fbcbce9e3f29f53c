#pragma once

// Batch experiments behind the command-line runner: configuration, one runner per
// subcommand, and the report.json / blocks.csv outputs.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sbq/euclid.hpp"
#include "sbq/toeplitz.hpp"

namespace sbq {

inline constexpr int kReportSchemaVersion = 1;

using json = nlohmann::ordered_json;

struct PotentialTerm {
  std::string basis = "constant";  // constant | character | entry
  double spin = 0.0;
  int row = 0;
  int col = 0;
  cplx coeff = 1.0;
};

struct NamedPotential {
  std::string name;
  std::vector<PotentialTerm> terms;
};

struct OperatorTerm {
  std::vector<int> word;
  cplx coeff = 1.0;
};

struct NamedOperator {
  std::string name;
  std::vector<OperatorTerm> terms;
};

struct EuclidSettings {
  std::vector<double> f1 = {1.0, 0.0, 0.5};
  std::vector<double> f2 = {0.4, 1.0, 0.0, 0.2};
  int max_potential_degree = 6;
  std::size_t n_paths = 100000;
};

struct ExperimentConfig {
  double t = 0.5;
  double s = 1.0;
  std::vector<double> moment_spins = {0.5, 1.0};
  std::vector<double> entry_spins = {0.5};
  std::vector<double> diff_target_spins = {0.5, 1.0};
  std::vector<NamedPotential> potentials = {
      {"1", {{"constant", 0.0, 0, 0, 1.0}}},
      {"chi_1/2", {{"character", 0.5, 0, 0, 1.0}}},
      {"chi_1", {{"character", 1.0, 0, 0, 1.0}}},
  };
  std::vector<NamedOperator> operators = {
      {"X3", {{{3}, 1.0}}},
      {"Laplacian", {{{1, 1}, 1.0}, {{2, 2}, 1.0}, {{3, 3}, 1.0}}},
  };
  std::size_t n_paths = 200000;
  int n_steps = 400;
  std::uint64_t master_seed = 1;
  std::size_t n_blocks = 100;
  std::vector<int> pathwise_steps = {100, 200, 400, 800};
  int pathwise_draws = 200;
  int semigroup_grid = 1000;
  int radial_nodes = 96;
  double radial_cutoff = 0.0;  // 0 selects the automatic cutoff
  EuclidSettings euclid;
  std::string out = "out";
};

// ----------------------------------------------------------------------------
// Configuration parsing

namespace detail {

inline int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Line of the first occurrence of "key" in the source text, 0 when absent.
inline int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

class ConfigReader {
 public:
  explicit ConfigReader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& key, const std::string& what) const {
    const int line = line_of_key(text_, key);
    std::string msg = "config error";
    if (line > 0) msg += " at line " + std::to_string(line);
    msg += ", field '" + path + "': " + what;
    throw config_error(msg);
  }

  void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(path, path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) fail(join(path, it.key()), it.key(), "unknown field");
  }

  double number(const json& j, const std::string& path, const std::string& key) const {
    if (!j.is_number()) fail(path, key, "expected a number");
    return j.get<double>();
  }

  double positive(const json& j, const std::string& path, const std::string& key) const {
    const double v = number(j, path, key);
    if (!(v > 0.0)) fail(path, key, "must be positive");
    return v;
  }

  std::int64_t integer(const json& j, const std::string& path, const std::string& key, std::int64_t lo,
                       std::int64_t hi) const {
    if (!j.is_number_integer()) fail(path, key, "expected an integer");
    const auto v = j.get<std::int64_t>();
    if (v < lo || v > hi) fail(path, key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }

  std::uint64_t seed(const json& j, const std::string& path, const std::string& key) const {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
      fail(path, key, "expected a non-negative integer");
    return j.get<std::uint64_t>();
  }

  cplx complex(const json& j, const std::string& path, const std::string& key) const {
    if (j.is_number()) return j.get<double>();
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
      return {j[0].get<double>(), j[1].get<double>()};
    fail(path, key, "expected a number or a [re, im] pair");
  }

  double spin(const json& j, const std::string& path, const std::string& key) const {
    const double v = number(j, path, key);
    const double tw = 2.0 * v;
    if (v < 0.0 || tw != std::round(tw) || tw > kMaxTwiceSpin) fail(path, key, "expected a spin in {0, 1/2, ..., 12}");
    return v;
  }

  std::vector<double> spin_list(const json& j, const std::string& path, const std::string& key) const {
    if (!j.is_array() || j.empty()) fail(path, key, "expected a non-empty array of spins");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(spin(j[i], path + "[" + std::to_string(i) + "]", key));
    return out;
  }

  static std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

 private:
  const std::string& text_;
};

}  // namespace detail

inline json potential_to_json(const NamedPotential& p) {
  json terms = json::array();
  for (const auto& t : p.terms) {
    json o = {{"basis", t.basis}};
    if (t.basis != "constant") o["spin"] = t.spin;
    if (t.basis == "entry") {
      o["row"] = t.row;
      o["col"] = t.col;
    }
    o["coeff"] = json::array({t.coeff.real(), t.coeff.imag()});
    terms.push_back(o);
  }
  return {{"name", p.name}, {"terms", terms}};
}

inline json operator_to_json(const NamedOperator& op) {
  json terms = json::array();
  for (const auto& t : op.terms) terms.push_back({{"word", t.word}, {"coeff", json::array({t.coeff.real(), t.coeff.imag()})}});
  return {{"name", op.name}, {"terms", terms}};
}

/// Resolved configuration; the output directory is excluded so reports do not depend on it.
inline json config_to_json(const ExperimentConfig& c, bool include_out = false) {
  json j;
  j["t"] = c.t;
  j["s"] = c.s;
  j["moment_spins"] = c.moment_spins;
  j["entry_spins"] = c.entry_spins;
  j["diff_target_spins"] = c.diff_target_spins;
  j["potentials"] = json::array();
  for (const auto& p : c.potentials) j["potentials"].push_back(potential_to_json(p));
  j["operators"] = json::array();
  for (const auto& o : c.operators) j["operators"].push_back(operator_to_json(o));
  j["n_paths"] = c.n_paths;
  j["n_steps"] = c.n_steps;
  j["master_seed"] = c.master_seed;
  j["n_blocks"] = c.n_blocks;
  j["pathwise_steps"] = c.pathwise_steps;
  j["pathwise_draws"] = c.pathwise_draws;
  j["semigroup_grid"] = c.semigroup_grid;
  j["radial_nodes"] = c.radial_nodes;
  j["radial_cutoff"] = c.radial_cutoff;
  j["euclid"] = {{"f1", c.euclid.f1},
                 {"f2", c.euclid.f2},
                 {"max_potential_degree", c.euclid.max_potential_degree},
                 {"n_paths", c.euclid.n_paths}};
  if (include_out) j["out"] = c.out;
  return j;
}

/// Parses a JSON configuration over the defaults; errors carry the line and field.
inline ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error("config error at line " + std::to_string(detail::line_of_offset(text, e.byte)) +
                       ": malformed JSON (" + e.what() + ")");
  }
  const detail::ConfigReader rd(text);
  ExperimentConfig c;
  rd.check_keys(root, "",
                {"t", "s", "moment_spins", "entry_spins", "diff_target_spins", "potentials", "operators", "n_paths",
                 "n_steps", "master_seed", "n_blocks", "pathwise_steps", "pathwise_draws", "semigroup_grid",
                 "radial_nodes", "radial_cutoff", "euclid", "out"});
  if (root.contains("t")) c.t = rd.positive(root["t"], "t", "t");
  if (root.contains("s")) c.s = rd.positive(root["s"], "s", "s");
  if (root.contains("moment_spins")) c.moment_spins = rd.spin_list(root["moment_spins"], "moment_spins", "moment_spins");
  if (root.contains("entry_spins")) c.entry_spins = rd.spin_list(root["entry_spins"], "entry_spins", "entry_spins");
  if (root.contains("diff_target_spins"))
    c.diff_target_spins = rd.spin_list(root["diff_target_spins"], "diff_target_spins", "diff_target_spins");
  if (root.contains("potentials")) {
    const json& arr = root["potentials"];
    if (!arr.is_array() || arr.empty()) rd.fail("potentials", "potentials", "expected a non-empty array");
    c.potentials.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "potentials[" + std::to_string(i) + "]";
      rd.check_keys(arr[i], path, {"name", "terms"});
      NamedPotential p;
      if (!arr[i].contains("name") || !arr[i]["name"].is_string()) rd.fail(path + ".name", "potentials", "expected a string");
      p.name = arr[i]["name"].get<std::string>();
      if (!arr[i].contains("terms") || !arr[i]["terms"].is_array())
        rd.fail(path + ".terms", "terms", "expected an array");
      for (std::size_t k = 0; k < arr[i]["terms"].size(); ++k) {
        const json& tj = arr[i]["terms"][k];
        const std::string tp = path + ".terms[" + std::to_string(k) + "]";
        rd.check_keys(tj, tp, {"basis", "spin", "row", "col", "coeff"});
        PotentialTerm term;
        if (!tj.contains("basis") || !tj["basis"].is_string()) rd.fail(tp + ".basis", "basis", "expected a string");
        term.basis = tj["basis"].get<std::string>();
        if (term.basis != "constant" && term.basis != "character" && term.basis != "entry")
          rd.fail(tp + ".basis", "basis", "expected one of constant, character, entry");
        if (term.basis != "constant") {
          if (!tj.contains("spin")) rd.fail(tp + ".spin", "basis", "required for " + term.basis);
          term.spin = rd.spin(tj["spin"], tp + ".spin", "spin");
        }
        if (term.basis == "entry") {
          const int tw = static_cast<int>(std::lround(2.0 * term.spin));
          if (!tj.contains("row") || !tj.contains("col")) rd.fail(tp, "basis", "entry terms need row and col");
          term.row = static_cast<int>(rd.integer(tj["row"], tp + ".row", "row", 0, tw));
          term.col = static_cast<int>(rd.integer(tj["col"], tp + ".col", "col", 0, tw));
        }
        if (tj.contains("coeff")) term.coeff = rd.complex(tj["coeff"], tp + ".coeff", "coeff");
        p.terms.push_back(term);
      }
      c.potentials.push_back(p);
    }
  }
  if (root.contains("operators")) {
    const json& arr = root["operators"];
    if (!arr.is_array() || arr.empty()) rd.fail("operators", "operators", "expected a non-empty array");
    c.operators.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "operators[" + std::to_string(i) + "]";
      rd.check_keys(arr[i], path, {"name", "terms"});
      NamedOperator op;
      if (!arr[i].contains("name") || !arr[i]["name"].is_string()) rd.fail(path + ".name", "operators", "expected a string");
      op.name = arr[i]["name"].get<std::string>();
      if (!arr[i].contains("terms") || !arr[i]["terms"].is_array() || arr[i]["terms"].empty())
        rd.fail(path + ".terms", "terms", "expected a non-empty array");
      for (std::size_t k = 0; k < arr[i]["terms"].size(); ++k) {
        const json& tj = arr[i]["terms"][k];
        const std::string tp = path + ".terms[" + std::to_string(k) + "]";
        rd.check_keys(tj, tp, {"word", "coeff"});
        OperatorTerm term;
        if (!tj.contains("word") || !tj["word"].is_array()) rd.fail(tp + ".word", "word", "expected an array of indices");
        if (tj["word"].size() > static_cast<std::size_t>(kMaxOperatorDegree))
          rd.fail(tp + ".word", "word", "operator degree exceeds 4");
        for (std::size_t l = 0; l < tj["word"].size(); ++l)
          term.word.push_back(static_cast<int>(rd.integer(tj["word"][l], tp + ".word", "word", 1, 3)));
        if (tj.contains("coeff")) term.coeff = rd.complex(tj["coeff"], tp + ".coeff", "coeff");
        op.terms.push_back(term);
      }
      c.operators.push_back(op);
    }
  }
  if (root.contains("n_paths")) c.n_paths = static_cast<std::size_t>(rd.integer(root["n_paths"], "n_paths", "n_paths", 1, 1LL << 40));
  if (root.contains("n_steps")) c.n_steps = static_cast<int>(rd.integer(root["n_steps"], "n_steps", "n_steps", 1, 1 << 20));
  if (root.contains("master_seed")) c.master_seed = rd.seed(root["master_seed"], "master_seed", "master_seed");
  if (root.contains("n_blocks")) c.n_blocks = static_cast<std::size_t>(rd.integer(root["n_blocks"], "n_blocks", "n_blocks", 30, 1 << 20));
  if (c.n_paths < 16 * c.n_blocks) rd.fail("n_paths", "n_paths", "must be at least 16 * n_blocks");
  if (root.contains("pathwise_steps")) {
    const json& a = root["pathwise_steps"];
    if (!a.is_array() || a.size() < 2) rd.fail("pathwise_steps", "pathwise_steps", "expected at least two step counts");
    c.pathwise_steps.clear();
    for (std::size_t i = 0; i < a.size(); ++i)
      c.pathwise_steps.push_back(static_cast<int>(rd.integer(a[i], "pathwise_steps", "pathwise_steps", 1, 1 << 20)));
    const int finest = *std::max_element(c.pathwise_steps.begin(), c.pathwise_steps.end());
    for (int n : c.pathwise_steps)
      if (finest % n != 0) rd.fail("pathwise_steps", "pathwise_steps", "every count must divide the largest");
  }
  if (root.contains("pathwise_draws"))
    c.pathwise_draws = static_cast<int>(rd.integer(root["pathwise_draws"], "pathwise_draws", "pathwise_draws", 1, 1 << 20));
  if (root.contains("semigroup_grid"))
    c.semigroup_grid = static_cast<int>(rd.integer(root["semigroup_grid"], "semigroup_grid", "semigroup_grid", 1, 1 << 20));
  if (root.contains("radial_nodes"))
    c.radial_nodes = static_cast<int>(rd.integer(root["radial_nodes"], "radial_nodes", "radial_nodes", 8, 4096));
  if (root.contains("radial_cutoff")) {
    c.radial_cutoff = rd.number(root["radial_cutoff"], "radial_cutoff", "radial_cutoff");
    if (c.radial_cutoff < 0.0) rd.fail("radial_cutoff", "radial_cutoff", "must be non-negative (0 selects automatic)");
  }
  if (root.contains("euclid")) {
    const json& e = root["euclid"];
    rd.check_keys(e, "euclid", {"f1", "f2", "max_potential_degree", "n_paths"});
    auto coeffs = [&](const char* key) {
      const json& a = e[key];
      if (!a.is_array() || a.empty() || a.size() > static_cast<std::size_t>(kMaxHermiteDegree + 1))
        rd.fail(std::string("euclid.") + key, key, "expected 1 to 81 Hermite coefficients");
      std::vector<double> v;
      for (const auto& x : a) v.push_back(rd.number(x, std::string("euclid.") + key, key));
      return v;
    };
    if (e.contains("f1")) c.euclid.f1 = coeffs("f1");
    if (e.contains("f2")) c.euclid.f2 = coeffs("f2");
    if (e.contains("max_potential_degree"))
      c.euclid.max_potential_degree = static_cast<int>(
          rd.integer(e["max_potential_degree"], "euclid.max_potential_degree", "max_potential_degree", 0, kMaxEuclidPotentialDegree));
    if (e.contains("n_paths"))
      c.euclid.n_paths = static_cast<std::size_t>(rd.integer(e["n_paths"], "euclid.n_paths", "n_paths", 16 * 100, 1LL << 40));
  }
  if (root.contains("out")) {
    if (!root["out"].is_string()) rd.fail("out", "out", "expected a string");
    c.out = root["out"].get<std::string>();
  }
  return c;
}

// ----------------------------------------------------------------------------
// Reports

struct Gate {
  std::string name;
  std::string identity;
  bool pass = false;
  json data;
};

struct BlockRecord {
  std::string estimate;
  std::vector<cplx> block_means;
};

struct Report {
  std::string subcommand;
  json config;
  std::vector<Gate> gates;
  std::vector<BlockRecord> blocks;
  json diagnostics = json::object();

  bool pass() const {
    return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.pass; });
  }

  void add(std::string name, std::string identity, bool ok, json data) {
    gates.push_back({std::move(name), std::move(identity), ok, std::move(data)});
  }

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(gates.begin(), gates.end(), [](const Gate& g) { return !g.pass; }));
  }

  json to_json() const {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    j["subcommand"] = subcommand;
    j["pass"] = pass();
    j["n_gates"] = gates.size();
    j["n_failed"] = failures();
    j["config"] = config;
    j["gates"] = json::array();
    for (const auto& g : gates) {
      json o = {{"name", g.name}, {"identity", g.identity}, {"pass", g.pass}};
      for (auto it = g.data.begin(); it != g.data.end(); ++it) o[it.key()] = it.value();
      j["gates"].push_back(o);
    }
    if (!diagnostics.empty()) j["diagnostics"] = diagnostics;
    return j;
  }

  std::string csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "estimate,block,re,im\n";
    for (const auto& b : blocks)
      for (std::size_t i = 0; i < b.block_means.size(); ++i)
        os << b.estimate << ',' << i << ',' << b.block_means[i].real() << ',' << b.block_means[i].imag() << '\n';
    return os.str();
  }
};

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json estimate_json(const ToeplitzEstimate& e) {
  json j;
  j["value"] = complex_json(e.value);
  j["stderr"] = e.stderr();
  j["stderr_re"] = e.stderr_re;
  j["stderr_im"] = e.stderr_im;
  j["method"] = to_string(e.method);
  if (e.method == EstimateMethod::monte_carlo) {
    j["n_paths"] = e.n_paths;
    j["n_steps"] = e.n_steps;
    j["master_seed"] = e.master_seed;
    j["seed_streams"] = e.seed_streams;
    j["stderr_ratio_n16_to_n"] = e.diagnostic.ratio;
  } else {
    j["radius"] = e.radius;
    j["r_doubling_change"] = e.r_stability;
  }
  return j;
}

/// |estimate - exact| <= k * stderr, stderr the combined complex standard error.
inline bool within_stderr(const ToeplitzEstimate& e, cplx exact, double k = 3.0) {
  return std::abs(e.value - exact) <= k * e.stderr() + 1e-12 * std::max(1.0, std::abs(exact));
}

// ----------------------------------------------------------------------------
// Builders

inline BandLimited build_potential(const NamedPotential& p) {
  BandLimited v;
  for (const auto& t : p.terms) {
    const Spin j = Spin::from_double(t.spin);
    if (t.basis == "constant")
      v = v + BandLimited::constant(t.coeff);
    else if (t.basis == "character")
      v = v + t.coeff * BandLimited::character(j);
    else
      v = v + BandLimited::matrix_entry(j, t.row, t.col, t.coeff);
  }
  return v;
}

inline LeftInvariantOperator build_operator(const NamedOperator& op) {
  std::vector<LeftInvariantOperator::Term> terms;
  for (const auto& t : op.terms) terms.push_back({t.coeff, t.word});
  return LeftInvariantOperator(std::move(terms));
}

/// "1/2", "1", "-3/2", ...
inline std::string spin_label(int twice) {
  std::ostringstream os;
  if (twice % 2 == 0)
    os << twice / 2;
  else
    os << twice << "/2";
  return os.str();
}

struct NamedEntry {
  std::string label;
  BandLimited f;
};

/// All matrix entries D^j_{ab} for the listed spins, labelled "D^j_{m m'}".
inline std::vector<NamedEntry> entry_basis(const std::vector<double>& spins) {
  std::vector<NamedEntry> out;
  for (double sp : spins) {
    const Spin j = Spin::from_double(sp);
    const auto half = spin_label;
    for (int r = 0; r <= j.twice; ++r)
      for (int c = 0; c <= j.twice; ++c) {
        const int m = j.twice - 2 * r, mp = j.twice - 2 * c;
        out.push_back({"D^" + half(j.twice) + "_{" + half(m) + "," + half(mp) + "}", BandLimited::matrix_entry(j, r, c)});
      }
  }
  return out;
}

inline MonteCarloSettings mc_settings(const ExperimentConfig& c, unsigned workers) {
  MonteCarloSettings mc;
  mc.n_paths = c.n_paths;
  mc.n_steps = c.n_steps;
  mc.master_seed = c.master_seed;
  mc.n_blocks = c.n_blocks;
  mc.workers = workers;
  return mc;
}

inline Report make_report(const std::string& sub, const ExperimentConfig& c) {
  Report r;
  r.subcommand = sub;
  r.config = config_to_json(c);
  return r;
}

// ----------------------------------------------------------------------------
// Runners

/// Calibration of nu_t: beta, N(t) and c_J, with the mass and unitarity identities.
inline Report run_calibrate(const ExperimentConfig& c, unsigned = 1) {
  Report r = make_report("calibrate", c);
  const CalibrationRecord rec = calibrate(c.t);
  const json record = {{"t", rec.t},
                       {"beta", rec.beta},
                       {"c_J", rec.c_J},
                       {"normalization", rec.normalization},
                       {"analytic_normalization", rec.analytic_normalization},
                       {"iterations", rec.iterations}};
  r.diagnostics["calibration_record"] = record;
  r.add("nu_mass", "int_{K_C} nu_t dg = Vol(K) = 16 pi^2", rec.mass_relative_residual <= 1e-5,
        {{"relative_residual", rec.mass_relative_residual}, {"tolerance", 1e-5}});
  r.add("unitarity_spin_1/2", "<C_t D_a, C_t D_b>_nu = <D_a, D_b>_{L^2(K)}, spin 1/2", rec.unitarity_half_residual <= 1e-5,
        {{"relative_residual", rec.unitarity_half_residual}, {"tolerance", 1e-5}});
  r.add("unitarity_spin_1", "<C_t D_a, C_t D_b>_nu = <D_a, D_b>_{L^2(K)}, spin 1", rec.unitarity_one_residual <= 1e-5,
        {{"relative_residual", rec.unitarity_one_residual}, {"tolerance", 1e-5}});
  r.add("beta_matches_curvature", "fitted beta equals the curvature value 1",
        std::abs(rec.beta - 1.0) <= 1e-6, {{"beta", rec.beta}, {"tolerance", 1e-6}});
  r.add("normalization_closed_form", "N(t) = (c_J pi^{3/2} t^{3/2} e^{beta^2 t/4})^{-1}",
        std::abs(rec.normalization / rec.analytic_normalization - 1.0) <= 1e-5,
        {{"relative_residual", std::abs(rec.normalization / rec.analytic_normalization - 1.0)}, {"tolerance", 1e-5}});
  return r;
}

/// Heat kernel on K: semigroup rho_t * rho_s = rho_{t+s} on an angle grid, unit mass,
/// and agreement of the image-sum and character-series evaluations.
inline Report run_heat_check(const ExperimentConfig& c, unsigned workers = 1) {
  Report r = make_report("heat-check", c);
  const double t = c.t, s = c.s;
  const HeatKernelK kt = HeatKernelK::certified(t), ks = HeatKernelK::certified(s), kts = HeatKernelK::certified(t + s);
  const ClassConvolution conv;
  const int n = c.semigroup_grid;
  const auto errs = parallel_map<double>(n, workers, [&](std::size_t i) {
    // class functions depend on the rotation angle only: the grid runs over (0, 2 pi)
    const double theta = 2.0 * std::numbers::pi * (i + 0.5) / n;
    const double v = conv([&](double a) { return kt.of_angle(a); }, [&](double a) { return ks.of_angle(a); }, theta);
    return std::abs(v - kts.of_angle(theta));
  });
  const double worst = *std::max_element(errs.begin(), errs.end());
  r.add("semigroup", "rho_t * rho_s = rho_{t+s}", worst <= 1e-8,
        {{"t", t}, {"s", s}, {"grid_points", n}, {"sup_error", worst}, {"tolerance", 1e-8}});

  const QuadratureRuleK rule = haar_quadrature_K(Spin{std::min(kMaxRuleTwiceSpin, kt.jmax().twice)});
  const double mass = rule.integrate([&](const GroupElementK& x) { return kt.on_K(x); });
  r.add("unit_mass", "int_K rho_t dx = 1", std::abs(mass - 1.0) <= 1e-10,
        {{"t", t}, {"mass", mass}, {"tolerance", 1e-10}});

  double series_gap = 0.0, peak = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double theta = 2.0 * std::numbers::pi * (i + 0.5) / 200;
    const GroupElementK x = exp_algebra(AlgebraVector{{0.0, 0.0, theta}});
    series_gap = std::max(series_gap, std::abs(kt.on_K(x) - kt.series_on_K(x)));
    peak = std::max(peak, std::abs(kt.on_K(x)));
  }
  r.add("image_sum_matches_series", "image sum = character series for rho_t on K", series_gap <= 1e-12 * peak,
        {{"t", t}, {"sup_difference", series_gap}, {"tolerance", 1e-12 * peak}});
  return r;
}

/// Transform C_t: unitarity on matrix entries, exact inversion on coefficients, and the
/// quadrature inversion oracle C_t^* at a point.
inline Report run_transform_check(const ExperimentConfig& c, unsigned = 1) {
  Report r = make_report("transform-check", c);
  const double t = c.t;
  std::set<double> spins(c.moment_spins.begin(), c.moment_spins.end());
  spins.insert(c.entry_spins.begin(), c.entry_spins.end());
  const HeatKernelKC kernel(t);
  for (double sp : spins) {
    const Spin j = Spin::from_double(sp);
    const QuadratureRuleKC rule = transform_rule(t, j, c.radial_nodes);
    const double res = detail::unitarity_residual(t, j, rule, kernel);
    r.add("unitarity_spin_" + spin_label(j.twice), "||C_t f||_nu = ||f||_{L^2(K)} on spin-j entries",
          res <= 1e-5, {{"t", t}, {"spin", sp}, {"relative_residual", res}, {"tolerance", 1e-5}});
  }
  BandLimited f = BandLimited::constant(0.3);
  f.add_term(Spin{1}, 0, 1, cplx(1.0, 0.5));
  f.add_term(Spin{2}, 2, 1, cplx(-0.7, 0.2));
  const double round_trip = max_coefficient_distance(inverse_C(t, transform_C(t, f)), f);
  r.add("inverse_round_trip", "C_t^{-1} C_t f = f", round_trip <= 1e-12,
        {{"max_coefficient_error", round_trip}, {"tolerance", 1e-12}});
  const GroupElementK x0 = euler_zyz(0.4, 1.1, -0.3);
  const auto oracle = inverse_C_quadrature(t, transform_C(t, f), x0);
  const double err = std::abs(oracle.value - f(x0));
  r.add("adjoint_quadrature_oracle", "(C_t^* C_t f)(x) = f(x) by quadrature over K_C", err <= 1e-4,
        {{"error", err}, {"radius", oracle.radius}, {"last_change", oracle.last_change}, {"tolerance", 1e-4}});
  return r;
}

namespace detail {

inline double fit_loglog_slope(const std::vector<double>& n, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double lx = std::log(n[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return -(m * sxy - sx * sy) / (m * sxx - sx * sx);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace detail

namespace detail {

/// One set of endpoints for (var_a, var_b), shared by every spin in the list.
inline void moment_gates(Report& r, const ExperimentConfig& c, unsigned workers, double var_a, double var_b,
                         bool complex_path, const std::string& prefix, const std::string& identity, double exponent) {
  const std::vector<Spin> spins = [&] {
    std::vector<Spin> v;
    for (double sp : c.moment_spins) v.push_back(Spin::from_double(sp));
    return v;
  }();
  const auto values = parallel_map<std::vector<cplx>>(c.n_paths, workers, [&](std::size_t i) {
    const GroupElementKC g = complex_path ? sample_endpoint_KC(var_a, var_b, c.n_steps, c.master_seed, i)
                                          : GroupElementKC::from_k(sample_endpoint_K(var_a, c.n_steps, c.master_seed, i));
    std::vector<cplx> out;
    for (const Spin& j : spins) out.push_back(character(j, g));
    return out;
  });
  for (std::size_t k = 0; k < spins.size(); ++k) {
    const Spin j = spins[k];
    std::vector<cplx> v(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) v[i] = values[i][k];
    const double exact = j.dim() * std::exp(-0.5 * exponent * j.casimir());
    const BlockSummary bs = block_summary(v, v.size(), c.n_blocks);
    const double se = bs.stderr();
    const double z = se > 0.0 ? std::abs(bs.mean - exact) / se : 0.0;
    const std::string name = prefix + "_spin_" + spin_label(j.twice);
    r.add(name, identity, z <= 3.0,
          {{"spin", j.value()},
           {"value", complex_json(bs.mean)},
           {"exact", exact},
           {"stderr", se},
           {"z", z},
           {"n_paths", c.n_paths},
           {"n_steps", c.n_steps},
           {"master_seed", c.master_seed},
           {"var_a", var_a},
           {"var_b", var_b}});
    r.blocks.push_back({name, bs.block_means});
  }
}

}  // namespace detail

/// E chi_j(theta(A)_1) for A of variance s.
inline void sde_real_moments(Report& r, const ExperimentConfig& c, unsigned workers) {
  detail::moment_gates(r, c, workers, c.s, 0.0, false, "real_moment", "E chi_j(theta(A)_1) = (2j+1) e^{-s c_j/2}", c.s);
}

/// E chi_j(theta_C(A + iB)_1) under mu_{s,t}, for the configured s and for s = t/2.
inline void sde_complex_moments(Report& r, const ExperimentConfig& c, unsigned workers) {
  const double t = c.t;
  std::vector<double> s_values;
  if (c.s >= 0.5 * t) s_values.push_back(c.s);
  if (std::abs(c.s - 0.5 * t) > 1e-15) s_values.push_back(0.5 * t);
  for (double sv : s_values) {
    std::ostringstream nm;
    nm << "complex_moment_s" << sv << "_t" << t;
    detail::moment_gates(r, c, workers, sv - 0.5 * t, 0.5 * t, true, nm.str(),
                         "E chi_j(theta_C(A + iB)_1) = (2j+1) e^{-(s - t) c_j/2}", sv - t);
  }
}

/// theta_C(A + iB)_1 = theta_C(iB')_1 theta(A)_1 under refinement with common noise,
/// and the same factorization along a smooth path.
inline void sde_pathwise(Report& r, const ExperimentConfig& c, unsigned workers) {
  const double s = c.s, t = c.t;
  const int finest = *std::max_element(c.pathwise_steps.begin(), c.pathwise_steps.end());
  const double var_a = std::max(s - 0.5 * t, 0.0), var_b = 0.5 * t;
  const auto residuals = parallel_map<std::vector<double>>(c.pathwise_draws, workers, [&](std::size_t i) {
    const auto [a, b] = sample_path_pair(var_a, var_b, finest, derive_seed(c.master_seed, 3, 0), i);
    std::vector<double> out;
    for (int n : c.pathwise_steps) out.push_back(pathwise_identity_residual(coarsen(a, finest / n), coarsen(b, finest / n)));
    return out;
  });
  std::vector<double> ns, med;
  for (std::size_t k = 0; k < c.pathwise_steps.size(); ++k) {
    std::vector<double> col;
    for (const auto& row : residuals) col.push_back(row[k]);
    ns.push_back(c.pathwise_steps[k]);
    med.push_back(detail::median(col));
  }
  const double slope = detail::fit_loglog_slope(ns, med);
  r.add("pathwise_brownian", "theta_C(A + iB)_1 = theta_C(i B')_1 theta(A)_1, median residual slope", slope >= 0.4,
        {{"n_steps", ns}, {"median_residual", med}, {"slope", slope}, {"min_slope", 0.4}, {"draws", c.pathwise_draws}});

  std::vector<double> det;
  const AlgebraVector av{{0.8, -0.3, 0.5}}, bv{{0.2, 0.6, -0.4}};
  for (int n : c.pathwise_steps) {
    auto constant = [n](const AlgebraVector& v) {
      BrownianPath p{n, 1.0 / n, 0.0, 0, {}};
      p.increments.assign(n, AlgebraVector{{v.coords[0] / n, v.coords[1] / n, v.coords[2] / n}});
      return p;
    };
    det.push_back(pathwise_identity_residual(constant(av), constant(bv)));
  }
  const double det_slope = detail::fit_loglog_slope(ns, det);
  r.add("pathwise_deterministic", "smooth-path factorization residual decays at least like 1/n", det_slope >= 0.95,
        {{"n_steps", ns}, {"residual", det}, {"slope", det_slope}, {"min_slope", 0.95}});
}

/// Endpoint laws of the Ito maps and the pathwise factorization.
inline Report run_sde_check(const ExperimentConfig& c, unsigned workers = 1) {
  Report r = make_report("sde-check", c);
  sde_real_moments(r, c, workers);
  sde_complex_moments(r, c, workers);
  sde_pathwise(r, c, workers);
  return r;
}

/// Multiplication theorem over potentials and matrix entries, with the boundedness bound.
inline Report run_toeplitz_mult(const ExperimentConfig& c, unsigned workers = 1) {
  Report r = make_report("toeplitz-mult", c);
  const double t = c.t;
  const auto mc = mc_settings(c, workers);
  const auto basis = entry_basis(c.entry_spins);
  for (const auto& pot : c.potentials) {
    const BandLimited Vt = build_potential(pot);
    const BandLimited V = heat_flow(0.5 * t, Vt, FlowDirection::forward);
    const double sup_v = sup_abs_on_K(Vt);
    struct Row {
      std::string name;
      ToeplitzEstimate e;
      cplx exact;
    };
    std::vector<Row> rows;
    double largest = 0.0;
    for (const auto& f1 : basis)
      for (const auto& f2 : basis) {
        Row row{"mult[" + pot.name + "](" + f1.label + "," + f2.label + ")", toeplitz_entry_mult_mc(t, Vt, f1.f, f2.f, mc),
                schrodinger_entry(V, f1.f, f2.f)};
        largest = std::max(largest, std::abs(row.exact));
        rows.push_back(std::move(row));
        if (&f1 == &f2) {
          const double nf = norm_squared_K(f1.f);
          const double bound = sup_v * nf + 3.0 * rows.back().e.stderr();
          const double mag = std::abs(rows.back().e.value);
          r.add("bounded[" + pot.name + "](" + f1.label + ")", "|<F, T_{phi_V} F>| <= sup|Vt| ||f||^2 + 3 stderr",
                mag <= bound, {{"t", t}, {"magnitude", mag}, {"sup_abs_potential", sup_v}, {"norm_squared", nf},
                               {"bound", bound}});
        }
      }
    for (const auto& row : rows) {
      json d = estimate_json(row.e);
      d["t"] = t;
      d["exact"] = complex_json(row.exact);
      d["deviation"] = std::abs(row.e.value - row.exact);
      d["stderr_limit"] = 0.01 * largest;
      const bool agree = within_stderr(row.e, row.exact);
      const bool precise = row.e.stderr() <= 0.01 * largest;
      d["agree_3_stderr"] = agree;
      d["stderr_within_1pct"] = precise;
      r.add(row.name, "<C_t f1, T_{phi_V} C_t f2> = <f1, e^{t Delta/4}Vt f2>", agree && precise, d);
      r.blocks.push_back({row.name, row.e.block_means});
    }
  }
  return r;
}

/// Differential-operator theorem, stochastic route over operators, potentials and entries.
inline void toeplitz_diff_stochastic(Report& r, const ExperimentConfig& c, unsigned workers) {
  const double t = c.t;
  const auto mc = mc_settings(c, workers);
  const auto left = entry_basis(c.entry_spins);
  const auto right = entry_basis(c.diff_target_spins);
  for (const auto& opn : c.operators) {
    const LeftInvariantOperator A = build_operator(opn);
    for (const auto& pot : c.potentials) {
      const BandLimited Vt = build_potential(pot);
      const BandLimited V = heat_flow(0.5 * t, Vt, FlowDirection::forward);
      for (const auto& f1 : left)
        for (const auto& f2 : right) {
          const std::string name = "diff[" + opn.name + "," + pot.name + "](" + f1.label + "," + f2.label + ")";
          const auto e = toeplitz_entry_diff_mc(t, Vt, A, f1.f, f2.f, mc);
          const cplx exact = schrodinger_entry(V, A, f1.f, f2.f);
          json d = estimate_json(e);
          d["t"] = t;
          d["exact"] = complex_json(exact);
          d["deviation"] = std::abs(e.value - exact);
          r.add(name, "<C_t f1, T_{phi_{V,A}} C_t f2> = <f1, V A f2>", within_stderr(e, exact), d);
          r.blocks.push_back({name, e.block_means});
        }
    }
  }

}

/// Differential-operator theorem, V = 1 route: the finite-difference symbol of the Laplacian
/// integrated against nu_t, and the radial profile of that symbol.
inline void toeplitz_diff_deterministic(Report& r, const ExperimentConfig& c) {
  const double t = c.t;
  const auto left = entry_basis(c.entry_spins);
  const HeatKernelKC kernel(t);
  const LeftInvariantOperator lap = LeftInvariantOperator::laplacian();
  auto phi = [&](const GroupElementKC& g) { return symbol_phi(lap, kernel, g); };
  double jmax = 0.0;
  for (double sp : c.entry_spins) jmax = std::max(jmax, sp);
  auto [lv, R] = toeplitz_quadrature_levels(t, Spin::from_double(jmax), c.radial_nodes);
  if (c.radial_cutoff > 0.0) R = c.radial_cutoff;
  for (const auto& f1 : left) {
    if (f1.f.j_max().value() > jmax) continue;
    for (const auto& f2 : left) {
      const auto e = toeplitz_entry_quadrature(t, phi, transform_C(t, f1.f), transform_C(t, f2.f), lv, R);
      const cplx exact = schrodinger_entry(BandLimited::constant(1.0), lap, f1.f, f2.f);
      const double scale = std::sqrt(norm_squared_K(f1.f) * norm_squared_K(f2.f)) * std::max(1e-300, f2.f.j_max().casimir());
      const double rel = std::abs(e.value - exact) / scale;
      json d = estimate_json(e);
      d["t"] = t;
      d["exact"] = complex_json(exact);
      d["relative_error"] = rel;
      d["tolerance"] = 1e-3;
      r.add("quad[Laplacian](" + f1.label + "," + f2.label + ")",
            "int conj(F1) F2 phi_{1,Delta} nu_t dg = -j(j+1) <f1, f2>", rel <= 1e-3, d);
    }
  }

  // radial profile of phi_{1,Delta}: a degree-1 polynomial in |Y|^2
  std::vector<double> rs, vals;
  for (int i = 0; i <= 60; ++i) {
    const double rr = 3.0 * i / 60;
    const double th = 0.7 + 0.1 * i, ph = 0.3 * i;
    const AlgebraVector y{{rr * std::sin(th) * std::cos(ph), rr * std::sin(th) * std::sin(ph), rr * std::cos(th)}};
    const GroupElementKC g = GroupElementKC::from_k(euler_zyz(0.1 * i, 0.5, -0.2 * i)) * exp_imaginary(y);
    rs.push_back(rr);
    vals.push_back(phi(g).real());
  }
  double s0 = 0, s1 = 0, s2 = 0, v0 = 0, v1 = 0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double u = rs[i] * rs[i];
    s0 += 1;
    s1 += u;
    s2 += u * u;
    v0 += vals[i];
    v1 += vals[i] * u;
  }
  const double b = (s0 * v1 - s1 * v0) / (s0 * s2 - s1 * s1), a = (v0 - b * s1) / s0;
  double worst = 0.0;
  for (std::size_t i = 0; i < rs.size(); ++i) worst = std::max(worst, std::abs(vals[i] - (a + b * rs[i] * rs[i])));
  r.add("laplacian_symbol_radial_fit", "phi_{1,Delta} is a polynomial of degree 1 in |Y|^2 on r in [0, 3]",
        worst <= 1e-4,
        {{"t", t}, {"intercept", a}, {"slope", b}, {"max_residual", worst}, {"tolerance", 1e-4},
         {"closed_form_intercept", laplacian_symbol_exact(t, 0.0)}, {"closed_form_slope", -1.0 / (t * t)}});
}

inline Report run_toeplitz_diff(const ExperimentConfig& c, unsigned workers = 1) {
  Report r = make_report("toeplitz-diff", c);
  toeplitz_diff_stochastic(r, c, workers);
  toeplitz_diff_deterministic(r, c);
  return r;
}

/// Flat baseline: Euclidean Toeplitz identity for polynomial potentials up to the cap.
inline Report run_euclid_baseline(const ExperimentConfig& c, unsigned workers = 1) {
  Report r = make_report("euclid-baseline", c);
  auto expand = [](const std::vector<double>& v) {
    std::vector<cplx> z(v.begin(), v.end());
    return HermiteExpansion(z);
  };
  const HermiteExpansion f1 = expand(c.euclid.f1), f2 = expand(c.euclid.f2);
  MonteCarloSettings mc;
  mc.n_paths = c.euclid.n_paths;
  mc.master_seed = c.master_seed;
  mc.n_blocks = c.n_blocks;
  mc.workers = workers;
  for (int d = 0; d <= c.euclid.max_potential_degree; ++d) {
    Polynomial V{std::vector<double>(d + 1, 0.0)};
    for (int k = 0; k <= d; ++k) V.coeffs[k] = 1.0 / (1.0 + k);
    const auto rep = euclid_toeplitz_check(c.t, V, f1, f2, mc);
    const std::string name = "euclid_degree_" + std::to_string(d);
    json det = {{"t", c.t},
                {"schrodinger", complex_json(rep.schrodinger)},
                {"segal_bargmann", complex_json(rep.segal_bargmann)},
                {"error", rep.deterministic_error},
                {"tolerance", 1e-8}};
    r.add(name + "_deterministic", "<f1, e^{t Delta/4}Vt f2> = int conj(F1) Vt(Re z) F2 nu_t d^2z", rep.deterministic_pass,
          det);
    json m = estimate_json(rep.mc);
    m["exact"] = complex_json(rep.schrodinger);
    r.add(name + "_mc", "weak Monte Carlo estimator reproduces the flat identity", within_stderr(rep.mc, rep.schrodinger),
          m);
    r.blocks.push_back({name + "_mc", rep.mc.block_means});
  }
  return r;
}

using Runner = std::function<Report(const ExperimentConfig&, unsigned)>;

inline const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> m = {
      {"calibrate", run_calibrate},         {"heat-check", run_heat_check},
      {"transform-check", run_transform_check}, {"sde-check", run_sde_check},
      {"toeplitz-mult", run_toeplitz_mult}, {"toeplitz-diff", run_toeplitz_diff},
      {"euclid-baseline", run_euclid_baseline},
  };
  return m;
}

}  // namespace sbq
