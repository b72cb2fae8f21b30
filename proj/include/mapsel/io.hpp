#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mapsel/diagnostics.hpp"
#include "mapsel/risk.hpp"
#include "mapsel/ssvs.hpp"

namespace mapsel {

using json = nlohmann::ordered_json;

class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// shortest round-trip decimal form; keeps CSV output byte-deterministic
inline std::string fmt_double(double v) {
  std::array<char, 40> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

// ---------------------------------------------------------------------------
// CSV (comma-separated, header row required, '.' decimal, UTF-8)

struct NumericCsv {
  std::vector<std::string> names;
  Matrix values;  // rows x columns
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

}  // namespace detail

inline NumericCsv read_numeric_csv(std::istream& in) {
  NumericCsv out;
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw InputError("CSV: empty input (line 1)");
  ++lineno;
  out.names = detail::split_csv_line(line);
  if (out.names.empty() || (out.names.size() == 1 && out.names[0].empty()))
    throw InputError("CSV: empty header (line 1)");
  for (const auto& name : out.names)
    if (name.empty()) throw InputError("CSV: empty column name (line 1)");

  const std::size_t cols = out.names.size();
  std::vector<double> data;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;  // ignore blank lines
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != cols)
      throw InputError("CSV: expected " + std::to_string(cols) + " cells, got " +
                       std::to_string(cells.size()) + " (line " +
                       std::to_string(lineno) + ")");
    for (const auto& cell : cells) {
      double v = 0.0;
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      const auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(v))
        throw InputError("CSV: non-numeric cell '" + cell + "' (line " +
                         std::to_string(lineno) + ")");
      data.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw InputError("CSV: no data rows (line " +
                                  std::to_string(lineno) + ")");
  out.values.resize(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out.values(i, j) = data[i * cols + j];
  return out;
}

inline NumericCsv read_numeric_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file: " + path);
  return read_numeric_csv(in);
}

// split a data table into (y, X, predictor names); the response column must
// be named exactly "y"
struct RegressionData {
  Vector y;
  Matrix X;
  std::vector<std::string> names;
};

inline RegressionData split_response(const NumericCsv& csv) {
  int ycol = -1;
  for (std::size_t j = 0; j < csv.names.size(); ++j)
    if (csv.names[j] == "y") {
      if (ycol >= 0) throw InputError("CSV: multiple columns named 'y'");
      ycol = int(j);
    }
  if (ycol < 0) throw InputError("CSV: no response column named 'y'");
  RegressionData d;
  const int rows = int(csv.values.rows());
  const int cols = int(csv.values.cols());
  d.y = csv.values.col(ycol);
  d.X.resize(rows, cols - 1);
  int c = 0;
  for (int j = 0; j < cols; ++j) {
    if (j == ycol) continue;
    d.X.col(c) = csv.values.col(j);
    d.names.push_back(csv.names[j]);
    ++c;
  }
  return d;
}

// ---------------------------------------------------------------------------
// JSON conversions

}  // namespace mapsel

namespace nlohmann {

// Eigen types live outside namespace mapsel, so ADL needs this specialization
template <>
struct adl_serializer<mapsel::Matrix> {
  template <typename J>
  static void to_json(J& j, const mapsel::Matrix& m) {
    j = J::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      J row = J::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
      j.push_back(std::move(row));
    }
  }
  template <typename J>
  static void from_json(const J& j, mapsel::Matrix& m) {
    const std::size_t rows = j.size();
    const std::size_t cols = rows > 0 ? j.at(0).size() : 0;
    m.resize(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
      if (j.at(i).size() != cols)
        throw mapsel::InputError("matrix JSON: ragged rows");
      for (std::size_t c = 0; c < cols; ++c)
        m(i, c) = j.at(i).at(c).template get<double>();
    }
  }
};

}  // namespace nlohmann

namespace mapsel {

inline void to_json(json& j, const ModelIndicator& m) { j = m.indices(); }
inline void from_json(const json& j, ModelIndicator& m) {
  m = ModelIndicator(j.get<std::vector<int>>());
}

inline void to_json(json& j, const HyperParams& hp) {
  j = json{{"gamma", hp.gamma}, {"sigma_sq", hp.sigma_sq}};
}
inline void from_json(const json& j, HyperParams& hp) {
  hp.gamma = j.at("gamma").get<double>();
  hp.sigma_sq = j.at("sigma_sq").get<double>();
}

inline std::string to_string(PenaltyCriterion c) {
  switch (c) {
    case PenaltyCriterion::aic: return "aic";
    case PenaltyCriterion::bic: return "bic";
    case PenaltyCriterion::ric: return "ric";
    case PenaltyCriterion::fixed_lambda: return "fixed_lambda";
  }
  return "?";
}
inline PenaltyCriterion criterion_from_string(const std::string& s) {
  if (s == "aic") return PenaltyCriterion::aic;
  if (s == "bic") return PenaltyCriterion::bic;
  if (s == "ric") return PenaltyCriterion::ric;
  if (s == "fixed_lambda") return PenaltyCriterion::fixed_lambda;
  throw InputError("unknown penalty criterion: " + s);
}

inline void to_json(json& j, const PriorSpec& prior) {
  switch (prior.kind) {
    case PriorKind::binomial:
      j = json{{"kind", "binomial"}};
      if (prior.calibrate) {
        j["criterion"] = to_string(*prior.calibrate);
        if (*prior.calibrate == PenaltyCriterion::fixed_lambda)
          j["lambda"] = prior.lambda;
      } else {
        j["xi"] = prior.xi;
      }
      break;
    case PriorKind::geometric:
      j = json{{"kind", "geometric"}, {"q", prior.q}};
      break;
    case PriorKind::uniform:
      j = json{{"kind", "uniform"}};
      break;
    case PriorKind::table:
      j = json{{"kind", "table"}, {"weights", prior.weights}};
      break;
  }
}

inline void from_json(const json& j, PriorSpec& prior) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "binomial") {
    if (j.contains("criterion")) {
      prior = PriorSpec::binomial_calibrated(
          criterion_from_string(j.at("criterion").get<std::string>()),
          j.contains("lambda") ? j.at("lambda").get<double>()
                               : std::numeric_limits<double>::quiet_NaN());
    } else {
      prior = PriorSpec::binomial(j.at("xi").get<double>());
    }
  } else if (kind == "geometric") {
    prior = PriorSpec::geometric(j.at("q").get<double>());
  } else if (kind == "uniform") {
    prior = PriorSpec::uniform();
  } else if (kind == "table") {
    prior = PriorSpec::table(j.at("weights").get<std::vector<double>>());
  } else {
    throw InputError("unknown prior kind: " + kind);
  }
}

inline void to_json(json& j, const GibbsConfig& cfg) {
  j = json{{"sweeps", cfg.sweeps},
           {"burn_in", cfg.burn_in},
           {"seed", cfg.seed},
           {"chains", cfg.chains},
           {"top_k", cfg.top_k}};
}
inline void from_json(const json& j, GibbsConfig& cfg) {
  cfg = GibbsConfig{};
  if (j.contains("sweeps")) cfg.sweeps = j.at("sweeps").get<std::uint64_t>();
  if (j.contains("burn_in")) cfg.burn_in = j.at("burn_in").get<std::uint64_t>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("chains")) cfg.chains = j.at("chains").get<int>();
  if (j.contains("top_k")) cfg.top_k = j.at("top_k").get<int>();
}

inline void to_json(json& j, const SparseSpectrum& s) {
  j = json{{"k", s.k},
           {"phi_min", s.phi_min},
           {"phi_max", s.phi_max},
           {"tau", s.tau},
           {"exact", s.exact},
           {"subsets_evaluated", s.subsets_evaluated},
           {"beyond_rank", s.beyond_rank}};
}
inline void from_json(const json& j, SparseSpectrum& s) {
  s.k = j.at("k").get<int>();
  s.phi_min = j.at("phi_min").get<double>();
  s.phi_max = j.at("phi_max").get<double>();
  s.tau = j.at("tau").get<double>();
  s.exact = j.at("exact").get<bool>();
  s.subsets_evaluated = j.at("subsets_evaluated").get<std::uint64_t>();
  s.beyond_rank = j.value("beyond_rank", false);
}

inline void to_json(json& j, const MulticollinearityProfile& m) {
  j = json{{"k", m.k},
           {"k_prime", m.k_prime},
           {"tau_2k", m.tau_2k},
           {"defined", m.defined},
           {"exact", m.exact},
           {"evaluated", m.evaluated}};
  if (m.defined) j["tilde_phi"] = m.tilde_phi;
  if (!m.note.empty()) j["note"] = m.note;
}
inline void from_json(const json& j, MulticollinearityProfile& m) {
  m = MulticollinearityProfile{};
  m.k = j.at("k").get<int>();
  m.k_prime = j.at("k_prime").get<int>();
  m.tau_2k = j.value("tau_2k", 0.0);
  m.defined = j.at("defined").get<bool>();
  m.exact = j.at("exact").get<bool>();
  m.evaluated = j.at("evaluated").get<std::uint64_t>();
  if (j.contains("tilde_phi")) m.tilde_phi = j.at("tilde_phi").get<double>();
  if (j.contains("note")) m.note = j.at("note").get<std::string>();
}

inline void to_json(json& j, const AssumptionDRow& r) {
  j = json{{"k", r.k},
           {"tau_2k", r.tau_2k},
           {"tau_k_product", r.tau_k_product},
           {"d1", r.d1},
           {"phi_min_2k", r.phi_min_2k},
           {"profile", r.profile},
           {"d3", r.d3}};
  if (std::isfinite(r.product)) j["product"] = r.product;
}
inline void from_json(const json& j, AssumptionDRow& r) {
  r = AssumptionDRow{};
  r.k = j.at("k").get<int>();
  r.tau_2k = j.at("tau_2k").get<double>();
  r.tau_k_product = j.at("tau_k_product").get<double>();
  r.d1 = j.at("d1").get<bool>();
  r.phi_min_2k = j.at("phi_min_2k").get<double>();
  r.profile = j.at("profile").get<MulticollinearityProfile>();
  r.d3 = j.at("d3").get<bool>();
  if (j.contains("product")) r.product = j.at("product").get<double>();
}

inline void to_json(json& j, const AssumptionDReport& rep) {
  j = json{{"kappa1", rep.kappa1}, {"kappa2", rep.kappa2},
           {"c1", rep.c1},         {"c2", rep.c2},
           {"c3", rep.c3},         {"rows", rep.rows},
           {"tau_2kappa2", rep.tau_2kappa2},
           {"d2_threshold", rep.d2_threshold},
           {"d2", rep.d2},
           {"holds", rep.holds}};
}
inline void from_json(const json& j, AssumptionDReport& rep) {
  rep.kappa1 = j.at("kappa1").get<int>();
  rep.kappa2 = j.at("kappa2").get<int>();
  rep.c1 = j.at("c1").get<double>();
  rep.c2 = j.at("c2").get<double>();
  rep.c3 = j.at("c3").get<double>();
  rep.rows = j.at("rows").get<std::vector<AssumptionDRow>>();
  rep.tau_2kappa2 = j.at("tau_2kappa2").get<double>();
  rep.d2_threshold = j.at("d2_threshold").get<double>();
  rep.d2 = j.at("d2").get<bool>();
  rep.holds = j.at("holds").get<bool>();
}

inline void to_json(json& j, const AssumptionBReport& rep) {
  j = json{{"p0", rep.p0},
           {"c4", rep.c4},
           {"lhs", rep.lhs},
           {"rhs", rep.rhs},
           {"tau_2p0", rep.tau_2p0},
           {"tilde_phi_p0", rep.tilde_phi_p0},
           {"slack", rep.slack},
           {"holds", rep.holds}};
  if (!rep.note.empty()) j["note"] = rep.note;
}
inline void from_json(const json& j, AssumptionBReport& rep) {
  rep = AssumptionBReport{};
  rep.p0 = j.at("p0").get<int>();
  rep.c4 = j.at("c4").get<double>();
  rep.lhs = j.at("lhs").get<double>();
  rep.rhs = j.at("rhs").get<double>();
  rep.tau_2p0 = j.at("tau_2p0").get<double>();
  rep.tilde_phi_p0 = j.at("tilde_phi_p0").get<double>();
  rep.slack = j.at("slack").get<double>();
  rep.holds = j.at("holds").get<bool>();
  if (j.contains("note")) rep.note = j.at("note").get<std::string>();
}

inline void to_json(json& j, const DesignClassification& c) {
  j = json{{"tau_r", c.tau_r},
           {"exact", c.exact},
           {"threshold", c.threshold},
           {"label", c.nearly_orthogonal ? "nearly-orthogonal" : "multicollinear"},
           {"note", c.note}};
}
inline void from_json(const json& j, DesignClassification& c) {
  c.tau_r = j.at("tau_r").get<double>();
  c.exact = j.at("exact").get<bool>();
  c.threshold = j.at("threshold").get<double>();
  c.nearly_orthogonal = j.at("label").get<std::string>() == "nearly-orthogonal";
  c.note = j.at("note").get<std::string>();
}

inline void to_json(json& j, const ChainSummary::TopModel& t) {
  j = json{{"model", t.model},
           {"count", t.count},
           {"frequency", t.frequency},
           {"criterion", t.criterion}};
}
inline void from_json(const json& j, ChainSummary::TopModel& t) {
  t.model = j.at("model").get<ModelIndicator>();
  t.count = j.at("count").get<std::uint64_t>();
  t.frequency = j.at("frequency").get<double>();
  t.criterion = j.at("criterion").get<double>();
}

inline void to_json(json& j, const ChainSummary& s) {
  j = json{{"chains", s.chains},
           {"recorded_sweeps", s.recorded_sweeps},
           {"inclusion_freq", s.inclusion_freq},
           {"top_models", s.top_models},
           {"visit_counts", s.visit_counts}};
}
inline void from_json(const json& j, ChainSummary& s) {
  s = ChainSummary{};
  s.chains = j.at("chains").get<int>();
  s.recorded_sweeps = j.at("recorded_sweeps").get<std::uint64_t>();
  s.inclusion_freq = j.at("inclusion_freq").get<std::vector<double>>();
  s.top_models = j.at("top_models").get<std::vector<ChainSummary::TopModel>>();
  s.visit_counts =
      j.at("visit_counts").get<std::map<std::string, std::uint64_t>>();
}

inline std::string to_string(DesignKind k) {
  switch (k) {
    case DesignKind::orthonormal: return "orthonormal";
    case DesignKind::iid_gaussian: return "iid_gaussian";
    case DesignKind::equicorrelated: return "equicorrelated";
    case DesignKind::custom: return "custom";
  }
  return "?";
}
inline DesignKind design_kind_from_string(const std::string& s) {
  if (s == "orthonormal") return DesignKind::orthonormal;
  if (s == "iid_gaussian") return DesignKind::iid_gaussian;
  if (s == "equicorrelated") return DesignKind::equicorrelated;
  if (s == "custom") return DesignKind::custom;
  throw InputError("unknown design kind: " + s);
}

inline std::string to_string(EstimatorSpec::Type t) {
  switch (t) {
    case EstimatorSpec::Type::map_prior: return "map_prior";
    case EstimatorSpec::Type::fixed_penalty: return "fixed_penalty";
    case EstimatorSpec::Type::fixed_model: return "fixed_model";
  }
  return "?";
}

inline void to_json(json& j, const EstimatorSpec& e) {
  j = json{{"type", to_string(e.type)}, {"name", e.name}};
  switch (e.type) {
    case EstimatorSpec::Type::map_prior:
      j["prior"] = e.prior;
      if (!std::isnan(e.gamma)) j["gamma"] = e.gamma;
      break;
    case EstimatorSpec::Type::fixed_penalty:
      j["lambda"] = e.lambda;
      if (!std::isnan(e.gamma)) j["gamma"] = e.gamma;
      break;
    case EstimatorSpec::Type::fixed_model:
      j["indices"] = e.fixed_indices;
      break;
  }
}
inline void from_json(const json& j, EstimatorSpec& e) {
  e = EstimatorSpec{};
  const std::string type = j.at("type").get<std::string>();
  e.name = j.at("name").get<std::string>();
  if (type == "map_prior") {
    e.type = EstimatorSpec::Type::map_prior;
    e.prior = j.at("prior").get<PriorSpec>();
    if (j.contains("gamma")) e.gamma = j.at("gamma").get<double>();
  } else if (type == "fixed_penalty") {
    e.type = EstimatorSpec::Type::fixed_penalty;
    e.lambda = j.at("lambda").get<double>();
    if (j.contains("gamma")) e.gamma = j.at("gamma").get<double>();
  } else if (type == "fixed_model") {
    e.type = EstimatorSpec::Type::fixed_model;
    e.fixed_indices = j.at("indices").get<std::vector<int>>();
  } else {
    throw InputError("unknown estimator type: " + type);
  }
}

inline void to_json(json& j, const ScenarioSpec& sc) {
  j = json{{"id", sc.id},
           {"n", sc.n},
           {"p", sc.p},
           {"design", to_string(sc.design)}};
  if (sc.design == DesignKind::equicorrelated) j["rho"] = sc.rho;
  if (sc.design == DesignKind::custom) j["custom_design"] = sc.custom_design;
  if (!sc.explicit_beta.empty()) {
    j["explicit_beta"] = sc.explicit_beta;
  } else {
    j["p0"] = sc.p0;
    j["beta_magnitude"] = sc.beta_magnitude;
  }
  j["sigma_sq"] = sc.sigma_sq;
  if (!std::isnan(sc.gamma)) j["gamma"] = sc.gamma;
  j["replications"] = sc.replications;
  j["seed"] = sc.seed;
  j["select_budget"] = sc.select_budget;
  j["oracle_budget"] = sc.oracle_budget;
  j["diag_subsets"] = sc.diag_subsets;
  j["rate_C1"] = sc.rate_C1;
  j["rate_C2"] = sc.rate_C2;
  j["estimators"] = sc.estimators;
}
inline void from_json(const json& j, ScenarioSpec& sc) {
  sc = ScenarioSpec{};
  if (j.contains("id")) sc.id = j.at("id").get<std::string>();
  sc.n = j.at("n").get<int>();
  sc.p = j.at("p").get<int>();
  if (j.contains("design"))
    sc.design = design_kind_from_string(j.at("design").get<std::string>());
  if (j.contains("rho")) sc.rho = j.at("rho").get<double>();
  if (j.contains("custom_design"))
    sc.custom_design = j.at("custom_design").get<Matrix>();
  if (j.contains("explicit_beta"))
    sc.explicit_beta = j.at("explicit_beta").get<std::vector<double>>();
  if (j.contains("p0")) sc.p0 = j.at("p0").get<int>();
  if (j.contains("beta_magnitude"))
    sc.beta_magnitude = j.at("beta_magnitude").get<double>();
  if (j.contains("sigma_sq")) sc.sigma_sq = j.at("sigma_sq").get<double>();
  if (j.contains("gamma")) sc.gamma = j.at("gamma").get<double>();
  if (j.contains("replications"))
    sc.replications = j.at("replications").get<int>();
  if (j.contains("seed")) sc.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("select_budget"))
    sc.select_budget = j.at("select_budget").get<std::uint64_t>();
  if (j.contains("oracle_budget"))
    sc.oracle_budget = j.at("oracle_budget").get<std::uint64_t>();
  if (j.contains("diag_subsets"))
    sc.diag_subsets = j.at("diag_subsets").get<std::uint64_t>();
  if (j.contains("rate_C1")) sc.rate_C1 = j.at("rate_C1").get<double>();
  if (j.contains("rate_C2")) sc.rate_C2 = j.at("rate_C2").get<double>();
  sc.estimators = j.at("estimators").get<std::vector<EstimatorSpec>>();
}

inline void to_json(json& j, const EstimatorRisk& e) {
  j = json{{"name", e.name},
           {"mean_risk", e.mean_risk},
           {"std_error", e.std_error},
           {"size_histogram", e.size_histogram}};
  if (std::isfinite(e.oracle_ratio)) j["oracle_ratio"] = e.oracle_ratio;
}
inline void from_json(const json& j, EstimatorRisk& e) {
  e = EstimatorRisk{};
  e.name = j.at("name").get<std::string>();
  e.mean_risk = j.at("mean_risk").get<double>();
  e.std_error = j.at("std_error").get<double>();
  e.size_histogram = j.at("size_histogram").get<std::vector<std::uint64_t>>();
  if (j.contains("oracle_ratio"))
    e.oracle_ratio = j.at("oracle_ratio").get<double>();
}

inline void to_json(json& j, const RiskReport& r) {
  j = json{{"scenario", r.scenario},
           {"estimators", r.estimators},
           {"oracle_risk", r.oracle_risk},
           {"oracle_exact", r.oracle_exact},
           {"p0", r.p0}};
  if (std::isfinite(r.rate_upper)) {
    j["rate_upper"] = r.rate_upper;
    j["rate_lower"] = r.rate_lower;
    j["rate_sparse_branch"] = r.rate_sparse_branch;
  }
}
inline void from_json(const json& j, RiskReport& r) {
  r = RiskReport{};
  r.scenario = j.at("scenario").get<ScenarioSpec>();
  r.estimators = j.at("estimators").get<std::vector<EstimatorRisk>>();
  r.oracle_risk = j.at("oracle_risk").get<double>();
  r.oracle_exact = j.at("oracle_exact").get<bool>();
  r.p0 = j.at("p0").get<int>();
  if (j.contains("rate_upper")) {
    r.rate_upper = j.at("rate_upper").get<double>();
    r.rate_lower = j.at("rate_lower").get<double>();
    r.rate_sparse_branch = j.at("rate_sparse_branch").get<bool>();
  }
}

// flat CSV, one row per estimator
inline std::string risk_report_csv(const RiskReport& r) {
  std::string out =
      "scenario,estimator,mean_risk,std_error,oracle_risk,oracle_exact,"
      "oracle_ratio,rate_upper,rate_lower,p0\n";
  for (const auto& e : r.estimators) {
    out += r.scenario.id + ',' + e.name + ',' + fmt_double(e.mean_risk) + ',' +
           fmt_double(e.std_error) + ',' + fmt_double(r.oracle_risk) + ',' +
           (r.oracle_exact ? "1" : "0") + ',' +
           (std::isfinite(e.oracle_ratio) ? fmt_double(e.oracle_ratio) : "") +
           ',' +
           (std::isfinite(r.rate_upper) ? fmt_double(r.rate_upper) : "") + ',' +
           (std::isfinite(r.rate_lower) ? fmt_double(r.rate_lower) : "") + ',' +
           std::to_string(r.p0) + '\n';
  }
  return out;
}

// top-models table, one row per model
inline std::string top_models_csv(const ChainSummary& s) {
  std::string out = "rank,model,count,frequency,criterion\n";
  for (std::size_t i = 0; i < s.top_models.size(); ++i) {
    const auto& t = s.top_models[i];
    out += std::to_string(i + 1) + ",\"" + t.model.key() + "\"," +
           std::to_string(t.count) + ',' + fmt_double(t.frequency) + ',' +
           fmt_double(t.criterion) + '\n';
  }
  return out;
}

// penalty schedule table: k, prior mass, L_k, Pen(k)
inline std::string penalty_schedule_csv(const PenaltySchedule& s) {
  std::string out = "k,prior_mass,L,penalty\n";
  for (int k = 0; k <= s.r; ++k) {
    out += std::to_string(k) + ',' + fmt_double(std::exp(s.log_prior[k])) +
           ',' + fmt_double(s.L[k]) + ',' + fmt_double(s.pen[k]) + '\n';
  }
  return out;
}

}  // namespace mapsel
