// command-line front end: select | ssvs | diagnose | simulate | penalty

#include <CLI11.hpp>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mapsel/mapsel.hpp"

namespace {

using mapsel::json;

struct CommonOpts {
  std::string input;
  std::string output = "-";
  std::string prior = "geometric:0.5";
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double sigma_sq = std::numeric_limits<double>::quiet_NaN();
  bool estimate_sigma = false;
  std::uint64_t seed = 0;
  std::uint64_t budget = 2'000'000;
  bool no_intercept = false;
  bool no_meta = false;
  int threads = 1;
};

// prior shorthands: uniform | geometric:Q | binomial:XI | aic | bic | ric |
// lambda:L | table:w0,w1,... | inline JSON | @file.json
mapsel::PriorSpec parse_prior_arg(const std::string& arg) {
  using mapsel::PriorSpec;
  if (arg.empty()) throw mapsel::InputError("empty --prior argument");
  if (arg.front() == '{') return json::parse(arg).get<PriorSpec>();
  if (arg.front() == '@') {
    std::ifstream in(arg.substr(1));
    if (!in) throw mapsel::InputError("cannot open prior file: " + arg.substr(1));
    return json::parse(in).get<PriorSpec>();
  }
  const auto colon = arg.find(':');
  const std::string head = arg.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : arg.substr(colon + 1);
  auto number = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw mapsel::InputError("bad numeric value in --prior: '" + s + "'");
    }
  };
  if (head == "uniform") return PriorSpec::uniform();
  if (head == "geometric") {
    if (tail.empty()) throw mapsel::InputError("--prior geometric:Q needs Q");
    return PriorSpec::geometric(number(tail));
  }
  if (head == "binomial") {
    if (tail.empty()) throw mapsel::InputError("--prior binomial:XI needs XI");
    return PriorSpec::binomial(number(tail));
  }
  if (head == "aic")
    return PriorSpec::binomial_calibrated(mapsel::PenaltyCriterion::aic);
  if (head == "bic")
    return PriorSpec::binomial_calibrated(mapsel::PenaltyCriterion::bic);
  if (head == "ric")
    return PriorSpec::binomial_calibrated(mapsel::PenaltyCriterion::ric);
  if (head == "lambda") {
    if (tail.empty()) throw mapsel::InputError("--prior lambda:L needs L");
    return PriorSpec::binomial_calibrated(
        mapsel::PenaltyCriterion::fixed_lambda, number(tail));
  }
  if (head == "table") {
    std::vector<double> w;
    std::string cur;
    for (char c : tail + ",") {
      if (c == ',') {
        if (!cur.empty()) w.push_back(number(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    return PriorSpec::table(std::move(w));
  }
  throw mapsel::InputError("unknown prior shorthand: '" + arg + "'");
}

json meta_block(const std::string& command) {
  char stamp[32];
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return json{{"tool", "mapsel"},
              {"version", "0.1.0"},
              {"command", command},
              {"timestamp", stamp}};
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw mapsel::InputError("cannot open output file: " + path);
  out << text;
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

// centered-design regression problem; centering is equivalent to an
// always-included intercept column
struct Problem {
  mapsel::Vector y;
  std::optional<mapsel::DesignMatrix> X;  // empty when p = 0
  std::vector<std::string> names;
  bool intercept = false;
  double y_mean = 0.0;
  mapsel::Vector col_means;
  double sigma_sq = 0.0;
  bool sigma_estimated = false;
};

Problem load_problem(const CommonOpts& opt) {
  const auto csv = mapsel::read_numeric_csv_file(opt.input);
  auto data = mapsel::split_response(csv);
  Problem prob;
  prob.names = data.names;
  prob.intercept = !opt.no_intercept;
  const int n = int(data.y.size());
  const int p = int(data.X.cols());
  prob.col_means = mapsel::Vector::Zero(p);
  if (prob.intercept) {
    prob.y_mean = data.y.mean();
    data.y.array() -= prob.y_mean;
    for (int j = 0; j < p; ++j) {
      prob.col_means(j) = data.X.col(j).mean();
      data.X.col(j).array() -= prob.col_means(j);
    }
  }
  prob.y = std::move(data.y);
  if (p > 0) prob.X.emplace(std::move(data.X));

  const int rank = prob.X ? prob.X->rank : 0;
  const int df_model = rank + (prob.intercept ? 1 : 0);
  if (opt.estimate_sigma) {
    if (!std::isnan(opt.sigma_sq))
      throw mapsel::InputError("--sigma-sq and --estimate-sigma are exclusive");
    if (n - df_model < 1)
      throw std::invalid_argument(
          "cannot estimate sigma: the saturated fit leaves no residual "
          "degrees of freedom");
    double rss_sat;
    if (prob.X) {
      const auto sat = mapsel::first_independent_subset(*prob.X);
      rss_sat = mapsel::least_squares_fit(*prob.X, prob.y, sat).rss;
    } else {
      rss_sat = mapsel::sum_of_squares(prob.y);
    }
    prob.sigma_sq = rss_sat / (n - df_model);
    prob.sigma_estimated = true;
    std::cerr << "note: sigma_sq estimated as " << prob.sigma_sq
              << " from the saturated fit; the selection theory assumes a "
                 "known noise variance\n";
    if (!(prob.sigma_sq > 0.0))
      throw std::invalid_argument(
          "estimated sigma_sq is zero: response is exactly interpolated");
  } else {
    if (std::isnan(opt.sigma_sq))
      throw mapsel::InputError(
          "--sigma-sq is required (or pass --estimate-sigma)");
    prob.sigma_sq = opt.sigma_sq;
  }
  return prob;
}

double effective_gamma(const CommonOpts& opt, int p) {
  if (!std::isnan(opt.gamma)) return opt.gamma;
  return p > 0 ? double(p) : 1.0;  // g-prior style default
}

json selection_json(const Problem& prob, const mapsel::SelectionResult& sel,
                    double gamma, const mapsel::PriorSpec& prior) {
  json j;
  json names = json::array();
  for (int idx : sel.model.indices()) names.push_back(prob.names[idx]);
  j["selected"] = names;
  j["indices"] = sel.model;
  json coef = json::object();
  for (int idx : sel.model.indices()) coef[prob.names[idx]] = sel.fit.beta(idx);
  j["coefficients"] = coef;
  if (prob.intercept) {
    double b0 = prob.y_mean;
    for (int idx : sel.model.indices())
      b0 -= sel.fit.beta(idx) * prob.col_means(idx);
    j["intercept"] = b0;
  }
  j["rss"] = sel.fit.rss;
  j["criterion"] = sel.criterion;
  j["penalty"] = sel.penalty;
  if (std::isfinite(sel.log_posterior_unnorm))
    j["log_posterior_unnorm"] = sel.log_posterior_unnorm;
  j["models_evaluated"] = sel.models_evaluated;
  j["saturated"] = sel.saturated;
  j["rank"] = prob.X ? prob.X->rank : 0;
  j["sigma_sq"] = prob.sigma_sq;
  j["sigma_sq_estimated"] = prob.sigma_estimated;
  j["gamma"] = gamma;
  j["prior"] = prior;
  return j;
}

// degenerate problems (no predictors, or rank 0 after centering) still have
// a well-defined answer: the null model, which is also the saturated one
json null_model_json(const Problem& prob, double gamma,
                     const mapsel::PriorSpec& prior) {
  mapsel::SelectionResult sel;
  sel.model = mapsel::ModelIndicator();
  sel.fit.beta = mapsel::Vector::Zero(prob.names.size());
  sel.fit.fitted = mapsel::Vector::Zero(prob.y.size());
  sel.fit.rss = mapsel::sum_of_squares(prob.y);
  sel.criterion = sel.fit.rss;  // Pen(0) = 0 for the point-mass support {0}
  sel.penalty = 0.0;
  sel.models_evaluated = 1;
  sel.saturated = true;
  return selection_json(prob, sel, gamma, prior);
}

int cmd_select(const CommonOpts& opt) {
  const Problem prob = load_problem(opt);
  const mapsel::PriorSpec raw = parse_prior_arg(opt.prior);
  const int p = int(prob.names.size());
  const double gamma = effective_gamma(opt, p);

  json j;
  if (!prob.X || prob.X->rank == 0) {
    j = null_model_json(prob, gamma, raw);
  } else {
    const auto prior =
        mapsel::resolve_prior(raw, p, int(prob.y.size()), gamma);
    const mapsel::HyperParams hp{gamma, prob.sigma_sq};
    const auto sel = mapsel::map_select(*prob.X, prob.y, prior, hp, opt.budget);
    j = selection_json(prob, sel, gamma, prior);
  }
  if (!opt.no_meta) j["meta"] = meta_block("select");
  write_json(opt.output, j);
  return 0;
}

int cmd_ssvs(const CommonOpts& opt, const mapsel::GibbsConfig& cfg,
             const std::string& csv_output) {
  const Problem prob = load_problem(opt);
  if (!prob.X || prob.X->rank == 0)
    throw std::invalid_argument(
        "ssvs needs at least one non-constant predictor");
  const int p = int(prob.names.size());
  const double gamma = effective_gamma(opt, p);
  const auto prior = mapsel::resolve_prior(parse_prior_arg(opt.prior), p,
                                           int(prob.y.size()), gamma);
  const mapsel::HyperParams hp{gamma, prob.sigma_sq};
  const auto res =
      mapsel::run_ssvs(*prob.X, prob.y, prior, hp, cfg, opt.threads);

  json j = selection_json(prob, res.selection, gamma, prior);
  j["summary"] = res.summary;
  j["config"] = cfg;
  if (!opt.no_meta) j["meta"] = meta_block("ssvs");
  write_json(opt.output, j);
  if (!csv_output.empty())
    write_text(csv_output, mapsel::top_models_csv(res.summary));
  return 0;
}

int cmd_diagnose(const CommonOpts& opt, int k_max, std::uint64_t subsets,
                 int restarts, double threshold, const std::string& config) {
  const auto csv = mapsel::read_numeric_csv_file(opt.input);
  // a column named y is a response, not part of the design
  mapsel::Matrix X;
  std::vector<std::string> names;
  bool has_y = false;
  for (const auto& nm : csv.names) has_y = has_y || nm == "y";
  if (has_y) {
    auto data = mapsel::split_response(csv);
    X = std::move(data.X);
    names = std::move(data.names);
  } else {
    X = csv.values;
    names = csv.names;
  }
  if (X.cols() == 0) throw std::invalid_argument("diagnose: no predictors");
  const mapsel::DesignMatrix design(X);
  if (design.rank == 0)
    throw std::invalid_argument("diagnose: design has rank 0");

  mapsel::DiagBudget budget;
  budget.max_subsets = subsets;
  budget.restarts = restarts;
  budget.seed = opt.seed;

  const int p = design.p();
  const int km = k_max > 0 ? k_max : std::min(8, p);

  json j;
  j["n"] = design.n();
  j["p"] = p;
  j["rank"] = design.rank;
  j["columns"] = names;
  j["tau_curve"] = mapsel::tau_curve(design, km, budget);
  json profiles = json::array();
  for (int k = 1; 2 * k <= p && k <= km; ++k)
    profiles.push_back(mapsel::tilde_phi(design, k, budget));
  j["profiles"] = profiles;
  j["classification"] = mapsel::classify_design(design, threshold, budget);

  if (!config.empty()) {
    std::ifstream in(config);
    if (!in) throw mapsel::InputError("cannot open config file: " + config);
    json cj;
    try {
      cj = json::parse(in);
    } catch (const json::exception& e) {
      throw mapsel::InputError(std::string("config JSON: ") + e.what());
    }
    if (cj.contains("assumption_d")) {
      const auto& d = cj.at("assumption_d");
      j["assumption_d"] = mapsel::check_assumption_D(
          design, d.at("kappa1").get<int>(), d.at("kappa2").get<int>(),
          d.at("c1").get<double>(), d.at("c2").get<double>(),
          d.at("c3").get<double>(), budget);
    }
    if (cj.contains("assumption_b")) {
      const auto& b = cj.at("assumption_b");
      const auto bv = b.at("beta").get<std::vector<double>>();
      mapsel::Vector beta(bv.size());
      for (std::size_t i = 0; i < bv.size(); ++i) beta(i) = bv[i];
      j["assumption_b"] = mapsel::check_assumption_B(
          design, beta, b.at("c4").get<double>(), budget);
    }
  }
  if (!opt.no_meta) j["meta"] = meta_block("diagnose");
  write_json(opt.output, j);
  return 0;
}

int cmd_simulate(const CommonOpts& opt, bool seed_given,
                 const std::string& csv_output) {
  std::ifstream in(opt.input);
  if (!in) throw mapsel::InputError("cannot open scenario file: " + opt.input);
  mapsel::ScenarioSpec sc;
  try {
    sc = json::parse(in).get<mapsel::ScenarioSpec>();
  } catch (const json::exception& e) {
    throw mapsel::InputError(std::string("scenario JSON: ") + e.what());
  }
  if (seed_given) sc.seed = opt.seed;
  const auto report = mapsel::compare_estimators(sc, opt.threads);
  json j = report;
  if (!opt.no_meta) j["meta"] = meta_block("simulate");
  write_json(opt.output, j);
  if (!csv_output.empty())
    write_text(csv_output, mapsel::risk_report_csv(report));
  return 0;
}

int cmd_penalty(const CommonOpts& opt, int p, int r, int n) {
  if (p < 1) throw std::invalid_argument("penalty: needs p >= 1");
  if (r < 0) r = p;
  const double gamma = effective_gamma(opt, p);
  const double sigma_sq = std::isnan(opt.sigma_sq) ? 1.0 : opt.sigma_sq;
  const auto prior = mapsel::resolve_prior(parse_prior_arg(opt.prior), p,
                                           n > 0 ? n : p, gamma);
  const auto sched =
      mapsel::penalty_schedule(p, r, prior, {gamma, sigma_sq});
  write_text(opt.output, mapsel::penalty_schedule_csv(sched));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MAP model selection for Gaussian linear regression"};
  app.require_subcommand(1);

  CommonOpts opt;
  mapsel::GibbsConfig gibbs;
  std::string csv_output;
  std::string diag_config;
  int k_max = 0;
  std::uint64_t diag_subsets = 100'000;
  int diag_restarts = 8;
  double diag_threshold = 0.5;
  int pen_p = 0, pen_r = -1, pen_n = 0;

  auto add_common = [&](CLI::App* cmd, bool with_input) {
    if (with_input)
      cmd->add_option("--input", opt.input, "input file")->required();
    cmd->add_option("--output", opt.output, "output path ('-' = stdout)");
    cmd->add_option("--seed", opt.seed, "random seed");
    cmd->add_flag("--no-meta", opt.no_meta,
                  "omit the meta block (timestamps) from outputs");
    cmd->add_option("--threads", opt.threads, "worker threads");
  };
  auto add_model_opts = [&](CLI::App* cmd) {
    cmd->add_option("--prior", opt.prior,
                    "model-size prior: uniform | geometric:Q | binomial:XI | "
                    "aic | bic | ric | lambda:L | table:w0,w1,... | JSON | @file");
    cmd->add_option("--gamma", opt.gamma, "slab variance ratio (default: p)");
    cmd->add_option("--sigma-sq", opt.sigma_sq, "known noise variance");
    cmd->add_flag("--estimate-sigma", opt.estimate_sigma,
                  "estimate sigma^2 from the saturated fit (outside the "
                  "known-variance theory)");
    cmd->add_flag("--no-intercept", opt.no_intercept,
                  "fit without centering / intercept");
    cmd->add_option("--budget", opt.budget, "max model evaluations");
  };

  auto* select = app.add_subcommand("select", "exhaustive MAP model selection");
  add_common(select, true);
  add_model_opts(select);

  auto* ssvs = app.add_subcommand("ssvs", "stochastic search (Gibbs) selection");
  add_common(ssvs, true);
  add_model_opts(ssvs);
  ssvs->add_option("--sweeps", gibbs.sweeps, "Gibbs sweeps per chain");
  ssvs->add_option("--burn-in", gibbs.burn_in, "sweeps discarded per chain");
  ssvs->add_option("--chains", gibbs.chains, "independent chains");
  ssvs->add_option("--top-k", gibbs.top_k, "models kept in the summary");
  ssvs->add_option("--csv-output", csv_output, "top-models table CSV path");

  auto* diagnose = app.add_subcommand("diagnose", "design diagnostics");
  add_common(diagnose, true);
  diagnose->add_option("--k-max", k_max, "largest subset size (default min(8,p))");
  diagnose->add_option("--subsets", diag_subsets, "eigen-evaluation budget");
  diagnose->add_option("--restarts", diag_restarts, "local-search restarts");
  diagnose->add_option("--threshold", diag_threshold,
                       "tau[r] threshold for the advisory classification");
  diagnose->add_option("--config", diag_config,
                       "JSON with assumption_d / assumption_b constants");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo risk comparison");
  add_common(simulate, true);
  simulate->add_option("--csv-output", csv_output, "flat CSV path");

  auto* penalty = app.add_subcommand("penalty", "print the penalty schedule");
  add_common(penalty, false);
  add_model_opts(penalty);
  penalty->add_option("--p", pen_p, "number of candidate predictors")->required();
  penalty->add_option("--r", pen_r, "design rank (default p)");
  penalty->add_option("--n", pen_n, "sample size (for BIC calibration)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (select->parsed()) return cmd_select(opt);
    if (ssvs->parsed()) return cmd_ssvs(opt, gibbs, csv_output);
    if (diagnose->parsed())
      return cmd_diagnose(opt, k_max, diag_subsets, diag_restarts,
                          diag_threshold, diag_config);
    if (simulate->parsed())
      return cmd_simulate(opt, simulate->count("--seed") > 0, csv_output);
    if (penalty->parsed()) return cmd_penalty(opt, pen_p, pen_r, pen_n);
    return 2;
  } catch (const mapsel::BudgetExceeded& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return 3;
  } catch (const mapsel::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
