#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mapsel/diagnostics.hpp"
#include "mapsel/exhaustive.hpp"
#include "mapsel/ssvs.hpp"

namespace mapsel {

enum class DesignKind { orthonormal, iid_gaussian, equicorrelated, custom };

struct EstimatorSpec {
  enum class Type { map_prior, fixed_penalty, fixed_model };
  Type type = Type::map_prior;
  std::string name;
  PriorSpec prior;  // map_prior (calibrated specs resolved at scenario dims)
  double gamma = std::numeric_limits<double>::quiet_NaN();   // NaN: scenario value
  double lambda = std::numeric_limits<double>::quiet_NaN();  // fixed_penalty
  std::vector<int> fixed_indices;                            // fixed_model
};

struct ScenarioSpec {
  std::string id = "scenario";
  int n = 0;
  int p = 0;
  DesignKind design = DesignKind::iid_gaussian;
  double rho = 0.0;       // equicorrelated
  Matrix custom_design;   // custom
  int p0 = 0;
  double beta_magnitude = 0.0;  // nonzero entries magnitude * sigma, signs alternate
  std::vector<double> explicit_beta;  // overrides (p0, beta_magnitude) when set
  double sigma_sq = 1.0;
  double gamma = std::numeric_limits<double>::quiet_NaN();  // NaN: gamma = p
  int replications = 100;
  std::uint64_t seed = 0;
  std::uint64_t select_budget = 2'000'000;
  std::uint64_t oracle_budget = 2'000'000;
  std::uint64_t diag_subsets = 20'000;  // budget for the attached rate bounds
  double rate_C1 = 1.0;
  double rate_C2 = 1.0;
  std::vector<EstimatorSpec> estimators;
};

struct MaterializedScenario {
  DesignMatrix X;
  Vector beta;
  Vector mu;  // X beta
  bool orthonormal_columns = false;
  ScenarioSpec spec;
};

inline MaterializedScenario materialize(const ScenarioSpec& sc) {
  if (sc.n < 1 || sc.p < 1)
    throw std::invalid_argument("scenario: needs n >= 1 and p >= 1");
  if (sc.replications < 2)
    throw std::invalid_argument("scenario: needs replications >= 2");
  if (!(sc.sigma_sq > 0.0))
    throw std::invalid_argument("scenario: sigma_sq must be positive");
  if (sc.explicit_beta.empty() && (sc.p0 < 0 || sc.p0 > sc.p))
    throw std::invalid_argument("scenario: needs 0 <= p0 <= p");

  auto build = [&]() -> DesignMatrix {
    switch (sc.design) {
      case DesignKind::orthonormal:
        return make_orthonormal_design(sc.n, sc.p);
      case DesignKind::iid_gaussian:
        return make_iid_gaussian_design(sc.n, sc.p, sc.seed);
      case DesignKind::equicorrelated:
        return make_equicorrelated_design(sc.n, sc.p, sc.rho);
      case DesignKind::custom: {
        if (int(sc.custom_design.rows()) != sc.n ||
            int(sc.custom_design.cols()) != sc.p)
          throw std::invalid_argument("scenario: custom design must be n x p");
        return DesignMatrix(sc.custom_design);
      }
    }
    throw std::invalid_argument("scenario: unknown design kind");
  };

  MaterializedScenario mat{build(), Vector::Zero(sc.p), Vector(), false, sc};
  if (!sc.explicit_beta.empty()) {
    if (int(sc.explicit_beta.size()) != sc.p)
      throw std::invalid_argument("scenario: explicit beta length must be p");
    for (int j = 0; j < sc.p; ++j) mat.beta(j) = sc.explicit_beta[j];
  } else {
    const double mag = sc.beta_magnitude * std::sqrt(sc.sigma_sq);
    for (int j = 0; j < sc.p0; ++j) mat.beta(j) = (j % 2 == 0 ? mag : -mag);
  }
  mat.mu = mat.X.X * mat.beta;
  // the enumeration-free path demands pristine orthonormality
  if (sc.p <= sc.n) {
    const Matrix gram = mat.X.X.transpose() * mat.X.X;
    mat.orthonormal_columns =
        (gram - Matrix::Identity(sc.p, sc.p)).cwiseAbs().maxCoeff() == 0.0;
  }
  return mat;
}

struct OracleResult {
  double risk = 0.0;
  bool exact = false;
  ModelIndicator model;
  std::uint64_t models_evaluated = 0;
};

namespace detail {

// forward selection on the noiseless mean; exact oracle on orthonormal
// designs and a strong pool heuristic elsewhere
inline std::vector<int> greedy_columns(const DesignMatrix& design,
                                       const Vector& mu, int count) {
  const Matrix gram = design.X.transpose() * design.X;
  const Vector g = design.X.transpose() * mu;
  ChainWorkspace ws(design, mu, gram, g);
  std::vector<int> picked;
  for (int step = 0; step < count; ++step) {
    int arg = -1;
    double best = 0.0;
    for (int j = 0; j < design.p(); ++j) {
      if (ws.is_active(j)) continue;
      const double d = ws.delta_add(j);
      if (d > best) {
        best = d;
        arg = j;
      }
    }
    if (arg < 0) break;  // no remaining column reduces the bias
    ws.activate(arg);
    picked.push_back(arg);
  }
  return picked;
}

}  // namespace detail

// min over models of bias^2(M) + sigma^2 |M|.  Exact by enumeration when the
// budget covers all sizes (with the sound prune sigma^2 k >= current best);
// otherwise restricted to subsets of support(beta) united with greedy
// columns, reported with exact = false.
inline OracleResult oracle_risk_detail(const DesignMatrix& design,
                                       const Vector& beta, double sigma_sq,
                                       std::uint64_t budget = 2'000'000) {
  if (!(sigma_sq > 0.0))
    throw std::invalid_argument("oracle_risk: sigma_sq must be positive");
  if (int(beta.size()) != design.p())
    throw std::invalid_argument("oracle_risk: beta length must be p");
  const int p = design.p();
  const int r = design.rank;
  const Vector mu = design.X * beta;

  OracleResult out;
  out.risk = sum_of_squares(mu);  // null model
  out.model = ModelIndicator();
  out.models_evaluated = 1;

  auto consider_subsets_of = [&](const std::vector<int>& pool) {
    const int m = int(pool.size());
    const int kmax = std::min(m, r);
    for (int k = 1; k <= kmax; ++k) {
      if (sigma_sq * k >= out.risk) break;  // bias >= 0: larger sizes cannot win
      for_each_combination(m, k, [&](const std::vector<int>& local) {
        std::vector<int> idx;
        idx.reserve(k);
        for (int t : local) idx.push_back(pool[t]);
        const ModelIndicator M(idx);
        const double risk =
            least_squares_fit(design, mu, M).rss + sigma_sq * k;
        ++out.models_evaluated;
        if (risk < out.risk ||
            (risk == out.risk && tie_break_less(M, out.model))) {
          out.risk = risk;
          out.model = M;
        }
      });
    }
  };

  if (enumeration_cost(p, r, budget) <= budget) {
    std::vector<int> all(p);
    std::iota(all.begin(), all.end(), 0);
    consider_subsets_of(all);
    out.exact = true;
    return out;
  }

  // restricted search: true support plus greedily chosen columns
  std::vector<std::uint8_t> in_pool(p, 0);
  for (int j = 0; j < p; ++j)
    if (beta(j) != 0.0) in_pool[j] = 1;
  for (int j : detail::greedy_columns(design, mu, std::min(r, 25)))
    in_pool[j] = 1;
  std::vector<int> pool;
  for (int j = 0; j < p; ++j)
    if (in_pool[j]) pool.push_back(j);

  const int m = int(pool.size());
  if (enumeration_cost(m, std::min(m, r), budget) <= budget) {
    consider_subsets_of(pool);
  } else {
    // prefixes of the greedy chain only; the chain stops by itself once no
    // column strictly reduces the bias, so r is just a ceiling
    std::vector<int> chain = detail::greedy_columns(design, mu, r);
    std::vector<int> prefix;
    for (int j : chain) {
      prefix.push_back(j);
      const ModelIndicator M(prefix);
      const double risk = least_squares_fit(design, mu, M).rss +
                          sigma_sq * int(prefix.size());
      ++out.models_evaluated;
      if (risk < out.risk) {
        out.risk = risk;
        out.model = M;
      }
    }
  }
  out.exact = false;
  return out;
}

inline double oracle_risk(const DesignMatrix& design, const Vector& beta,
                          double sigma_sq, std::uint64_t budget = 2'000'000) {
  return oracle_risk_detail(design, beta, sigma_sq, budget).risk;
}

struct EstimatorRisk {
  std::string name;
  double mean_risk = 0.0;
  double std_error = 0.0;
  std::vector<std::uint64_t> size_histogram;  // index = selected size
  double oracle_ratio = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

struct PreparedEstimator {
  EstimatorSpec spec;
  HyperParams hp;
  std::vector<double> pen;  // criterion penalty table over sizes 0..r
  ModelIndicator fixed;
};

inline PreparedEstimator prepare(const EstimatorSpec& est,
                                 const MaterializedScenario& mat) {
  const auto& sc = mat.spec;
  PreparedEstimator prep;
  prep.spec = est;
  double gamma = est.gamma;
  if (std::isnan(gamma)) gamma = sc.gamma;
  if (std::isnan(gamma)) gamma = double(sc.p);  // g-prior style default
  prep.hp = HyperParams{gamma, sc.sigma_sq};
  validate(prep.hp);

  const int r = mat.X.rank;
  switch (est.type) {
    case EstimatorSpec::Type::map_prior: {
      const PriorSpec prior = resolve_prior(est.prior, sc.p, sc.n, gamma);
      prep.pen = penalty_schedule(sc.p, r, prior, prep.hp).pen;
      break;
    }
    case EstimatorSpec::Type::fixed_penalty: {
      if (!(est.lambda > 0.0))
        throw std::invalid_argument("fixed_penalty estimator needs lambda > 0");
      prep.pen.resize(r + 1);
      for (int k = 0; k <= r; ++k)
        prep.pen[k] = 2.0 * sc.sigma_sq * est.lambda * k;
      break;
    }
    case EstimatorSpec::Type::fixed_model: {
      prep.fixed = ModelIndicator(est.fixed_indices);
      if (!prep.fixed.empty() && prep.fixed.indices().back() >= sc.p)
        throw std::invalid_argument("fixed_model index out of range");
      break;
    }
  }
  return prep;
}

inline FitResult run_once(const MaterializedScenario& mat,
                          const PreparedEstimator& prep, const Vector& y,
                          ModelIndicator& chosen) {
  if (prep.spec.type == EstimatorSpec::Type::fixed_model) {
    chosen = prep.fixed;
    return least_squares_fit(mat.X, y, prep.fixed);
  }
  SelectionResult sel =
      mat.orthonormal_columns
          ? select_orthonormal(mat.X, y, prep.pen)
          : select_by_penalty(mat.X, y, prep.pen, mat.spec.select_budget);
  chosen = sel.model;
  return std::move(sel.fit);
}

}  // namespace detail

// Monte Carlo risk of one estimator on a scenario.  Noise for replication t
// lives on stream (noise, t) of the scenario seed: estimators share draws
// (paired comparisons) and any thread partition reproduces the serial run.
inline EstimatorRisk empirical_risk(const MaterializedScenario& mat,
                                    const EstimatorSpec& est, int threads = 1) {
  const auto& sc = mat.spec;
  const auto prep = detail::prepare(est, mat);
  const int R = sc.replications;
  const double sigma = std::sqrt(sc.sigma_sq);

  std::vector<double> losses(R, 0.0);
  std::vector<std::vector<std::uint64_t>> hists;

  const int workers = std::max(1, std::min(threads, R));
  hists.assign(workers, std::vector<std::uint64_t>(sc.p + 1, 0));
  std::vector<std::exception_ptr> worker_error(workers);
  std::vector<int> worker_error_rep(workers, -1);

  auto run_range = [&](int w) {
    for (int t = w; t < R; t += workers) {
      try {
        const CounterRng noise(sc.seed, stream_id(RngStream::noise, t));
        Vector y(sc.n);
        for (int i = 0; i < sc.n; ++i)
          y(i) = mat.mu(i) + sigma * noise.normal_at(i);
        ModelIndicator chosen;
        const FitResult fit = detail::run_once(mat, prep, y, chosen);
        losses[t] = squared_distance(fit.fitted, mat.mu);
        ++hists[w][chosen.size()];
      } catch (...) {
        worker_error[w] = std::current_exception();
        worker_error_rep[w] = t;
        return;
      }
    }
  };

  if (workers == 1) {
    run_range(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
    for (auto& th : pool) th.join();
  }
  for (int w = 0; w < workers; ++w) {
    if (!worker_error[w]) continue;
    const std::string prefix = "estimator '" + est.name +
                               "' failed at replication " +
                               std::to_string(worker_error_rep[w]) + ": ";
    try {
      std::rethrow_exception(worker_error[w]);
    } catch (const BudgetExceeded& e) {
      throw BudgetExceeded(prefix + e.what(), e.required, e.budget);
    } catch (const std::exception& e) {
      throw std::runtime_error(prefix + e.what());
    }
  }

  EstimatorRisk out;
  out.name = est.name;
  out.size_histogram.assign(sc.p + 1, 0);
  for (const auto& h : hists)
    for (int s = 0; s <= sc.p; ++s) out.size_histogram[s] += h[s];

  double sum = 0.0;
  for (double l : losses) sum += l;
  out.mean_risk = sum / R;
  double ss = 0.0;
  for (double l : losses) ss += (l - out.mean_risk) * (l - out.mean_risk);
  out.std_error = std::sqrt(ss / (R - 1) / R);
  return out;
}

struct RiskReport {
  ScenarioSpec scenario;
  std::vector<EstimatorRisk> estimators;
  double oracle_risk = 0.0;
  bool oracle_exact = false;
  int p0 = 0;
  double rate_upper = std::numeric_limits<double>::quiet_NaN();
  double rate_lower = std::numeric_limits<double>::quiet_NaN();
  bool rate_sparse_branch = false;
};

// paired Monte Carlo comparison with oracle ratios and the rate bounds
inline RiskReport compare_estimators(const ScenarioSpec& sc, int threads = 1) {
  if (sc.estimators.size() < 2)
    throw std::invalid_argument("compare_estimators: needs >= 2 estimators");
  const MaterializedScenario mat = materialize(sc);

  RiskReport rep;
  rep.scenario = sc;
  const OracleResult oracle =
      oracle_risk_detail(mat.X, mat.beta, sc.sigma_sq, sc.oracle_budget);
  rep.oracle_risk = oracle.risk;
  rep.oracle_exact = oracle.exact;

  const double denom = sc.p >= 2
                           ? std::log(double(sc.p)) * (oracle.risk + sc.sigma_sq)
                           : std::numeric_limits<double>::quiet_NaN();
  for (const auto& est : sc.estimators) {
    EstimatorRisk er = empirical_risk(mat, est, threads);
    er.oracle_ratio = er.mean_risk / denom;
    rep.estimators.push_back(std::move(er));
  }

  int p0 = 0;
  for (int j = 0; j < sc.p; ++j)
    if (mat.beta(j) != 0.0) ++p0;
  rep.p0 = p0;
  if (p0 >= 1) {
    DiagBudget db;
    db.max_subsets = sc.diag_subsets;
    db.seed = sc.seed;
    const double t2 = tau_at(mat.X, 2 * p0, db);
    const double t1 = tau_at(mat.X, p0, db);
    const RateBounds rb = rate_bounds(sc.p, p0, mat.X.rank, t2, t1,
                                      sc.sigma_sq, sc.rate_C1, sc.rate_C2);
    rep.rate_upper = rb.upper;
    rep.rate_lower = rb.lower;
    rep.rate_sparse_branch = rb.sparse_branch;
  }
  return rep;
}

}  // namespace mapsel
