#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mapsel/combinatorics.hpp"
#include "mapsel/linalg.hpp"
#include "mapsel/prior.hpp"

namespace mapsel {

class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, std::uint64_t required_,
                 std::uint64_t budget_)
      : std::runtime_error(what), required(required_), budget(budget_) {}
  std::uint64_t required;
  std::uint64_t budget;
};

struct SelectionResult {
  ModelIndicator model;
  FitResult fit;
  double criterion = std::numeric_limits<double>::infinity();
  double penalty = 0.0;
  double log_posterior_unnorm = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t models_evaluated = 0;
  bool saturated = false;  // |model| == r
};

namespace detail {

// unnormalized log posterior from precomputed pieces; Q = |P_M y|^2
inline double log_posterior_terms(int p, int r,
                                  const std::vector<double>& log_prior,
                                  const HyperParams& hp, int k, double qform) {
  const double comb = k < r ? log_binomial(p, k) : 0.0;
  return log_prior[k] - comb - 0.5 * k * std::log1p(hp.gamma) +
         hp.gamma / (hp.gamma + 1.0) * qform / (2.0 * hp.sigma_sq);
}

}  // namespace detail

// ln of the unnormalized posterior mass of one model
inline double log_posterior(const DesignMatrix& design, const Vector& y,
                            const ModelIndicator& M, const PriorSpec& prior,
                            const HyperParams& hp) {
  validate(hp);
  const int r = design.rank;
  if (r < 1) throw std::invalid_argument("log_posterior: design has rank 0");
  if (M.size() > r)
    throw std::invalid_argument("log_posterior: model size exceeds rank");
  if (!M.empty() && M.indices().back() >= design.p())
    throw std::invalid_argument("log_posterior: model index out of range");
  const auto lp = prior.log_masses(design.p(), r);
  const FitResult fit = least_squares_fit(design, y, M);
  return detail::log_posterior_terms(design.p(), r, lp, hp, M.size(),
                                     sum_of_squares(fit.fitted));
}

// Lexicographically first independent column subset of size rank(X); the
// canonical representative of the saturated posterior class.  Greedy
// Cholesky with pivots measured against the design's own rank tolerance.
inline ModelIndicator first_independent_subset(const DesignMatrix& design) {
  const int p = design.p();
  const int r = design.rank;
  if (r < 1)
    throw std::invalid_argument("first_independent_subset: design has rank 0");
  const Matrix gram = design.X.transpose() * design.X;
  const double floor =
      std::max(design.rank_tol * design.spectral_norm, 0.0);
  const double floor2 = floor * floor;

  std::vector<int> chosen;
  Matrix R = Matrix::Zero(r, r);  // upper-triangular factor of Gram(chosen)
  for (int j = 0; j < p && int(chosen.size()) < r; ++j) {
    const int k = int(chosen.size());
    // v = R^{-T} Gram(chosen, j) by forward substitution
    Vector v(k);
    for (int i = 0; i < k; ++i) {
      double s = gram(chosen[i], j);
      for (int t = 0; t < i; ++t) s -= R(t, i) * v(t);
      v(i) = s / R(i, i);
    }
    const double schur = gram(j, j) - v.squaredNorm();
    if (schur > floor2) {
      for (int i = 0; i < k; ++i) R(i, k) = v(i);
      R(k, k) = std::sqrt(schur);
      chosen.push_back(j);
    }
  }
  if (int(chosen.size()) != r)
    throw std::runtime_error(
        "first_independent_subset: greedy pivoting disagrees with the SVD rank");
  return ModelIndicator(chosen);
}

namespace detail {

// Size-ascending exhaustive minimizer of RSS(M) + pen(|M|) over all models
// of size < r plus the saturated representative (when include_saturated).
// Ties go to the parsimony-first order.  pen must have r + 1 entries.
inline SelectionResult select_by_penalty(const DesignMatrix& design,
                                         const Vector& y,
                                         const std::vector<double>& pen,
                                         std::uint64_t budget) {
  const int p = design.p();
  const int r = design.rank;
  if (r < 1) throw std::invalid_argument("model selection: design has rank 0");
  if (int(y.size()) != design.n())
    throw std::invalid_argument("model selection: y length does not match n");
  if (int(pen.size()) != r + 1)
    throw std::invalid_argument("model selection: penalty table size != r + 1");

  // sizes 0..r-1 exhaustively, plus one saturated representative
  constexpr std::uint64_t kCountCap = 1'000'000'000'000'000'000ull;
  std::uint64_t required = enumeration_cost(p, r - 1, kCountCap);
  if (required <= kCountCap) ++required;
  if (required > budget)
    throw BudgetExceeded("exhaustive search needs " + std::to_string(required) +
                             (required > kCountCap ? "+" : "") +
                             " model fits but the budget is " +
                             std::to_string(budget) +
                             "; use the stochastic search instead",
                         required, budget);

  SelectionResult best;
  std::uint64_t evaluated = 0;
  auto consider = [&](const ModelIndicator& M, FitResult&& fit, int k,
                      bool saturated) {
    const double crit = fit.rss + pen[k];
    const bool better =
        crit < best.criterion ||
        (crit == best.criterion && tie_break_less(M, best.model));
    if (better) {
      best.model = M;
      best.fit = std::move(fit);
      best.criterion = crit;
      best.penalty = pen[k];
      best.saturated = saturated;
    }
  };

  for (int k = 0; k < r; ++k) {
    // every size-k model pays pen(k) >= 0 on top of RSS >= 0, so a whole
    // size class is prunable once its penalty alone is no better
    if (pen[k] >= best.criterion) continue;
    for_each_combination(p, k, [&](const std::vector<int>& comb) {
      ModelIndicator M(comb);
      ++evaluated;
      consider(M, least_squares_fit(design, y, M), k, false);
    });
  }
  if (pen[r] < best.criterion) {
    const ModelIndicator sat = first_independent_subset(design);
    ++evaluated;
    consider(sat, least_squares_fit(design, y, sat), r, true);
  }
  best.models_evaluated = evaluated;
  return best;
}

}  // namespace detail

// Exact MAP model: exhaustive minimization of RSS(M) + Pen(|M|)
inline SelectionResult map_select(const DesignMatrix& design, const Vector& y,
                                  const PriorSpec& prior, const HyperParams& hp,
                                  std::uint64_t budget = 2'000'000) {
  const auto sched = penalty_schedule(design.p(), design.rank, prior, hp);
  SelectionResult res = detail::select_by_penalty(design, y, sched.pen, budget);
  res.log_posterior_unnorm = detail::log_posterior_terms(
      design.p(), design.rank, sched.log_prior, hp, res.model.size(),
      sum_of_squares(res.fit.fitted));
  return res;
}

// same enumeration under the plain linear penalty 2 sigma^2 lambda k
inline SelectionResult select_linear_penalty(const DesignMatrix& design,
                                             const Vector& y, double lambda,
                                             double sigma_sq,
                                             std::uint64_t budget = 2'000'000) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(sigma_sq > 0.0)) throw std::invalid_argument("sigma_sq must be positive");
  std::vector<double> pen(design.rank + 1);
  for (int k = 0; k <= design.rank; ++k) pen[k] = 2.0 * sigma_sq * lambda * k;
  return detail::select_by_penalty(design, y, pen, budget);
}

namespace detail {

// Fast path for designs with exactly orthonormal columns: RSS(M) depends
// only on which z_j = x_j'y the model keeps, so the best size-k model keeps
// the k largest z_j^2 and the scan over sizes is O(p log p).
inline SelectionResult select_orthonormal(const DesignMatrix& design,
                                          const Vector& y,
                                          const std::vector<double>& pen) {
  const int p = design.p();
  const int r = design.rank;  // == p for an orthonormal design
  if (r != p)
    throw std::invalid_argument("select_orthonormal: columns not independent");
  const Vector z = design.X.transpose() * y;

  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (z(a) * z(a) != z(b) * z(b)) return z(a) * z(a) > z(b) * z(b);
    return a < b;
  });

  const double yty = sum_of_squares(y);
  double cum = 0.0;
  int best_k = 0;
  double best_crit = yty + pen[0];
  for (int k = 1; k <= r; ++k) {
    cum += z(order[k - 1]) * z(order[k - 1]);
    const double crit = yty - cum + pen[k];
    if (crit < best_crit) {
      best_crit = crit;
      best_k = k;
    }
  }

  std::vector<int> keep(order.begin(), order.begin() + best_k);
  const ModelIndicator M(keep);

  SelectionResult res;
  res.model = M;
  res.fit.beta = Vector::Zero(p);
  res.fit.fitted = Vector::Zero(design.n());
  for (int j : M.indices()) {
    res.fit.beta(j) = z(j);
    res.fit.fitted += z(j) * design.X.col(j);
  }
  res.fit.rss = sum_of_squares(y - res.fit.fitted);
  res.penalty = pen[best_k];
  res.criterion = res.fit.rss + res.penalty;
  res.models_evaluated = std::uint64_t(r) + 1;  // one size class per step
  res.saturated = best_k == r;
  return res;
}

}  // namespace detail

}  // namespace mapsel
