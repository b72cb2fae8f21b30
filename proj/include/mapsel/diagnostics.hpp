#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mapsel/combinatorics.hpp"
#include "mapsel/design.hpp"
#include "mapsel/model.hpp"
#include "mapsel/rng.hpp"

namespace mapsel {

struct DiagBudget {
  std::uint64_t max_subsets = 100'000;  // eigen-evaluations allowed per quantity
  int restarts = 8;                     // random restarts of the local search
  std::uint64_t seed = 0;
};

struct SparseSpectrum {
  int k = 0;
  double phi_min = 0.0;
  double phi_max = 0.0;
  double tau = 0.0;
  bool exact = false;  // true iff all C(p,k) subsets were enumerated
  std::uint64_t subsets_evaluated = 0;
  bool beyond_rank = false;  // tau is the k > r extension, not phi_min/phi_max
};

namespace detail {

inline std::pair<double, double> extreme_eigs(const Matrix& gram,
                                              const std::vector<int>& idx) {
  const int k = int(idx.size());
  Matrix sub(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) sub(a, b) = gram(idx[a], idx[b]);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sub, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(k - 1)};
}

}  // namespace detail

// Extreme eigenvalues over all k x k Gram submatrices.  Exact when the
// subset count fits the budget; otherwise random restarts + greedy swaps.
// Budgeted values are direction-certified: the reported phi_min is an upper
// bound on the true minimum, phi_max a lower bound on the true maximum.
inline SparseSpectrum sparse_eigs(const DesignMatrix& design, int k,
                                  const DiagBudget& budget = {}) {
  const int p = design.p();
  if (k < 1 || k > p)
    throw std::invalid_argument("sparse_eigs: needs 1 <= k <= p");
  const Matrix gram = design.X.transpose() * design.X;

  SparseSpectrum out;
  out.k = k;
  out.phi_min = std::numeric_limits<double>::infinity();
  out.phi_max = -std::numeric_limits<double>::infinity();

  auto absorb = [&](const std::vector<int>& idx) {
    const auto [lo, hi] = detail::extreme_eigs(gram, idx);
    out.phi_min = std::min(out.phi_min, lo);
    out.phi_max = std::max(out.phi_max, hi);
    ++out.subsets_evaluated;
  };

  const std::uint64_t count = binomial_capped(p, k, budget.max_subsets);
  if (count <= budget.max_subsets) {
    for_each_combination(p, k, absorb);
    out.exact = true;
  } else {
    // one local search minimizing lambda_min, one maximizing lambda_max;
    // every evaluation feeds both envelopes
    for (int restart = 0;
         restart < budget.restarts && out.subsets_evaluated < budget.max_subsets;
         ++restart) {
      SequentialRng rng(CounterRng(
          budget.seed, stream_id(RngStream::search,
                                 (std::uint64_t(k) << 32) | std::uint64_t(restart))));
      for (int target = 0; target < 2; ++target) {
        // random k-subset by partial Fisher-Yates
        std::vector<int> deck(p);
        std::iota(deck.begin(), deck.end(), 0);
        for (int i = 0; i < k; ++i)
          std::swap(deck[i], deck[i + int(rng.below(p - i))]);
        std::vector<int> s(deck.begin(), deck.begin() + k);
        std::vector<std::uint8_t> in(p, 0);
        for (int j : s) in[j] = 1;

        const auto [lo0, hi0] = detail::extreme_eigs(gram, s);
        ++out.subsets_evaluated;
        out.phi_min = std::min(out.phi_min, lo0);
        out.phi_max = std::max(out.phi_max, hi0);
        double cur = target == 0 ? lo0 : hi0;

        bool improved = true;
        while (improved && out.subsets_evaluated < budget.max_subsets) {
          improved = false;
          for (int pos = 0; pos < k && !improved; ++pos) {
            for (int j = 0; j < p && !improved; ++j) {
              if (in[j]) continue;
              const int old = s[pos];
              s[pos] = j;
              const auto [lo, hi] = detail::extreme_eigs(gram, s);
              ++out.subsets_evaluated;
              out.phi_min = std::min(out.phi_min, lo);
              out.phi_max = std::max(out.phi_max, hi);
              const double cand = target == 0 ? lo : hi;
              const bool better = target == 0 ? cand < cur : cand > cur;
              if (better) {
                cur = cand;
                in[old] = 0;
                in[j] = 1;
                improved = true;
              } else {
                s[pos] = old;
              }
              if (out.subsets_evaluated >= budget.max_subsets) break;
            }
          }
        }
      }
    }
    out.exact = false;
  }
  out.phi_min = std::max(0.0, out.phi_min);  // clip eigen-solver jitter
  out.tau = out.phi_max > 0.0 ? out.phi_min / out.phi_max : 0.0;
  if (out.tau > 1.0) out.tau = 1.0;
  return out;
}

// tau[1..k_max]; beyond the rank tau[k] := tau[r].  Extension rows keep
// phi_min = 0 (true: any k > r columns are dependent) and re-use the rank-r
// phi_max, a valid lower bound since phi_max is non-decreasing in k.
inline std::vector<SparseSpectrum> tau_curve(const DesignMatrix& design,
                                             int k_max,
                                             const DiagBudget& budget = {}) {
  if (k_max < 1) throw std::invalid_argument("tau_curve: k_max >= 1");
  const int r = design.rank;
  if (r < 1) throw std::invalid_argument("tau_curve: design has rank 0");
  std::vector<SparseSpectrum> curve;
  const int top = std::min(k_max, std::min(r, design.p()));
  for (int k = 1; k <= top; ++k)
    curve.push_back(sparse_eigs(design, k, budget));
  for (int k = top + 1; k <= k_max; ++k) {
    SparseSpectrum ext = curve[top - 1];
    ext.k = k;
    ext.phi_min = 0.0;
    ext.exact = false;
    ext.beyond_rank = true;  // tau kept at tau[r] by convention
    curve.push_back(ext);
  }
  return curve;
}

inline double tau_at(const DesignMatrix& design, int k,
                     const DiagBudget& budget = {}) {
  const int r = design.rank;
  if (r < 1) throw std::invalid_argument("tau_at: design has rank 0");
  return sparse_eigs(design, std::min(k, r), budget).tau;
}

// k' = ceil(tau[2k] * k), floored at 1; the small guard keeps an exactly
// integral product from ceiling up by one ulp
inline int k_prime_from_tau(double tau_2k, int k) {
  return std::max(1, int(std::ceil(tau_2k * k - 1e-9)));
}

inline int k_prime(const DesignMatrix& design, int k,
                   const DiagBudget& budget = {}) {
  if (k < 1 || 2 * k > design.p())
    throw std::invalid_argument("k_prime: needs 1 <= k and 2k <= p");
  return k_prime_from_tau(tau_at(design, 2 * k, budget), k);
}

struct LambdaMatrix {
  Matrix lambda;              // (k - k') x (k - k') block of the inverse Gram
  double min_eigenvalue = 0;  // phi-tilde for this (M, M')
  std::vector<int> positions;  // local positions of M \ M' within sorted M
};

// Lambda(M, M'): invert the Gram of the M columns and keep the rows/columns
// of M \ M', addressed by position within the sorted M.  sigma^2 * Lambda is
// the covariance of the LS coefficients of M \ M'.
inline LambdaMatrix lambda_matrix(const DesignMatrix& design,
                                  const ModelIndicator& M,
                                  const ModelIndicator& M_sub) {
  const int k = M.size();
  if (k < 1) throw std::invalid_argument("lambda_matrix: M must be non-empty");
  if (!M.empty() && M.indices().back() >= design.p())
    throw std::invalid_argument("lambda_matrix: M index out of range");
  for (int j : M_sub.indices())
    if (!M.contains(j))
      throw std::invalid_argument("lambda_matrix: M_sub not contained in M");
  if (M_sub.size() >= k)
    throw std::invalid_argument("lambda_matrix: M_sub must be a strict subset");

  Matrix gram(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      gram(a, b) = design.X.col(M.indices()[a]).dot(design.X.col(M.indices()[b]));

  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const auto& ev = es.eigenvalues();
  const double cutoff = design.rank_tol * design.spectral_norm;
  if (!(ev(0) > cutoff * cutoff))
    throw std::invalid_argument("lambda_matrix: singular Gram matrix for M");
  const Matrix inv =
      es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();

  LambdaMatrix out;
  for (int a = 0; a < k; ++a)
    if (!M_sub.contains(M.indices()[a])) out.positions.push_back(a);
  const int m = int(out.positions.size());
  out.lambda.resize(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      out.lambda(a, b) = inv(out.positions[a], out.positions[b]);
  Eigen::SelfAdjointEigenSolver<Matrix> es2(out.lambda, Eigen::EigenvaluesOnly);
  out.min_eigenvalue = es2.eigenvalues()(0);
  return out;
}

struct MulticollinearityProfile {
  int k = 0;
  int k_prime = 0;
  double tau_2k = 0.0;
  double tilde_phi = std::numeric_limits<double>::quiet_NaN();
  bool defined = false;
  bool exact = false;
  std::uint64_t evaluated = 0;
  std::string note;
};

namespace detail {

// min over |M| = k of max over strict subsets |M'| = kp of the minimal
// eigenvalue of Lambda(M, M'); generic core shared by exact and sampled modes
inline MulticollinearityProfile tilde_phi_impl(const DesignMatrix& design,
                                               int k, int kp,
                                               const DiagBudget& budget) {
  MulticollinearityProfile out;
  out.k = k;
  out.k_prime = kp;
  if (kp >= k) {
    out.note =
        "k' >= k: no strict subsets of size k', the inner maximum ranges over "
        "an empty family; value undefined for this design";
    return out;
  }
  out.defined = true;

  const int p = design.p();
  const std::uint64_t inner = binomial_capped(k, kp, budget.max_subsets);
  const std::uint64_t outer = binomial_capped(p, k, budget.max_subsets);
  const bool inner_exact = inner <= budget.max_subsets;
  // exact iff the full outer x inner evaluation count fits the budget
  const bool outer_exact =
      inner_exact && outer <= budget.max_subsets &&
      outer <= budget.max_subsets / std::max<std::uint64_t>(1, inner);

  std::uint64_t skipped_singular = 0;
  auto inner_max = [&](const std::vector<int>& m_idx) -> std::optional<double> {
    const ModelIndicator M(m_idx);
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    try {
      if (inner_exact) {
        for_each_combination(k, kp, [&](const std::vector<int>& local) {
          std::vector<int> sub;
          for (int t : local) sub.push_back(m_idx[t]);
          best = std::max(best,
                          lambda_matrix(design, M, ModelIndicator(sub)).min_eigenvalue);
          ++out.evaluated;
          any = true;
        });
      } else {
        SequentialRng rng(CounterRng(
            budget.seed, stream_id(RngStream::search,
                                   0x8000'0000ull | (std::uint64_t(k) << 20) |
                                       std::uint64_t(m_idx[0]))));
        const int samples = 64;
        for (int s = 0; s < samples; ++s) {
          std::vector<int> deck(m_idx);
          for (int i = 0; i < kp; ++i)
            std::swap(deck[i], deck[i + int(rng.below(k - i))]);
          std::vector<int> sub(deck.begin(), deck.begin() + kp);
          best = std::max(best,
                          lambda_matrix(design, M, ModelIndicator(sub)).min_eigenvalue);
          ++out.evaluated;
          any = true;
        }
      }
    } catch (const std::invalid_argument&) {
      ++skipped_singular;  // singular Gram for M: quantity diverges, skip M
      return std::nullopt;
    }
    return any ? std::optional<double>(best) : std::nullopt;
  };

  double global_min = std::numeric_limits<double>::infinity();
  if (outer_exact) {
    for_each_combination(p, k, [&](const std::vector<int>& m_idx) {
      const auto v = inner_max(m_idx);
      if (v) global_min = std::min(global_min, *v);
    });
    out.exact = true;
  } else {
    SequentialRng rng(CounterRng(
        budget.seed,
        stream_id(RngStream::search, 0x4000'0000ull | std::uint64_t(k))));
    const std::uint64_t n_outer = std::max<std::uint64_t>(
        16, budget.max_subsets / std::max<std::uint64_t>(1, inner_exact ? inner : 64));
    for (std::uint64_t t = 0; t < n_outer && out.evaluated < budget.max_subsets;
         ++t) {
      std::vector<int> deck(p);
      std::iota(deck.begin(), deck.end(), 0);
      for (int i = 0; i < k; ++i)
        std::swap(deck[i], deck[i + int(rng.below(p - i))]);
      std::vector<int> m_idx(deck.begin(), deck.begin() + k);
      std::sort(m_idx.begin(), m_idx.end());
      const auto v = inner_max(m_idx);
      if (v) global_min = std::min(global_min, *v);
    }
    out.exact = false;
    out.note = "budget-limited min-max over sampled subsets; not a certified bound";
  }

  if (!std::isfinite(global_min)) {
    out.defined = false;
    out.tilde_phi = std::numeric_limits<double>::quiet_NaN();
    out.note = "every examined Gram submatrix was singular";
    return out;
  }
  out.tilde_phi = global_min;
  if (skipped_singular > 0)
    out.note += (out.note.empty() ? "" : "; ") +
                std::to_string(skipped_singular) +
                " singular-Gram models skipped";
  return out;
}

}  // namespace detail

inline MulticollinearityProfile tilde_phi(const DesignMatrix& design, int k,
                                          const DiagBudget& budget = {}) {
  if (k < 1 || 2 * k > design.p())
    throw std::invalid_argument("tilde_phi: needs 1 <= k and 2k <= p");
  const double t2k = tau_at(design, 2 * k, budget);
  auto out = detail::tilde_phi_impl(design, k, k_prime_from_tau(t2k, k), budget);
  out.tau_2k = t2k;
  return out;
}

// variant with the inner size pinned by the caller (used by tests)
inline MulticollinearityProfile tilde_phi_with(const DesignMatrix& design,
                                               int k, int k_prime_override,
                                               const DiagBudget& budget = {}) {
  if (k < 1 || k > design.p())
    throw std::invalid_argument("tilde_phi_with: needs 1 <= k <= p");
  if (k_prime_override < 1)
    throw std::invalid_argument("tilde_phi_with: k' >= 1");
  return detail::tilde_phi_impl(design, k, k_prime_override, budget);
}

struct AssumptionDRow {
  int k = 0;
  double tau_2k = 0.0;
  double tau_k_product = 0.0;  // tau[2k] * k
  bool d1 = false;             // c1 <= tau[2k]*k <= k-1
  double phi_min_2k = 0.0;
  MulticollinearityProfile profile;
  double product = std::numeric_limits<double>::quiet_NaN();  // phi_min[2k]*tilde_phi[k]
  bool d3 = false;
};

struct AssumptionDReport {
  int kappa1 = 0;
  int kappa2 = 0;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;
  std::vector<AssumptionDRow> rows;
  double tau_2kappa2 = 0.0;
  double d2_threshold = 0.0;  // (kappa2 / (p e))^{c2}
  bool d2 = false;
  bool holds = false;
};

inline AssumptionDReport check_assumption_D(const DesignMatrix& design,
                                            int kappa1, int kappa2, double c1,
                                            double c2, double c3,
                                            const DiagBudget& budget = {}) {
  const int r = design.rank;
  if (!(kappa1 >= 1 && kappa1 <= kappa2 && 2 * kappa2 <= r))
    throw std::invalid_argument(
        "check_assumption_D: needs 1 <= kappa1 <= kappa2 <= r/2");
  if (!(c1 > 0.0) || !(c2 > 0.0))
    throw std::invalid_argument("check_assumption_D: c1, c2 must be positive");
  if (!(c3 > 0.0 && c3 <= 1.0))
    throw std::invalid_argument("check_assumption_D: c3 must lie in (0, 1]");

  AssumptionDReport rep;
  rep.kappa1 = kappa1;
  rep.kappa2 = kappa2;
  rep.c1 = c1;
  rep.c2 = c2;
  rep.c3 = c3;
  bool all = true;
  for (int k = kappa1; k <= kappa2; ++k) {
    AssumptionDRow row;
    row.k = k;
    const auto spec2k = sparse_eigs(design, 2 * k, budget);
    row.tau_2k = spec2k.tau;
    row.phi_min_2k = spec2k.phi_min;
    row.tau_k_product = spec2k.tau * k;
    row.d1 = c1 <= row.tau_k_product && row.tau_k_product <= double(k - 1);
    row.profile = tilde_phi(design, k, budget);
    if (row.profile.defined) {
      row.product = row.phi_min_2k * row.profile.tilde_phi;
      row.d3 = row.product >= c3;
    } else {
      row.d3 = false;  // undefined functional cannot certify the bound
    }
    all = all && row.d1 && row.d3;
    rep.rows.push_back(std::move(row));
  }
  rep.tau_2kappa2 = rep.rows.back().tau_2k;
  rep.d2_threshold =
      std::pow(double(kappa2) / (design.p() * std::numbers::e), c2);
  rep.d2 = rep.tau_2kappa2 >= rep.d2_threshold;
  rep.holds = all && rep.d2;
  return rep;
}

struct AssumptionBReport {
  int p0 = 0;
  double c4 = 0.0;
  double lhs = 0.0;  // max_j beta_j^2
  double rhs = 0.0;  // c4 * tau[2 p0] * tilde_phi[p0] * (ln(p/p0) + 1)
  double tau_2p0 = 0.0;
  double tilde_phi_p0 = 1.0;
  double slack = 0.0;  // rhs - lhs
  bool holds = false;
  std::string note;
};

inline AssumptionBReport check_assumption_B(const DesignMatrix& design,
                                            const Vector& beta, double c4,
                                            const DiagBudget& budget = {}) {
  const int p = design.p();
  if (int(beta.size()) != p)
    throw std::invalid_argument("check_assumption_B: beta length must be p");
  if (!(c4 > 0.0))
    throw std::invalid_argument("check_assumption_B: c4 must be positive");
  int p0 = 0;
  double lhs = 0.0;
  for (int j = 0; j < p; ++j) {
    if (beta(j) != 0.0) ++p0;
    lhs = std::max(lhs, beta(j) * beta(j));
  }
  if (p0 == 0)
    throw std::invalid_argument("check_assumption_B: beta must be nonzero");
  if (2 * p0 > p)
    throw std::invalid_argument("check_assumption_B: needs 2*p0 <= p");

  AssumptionBReport rep;
  rep.p0 = p0;
  rep.c4 = c4;
  rep.lhs = lhs;
  rep.tau_2p0 = tau_at(design, 2 * p0, budget);
  const auto prof = tilde_phi(design, p0, budget);
  if (prof.defined) {
    rep.tilde_phi_p0 = prof.tilde_phi;
  } else {
    // k' >= p0 only happens when tau[2 p0] is essentially 1; the functional
    // degenerates to the orthogonal case, so its limit value 1 is used
    rep.tilde_phi_p0 = 1.0;
    rep.note = "tilde_phi undefined (k' >= p0); orthogonal-limit value 1 used";
  }
  rep.rhs = c4 * rep.tau_2p0 * rep.tilde_phi_p0 *
            (std::log(double(p) / p0) + 1.0);
  rep.slack = rep.rhs - rep.lhs;
  rep.holds = rep.lhs <= rep.rhs;
  return rep;
}

struct RateBounds {
  double upper = 0.0;  // C1 sigma^2 min(p0 (ln(p/p0) + 1), r)
  double lower = 0.0;  // C2 sigma^2 tau[2p0] p0 (ln(p/p0)+1), or tau[p0] r
  bool sparse_branch = false;  // true when 2*p0 <= r
};

inline RateBounds rate_bounds(int p, int p0, int r, double tau_2p0,
                              double tau_p0, double sigma_sq, double C1,
                              double C2) {
  if (!(p >= 1 && p0 >= 1 && p0 <= r && r <= p))
    throw std::invalid_argument("rate_bounds: needs 1 <= p0 <= r <= p");
  if (!(sigma_sq > 0.0) || !(C1 > 0.0) || !(C2 > 0.0))
    throw std::invalid_argument("rate_bounds: sigma_sq, C1, C2 must be positive");
  RateBounds out;
  const double ln_term = std::log(double(p) / p0) + 1.0;
  out.upper = C1 * sigma_sq * std::min(p0 * ln_term, double(r));
  out.sparse_branch = 2 * p0 <= r;
  if (out.sparse_branch) {
    if (!(tau_2p0 >= 0.0 && tau_2p0 <= 1.0))
      throw std::invalid_argument("rate_bounds: tau_2p0 must lie in [0,1]");
    out.lower = C2 * sigma_sq * tau_2p0 * p0 * ln_term;
  } else {
    if (!(tau_p0 >= 0.0 && tau_p0 <= 1.0))
      throw std::invalid_argument("rate_bounds: tau_p0 must lie in [0,1]");
    out.lower = C2 * sigma_sq * tau_p0 * r;
  }
  return out;
}

struct DesignClassification {
  double tau_r = 0.0;
  bool exact = false;
  double threshold = 0.0;
  bool nearly_orthogonal = false;
  std::string note =
      "the dichotomy concerns sequences of designs; a single-matrix label "
      "against a user threshold is advisory only";
};

inline DesignClassification classify_design(const DesignMatrix& design,
                                            double threshold,
                                            const DiagBudget& budget = {}) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw std::invalid_argument("classify_design: threshold must lie in (0,1]");
  const int r = design.rank;
  if (r < 1) throw std::invalid_argument("classify_design: design has rank 0");
  const auto spec = sparse_eigs(design, r, budget);
  DesignClassification out;
  out.tau_r = spec.tau;
  out.exact = spec.exact;
  out.threshold = threshold;
  out.nearly_orthogonal = spec.tau >= threshold;
  return out;
}

}  // namespace mapsel
