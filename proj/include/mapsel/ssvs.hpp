#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mapsel/exhaustive.hpp"
#include "mapsel/rng.hpp"

namespace mapsel {

struct GibbsConfig {
  std::uint64_t sweeps = 10'000;
  std::uint64_t burn_in = 1'000;
  std::uint64_t seed = 0;
  int chains = 1;
  int top_k = 10;
};

inline void validate(const GibbsConfig& cfg) {
  if (cfg.sweeps < 1) throw std::invalid_argument("sweeps must be >= 1");
  if (cfg.burn_in >= cfg.sweeps)
    throw std::invalid_argument("burn_in must be smaller than sweeps");
  if (cfg.chains < 1) throw std::invalid_argument("chains must be >= 1");
  if (cfg.top_k < 1) throw std::invalid_argument("top_k must be >= 1");
}

// Posterior odds of activating predictor j given the state of the others:
//   [pi(k+1)/pi(k)] [C(p,k)/C(p,k+1)] (1+gamma)^{-1/2}
//     exp{ gamma/(gamma+1) dRSS_j / (2 sigma^2) },
// the C factor at size r dropped by the saturated convention.  Computed in
// log space so the size boundary and huge dRSS stay well behaved.
inline double log_odds_ratio(const DesignMatrix& design, const Vector& y,
                             const ModelIndicator& others, int j,
                             const PriorSpec& prior, const HyperParams& hp) {
  validate(hp);
  const int p = design.p();
  const int r = design.rank;
  if (r < 1) throw std::invalid_argument("log_odds_ratio: design has rank 0");
  if (j < 0 || j >= p)
    throw std::invalid_argument("log_odds_ratio: j out of range");
  if (others.contains(j))
    throw std::invalid_argument(
        "log_odds_ratio: j must be excluded from the conditioning state");
  const int k = others.size();
  if (k > r)
    throw std::invalid_argument("log_odds_ratio: state size exceeds rank");
  if (k + 1 > r) return -std::numeric_limits<double>::infinity();

  const auto lp = prior.log_masses(p, r);
  const double rss_without = least_squares_fit(design, y, others).rss;
  const double rss_with = least_squares_fit(design, y, others.with(j)).rss;
  const double drss = std::max(0.0, rss_without - rss_with);
  return lp[k + 1] - lp[k] - (k + 1 < r ? log_binomial(p, k + 1) : 0.0) +
         log_binomial(p, k) - 0.5 * std::log1p(hp.gamma) +
         hp.gamma / (hp.gamma + 1.0) * drss / (2.0 * hp.sigma_sq);
}

inline double odds_ratio(const DesignMatrix& design, const Vector& y,
                         const ModelIndicator& others, int j,
                         const PriorSpec& prior, const HyperParams& hp) {
  return std::exp(log_odds_ratio(design, y, others, j, prior, hp));
}

// One systematic scan of the single-site Gibbs kernel.  The uniform for
// coordinate j of sweep s sits at stream position s*p + j, which is what
// makes the batched runner reproduce these trajectories exactly.
inline std::vector<std::uint8_t> gibbs_sweep(
    std::vector<std::uint8_t> state, const DesignMatrix& design,
    const Vector& y, const PriorSpec& prior, const HyperParams& hp,
    const CounterRng& rng, std::uint64_t sweep_index) {
  const int p = design.p();
  if (int(state.size()) != p)
    throw std::invalid_argument("gibbs_sweep: state length does not match p");
  for (int j = 0; j < p; ++j) {
    state[j] = 0;
    const ModelIndicator others = ModelIndicator::from_mask(state);
    const double lo = log_odds_ratio(design, y, others, j, prior, hp);
    const double p1 = 1.0 / (1.0 + std::exp(-lo));
    const double u = rng.uniform_at(sweep_index * std::uint64_t(p) + j);
    state[j] = u < p1 ? 1 : 0;
  }
  return state;
}

namespace detail {

// Incremental Cholesky workspace for one chain: maintains R with
// R'R = Gram(active, active) in activation order and z = R^{-T} g(active),
// so both toggle directions cost O(k^2).  If a pivot ever collapses
// (dependent active columns, legal only on degenerate designs) the
// workspace falls back to full refits until a rebuild succeeds.
class ChainWorkspace {
 public:
  ChainWorkspace(const DesignMatrix& design, const Vector& y,
                 const Matrix& gram, const Vector& g)
      : design_(design),
        y_(y),
        gram_(gram),
        g_(g),
        p_(design.p()),
        R_(Matrix::Zero(p_, p_)),
        z_(Vector::Zero(p_)),
        pos_of_(p_, -1) {}

  int active_count() const { return int(order_.size()); }
  bool is_active(int j) const { return pos_of_[j] >= 0; }
  bool clean() const { return clean_; }

  // dRSS of activating inactive j (== the quadratic-form gain)
  double delta_add(int j) {
    if (!clean_) return robust_delta(j, /*adding=*/true);
    const int k = active_count();
    Vector v(k);
    const double schur = project_column(j, v);
    if (schur <= pivot_floor(j)) return 0.0;  // j adds nothing new
    double zeta = g_(j);
    for (int i = 0; i < k; ++i) zeta -= v(i) * z_(i);
    return zeta * zeta / schur;
  }

  // dRSS of deactivating active j
  double delta_drop(int j) {
    if (!clean_) return robust_delta(j, /*adding=*/false);
    const int k = active_count();
    const int i = pos_of_[j];
    // coefficients b = R^{-1} z
    Vector b(k);
    for (int t = k - 1; t >= 0; --t) {
      double s = z_(t);
      for (int u = t + 1; u < k; ++u) s -= R_(t, u) * b(u);
      b(t) = s / R_(t, t);
    }
    // (Gram^{-1})_ii = |R^{-T} e_i|^2
    Vector w = Vector::Zero(k);
    w(i) = 1.0 / R_(i, i);
    for (int t = i + 1; t < k; ++t) {
      double s = 0.0;
      for (int u = i; u < t; ++u) s += R_(u, t) * w(u);
      w(t) = -s / R_(t, t);
    }
    return b(i) * b(i) / w.squaredNorm();
  }

  void activate(int j) {
    if (pos_of_[j] >= 0) throw std::logic_error("activate: already active");
    const int k = active_count();
    if (clean_) {
      Vector v(k);
      const double schur = project_column(j, v);
      if (schur > pivot_floor(j)) {
        for (int i = 0; i < k; ++i) R_(i, k) = v(i);
        R_(k, k) = std::sqrt(schur);
        double zeta = g_(j);
        for (int i = 0; i < k; ++i) zeta -= v(i) * z_(i);
        z_(k) = zeta / R_(k, k);
      } else {
        clean_ = false;  // factor is stale from here on
      }
    }
    pos_of_[j] = k;
    order_.push_back(j);
  }

  void deactivate(int j) {
    const int i = pos_of_[j];
    if (i < 0) throw std::logic_error("deactivate: not active");
    const int k = active_count();
    order_.erase(order_.begin() + i);
    for (int t = i; t < k - 1; ++t) pos_of_[order_[t]] = t;
    pos_of_[j] = -1;
    if (!clean_) {
      rebuild();
      return;
    }
    // shift columns left, then Givens-restore the triangle
    for (int c = i + 1; c < k; ++c) R_.col(c - 1).head(c + 1) = R_.col(c).head(c + 1);
    for (int t = i; t < k - 1; ++t) {
      const double a = R_(t, t);
      const double b = R_(t + 1, t);
      const double rad = std::hypot(a, b);
      if (rad == 0.0) continue;
      const double c = a / rad;
      const double s = b / rad;
      for (int col = t; col < k - 1; ++col) {
        const double x = R_(t, col);
        const double y = R_(t + 1, col);
        R_(t, col) = c * x + s * y;
        R_(t + 1, col) = -s * x + c * y;
      }
      const double zx = z_(t);
      const double zy = z_(t + 1);
      z_(t) = c * zx + s * zy;
      z_(t + 1) = -s * zx + c * zy;
    }
    z_(k - 1) = 0.0;
    R_.col(k - 1).head(k).setZero();
  }

  ModelIndicator model() const {
    std::vector<int> idx = order_;
    return ModelIndicator(std::move(idx));
  }

 private:
  double pivot_floor(int j) const {
    return 1e-12 * gram_(j, j) + 1e-300;
  }

  // forward solve R'v = Gram(active, j); returns the Schur complement
  double project_column(int j, Vector& v) const {
    const int k = active_count();
    for (int i = 0; i < k; ++i) {
      double s = gram_(order_[i], j);
      for (int t = 0; t < i; ++t) s -= R_(t, i) * v(t);
      v(i) = s / R_(i, i);
    }
    return gram_(j, j) - v.squaredNorm();
  }

  double robust_delta(int j, bool adding) {
    std::vector<std::uint8_t> mask(p_, 0);
    for (int a : order_) mask[a] = 1;
    mask[j] = 0;
    const ModelIndicator without = ModelIndicator::from_mask(mask);
    mask[j] = 1;
    const ModelIndicator with = ModelIndicator::from_mask(mask);
    (void)adding;  // same two fits either way
    const double d = least_squares_fit(design_, y_, without).rss -
                     least_squares_fit(design_, y_, with).rss;
    return std::max(0.0, d);
  }

  void rebuild() {
    const std::vector<int> active = order_;
    order_.clear();
    std::fill(pos_of_.begin(), pos_of_.end(), -1);
    R_.setZero();
    z_.setZero();
    clean_ = true;
    for (int j : active) activate(j);  // may flip clean_ back off
  }

  const DesignMatrix& design_;
  const Vector& y_;
  const Matrix& gram_;
  const Vector& g_;
  int p_;
  Matrix R_;
  Vector z_;
  std::vector<int> order_;
  std::vector<int> pos_of_;
  bool clean_ = true;
};

struct ChainAccumulator {
  std::map<std::vector<std::uint8_t>, std::uint64_t> visits;
  std::vector<std::uint64_t> inclusion;
  std::uint64_t recorded = 0;
};

}  // namespace detail

struct ChainSummary {
  std::map<std::string, std::uint64_t> visit_counts;  // canonical key -> count
  struct TopModel {
    ModelIndicator model;
    std::uint64_t count = 0;
    double frequency = 0.0;
    double criterion = 0.0;
  };
  std::vector<TopModel> top_models;
  std::vector<double> inclusion_freq;  // marginal inclusion per predictor
  std::uint64_t recorded_sweeps = 0;
  int chains = 0;
};

struct SsvsResult {
  ChainSummary summary;
  SelectionResult selection;
};

// Systematic-scan stochastic search over models.  Chains are independent
// Philox streams of one seed, so the result is identical for any thread
// count; the per-chain trajectory matches repeated gibbs_sweep calls.
inline SsvsResult run_ssvs(const DesignMatrix& design, const Vector& y,
                           const PriorSpec& prior, const HyperParams& hp,
                           const GibbsConfig& cfg, int threads = 1) {
  validate(hp);
  validate(cfg);
  const int p = design.p();
  const int r = design.rank;
  if (r < 1) throw std::invalid_argument("run_ssvs: design has rank 0");
  if (int(y.size()) != design.n())
    throw std::invalid_argument("run_ssvs: y length does not match n");

  const auto sched = penalty_schedule(p, r, prior, hp);
  std::vector<double> log_comb(r + 1);
  for (int k = 0; k <= r; ++k) log_comb[k] = log_binomial(p, k);
  const double log1g = std::log1p(hp.gamma);
  const double coef = hp.gamma / (hp.gamma + 1.0) / (2.0 * hp.sigma_sq);
  const Matrix gram = design.X.transpose() * design.X;
  const Vector g = design.X.transpose() * y;

  auto run_chain = [&](int chain, detail::ChainAccumulator& acc) {
    const CounterRng init_rng(cfg.seed,
                              stream_id(RngStream::gibbs_init, chain));
    const CounterRng rng(cfg.seed, stream_id(RngStream::gibbs, chain));

    // initial state: iid inclusions at min(1/2, r/2p), redrawn until |M| <= r
    std::vector<std::uint8_t> state(p, 0);
    const double pi_incl = std::min(0.5, double(r) / (2.0 * p));
    bool ok = false;
    for (std::uint64_t attempt = 0; attempt < 10'000 && !ok; ++attempt) {
      int count = 0;
      for (int j = 0; j < p; ++j) {
        state[j] =
            init_rng.uniform_at(attempt * std::uint64_t(p) + j) < pi_incl;
        count += state[j];
      }
      ok = count <= r;
    }
    if (!ok) std::fill(state.begin(), state.end(), std::uint8_t(0));

    detail::ChainWorkspace ws(design, y, gram, g);
    for (int j = 0; j < p; ++j)
      if (state[j]) ws.activate(j);

    acc.inclusion.assign(p, 0);
    for (std::uint64_t sweep = 0; sweep < cfg.sweeps; ++sweep) {
      for (int j = 0; j < p; ++j) {
        const bool active = state[j];
        const int k = ws.active_count() - (active ? 1 : 0);
        bool want = false;
        if (k + 1 <= r) {
          const double drss =
              std::max(0.0, active ? ws.delta_drop(j) : ws.delta_add(j));
          const double lo = sched.log_prior[k + 1] - sched.log_prior[k] -
                            (k + 1 < r ? log_comb[k + 1] : 0.0) + log_comb[k] -
                            0.5 * log1g + coef * drss;
          const double p1 = 1.0 / (1.0 + std::exp(-lo));
          want = rng.uniform_at(sweep * std::uint64_t(p) + j) < p1;
        }
        if (want != active) {
          if (want)
            ws.activate(j);
          else
            ws.deactivate(j);
          state[j] = want;
        }
      }
      if (sweep >= cfg.burn_in) {
        ++acc.visits[state];
        for (int j = 0; j < p; ++j) acc.inclusion[j] += state[j];
        ++acc.recorded;
      }
    }
  };

  std::vector<detail::ChainAccumulator> per_chain(cfg.chains);
  const int workers = std::max(1, std::min(threads, cfg.chains));
  if (workers == 1) {
    for (int c = 0; c < cfg.chains; ++c) run_chain(c, per_chain[c]);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int c = w; c < cfg.chains; c += workers) run_chain(c, per_chain[c]);
      });
    for (auto& t : pool) t.join();
  }

  // merge in chain order (associative counts: partition-independent)
  detail::ChainAccumulator total;
  total.inclusion.assign(p, 0);
  for (const auto& acc : per_chain) {
    for (const auto& [mask, count] : acc.visits) total.visits[mask] += count;
    for (int j = 0; j < p; ++j) total.inclusion[j] += acc.inclusion[j];
    total.recorded += acc.recorded;
  }

  // rank every distinct visited model by the exact criterion
  struct Entry {
    ModelIndicator model;
    std::uint64_t count;
    double criterion;
    FitResult fit;
  };
  std::vector<Entry> entries;
  entries.reserve(total.visits.size());
  for (const auto& [mask, count] : total.visits) {
    Entry e;
    e.model = ModelIndicator::from_mask(mask);
    e.count = count;
    e.fit = least_squares_fit(design, y, e.model);
    e.criterion = e.fit.rss + sched.pen[e.model.size()];
    entries.push_back(std::move(e));
  }

  const Entry* best = nullptr;
  for (const auto& e : entries)
    if (!best || e.criterion < best->criterion ||
        (e.criterion == best->criterion && tie_break_less(e.model, best->model)))
      best = &e;

  SsvsResult out;
  out.summary.chains = cfg.chains;
  out.summary.recorded_sweeps = total.recorded;
  out.summary.inclusion_freq.assign(p, 0.0);
  for (int j = 0; j < p; ++j)
    out.summary.inclusion_freq[j] =
        double(total.inclusion[j]) / double(total.recorded);
  for (const auto& e : entries)
    out.summary.visit_counts[e.model.key()] = e.count;

  std::vector<const Entry*> ranked;
  for (const auto& e : entries) ranked.push_back(&e);
  std::sort(ranked.begin(), ranked.end(), [](const Entry* a, const Entry* b) {
    if (a->count != b->count) return a->count > b->count;
    return tie_break_less(a->model, b->model);
  });
  for (std::size_t i = 0; i < ranked.size() && int(i) < cfg.top_k; ++i) {
    ChainSummary::TopModel tm;
    tm.model = ranked[i]->model;
    tm.count = ranked[i]->count;
    tm.frequency = double(ranked[i]->count) / double(total.recorded);
    tm.criterion = ranked[i]->criterion;
    out.summary.top_models.push_back(std::move(tm));
  }

  out.selection.model = best->model;
  out.selection.fit = best->fit;
  out.selection.criterion = best->criterion;
  out.selection.penalty = sched.pen[best->model.size()];
  out.selection.log_posterior_unnorm = detail::log_posterior_terms(
      p, r, sched.log_prior, hp, best->model.size(),
      sum_of_squares(best->fit.fitted));
  out.selection.models_evaluated = entries.size();  // distinct models visited
  out.selection.saturated = best->model.size() == r;
  return out;
}

}  // namespace mapsel
