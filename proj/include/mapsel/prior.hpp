#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mapsel/combinatorics.hpp"

namespace mapsel {

struct HyperParams {
  double gamma = 1.0;     // prior-to-noise variance ratio of the slab
  double sigma_sq = 1.0;  // known noise variance
};

inline void validate(const HyperParams& hp) {
  if (!(hp.gamma > 0.0) || !std::isfinite(hp.gamma))
    throw std::invalid_argument("gamma must be positive and finite");
  if (!(hp.sigma_sq > 0.0) || !std::isfinite(hp.sigma_sq))
    throw std::invalid_argument("sigma_sq must be positive and finite");
}

inline double logsumexp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

enum class PriorKind { binomial, geometric, uniform, table };

// classical penalty levels a binomial prior can be calibrated to
enum class PenaltyCriterion { aic, bic, ric, fixed_lambda };

// Prior on model size over the truncated support {0..r}.  Built-in kinds are
// normalized over that support; table weights are used as given, since
// normalizing only shifts every penalty by one constant and never moves the
// argmin.  A binomial spec may defer its inclusion probability to a
// criterion calibration resolved once the problem dimensions are known.
struct PriorSpec {
  PriorKind kind = PriorKind::uniform;
  double xi = std::numeric_limits<double>::quiet_NaN();  // binomial
  double q = std::numeric_limits<double>::quiet_NaN();   // geometric
  std::vector<double> weights;                           // table
  std::optional<PenaltyCriterion> calibrate;             // binomial only
  double lambda = std::numeric_limits<double>::quiet_NaN();  // fixed_lambda

  static PriorSpec binomial(double xi_) {
    PriorSpec s;
    s.kind = PriorKind::binomial;
    s.xi = xi_;
    return s;
  }
  static PriorSpec binomial_calibrated(PenaltyCriterion crit,
                                       double lambda = std::numeric_limits<double>::quiet_NaN()) {
    PriorSpec s;
    s.kind = PriorKind::binomial;
    s.calibrate = crit;
    s.lambda = lambda;
    return s;
  }
  static PriorSpec geometric(double q_) {
    PriorSpec s;
    s.kind = PriorKind::geometric;
    s.q = q_;
    return s;
  }
  static PriorSpec uniform() { return PriorSpec{}; }
  static PriorSpec table(std::vector<double> w) {
    PriorSpec s;
    s.kind = PriorKind::table;
    s.weights = std::move(w);
    return s;
  }

  // ln pi(k) for k = 0..r (unnormalized for tables)
  std::vector<double> log_masses(int p, int r) const {
    if (p < 1 || r < 0 || r > p)
      throw std::invalid_argument("prior support needs 0 <= r <= p, p >= 1");
    std::vector<double> lw(r + 1);
    switch (kind) {
      case PriorKind::binomial: {
        if (calibrate && !(xi > 0.0))
          throw std::invalid_argument(
              "binomial prior awaits criterion calibration; resolve xi first");
        if (!(xi > 0.0 && xi < 1.0))
          throw std::invalid_argument("binomial prior needs xi in (0,1)");
        for (int k = 0; k <= r; ++k)
          lw[k] = log_binomial(p, k) + k * std::log(xi) +
                  (p - k) * std::log1p(-xi);
        break;
      }
      case PriorKind::geometric: {
        if (!(q > 0.0 && q < 1.0))
          throw std::invalid_argument("geometric prior needs q in (0,1)");
        for (int k = 0; k <= r; ++k) lw[k] = k * std::log(q);
        break;
      }
      case PriorKind::uniform: {
        for (int k = 0; k <= r; ++k) lw[k] = 0.0;
        break;
      }
      case PriorKind::table: {
        if (int(weights.size()) != r + 1)
          throw std::invalid_argument(
              "table prior needs exactly r + 1 weights (k = 0..r)");
        for (int k = 0; k <= r; ++k) {
          if (!(weights[k] > 0.0) || !std::isfinite(weights[k]))
            throw std::invalid_argument(
                "table prior weights must be positive (zero mass inside the support)");
          lw[k] = std::log(weights[k]);
        }
        return lw;  // as given
      }
    }
    const double lz = logsumexp(lw);
    for (double& x : lw) x -= lz;
    return lw;
  }
};

// L_k summarizes prior sparsity: the per-coordinate log cost of size k
//   L_0 = 2 ln(1/pi(0)),  L_k = (1/k) ln(C(p,k)/pi(k)) for 0 < k < r,
//   L_r = (1/r) ln(1/pi(r))
inline std::vector<double> compute_L(int p, int r, const PriorSpec& prior) {
  if (r < 1) throw std::invalid_argument("compute_L: needs r >= 1");
  const auto lp = prior.log_masses(p, r);
  std::vector<double> L(r + 1);
  L[0] = -2.0 * lp[0];
  for (int k = 1; k < r; ++k) L[k] = (log_binomial(p, k) - lp[k]) / k;
  L[r] = -lp[r] / r;
  return L;
}

struct PenaltySchedule {
  int p = 0;
  int r = 0;
  double gamma = 0.0;
  double sigma_sq = 0.0;
  std::vector<double> pen;        // Pen(0..r)
  std::vector<double> log_prior;  // ln pi(0..r)
  std::vector<double> L;          // L_0..L_r
};

// Pen(k) = 2 sigma^2 (1 + 1/gamma) [ ln C(p,k) - ln pi(k) + (k/2) ln(1+gamma) ]
// with the combinatorial factor dropped at k = r: all saturated models are
// one posterior class, represented by a single model.
inline PenaltySchedule penalty_schedule(int p, int r, const PriorSpec& prior,
                                        const HyperParams& hp) {
  if (p < 1 || r < 1 || r > p)
    throw std::invalid_argument("penalty_schedule: needs 1 <= r <= p");
  validate(hp);
  PenaltySchedule s;
  s.p = p;
  s.r = r;
  s.gamma = hp.gamma;
  s.sigma_sq = hp.sigma_sq;
  s.log_prior = prior.log_masses(p, r);
  s.L = compute_L(p, r, prior);
  const double scale = 2.0 * hp.sigma_sq * (1.0 + 1.0 / hp.gamma);
  const double log1g = std::log1p(hp.gamma);
  s.pen.resize(r + 1);
  for (int k = 0; k <= r; ++k) {
    const double comb = k < r ? log_binomial(p, k) : 0.0;
    s.pen[k] = scale * (comb - s.log_prior[k] + 0.5 * k * log1g);
  }
  return s;
}

// the slope of the linear penalty 2 sigma^2 lambda k induced by a binomial
// prior with inclusion probability xi
inline double linear_penalty_level(double xi, double gamma) {
  if (!(xi > 0.0 && xi < 1.0))
    throw std::invalid_argument("linear_penalty_level: xi in (0,1)");
  if (!(gamma > 0.0))
    throw std::invalid_argument("linear_penalty_level: gamma > 0");
  return (1.0 + 1.0 / gamma) *
         std::log(std::sqrt(1.0 + gamma) * (1.0 - xi) / xi);
}

struct XiCalibration {
  double xi = 0.0;             // exact inversion of the lambda(xi) map
  double xi_asymptotic = 0.0;  // large-p form sqrt(gamma)/(e^lambda + sqrt(gamma))
  double lambda = 0.0;
};

// binomial inclusion probability whose linear penalty matches a classical
// criterion: lambda = 1 (AIC), (ln n)/2 (BIC), ln p (RIC), or user-fixed
inline XiCalibration binomial_xi_for_criterion(
    PenaltyCriterion crit, int p, int n, double gamma,
    double lambda = std::numeric_limits<double>::quiet_NaN()) {
  double lam = 0.0;
  switch (crit) {
    case PenaltyCriterion::aic:
      lam = 1.0;
      break;
    case PenaltyCriterion::bic:
      if (n < 2) throw std::invalid_argument("BIC calibration needs n >= 2");
      lam = 0.5 * std::log(double(n));
      break;
    case PenaltyCriterion::ric:
      if (p < 2) throw std::invalid_argument("RIC calibration needs p >= 2");
      lam = std::log(double(p));
      break;
    case PenaltyCriterion::fixed_lambda:
      lam = lambda;
      break;
  }
  if (!(lam > 0.0) || !std::isfinite(lam))
    throw std::invalid_argument("penalty level lambda must be positive");
  if (!(gamma > 0.0))
    throw std::invalid_argument("calibration needs gamma > 0");
  const double root = std::sqrt(1.0 + gamma);
  const double sg = std::sqrt(gamma);
  XiCalibration cal;
  cal.lambda = lam;
  cal.xi = root / (root + std::exp(lam * gamma / (gamma + 1.0)));
  cal.xi_asymptotic = sg / (std::exp(lam) + sg);
  return cal;
}

// resolve a deferred criterion calibration against concrete dimensions
inline PriorSpec resolve_prior(const PriorSpec& prior, int p, int n,
                               double gamma) {
  if (prior.kind != PriorKind::binomial || !prior.calibrate) return prior;
  PriorSpec out = prior;
  out.xi = binomial_xi_for_criterion(*prior.calibrate, p, n, gamma, prior.lambda).xi;
  out.calibrate.reset();
  return out;
}

struct AssumptionPReport {
  bool holds = true;
  double c_gamma = 0.0;
  std::vector<int> violating_k;
};

inline double assumption_P_c(double gamma) {
  return 8.0 * (gamma + 0.75) * (gamma + 0.75);
}

// pi(k) <= C(p,k) e^{-c(gamma) k} for k < r and pi(r) <= e^{-c(gamma) r},
// checked in log space on the normalized masses
inline AssumptionPReport check_assumption_P(int p, int r,
                                            const PriorSpec& prior,
                                            double gamma) {
  if (!(gamma > 0.0))
    throw std::invalid_argument("check_assumption_P: gamma > 0");
  auto lp = prior.log_masses(p, r);
  const double lz = logsumexp(lp);  // no-op for built-ins, normalizes tables
  AssumptionPReport rep;
  rep.c_gamma = assumption_P_c(gamma);
  for (int k = 0; k <= r; ++k) {
    const double comb = k < r ? log_binomial(p, k) : 0.0;
    const double bound = comb - rep.c_gamma * k;
    if (lp[k] - lz > bound + 1e-12) {
      rep.holds = false;
      rep.violating_k.push_back(k);
    }
  }
  return rep;
}

}  // namespace mapsel
