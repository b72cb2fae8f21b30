#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mapsel/exhaustive.hpp"

using namespace mapsel;
using Catch::Approx;

namespace {

// every model over {0..p-1} with size <= r, saturated class collapsed to its
// lexicographically first independent representative
SelectionResult brute_force(const DesignMatrix& d, const Vector& y,
                            const PriorSpec& prior, const HyperParams& hp) {
  const int p = d.p();
  const int r = d.rank;
  const auto sat = first_independent_subset(d);
  SelectionResult best;
  double best_lp = -std::numeric_limits<double>::infinity();
  for (std::uint64_t bits = 0; bits < (1ull << p); ++bits) {
    std::vector<int> idx;
    for (int j = 0; j < p; ++j)
      if (bits & (1ull << j)) idx.push_back(j);
    const ModelIndicator M(idx);
    if (M.size() > r) continue;
    if (M.size() == r && !(M == sat)) continue;  // one saturated representative
    const double lp = log_posterior(d, y, M, prior, hp);
    if (lp > best_lp + 1e-13) {
      best_lp = lp;
      best.model = M;
      best.log_posterior_unnorm = lp;
    }
  }
  return best;
}

Vector random_response(const DesignMatrix& d, std::mt19937& gen) {
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  Vector beta = Vector::Zero(d.p());
  for (int j = 0; j < d.p(); ++j)
    if (coin(gen)) beta(j) = 3.0 * N(gen);
  Vector y = d.X * beta;
  for (int i = 0; i < d.n(); ++i) y(i) += N(gen);
  return y;
}

}  // namespace

TEST_CASE("map_select equals the brute-force posterior argmax") {
  std::mt19937 gen(20250815);
  for (int trial = 0; trial < 25; ++trial) {
    const int p = 3 + int(gen() % 5);          // 3..7
    const int n = p + 3 + int(gen() % 8);      // p+3..p+10
    const auto d = make_iid_gaussian_design(n, p, gen());
    const Vector y = random_response(d, gen);
    PriorSpec prior;
    switch (trial % 3) {
      case 0: prior = PriorSpec::geometric(0.4); break;
      case 1: prior = PriorSpec::binomial(0.3); break;
      default: prior = PriorSpec::uniform(); break;
    }
    const HyperParams hp{trial % 2 ? 3.0 : double(p), 1.0};
    const auto got = map_select(d, y, prior, hp);
    const auto want = brute_force(d, y, prior, hp);
    REQUIRE(got.model == want.model);
    CHECK(got.log_posterior_unnorm ==
          Approx(want.log_posterior_unnorm).epsilon(1e-9));
  }
}

TEST_CASE("criterion and log posterior are exact monotone duals") {
  const auto d = make_iid_gaussian_design(15, 6, 9);
  std::mt19937 gen(4);
  const Vector y = random_response(d, gen);
  const auto prior = PriorSpec::geometric(0.5);
  const HyperParams hp{2.0, 1.3};
  const auto sched = penalty_schedule(d.p(), d.rank, prior, hp);
  const double coef = hp.gamma / (hp.gamma + 1.0);

  const ModelIndicator A({0, 3}), B({1, 2, 4});
  const double crit_A =
      least_squares_fit(d, y, A).rss + sched.pen[A.size()];
  const double crit_B =
      least_squares_fit(d, y, B).rss + sched.pen[B.size()];
  const double lp_A = log_posterior(d, y, A, prior, hp);
  const double lp_B = log_posterior(d, y, B, prior, hp);
  // lp = const - coef/(2 sigma^2) * criterion, exactly
  CHECK(lp_A - lp_B ==
        Approx(-coef / (2.0 * hp.sigma_sq) * (crit_A - crit_B)).epsilon(1e-9));
}

TEST_CASE("selection result carries consistent bookkeeping") {
  const auto d = make_orthonormal_design(8, 5);
  Vector y = Vector::Zero(8);
  y(0) = 6.0;
  y(2) = -5.0;
  const auto res = map_select(d, y, PriorSpec::geometric(0.5), {4.0, 1.0});
  CHECK(res.model == ModelIndicator({0, 2}));
  const auto fit = least_squares_fit(d, y, res.model);
  CHECK(res.criterion == Approx(fit.rss + res.penalty).epsilon(1e-12));
  CHECK(!res.saturated);
  CHECK(res.models_evaluated >= 1);
  CHECK(res.models_evaluated <= enumeration_cost(5, 4, 1'000'000) + 1);
  CHECK(std::isfinite(res.log_posterior_unnorm));
}

TEST_CASE("pruning skips whole size classes but never changes the answer") {
  const auto d = make_iid_gaussian_design(18, 8, 2);
  Vector y = d.X.col(1) * 9.0;
  for (int i = 0; i < 18; ++i) y(i) += 0.1 * std::sin(i * 1.7);
  const auto res = map_select(d, y, PriorSpec::geometric(0.2), {8.0, 1.0});
  CHECK(res.model == ModelIndicator({1}));
  // strong sparsity makes large classes unaffordable before fitting
  CHECK(res.models_evaluated < (1ull << 8));
}

TEST_CASE("saturated class is represented once") {
  // y inside the column span forces the saturated representative to win
  const auto d = make_iid_gaussian_design(6, 6, 13);
  REQUIRE(d.rank == 6);
  Vector beta(6);
  beta << 9, -9, 8, -8, 7, -7;
  const Vector y = d.X * beta;
  const auto res = map_select(d, y, PriorSpec::uniform(), {1.0, 1.0});
  CHECK(res.saturated);
  CHECK(res.model == first_independent_subset(d));
  CHECK(res.model.size() == 6);
}

TEST_CASE("first independent subset skips dependent columns") {
  Matrix X(7, 4);
  X.col(0).setLinSpaced(7, 1.0, 7.0);
  X.col(1) = 2.0 * X.col(0);
  X.col(2).setRandom();
  X(0, 2) += 5.0;  // clearly independent of col 0
  X.col(3) = X.col(2) - X.col(0);
  const DesignMatrix d(X);
  REQUIRE(d.rank == 2);
  CHECK(first_independent_subset(d) == ModelIndicator({0, 2}));

  const auto full = make_iid_gaussian_design(9, 4, 21);
  CHECK(first_independent_subset(full) == ModelIndicator({0, 1, 2, 3}));
}

TEST_CASE("budget violations identify the shortfall") {
  const auto d = make_iid_gaussian_design(10, 30, 1);
  const Vector y = Vector::Ones(10);
  try {
    map_select(d, y, PriorSpec::geometric(0.5), {1.0, 1.0}, 1000);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(e.budget == 1000);
    CHECK(e.required > 1000);
    CHECK(std::string(e.what()).find("stochastic") != std::string::npos);
  }
}

TEST_CASE("ties resolve toward the smaller lexicographic model") {
  Matrix X(5, 2);
  X.col(0).setLinSpaced(5, 1.0, 5.0);
  X.col(0) /= X.col(0).norm();
  X.col(1) = X.col(0);
  const DesignMatrix d(X);
  REQUIRE(d.rank == 1);
  const Vector y = X.col(0) * 4.0;
  // {0} and {1} fit identically; the saturated representative is {0}
  const auto res = map_select(d, y, PriorSpec::uniform(), {1.0, 1.0});
  CHECK(res.model == ModelIndicator({0}));
}

TEST_CASE("linear-penalty selection matches the calibrated binomial prior") {
  std::mt19937 gen(77);
  std::normal_distribution<double> N(0.0, 1.0);
  const int p = 9;
  const auto d = make_orthonormal_design(12, p);
  const double gamma = 6.0, lambda = std::log(double(p));
  const auto prior = resolve_prior(
      PriorSpec::binomial_calibrated(PenaltyCriterion::ric), p, 12, gamma);
  for (int trial = 0; trial < 20; ++trial) {
    Vector y(12);
    for (int i = 0; i < 12; ++i) y(i) = 2.2 * N(gen);
    const auto a = map_select(d, y, prior, {gamma, 1.0});
    const auto b = select_linear_penalty(d, y, lambda, 1.0);
    CHECK(a.model == b.model);
  }
}

TEST_CASE("orthonormal fast path reproduces the generic search") {
  std::mt19937 gen(31);
  std::normal_distribution<double> N(0.0, 1.0);
  const auto d = make_orthonormal_design(11, 7);
  const auto prior = PriorSpec::geometric(0.35);
  const HyperParams hp{5.0, 0.8};
  const auto sched = penalty_schedule(7, 7, prior, hp);
  for (int trial = 0; trial < 30; ++trial) {
    Vector y(11);
    for (int i = 0; i < 11; ++i) y(i) = 1.8 * N(gen);
    const auto fast = detail::select_orthonormal(d, y, sched.pen);
    const auto slow = map_select(d, y, prior, hp);
    REQUIRE(fast.model == slow.model);
    CHECK(fast.criterion == Approx(slow.criterion).epsilon(1e-10));
    CHECK((fast.fit.beta - slow.fit.beta).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("log posterior input validation") {
  const auto d = make_orthonormal_design(6, 4);
  const Vector y = Vector::Ones(6);
  CHECK_THROWS_AS(
      log_posterior(d, y, ModelIndicator({4}), PriorSpec::uniform(), {1.0, 1.0}),
      std::invalid_argument);
  Matrix flat = Matrix::Zero(4, 2);
  CHECK_THROWS_AS(log_posterior(DesignMatrix(flat), Vector::Zero(4),
                                ModelIndicator(), PriorSpec::uniform(),
                                {1.0, 1.0}),
                  std::invalid_argument);
}
