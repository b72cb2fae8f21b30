#include <catch_amalgamated.hpp>

#include <cmath>

#include "mapsel/io.hpp"
#include "mapsel/risk.hpp"

using namespace mapsel;
using Catch::Approx;

TEST_CASE("oracle risk on orthonormal designs is sum of clipped terms") {
  const auto d = make_orthonormal_design(8, 6);
  Vector beta = Vector::Zero(6);
  beta(0) = 3.0;
  beta(1) = 0.5;
  const auto res = oracle_risk_detail(d, beta, 1.0);
  CHECK(res.exact);
  // min_M bias^2 + |M| = min(9,1) + min(0.25,1) = 1.25, attained by {0}
  CHECK(res.risk == Approx(1.25).epsilon(1e-12));
  CHECK(res.model == ModelIndicator({0}));

  Vector weak = Vector::Zero(6);
  weak(2) = 0.5;
  CHECK(oracle_risk(d, weak, 1.0) == Approx(0.25).epsilon(1e-12));

  // sigma^2 scaling: thresholds move with the noise floor
  CHECK(oracle_risk(d, beta, 0.1) == Approx(0.1 + 0.1).epsilon(1e-12));
}

TEST_CASE("oracle matches a hand enumeration on a correlated design") {
  const auto d = make_equicorrelated_design(9, 6, 0.6);
  Vector beta(6);
  beta << 2.0, -1.2, 0.0, 0.4, 0.0, 0.0;
  const double sigma_sq = 0.8;
  const auto res = oracle_risk_detail(d, beta, sigma_sq);
  REQUIRE(res.exact);

  const Vector mu = d.X * beta;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t bits = 0; bits < 64; ++bits) {
    std::vector<int> idx;
    for (int j = 0; j < 6; ++j)
      if (bits & (1ull << j)) idx.push_back(j);
    const auto proj = mean_projection(d, mu, ModelIndicator(idx));
    best = std::min(best, proj.bias_sq + sigma_sq * double(idx.size()));
  }
  CHECK(res.risk == Approx(best).epsilon(1e-10));
}

TEST_CASE("budgeted oracle still nails the sparse orthonormal case") {
  const auto d = make_orthonormal_design(60, 60);
  Vector beta = Vector::Zero(60);
  beta(0) = 6.0;
  beta(1) = -6.0;
  const auto res = oracle_risk_detail(d, beta, 1.0, 100'000);
  CHECK(!res.exact);  // 2^60 candidates, budget forces the greedy pool
  CHECK(res.risk == Approx(2.0).epsilon(1e-10));
}

TEST_CASE("scenario materialization") {
  ScenarioSpec sc;
  sc.n = 10;
  sc.p = 6;
  sc.design = DesignKind::orthonormal;
  sc.p0 = 3;
  sc.beta_magnitude = 4.0;
  sc.sigma_sq = 0.25;
  const auto mat = materialize(sc);
  CHECK(mat.orthonormal_columns);
  CHECK(mat.beta(0) == Approx(4.0 * 0.5));   // magnitude in sigma units
  CHECK(mat.beta(1) == Approx(-4.0 * 0.5));  // alternating signs
  CHECK(mat.beta(2) == Approx(4.0 * 0.5));
  CHECK(mat.beta(3) == 0.0);
  CHECK((mat.mu - mat.X.X * mat.beta).norm() == 0.0);

  sc.explicit_beta = {1, 0, 0, 0, 0, 2};
  const auto over = materialize(sc);
  CHECK(over.beta(5) == 2.0);

  sc.explicit_beta.clear();
  sc.design = DesignKind::iid_gaussian;
  CHECK(!materialize(sc).orthonormal_columns);

  sc.design = DesignKind::equicorrelated;
  sc.rho = 0.4;
  CHECK(materialize(sc).X.rank == 6);

  ScenarioSpec bad = sc;
  bad.p0 = 7;
  CHECK_THROWS_AS(materialize(bad), std::invalid_argument);
  bad = sc;
  bad.explicit_beta = {1, 2};
  CHECK_THROWS_AS(materialize(bad), std::invalid_argument);
  bad = sc;
  bad.replications = 0;
  CHECK_THROWS_AS(materialize(bad), std::invalid_argument);
}

TEST_CASE("fixed-model risk identity within monte carlo error") {
  ScenarioSpec sc;
  sc.id = "identity";
  sc.n = 14;
  sc.p = 7;
  sc.design = DesignKind::iid_gaussian;
  sc.p0 = 2;
  sc.beta_magnitude = 3.0;
  sc.replications = 500;
  sc.seed = 42;

  EstimatorSpec fixed;
  fixed.type = EstimatorSpec::Type::fixed_model;
  fixed.name = "true-support";
  fixed.fixed_indices = {0, 1};
  EstimatorSpec off;
  off.type = EstimatorSpec::Type::fixed_model;
  off.name = "null";
  off.fixed_indices = {};
  sc.estimators = {fixed, off};

  const auto rep = compare_estimators(sc);
  REQUIRE(rep.estimators.size() == 2);
  const auto mat = materialize(sc);

  const double want_true =
      mean_projection(mat.X, mat.mu, ModelIndicator({0, 1})).bias_sq + 2.0;
  const auto& est = rep.estimators[0];
  CHECK(std::abs(est.mean_risk - want_true) <= 3.0 * est.std_error);

  const double want_null = sum_of_squares(mat.mu);
  const auto& nul = rep.estimators[1];
  // the null fit is deterministic: every replication scores bias^2 exactly
  CHECK(nul.mean_risk == Approx(want_null).epsilon(1e-12));
  CHECK(nul.std_error == Approx(0.0).margin(1e-9));

  // histogram bookkeeping
  REQUIRE(est.size_histogram.size() >= 3);
  CHECK(est.size_histogram[2] == 500);
  std::uint64_t total = 0;
  for (auto c : est.size_histogram) total += c;
  CHECK(total == 500);
}

TEST_CASE("common random numbers pair the estimators") {
  ScenarioSpec sc;
  sc.n = 12;
  sc.p = 5;
  sc.design = DesignKind::iid_gaussian;
  sc.p0 = 1;
  sc.beta_magnitude = 4.0;
  sc.replications = 60;
  sc.seed = 9;
  EstimatorSpec a;
  a.type = EstimatorSpec::Type::fixed_model;
  a.name = "a";
  a.fixed_indices = {0, 2};
  EstimatorSpec b = a;
  b.name = "b";
  sc.estimators = {a, b};
  const auto rep = compare_estimators(sc);
  // same noise stream, same model: byte-identical risks
  CHECK(rep.estimators[0].mean_risk == rep.estimators[1].mean_risk);
  CHECK(rep.estimators[0].std_error == rep.estimators[1].std_error);
}

TEST_CASE("report carries oracle ratio and rate bounds") {
  ScenarioSpec sc;
  sc.id = "rates";
  sc.n = 16;
  sc.p = 8;
  sc.design = DesignKind::orthonormal;
  sc.p0 = 2;
  sc.beta_magnitude = 5.0;
  sc.replications = 120;
  sc.seed = 5;
  EstimatorSpec map;
  map.type = EstimatorSpec::Type::map_prior;
  map.name = "geometric";
  map.prior = PriorSpec::geometric(0.5);
  EstimatorSpec ric;
  ric.type = EstimatorSpec::Type::fixed_penalty;
  ric.name = "ric";
  ric.lambda = std::log(8.0);
  sc.estimators = {map, ric};

  const auto rep = compare_estimators(sc);
  CHECK(rep.oracle_exact);
  CHECK(rep.oracle_risk == Approx(2.0).epsilon(1e-12));
  CHECK(rep.p0 == 2);
  for (const auto& est : rep.estimators) {
    REQUIRE(std::isfinite(est.oracle_ratio));
    CHECK(est.oracle_ratio ==
          Approx(est.mean_risk / (std::log(8.0) * (2.0 + 1.0))).epsilon(1e-12));
  }
  CHECK(rep.rate_sparse_branch);
  // orthonormal: tau == 1, upper and lower collapse to p0 (ln(p/p0) + 1)
  const double expect = 2.0 * (std::log(4.0) + 1.0);
  CHECK(rep.rate_upper == Approx(expect).epsilon(1e-9));
  CHECK(rep.rate_lower == Approx(expect).epsilon(1e-9));
}

TEST_CASE("estimator failures carry context and type") {
  ScenarioSpec sc;
  sc.n = 10;
  sc.p = 24;
  sc.design = DesignKind::iid_gaussian;
  sc.p0 = 1;
  sc.beta_magnitude = 3.0;
  sc.replications = 5;
  sc.select_budget = 50;  // far below the 2^24-ish enumeration
  EstimatorSpec map;
  map.type = EstimatorSpec::Type::map_prior;
  map.name = "doomed";
  map.prior = PriorSpec::geometric(0.5);
  EstimatorSpec fixed;
  fixed.type = EstimatorSpec::Type::fixed_model;
  fixed.name = "ok";
  fixed.fixed_indices = {0};
  sc.estimators = {map, fixed};
  try {
    compare_estimators(sc);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(std::string(e.what()).find("doomed") != std::string::npos);
    CHECK(std::string(e.what()).find("replication") != std::string::npos);
    CHECK(e.budget == 50);
  }
}

TEST_CASE("estimator preparation validates its inputs") {
  ScenarioSpec sc;
  sc.n = 12;
  sc.p = 5;
  sc.p0 = 1;
  sc.beta_magnitude = 2.0;
  sc.replications = 10;
  EstimatorSpec lone;
  lone.type = EstimatorSpec::Type::fixed_model;
  lone.name = "only";
  lone.fixed_indices = {0};
  sc.estimators = {lone};
  CHECK_THROWS_AS(compare_estimators(sc), std::invalid_argument);

  sc.estimators = {lone, lone};
  sc.estimators[1].name = "bad-gamma";
  sc.estimators[1].type = EstimatorSpec::Type::map_prior;
  sc.estimators[1].prior = PriorSpec::uniform();
  sc.estimators[1].gamma = -2.0;
  CHECK_THROWS_AS(compare_estimators(sc), std::invalid_argument);

  sc.estimators[1] = lone;
  sc.estimators[1].name = "out-of-range";
  sc.estimators[1].fixed_indices = {9};
  CHECK_THROWS_AS(compare_estimators(sc), std::invalid_argument);

  sc.estimators[1] = lone;
  sc.estimators[1].name = "bad-lambda";
  sc.estimators[1].type = EstimatorSpec::Type::fixed_penalty;
  sc.estimators[1].lambda = 0.0;
  CHECK_THROWS_AS(compare_estimators(sc), std::invalid_argument);
}

TEST_CASE("simulation is invariant to the worker count") {
  ScenarioSpec sc;
  sc.id = "threads";
  sc.n = 18;
  sc.p = 6;
  sc.design = DesignKind::equicorrelated;
  sc.rho = 0.5;
  sc.p0 = 2;
  sc.beta_magnitude = 4.0;
  sc.replications = 80;
  sc.seed = 31;
  EstimatorSpec map;
  map.type = EstimatorSpec::Type::map_prior;
  map.name = "geometric";
  map.prior = PriorSpec::geometric(0.4);
  EstimatorSpec fixed;
  fixed.type = EstimatorSpec::Type::fixed_model;
  fixed.name = "support";
  fixed.fixed_indices = {0, 1};
  sc.estimators = {map, fixed};

  const auto r1 = compare_estimators(sc, 1);
  const auto r3 = compare_estimators(sc, 3);
  const json j1 = r1, j3 = r3;
  CHECK(j1.dump() == j3.dump());
}
