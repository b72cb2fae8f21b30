#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "mapsel/diagnostics.hpp"

using namespace mapsel;
using Catch::Approx;

namespace {

// two orthogonal duplicated pairs: within-pair correlation rho, cross-pair 0
DesignMatrix paired_design(double rho) {
  Matrix X = Matrix::Zero(6, 4);
  const double s = std::sqrt(1.0 - rho * rho);
  X(0, 0) = 1.0;
  X(0, 1) = rho;
  X(1, 1) = s;
  X(2, 2) = 1.0;
  X(2, 3) = rho;
  X(3, 3) = s;
  return DesignMatrix(X);
}

}  // namespace

TEST_CASE("equicorrelated sparse spectra match the closed form") {
  for (double rho : {0.2, 0.5, 0.9}) {
    const int p = 8;
    const auto d = make_equicorrelated_design(p + 2, p, rho);
    const auto curve = tau_curve(d, p);
    REQUIRE(int(curve.size()) == p);
    double prev_tau = 2.0;
    for (const auto& row : curve) {
      REQUIRE(row.exact);
      CHECK(!row.beyond_rank);
      const double want_min = row.k == 1 ? 1.0 : 1.0 - rho;
      const double want_max = 1.0 + (row.k - 1) * rho;
      CHECK(row.phi_min == Approx(want_min).epsilon(1e-8));
      CHECK(row.phi_max == Approx(want_max).epsilon(1e-8));
      CHECK(row.tau == Approx(want_min / want_max).epsilon(1e-8));
      CHECK(row.tau <= prev_tau + 1e-12);  // non-increasing
      prev_tau = row.tau;
      CHECK(row.subsets_evaluated == binomial_capped(p, row.k, 1u << 30));
    }
  }
}

TEST_CASE("budgeted search stays on the certified side") {
  const auto d = make_iid_gaussian_design(20, 12, 6);
  const int k = 3;
  const auto exact = sparse_eigs(d, k, {1'000'000, 8, 0});
  REQUIRE(exact.exact);
  DiagBudget tight;
  tight.max_subsets = 40;  // C(12,3) = 220 will not fit
  tight.restarts = 3;
  const auto rough = sparse_eigs(d, k, tight);
  CHECK(!rough.exact);
  // reported phi_min is an upper bound on the true minimum, phi_max a lower
  // bound on the true maximum
  CHECK(rough.phi_min >= exact.phi_min - 1e-12);
  CHECK(rough.phi_max <= exact.phi_max + 1e-12);
  CHECK(rough.subsets_evaluated <= 2 * tight.max_subsets);
}

TEST_CASE("budgeted mode is exact on symmetric designs") {
  // every k-subset of an equicorrelated design has the same spectrum, so a
  // sampled search cannot miss
  const auto d = make_equicorrelated_design(42, 40, 0.5);
  DiagBudget budget;
  budget.max_subsets = 500;
  const auto s = sparse_eigs(d, 4, budget);
  CHECK(!s.exact);
  CHECK(s.phi_min == Approx(0.5).epsilon(1e-10));
  CHECK(s.phi_max == Approx(1.0 + 3 * 0.5).epsilon(1e-10));
  CHECK(s.tau == Approx(0.2).epsilon(1e-10));
}

TEST_CASE("tau curve extends past the rank by convention") {
  Matrix B = make_iid_gaussian_design(7, 3, 2).X;
  Matrix C(3, 5);
  C.setRandom();
  const DesignMatrix d(Matrix(B * C));
  REQUIRE(d.rank == 3);
  const auto curve = tau_curve(d, 5);
  REQUIRE(curve.size() == 5);
  CHECK(!curve[2].beyond_rank);
  for (int k = 4; k <= 5; ++k) {
    const auto& row = curve[k - 1];
    CHECK(row.beyond_rank);
    CHECK(row.k == k);
    CHECK(row.phi_min == 0.0);  // the true sparse minimum beyond the rank
    CHECK(row.tau == Approx(curve[2].tau));
    CHECK(!row.exact);
  }
  CHECK(tau_at(d, 9) == Approx(curve[2].tau));
}

TEST_CASE("k_prime rounding") {
  CHECK(k_prime_from_tau(1.0, 4) == 4);
  CHECK(k_prime_from_tau(0.2, 5) == 1);
  CHECK(k_prime_from_tau(0.5, 4) == 2);
  CHECK(k_prime_from_tau(1e-12, 9) == 1);
  CHECK(k_prime_from_tau(0.3, 5) == 2);  // ceil(1.5)
  // the epsilon guard keeps exact integer products from rounding up
  CHECK(k_prime_from_tau(0.75, 4) == 3);
}

TEST_CASE("lambda matrix on a duplicated pair") {
  const auto d = paired_design(0.999);
  const auto lam = lambda_matrix(d, ModelIndicator({0, 1}), ModelIndicator({1}));
  REQUIRE(lam.lambda.rows() == 1);
  CHECK(lam.lambda(0, 0) == Approx(500.2501250625313).epsilon(1e-9));
  CHECK(lam.min_eigenvalue == Approx(500.2501250625313).epsilon(1e-9));
  CHECK(lam.positions == std::vector<int>{0});

  // unrelated columns: inverse Gram block is the identity
  const auto iso = lambda_matrix(d, ModelIndicator({0, 2}), ModelIndicator({2}));
  CHECK(iso.lambda(0, 0) == Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(lambda_matrix(d, ModelIndicator({0, 1}), ModelIndicator({2})),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      lambda_matrix(d, ModelIndicator({0, 1}), ModelIndicator({0, 1})),
      std::invalid_argument);

  // exactly repeated column: singular Gram is typed, not silent
  Matrix dup(5, 2);
  dup.col(0).setLinSpaced(5, 1.0, 5.0);
  dup.col(1) = dup.col(0);
  CHECK_THROWS_WITH(lambda_matrix(DesignMatrix(dup), ModelIndicator({0, 1}),
                                  ModelIndicator({1})),
                    Catch::Matchers::ContainsSubstring("singular"));
}

TEST_CASE("tilde phi on the paired design is driven by the clean pairs") {
  const auto d = paired_design(0.999);
  const auto prof = tilde_phi(d, 2);
  REQUIRE(prof.defined);
  REQUIRE(prof.exact);
  CHECK(prof.k_prime == 1);
  CHECK(prof.tilde_phi == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("tilde phi equicorrelated closed form") {
  // Gram restricted to any pair is [[1, rho], [rho, 1]]; with k' = 1 the
  // Lambda block is the scalar 1/(1 - rho^2)... seen through the inverse:
  // diagonal entries of the 2x2 inverse are 1/(1-rho^2), so
  // tilde_phi[2] = 1/(1 - 0.25) = 4/3.
  const auto d = make_equicorrelated_design(10, 8, 0.5);
  const auto prof = tilde_phi(d, 2);
  REQUIRE(prof.defined);
  REQUIRE(prof.exact);
  CHECK(prof.tau_2k == Approx(0.2).epsilon(1e-9));
  CHECK(prof.k_prime == 1);
  CHECK(prof.tilde_phi == Approx(4.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("tilde phi undefined when no strict subset size remains") {
  const auto d = make_orthonormal_design(10, 8);
  const auto prof = tilde_phi(d, 3);  // tau = 1 so k' = k
  CHECK(!prof.defined);
  CHECK(std::isnan(prof.tilde_phi));
  CHECK(!prof.note.empty());
}

TEST_CASE("explicit subset size override against a hand enumeration") {
  const auto d = make_iid_gaussian_design(14, 6, 8);
  const int k = 3, kp = 2;
  const auto prof = tilde_phi_with(d, k, kp);
  REQUIRE(prof.defined);
  REQUIRE(prof.exact);

  const Matrix gram = d.X.transpose() * d.X;
  double best = std::numeric_limits<double>::infinity();
  for_each_combination(6, k, [&](const std::vector<int>& m) {
    Matrix G(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) G(a, b) = gram(m[a], m[b]);
    const Matrix inv = G.inverse();
    double inner_best = -std::numeric_limits<double>::infinity();
    for_each_combination(k, kp, [&](const std::vector<int>& keep_local) {
      std::vector<int> drop;
      for (int i = 0; i < k; ++i)
        if (std::find(keep_local.begin(), keep_local.end(), i) ==
            keep_local.end())
          drop.push_back(i);
      Matrix block(drop.size(), drop.size());
      for (std::size_t a = 0; a < drop.size(); ++a)
        for (std::size_t b = 0; b < drop.size(); ++b)
          block(a, b) = inv(drop[a], drop[b]);
      Eigen::SelfAdjointEigenSolver<Matrix> es(block,
                                               Eigen::EigenvaluesOnly);
      inner_best = std::max(inner_best, es.eigenvalues().minCoeff());
    });
    best = std::min(best, inner_best);
  });
  CHECK(prof.tilde_phi == Approx(best).epsilon(1e-8));
}

TEST_CASE("interaction condition report on an equicorrelated design") {
  const int p = 12;
  const auto d = make_equicorrelated_design(p + 2, p, 0.9);
  const auto rep = check_assumption_D(d, 5, 5, 0.05, 3.0, 0.2);
  REQUIRE(rep.rows.size() == 1);
  const auto& row = rep.rows.front();
  CHECK(row.k == 5);
  // tau[10] = 0.1 / (1 + 9 * 0.9) = 0.1/9.1
  CHECK(row.tau_2k == Approx(0.1 / 9.1).epsilon(1e-8));
  CHECK(row.tau_k_product == Approx(0.5 / 9.1).epsilon(1e-8));
  CHECK(row.d1);  // 0.05 <= 0.0549... <= 4
  CHECK(row.phi_min_2k == Approx(0.1).epsilon(1e-8));
  REQUIRE(row.profile.defined);
  CHECK(row.profile.k_prime == 1);
  // Lambda spectrum collapses to 1/(a + (k-2) b) with a = 0.1, b = 0.9
  CHECK(row.profile.tilde_phi == Approx(1.0 / 0.46).epsilon(1e-6));
  CHECK(row.product == Approx(0.1 / 0.46).epsilon(1e-6));
  CHECK(row.d3);  // 0.217 >= 0.2
  CHECK(rep.d2_threshold ==
        Approx(std::pow(5.0 / (12.0 * std::numbers::e), 3.0)).epsilon(1e-12));
  CHECK(rep.d2);  // 0.0110 >= 0.00355
  CHECK(rep.holds);

  // tightening c1 past the product flips D.1
  const auto strict = check_assumption_D(d, 5, 5, 0.06, 3.0, 0.2);
  CHECK(!strict.rows.front().d1);
  CHECK(!strict.holds);

  CHECK_THROWS_AS(check_assumption_D(d, 0, 5, 0.05, 3.0, 0.2),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_assumption_D(d, 5, 7, 0.05, 3.0, 0.2),
                  std::invalid_argument);  // 2 kappa2 > r
  CHECK_THROWS_AS(check_assumption_D(d, 5, 5, 0.05, 3.0, 1.5),
                  std::invalid_argument);  // c3 must stay <= 1
}

TEST_CASE("signal strength condition") {
  // orthonormal: tilde_phi is undefined, the orthogonal-limit value 1 is used
  const auto ortho = make_orthonormal_design(10, 8);
  Vector beta = Vector::Zero(8);
  beta(0) = 2.0;
  beta(1) = -2.0;
  const auto rep = check_assumption_B(ortho, beta, 2.0);
  CHECK(rep.p0 == 2);
  CHECK(rep.lhs == Approx(4.0));
  CHECK(rep.tau_2p0 == Approx(1.0).epsilon(1e-9));
  CHECK(rep.tilde_phi_p0 == 1.0);
  CHECK(!rep.note.empty());
  CHECK(rep.rhs == Approx(2.0 * (std::log(4.0) + 1.0)).epsilon(1e-9));
  CHECK(rep.holds);  // 4 <= 4.77
  CHECK(rep.slack == Approx(rep.rhs - rep.lhs).epsilon(1e-12));
  const auto tight = check_assumption_B(ortho, beta, 1.0);
  CHECK(!tight.holds);  // 4 > 2.39

  // equicorrelated: tilde_phi[2] = 4/3 enters the bound
  const auto eq = make_equicorrelated_design(10, 8, 0.5);
  Vector small = Vector::Zero(8);
  small(0) = 1.0;
  small(1) = -1.0;
  const auto rep2 = check_assumption_B(eq, small, 2.0);
  CHECK(rep2.rhs ==
        Approx(2.0 * 0.2 * (4.0 / 3.0) * (std::log(4.0) + 1.0)).epsilon(1e-6));
  CHECK(rep2.holds == (rep2.lhs <= rep2.rhs));

  CHECK_THROWS_AS(check_assumption_B(ortho, Vector::Zero(5), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_assumption_B(ortho, beta, 0.0), std::invalid_argument);
  Vector dense = Vector::Ones(8);  // p0 = 8, 2 p0 > p
  CHECK_THROWS_AS(check_assumption_B(ortho, dense, 1.0), std::invalid_argument);
}

TEST_CASE("risk rate bounds") {
  // sparse branch, trivial tau: both bounds collapse to p0 (ln(p/p0) + 1)
  const auto b = rate_bounds(500, 5, 500, 1.0, 1.0, 1.0, 1.0, 1.0);
  CHECK(b.sparse_branch);
  CHECK(b.lower == Approx(28.02585092994046).epsilon(1e-12));
  CHECK(b.upper == Approx(28.02585092994046).epsilon(1e-12));

  // dense branch: oracle term saturates at the rank
  const auto dense = rate_bounds(10, 5, 8, 0.0, 0.3, 2.0, 1.5, 0.5);
  CHECK(!dense.sparse_branch);
  CHECK(dense.upper == Approx(1.5 * 2.0 * 8.0).epsilon(1e-12));
  CHECK(dense.lower == Approx(0.5 * 2.0 * 0.3 * 8.0).epsilon(1e-12));

  CHECK_THROWS_AS(rate_bounds(10, 9, 8, 1.0, 1.0, 1.0, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(rate_bounds(10, 2, 8, 1.5, 1.0, 1.0, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("advisory design classification") {
  const auto ortho = make_orthonormal_design(8, 6);
  const auto c1 = classify_design(ortho, 0.5);
  CHECK(c1.nearly_orthogonal);
  CHECK(c1.tau_r == Approx(1.0).epsilon(1e-10));
  CHECK(c1.threshold == 0.5);
  CHECK(c1.note.find("sequences") != std::string::npos);

  const auto pairs = paired_design(0.999);
  const auto c2 = classify_design(pairs, 0.5);
  CHECK(!c2.nearly_orthogonal);
  CHECK(c2.tau_r < 0.01);

  CHECK_THROWS_AS(classify_design(ortho, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(classify_design(ortho, 1.5), std::invalid_argument);
}

TEST_CASE("exact interaction product bound") {
  // phi_min[2k] * tilde_phi[k] <= 1 whenever both are exact
  const std::vector<DesignMatrix> designs = {
      make_equicorrelated_design(10, 8, 0.2),
      make_equicorrelated_design(10, 8, 0.7),
      paired_design(0.9),
      make_iid_gaussian_design(16, 8, 4),
      make_iid_gaussian_design(16, 8, 5),
  };
  for (const auto& d : designs) {
    for (int k = 1; 2 * k <= d.p(); ++k) {
      const auto prof = tilde_phi(d, k);
      if (!prof.defined) continue;
      REQUIRE(prof.exact);
      const auto spec = sparse_eigs(d, 2 * k);
      REQUIRE(spec.exact);
      CHECK(spec.phi_min * prof.tilde_phi <= 1.0 + 1e-9);
    }
  }
}
