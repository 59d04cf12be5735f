#include <cmath>
#include <memory>
#include <random>

#include <doctest.h>

#include "atv/bicausal_lp.hpp"
#include "atv/engine.hpp"
#include "atv/error.hpp"
#include "atv/lab.hpp"
#include "test_support.hpp"

using namespace atv;

namespace {

std::vector<std::size_t> random_sizes(std::mt19937_64& rng, std::size_t n, std::size_t max_size) {
  std::vector<std::size_t> sizes(n);
  for (auto& s : sizes) s = 2 + static_cast<std::size_t>(rng() % (max_size - 1));
  return sizes;
}

}  // namespace

TEST_CASE("identical laws have zero ATV by every route") {
  std::mt19937_64 rng(3);
  const auto mu = testing::random_law(rng, {2, 3, 2});
  const auto b = atv_recursive(mu, mu);
  CHECK(b.total == 0.0);
  for (double v : b.per_stage) CHECK(v == 0.0);
  CHECK(atv_dp(mu, mu) == doctest::Approx(0.0).epsilon(1e-15));
  const Coupling pi = optimal_bicausal_coupling(mu, mu);
  CHECK(coupling_cost(pi) == 0.0);
  for (const auto& e : pi.entries()) CHECK(e.x == e.y);
}

TEST_CASE("Bernoulli product: closed-form total and geometric stage terms") {
  for (std::size_t n : {1, 2, 3, 5}) {
    for (double eps : {0.25, 0.1, 0.01}) {
      const auto [mu, nu] = bernoulli_pair(n, eps);
      const auto b = atv_recursive(mu, nu);
      REQUIRE(b.per_stage.size() == n);
      CHECK(std::abs(b.total - (2.0 - 2.0 * std::pow(1.0 - eps, static_cast<double>(n)))) <= 1e-12);
      for (std::size_t k = 0; k < n; ++k) {
        CHECK(std::abs(b.per_stage[k] - 2.0 * eps * std::pow(1.0 - eps, static_cast<double>(k))) <= 1e-13);
        if (k > 0) CHECK(b.per_stage[k] <= b.per_stage[k - 1]);
      }
      CHECK(std::abs(atv_dp(mu, nu) - b.total) <= 1e-9);
      CHECK(std::abs(coupling_cost(optimal_bicausal_coupling(mu, nu)) - b.total) <= 1e-9);
    }
  }
}

TEST_CASE("n = 1 coupling moves only the residual mass") {
  const auto mu = ProcessLaw::product({Dist({0.6, 0.4})});
  const auto nu = ProcessLaw::product({Dist({0.5, 0.5})});
  const Coupling pi = optimal_bicausal_coupling(mu, nu);
  CHECK(pi.mass(0, 1) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(pi.mass(1, 0) == 0.0);
  CHECK(coupling_cost(pi) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(coupling_cost(pi) == doctest::Approx(tv(mu.root().dist, nu.root().dist)).epsilon(1e-14));
  CHECK(atv_recursive(mu, nu).total == tv(mu.root().dist, nu.root().dist));
}

TEST_CASE("coupling_cost of the product coupling of two fair coins") {
  auto coin = std::make_shared<const ProcessLaw>(ProcessLaw::product({Dist({0.5, 0.5})}));
  const Coupling product(coin, coin, {{0, 0, 0.25}, {0, 1, 0.25}, {1, 0, 0.25}, {1, 1, 0.25}});
  CHECK(coupling_cost(product) == 1.0);
}

TEST_CASE("Coupling rejects bad marginals and merges duplicates") {
  auto coin = std::make_shared<const ProcessLaw>(ProcessLaw::product({Dist({0.5, 0.5})}));
  CHECK_THROWS_AS(Coupling(coin, coin, {{0, 0, 0.75}, {1, 1, 0.25}}), Error);
  CHECK_THROWS_AS(Coupling(coin, coin, {{0, 0, 0.5}, {1, 3, 0.5}}), Error);
  const Coupling merged(coin, coin, {{0, 0, 0.25}, {0, 0, 0.25}, {1, 1, 0.5}});
  CHECK(merged.entries().size() == 2);
  CHECK(merged.mass(0, 0) == 0.5);
}

TEST_CASE("shape mismatch is reported by every route") {
  const auto a = ProcessLaw::product({Dist({0.5, 0.5})});
  const auto b = ProcessLaw::product({Dist({0.5, 0.5}), Dist({0.5, 0.5})});
  const auto c = ProcessLaw::product({Dist::uniform(3)});
  CHECK_THROWS_AS(atv_recursive(a, b), Error);
  CHECK_THROWS_AS(atv_recursive(a, c), Error);
  CHECK_THROWS_AS(atv_dp(a, b), Error);
  CHECK_THROWS_AS(optimal_bicausal_coupling(a, c), Error);
}

TEST_CASE("solver failures propagate out of the DP") {
  const auto [mu, nu] = bernoulli_pair(2, 0.1);
  const StageOtSolver broken = [](const Dist&, const Dist&, const DenseMatrix&) -> OtResult {
    throw Error(ErrorCode::SolverFailure, "injected");
  };
  try {
    atv_dp(mu, nu, broken);
    FAIL("expected SolverFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SolverFailure);
  }
}

TEST_CASE("DP with the simplex stage solver matches DP with vertex enumeration") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto sizes = random_sizes(rng, 1 + trial % 3, 3);
    const auto mu = testing::random_law(rng, sizes, 0.1);
    const auto nu = testing::random_law(rng, sizes, 0.1);
    const StageOtSolver simplex = [](const Dist& p, const Dist& q, const DenseMatrix& c) {
      return solve_ot_by_simplex(p, q, c);
    };
    CHECK(std::abs(atv_dp(mu, nu, simplex) - atv_dp(mu, nu)) <= 1e-10);
  }
}

TEST_CASE("larger alphabets route the DP through the simplex") {
  std::mt19937_64 rng(17);
  const auto mu = testing::random_law(rng, {5, 4});
  const auto nu = testing::random_law(rng, {5, 4});
  CHECK(std::abs(atv_dp(mu, nu) - atv_recursive(mu, nu).total) <= 1e-9);
}

TEST_CASE("property: recursion, DP, coupling, symmetry and sandwich on random pairs") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const auto sizes = random_sizes(rng, n, 3);
    const double zeros = trial % 5 == 0 ? 0.15 : 0.0;
    const auto mu = testing::random_law(rng, sizes, zeros);
    const auto nu = testing::random_law(rng, sizes, zeros);

    const auto b = atv_recursive(mu, nu);
    double sum = 0.0;
    for (double v : b.per_stage) sum += v;
    CHECK(std::abs(sum - b.total) <= 1e-12);
    CHECK(b.per_stage[0] == tv(mu.root().dist, nu.root().dist));

    CHECK(std::abs(atv_recursive(nu, mu).total - b.total) <= 1e-12);
    CHECK(std::abs(atv_dp(mu, nu) - b.total) <= 1e-9);

    const double full_tv = tv(mu, nu);
    CHECK(full_tv <= b.total + 1e-9);
    CHECK(b.total <= 2.0 + 1e-12);
    if (n == 1) CHECK(b.total == full_tv);

    const Coupling pi = optimal_bicausal_coupling(mu, nu);
    CHECK(std::abs(coupling_cost(pi) - b.total) <= 1e-9);
    CHECK(is_bicausal(pi, 1e-9).bicausal);
  }
}
