#include <cmath>
#include <optional>
#include <random>

#include <doctest.h>

#include "atv/discrete_ot.hpp"
#include "atv/error.hpp"
#include "atv/simplex.hpp"
#include "test_support.hpp"

using namespace atv;

namespace {

Dist random_dist(std::mt19937_64& rng, std::size_t size, double zero_fraction = 0.0) {
  return Dist(testing::random_joint(rng, size, zero_fraction));
}

DenseMatrix random_cost(std::mt19937_64& rng, std::size_t m, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 2.0);
  DenseMatrix c(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) c(i, j) = unit(rng);
  }
  return c;
}

void check_marginals(const OtResult& r, const Dist& p, const Dist& q) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      CHECK(r.plan(i, j) >= 0.0);
      s += r.plan(i, j);
    }
    CHECK(std::abs(s - p[i]) <= 1e-10);
  }
  for (std::size_t j = 0; j < q.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += r.plan(i, j);
    CHECK(std::abs(s - q[j]) <= 1e-10);
  }
}

// Transportation-problem optimality certificate: potentials u, v with
// u_i + v_j = c_ij on the basic cells (a spanning tree of the bipartite
// graph) must satisfy c_ij - u_i - v_j >= 0 everywhere.
double min_reduced_cost(const DenseMatrix& cost, const std::vector<std::size_t>& basis) {
  const std::size_t m = cost.rows();
  const std::size_t n = cost.cols();
  std::vector<std::optional<double>> u(m), v(n);
  u[0] = 0.0;
  for (bool changed = true; changed;) {
    changed = false;
    for (auto cell : basis) {
      const std::size_t i = cell / n;
      const std::size_t j = cell % n;
      if (u[i] && !v[j]) {
        v[j] = cost(i, j) - *u[i];
        changed = true;
      } else if (v[j] && !u[i]) {
        u[i] = cost(i, j) - *v[j];
        changed = true;
      }
    }
  }
  double worst = INFINITY;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      REQUIRE(u[i]);
      REQUIRE(v[j]);
      worst = std::min(worst, cost(i, j) - *u[i] - *v[j]);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("zero cost gives value zero") {
  const Dist p({0.3, 0.7});
  const Dist q({0.6, 0.4});
  const auto r = solve_discrete_ot(p, q, DenseMatrix(2, 2, 0.0));
  CHECK(r.value == 0.0);
  check_marginals(r, p, q);
}

TEST_CASE("equal marginals under the scaled discrete metric stay on the diagonal") {
  const Dist p({0.2, 0.5, 0.3});
  const auto r = solve_discrete_ot(p, p, discrete_metric_cost(3, 3, 2.0));
  CHECK(r.value == 0.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(r.plan(i, i) == doctest::Approx(p[i]));
}

TEST_CASE("2x2 discrete metric example") {
  // 2 (1 - mass(p ^ q)) = 2 * 0.5. The 2x2 transport polytope is the
  // segment t = plan(0, 0) in [0, 0.2]; its two vertices are enumerated.
  const Dist p({0.7, 0.3});
  const Dist q({0.2, 0.8});
  const auto cost = discrete_metric_cost(2, 2, 2.0);
  auto vertex_cost = [&](double t) {
    const double x01 = 0.7 - t, x10 = 0.2 - t, x11 = 0.3 - x10;
    CHECK(x11 >= 0.0);
    return 2.0 * (x01 + x10);
  };
  const double best_vertex = std::min(vertex_cost(0.0), vertex_cost(0.2));
  CHECK(best_vertex == doctest::Approx(1.0));
  const auto r = solve_discrete_ot(p, q, cost);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(solve_ot_by_simplex(p, q, cost).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tie-break prefers the diagonal-heaviest optimal vertex") {
  // Zero cost: every vertex is optimal; the chosen one maximizes the trace,
  // which equals mass(p ^ q).
  const Dist p({0.5, 0.3, 0.2});
  const Dist q({0.1, 0.6, 0.3});
  const auto r = solve_ot_by_enumeration(p, q, DenseMatrix(3, 3, 0.0));
  double trace = 0.0;
  for (std::size_t i = 0; i < 3; ++i) trace += r.plan(i, i);
  CHECK(trace == doctest::Approx(0.1 + 0.3 + 0.2));
}

TEST_CASE("shape errors") {
  const Dist p({0.5, 0.5});
  CHECK_THROWS_AS(solve_discrete_ot(p, p, DenseMatrix(3, 2)), Error);
  CHECK_THROWS_AS(solve_ot_by_enumeration(Dist::uniform(4), p, DenseMatrix(4, 2)), Error);
}

TEST_CASE("property: enumeration and simplex agree on small problems") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + rng() % 3;
    const std::size_t n = 1 + rng() % 3;
    const double zeros = trial % 4 == 0 ? 0.3 : 0.0;
    const Dist p = random_dist(rng, m, zeros);
    const Dist q = random_dist(rng, n, zeros);
    const auto cost = random_cost(rng, m, n);
    const auto a = solve_ot_by_enumeration(p, q, cost);
    const auto b = solve_ot_by_simplex(p, q, cost);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-10));
    check_marginals(a, p, q);
    check_marginals(b, p, q);
  }
}

TEST_CASE("property: simplex plans carry a dual optimality certificate") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 2 + rng() % 5;
    const std::size_t n = 2 + rng() % 5;
    const Dist p = random_dist(rng, m, trial % 3 == 0 ? 0.25 : 0.0);
    const Dist q = random_dist(rng, n);
    const auto cost = random_cost(rng, m, n);
    std::vector<std::size_t> basis;
    const auto r = solve_ot_by_simplex(p, q, cost, &basis);
    check_marginals(r, p, q);
    CHECK(basis.size() == m + n - 1);
    CHECK(min_reduced_cost(cost, basis) >= -1e-9);
  }
}

TEST_CASE("simplex reports infeasible and degenerate problems") {
  // x0 + x1 = 1, x0 + x1 = 2.
  DenseMatrix a(2, 2, 1.0);
  const std::vector<double> b{1.0, 2.0};
  const std::vector<double> c{1.0, 1.0};
  CHECK(solve_standard_form(a, b, c).status == LpStatus::Infeasible);

  // Duplicate row is dropped; optimum at x1 = 1.
  const std::vector<double> b2{1.0, 1.0};
  const std::vector<double> c2{2.0, 1.0};
  const auto sol = solve_standard_form(a, b2, c2);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.value == doctest::Approx(1.0));
  CHECK(sol.basis.size() == 1);

  // min -x0 with x0 - x1 = 0 is unbounded.
  DenseMatrix u(1, 2);
  u(0, 0) = 1.0;
  u(0, 1) = -1.0;
  const std::vector<double> bu{0.0};
  const std::vector<double> cu{-1.0, 0.0};
  CHECK(solve_standard_form(u, bu, cu).status == LpStatus::Unbounded);

  // Rows are rescaled before elimination: 1e-12 x0 + 1e-12 x1 = 1e-12.
  DenseMatrix tiny(2, 2, 1e-12);
  tiny(1, 1) = 0.0;
  const auto t = solve_standard_form(tiny, std::vector<double>{1e-12, 0.25e-12}, std::vector<double>{1.0, 2.0});
  REQUIRE(t.status == LpStatus::Optimal);
  CHECK(t.value == doctest::Approx(1.75));

  // An all-zero row needs b = 0.
  DenseMatrix z(2, 2, 0.0);
  z(0, 0) = 1.0;
  z(0, 1) = 1.0;
  CHECK(solve_standard_form(z, std::vector<double>{1.0, 0.0}, c).status == LpStatus::Optimal);
  CHECK(solve_standard_form(z, std::vector<double>{1.0, 0.5}, c).status == LpStatus::Infeasible);
}
