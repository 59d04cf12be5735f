#include "atv/discrete_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "atv/error.hpp"

namespace atv {

namespace {

void check_dims(const Dist& p, const Dist& q, const DenseMatrix& cost) {
  if (cost.rows() != p.size() || cost.cols() != q.size()) {
    throw Error(ErrorCode::ShapeMismatch, "cost matrix dimensions do not match the marginals");
  }
  for (std::size_t i = 0; i < cost.rows(); ++i) {
    for (double v : cost.row(i)) {
      if (!std::isfinite(v)) throw Error(ErrorCode::ShapeMismatch, "cost matrix must be finite");
    }
  }
}

// Solves the square system in place by Gaussian elimination with partial
// pivoting; nullopt when singular.
std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> m, std::vector<double> rhs) {
  const std::size_t k = rhs.size();
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    }
    if (std::abs(m[piv][col]) < 1e-12) return std::nullopt;
    std::swap(m[piv], m[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col || m[r][col] == 0.0) continue;
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c < k; ++c) m[r][c] -= f * m[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (std::size_t r = 0; r < k; ++r) rhs[r] /= m[r][r];
  return rhs;
}

double plan_cost(const DenseMatrix& plan, const DenseMatrix& cost) {
  double v = 0.0;
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    for (std::size_t j = 0; j < plan.cols(); ++j) v += plan(i, j) * cost(i, j);
  }
  return v;
}

double trace(const DenseMatrix& plan) {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(plan.rows(), plan.cols()); ++i) t += plan(i, i);
  return t;
}

}  // namespace

DenseMatrix discrete_metric_cost(std::size_t rows, std::size_t cols, double scale) {
  DenseMatrix c(rows, cols, scale);
  for (std::size_t i = 0; i < std::min(rows, cols); ++i) c(i, i) = 0.0;
  return c;
}

OtResult solve_ot_by_enumeration(const Dist& p, const Dist& q, const DenseMatrix& cost) {
  check_dims(p, q, cost);
  const std::size_t m = p.size();
  const std::size_t n = q.size();
  if (m > kEnumerationSide || n > kEnumerationSide) {
    throw Error(ErrorCode::ShapeMismatch, "vertex enumeration is limited to 3x3 problems");
  }
  // Constraints: every row sum, and every column sum but the last (the
  // dropped one is implied). A basis picks m + n - 1 cells.
  const std::size_t cells = m * n;
  const std::size_t k = m + n - 1;
  std::vector<double> rhs;
  for (std::size_t i = 0; i < m; ++i) rhs.push_back(p[i]);
  for (std::size_t j = 0; j + 1 < n; ++j) rhs.push_back(q[j]);

  std::optional<OtResult> best;
  double best_trace = -1.0;
  std::vector<bool> pick(cells, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), true);
  do {
    std::vector<std::size_t> chosen;
    for (std::size_t c = 0; c < cells; ++c) {
      if (pick[c]) chosen.push_back(c);
    }
    std::vector<std::vector<double>> sys(k, std::vector<double>(k, 0.0));
    for (std::size_t col = 0; col < k; ++col) {
      const std::size_t i = chosen[col] / n;
      const std::size_t j = chosen[col] % n;
      sys[i][col] = 1.0;
      if (j + 1 < n) sys[m + j][col] = 1.0;
    }
    auto sol = solve_square(std::move(sys), rhs);
    if (!sol) continue;
    if (std::any_of(sol->begin(), sol->end(), [](double v) { return v < -1e-12; })) continue;
    DenseMatrix plan(m, n, 0.0);
    for (std::size_t col = 0; col < k; ++col) {
      plan(chosen[col] / n, chosen[col] % n) = std::max((*sol)[col], 0.0);
    }
    const double value = plan_cost(plan, cost);
    const double tr = trace(plan);
    if (!best || value < best->value - 1e-12 ||
        (std::abs(value - best->value) <= 1e-12 && tr > best_trace + 1e-12)) {
      best = OtResult{value, std::move(plan)};
      best_trace = tr;
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));

  if (!best) throw Error(ErrorCode::SolverFailure, "no feasible vertex found");
  return std::move(*best);
}

OtResult solve_ot_by_simplex(const Dist& p, const Dist& q, const DenseMatrix& cost,
                             std::vector<std::size_t>* basis_cells) {
  check_dims(p, q, cost);
  const std::size_t m = p.size();
  const std::size_t n = q.size();
  DenseMatrix a(m + n, m * n, 0.0);
  std::vector<double> b(m + n);
  std::vector<double> c(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    b[i] = p[i];
    for (std::size_t j = 0; j < n; ++j) {
      a(i, i * n + j) = 1.0;
      a(m + j, i * n + j) = 1.0;
      c[i * n + j] = cost(i, j);
    }
  }
  for (std::size_t j = 0; j < n; ++j) b[m + j] = q[j];

  const LpSolution sol = solve_standard_form(a, b, c);
  if (sol.status != LpStatus::Optimal) {
    throw Error(ErrorCode::SolverFailure, "transport simplex did not reach optimality");
  }
  DenseMatrix plan(m, n, 0.0);
  for (std::size_t v = 0; v < m * n; ++v) plan(v / n, v % n) = sol.x[v];
  if (basis_cells) *basis_cells = sol.basis;
  return OtResult{plan_cost(plan, cost), std::move(plan)};
}

OtResult solve_discrete_ot(const Dist& p, const Dist& q, const DenseMatrix& cost) {
  if (p.size() <= kEnumerationSide && q.size() <= kEnumerationSide) {
    return solve_ot_by_enumeration(p, q, cost);
  }
  return solve_ot_by_simplex(p, q, cost);
}

}  // namespace atv
