#include "atv/bicausal_lp.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "atv/error.hpp"

namespace atv {

namespace {

// stride[k] = number of full paths sharing one prefix of length k.
std::vector<std::size_t> strides(const std::vector<std::size_t>& sizes) {
  std::vector<std::size_t> s(sizes.size() + 1, 1);
  for (std::size_t k = sizes.size(); k-- > 0;) s[k] = s[k + 1] * sizes[k];
  return s;
}

// mass[k][c] = probability of the length-k prefix with code c.
std::vector<std::vector<double>> prefix_masses(const ProcessLaw& law, const std::vector<std::size_t>& stride) {
  const std::size_t n = law.horizon();
  const auto table = joint_table(law);
  std::vector<std::vector<double>> mass(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    mass[k].assign(table.size() / stride[k], 0.0);
    for (std::size_t code = 0; code < table.size(); ++code) mass[k][code / stride[k]] += table[code];
  }
  return mass;
}

void require_same_shape(const ProcessLaw& mu, const ProcessLaw& nu) {
  if (!mu.same_shape(nu)) {
    throw Error(ErrorCode::ShapeMismatch, "process laws differ in horizon or alphabet sizes");
  }
}

}  // namespace

std::size_t LpProblem::count(RowKind kind) const {
  std::size_t c = 0;
  for (const auto& r : rows) c += r.kind == kind;
  return c;
}

DenseMatrix LpProblem::dense_matrix() const {
  DenseMatrix a(rows.size(), var_count, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [v, c] : rows[i].coeffs) a(i, v) += c;
  }
  return a;
}

std::vector<double> LpProblem::rhs() const {
  std::vector<double> b;
  b.reserve(rows.size());
  for (const auto& r : rows) b.push_back(r.rhs);
  return b;
}

double LpProblem::max_residual(const std::vector<double>& x) const {
  double worst = 0.0;
  for (const auto& r : rows) {
    double lhs = 0.0;
    for (const auto& [v, c] : r.coeffs) lhs += c * x[v];
    worst = std::max(worst, std::abs(lhs - r.rhs));
  }
  return worst;
}

LpProblem build_bicausal_lp(const ProcessLaw& mu, const ProcessLaw& nu, const BicausalLpOptions& options) {
  require_same_shape(mu, nu);
  const auto sizes = mu.alphabet_sizes();
  const std::size_t n = sizes.size();
  const std::size_t paths = mu.path_count();
  if (paths > options.variable_cap || paths * paths > options.variable_cap) {
    std::ostringstream msg;
    msg << "bicausal LP needs " << paths * paths << " variables, cap is " << options.variable_cap;
    throw Error(ErrorCode::CapExceeded, msg.str());
  }
  const auto stride = strides(sizes);
  const auto mu_mass = prefix_masses(mu, stride);
  const auto nu_mass = prefix_masses(nu, stride);

  LpProblem lp;
  lp.var_count = paths * paths;
  lp.objective.assign(lp.var_count, 0.0);
  for (std::size_t x = 0; x < paths; ++x) {
    for (std::size_t y = 0; y < paths; ++y) lp.objective[x * paths + y] = x == y ? 0.0 : 2.0;
  }

  for (std::size_t x = 0; x < paths; ++x) {
    LpRow row{RowKind::MuMarginal, {}, mu_mass[n][x]};
    for (std::size_t y = 0; y < paths; ++y) row.coeffs.emplace_back(x * paths + y, 1.0);
    lp.rows.push_back(std::move(row));
  }
  for (std::size_t y = 0; y < paths; ++y) {
    LpRow row{RowKind::NuMarginal, {}, nu_mass[n][y]};
    for (std::size_t x = 0; x < paths; ++x) row.coeffs.emplace_back(x * paths + y, 1.0);
    lp.rows.push_back(std::move(row));
  }
  if (!options.include_causality) return lp;

  // `own` is the process whose causality is imposed; `var` maps an
  // (own path, other path) pair to the LP variable.
  auto add_side = [&](RowKind kind, const std::vector<std::vector<double>>& own_mass, auto var) {
    for (std::size_t k = 1; k < n; ++k) {
      const std::size_t prefixes = own_mass[k].size();
      for (std::size_t a = 0; a < prefixes; ++a) {
        const double pa = own_mass[k][a];
        if (pa <= 0.0) continue;
        for (std::size_t b = 0; b < prefixes; ++b) {
          for (std::size_t s = 0; s < sizes[k]; ++s) {
            const double pas = own_mass[k + 1][a * sizes[k] + s];
            LpRow row{kind, {}, 0.0};
            for (std::size_t u = a * stride[k]; u < (a + 1) * stride[k]; ++u) {
              const double coef = ((u / stride[k + 1]) % sizes[k] == s ? pa : 0.0) - pas;
              if (coef == 0.0) continue;
              for (std::size_t w = b * stride[k]; w < (b + 1) * stride[k]; ++w) row.coeffs.emplace_back(var(u, w), coef);
            }
            lp.rows.push_back(std::move(row));
          }
        }
      }
    }
  };
  add_side(RowKind::MuCausal, mu_mass, [&](std::size_t x, std::size_t y) { return x * paths + y; });
  add_side(RowKind::NuCausal, nu_mass, [&](std::size_t y, std::size_t x) { return x * paths + y; });
  return lp;
}

double atv_lp(const ProcessLaw& mu, const ProcessLaw& nu, const BicausalLpOptions& options) {
  const LpProblem lp = build_bicausal_lp(mu, nu, options);
  const LpSolution sol = solve_standard_form(lp.dense_matrix(), lp.rhs(), lp.objective);
  switch (sol.status) {
    case LpStatus::Optimal:
      return sol.value;
    case LpStatus::Infeasible:
      throw Error(ErrorCode::Infeasible, "bicausal LP reported infeasible");
    case LpStatus::Unbounded:
      throw Error(ErrorCode::SolverFailure, "bicausal LP reported unbounded");
    case LpStatus::IterationLimit:
      break;
  }
  throw Error(ErrorCode::SolverFailure, "bicausal LP exceeded its iteration budget");
}

std::vector<double> lp_point(const Coupling& pi) {
  const std::size_t paths = pi.mu().path_count();
  std::vector<double> x(paths * paths, 0.0);
  for (const auto& e : pi.entries()) x[e.x * paths + e.y] = e.mass;
  return x;
}

BicausalityReport is_bicausal(const Coupling& pi, double tol) {
  const auto sizes = pi.mu().alphabet_sizes();
  const std::size_t n = sizes.size();
  const auto stride = strides(sizes);
  BicausalityReport report;

  auto check_side = [&](RowKind kind, const ProcessLaw& own_law, bool own_is_x) {
    const auto own_mass = prefix_masses(own_law, stride);
    for (std::size_t k = 1; k < n; ++k) {
      // Joint masses of (own prefix of length k+1 or k, other prefix of length k).
      std::map<std::pair<std::size_t, std::size_t>, double> ahead, level;
      for (const auto& e : pi.entries()) {
        const std::size_t own = own_is_x ? e.x : e.y;
        const std::size_t other = own_is_x ? e.y : e.x;
        ahead[{own / stride[k + 1], other / stride[k]}] += e.mass;
        level[{own / stride[k], other / stride[k]}] += e.mass;
      }
      auto lookup = [](const auto& m, std::size_t i, std::size_t j) {
        auto it = m.find({i, j});
        return it == m.end() ? 0.0 : it->second;
      };
      const std::size_t prefixes = own_mass[k].size();
      for (std::size_t a = 0; a < prefixes; ++a) {
        const double pa = own_mass[k][a];
        if (pa <= 0.0) continue;
        for (std::size_t b = 0; b < prefixes; ++b) {
          const double joint = lookup(level, a, b);
          for (std::size_t s = 0; s < sizes[k]; ++s) {
            const std::size_t as = a * sizes[k] + s;
            const double r = pa * lookup(ahead, as, b) - own_mass[k + 1][as] * joint;
            if (std::abs(r) > report.worst_residual || !report.worst) {
              report.worst_residual = std::max(report.worst_residual, std::abs(r));
              std::vector<std::size_t> prefix_sizes(sizes.begin(), sizes.begin() + static_cast<std::ptrdiff_t>(k));
              report.worst = CausalityViolation{kind, k, path_from_code(prefix_sizes, a), path_from_code(prefix_sizes, b),
                                                s, r};
            }
          }
        }
      }
    }
  };
  check_side(RowKind::MuCausal, pi.mu(), true);
  check_side(RowKind::NuCausal, pi.nu(), false);
  report.bicausal = report.worst_residual <= tol;
  return report;
}

}  // namespace atv
