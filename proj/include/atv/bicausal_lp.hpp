#pragma once

// Adapted total variation as a plain linear program over joint couplings,
// with causality written out as linear equalities. Independent of the
// stagewise machinery in engine.hpp; intended for tiny instances.
//
// Causality of pi with respect to mu, one step at a time: for each depth
// 1 <= k < n, x-prefix a with mu(a) > 0, y-prefix b, and next symbol s,
//
//   mu(a) * pi(X_{1:k+1} = a s, Y_{1:k} = b) = mu(a s) * pi(X_{1:k} = a, Y_{1:k} = b),
//
// i.e. Y_{1:k} is independent of X_{k+1} given X_{1:k}. Chaining these over
// k gives independence of Y_{1:k} from the whole future X_{k+1:n}. The
// rows are linear because the X-marginal of any feasible pi is pinned to
// mu. The mirror rows give causality with respect to nu.

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "atv/engine.hpp"
#include "atv/measure.hpp"
#include "atv/simplex.hpp"

namespace atv {

enum class RowKind { MuMarginal, NuMarginal, MuCausal, NuCausal };

struct LpRow {
  RowKind kind;
  std::vector<std::pair<std::size_t, double>> coeffs;  // (variable, coefficient)
  double rhs = 0.0;
};

/// Variable v = x_code * path_count + y_code; objective 2 * 1{x != y}.
struct LpProblem {
  std::size_t var_count = 0;
  std::vector<double> objective;
  std::vector<LpRow> rows;

  std::size_t count(RowKind kind) const;
  DenseMatrix dense_matrix() const;
  std::vector<double> rhs() const;
  /// max |A x - b| over all rows.
  double max_residual(const std::vector<double>& x) const;
};

struct BicausalLpOptions {
  std::size_t variable_cap = 4096;
  bool include_causality = true;
};

/// Throws CapExceeded when path_count^2 exceeds the cap.
LpProblem build_bicausal_lp(const ProcessLaw& mu, const ProcessLaw& nu, const BicausalLpOptions& options = {});

/// Throws Infeasible (a builder bug: the stagewise product coupling is
/// always feasible), CapExceeded, or SolverFailure.
double atv_lp(const ProcessLaw& mu, const ProcessLaw& nu, const BicausalLpOptions& options = {});

/// The coupling as an LP point.
std::vector<double> lp_point(const Coupling& pi);

struct CausalityViolation {
  RowKind side;  // MuCausal or NuCausal
  std::size_t depth;
  PathIndex own_prefix;    // prefix of the conditioning process
  PathIndex other_prefix;  // prefix of the other process
  std::size_t symbol;
  double residual;
};

struct BicausalityReport {
  bool bicausal = true;
  double worst_residual = 0.0;
  std::optional<CausalityViolation> worst;
};

/// Evaluates every causality equality on the coupling directly from its
/// entries. The marginals are assumed to match (Coupling enforces it).
BicausalityReport is_bicausal(const Coupling& pi, double tol);

}  // namespace atv
