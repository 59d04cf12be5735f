#pragma once

// Adapted total variation between two process laws.
//
//   atv_recursive  -- the stagewise formula: TV of the first kernels, plus
//                     each later kernel TV integrated against the iterated
//                     minimum measure of the earlier kernels.
//   atv_dp         -- backward induction over prefix pairs with a generic
//                     exact OT solve at every stage; shares no structure
//                     with the formula above and serves as its oracle.
//   optimal_bicausal_coupling -- a coupling attaining the value, built by
//                     putting maximal mass on the diagonal at every stage.

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "atv/discrete_ot.hpp"
#include "atv/measure.hpp"

namespace atv {

/// Joint law of (X, Y) over pairs of full paths. Paths are stored by their
/// mixed-radix codes (see path_code).
class Coupling {
 public:
  struct Entry {
    std::size_t x;
    std::size_t y;
    double mass;
  };

  /// Duplicate (x, y) entries are merged. Throws BadSpec unless the masses
  /// are nonnegative, total one, and the marginals match mu and nu, all
  /// within 1e-9.
  Coupling(std::shared_ptr<const ProcessLaw> mu, std::shared_ptr<const ProcessLaw> nu, std::vector<Entry> entries);

  std::size_t horizon() const noexcept { return mu_->horizon(); }
  const ProcessLaw& mu() const noexcept { return *mu_; }
  const ProcessLaw& nu() const noexcept { return *nu_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  /// Mass on a pair of paths (0 if absent).
  double mass(std::size_t x, std::size_t y) const;

  std::vector<double> first_marginal() const;
  std::vector<double> second_marginal() const;

 private:
  std::shared_ptr<const ProcessLaw> mu_;
  std::shared_ptr<const ProcessLaw> nu_;
  std::vector<Entry> entries_;  // sorted by (x, y)
};

inline constexpr double kCouplingTolerance = 1e-9;

struct AtvBreakdown {
  /// per_stage[k]: TV of the depth-k kernels integrated against the
  /// iterated minimum of the kernels at depths < k.
  std::vector<double> per_stage;
  double total = 0.0;
};

AtvBreakdown atv_recursive(const ProcessLaw& mu, const ProcessLaw& nu);

Coupling optimal_bicausal_coupling(const ProcessLaw& mu, const ProcessLaw& nu);

/// 2 * pi(x != y).
double coupling_cost(const Coupling& pi);

using StageOtSolver = std::function<OtResult(const Dist&, const Dist&, const DenseMatrix&)>;

/// Memo table is keyed by (mu node, nu node); the state space grows like
/// |A|^(2n) in the worst case, which is fine for n <= 4 and |A| <= 3.
double atv_dp(const ProcessLaw& mu, const ProcessLaw& nu, const StageOtSolver& solver = solve_discrete_ot);

/// Dense tables of the joint path probabilities, indexed by path code.
std::vector<double> joint_table(const ProcessLaw& law);

}  // namespace atv
