#pragma once

// Inequality checks between ATV, TV and relative entropy, random ensembles
// of process-law pairs, and the Bernoulli tightness experiment.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "atv/measure.hpp"

namespace atv {

enum class Family { UniformRandom, Markov, Product, BernoulliEps };

std::string_view to_string(Family family);
std::optional<Family> parse_family(std::string_view name);

struct EnsembleSpec {
  std::size_t horizon = 1;
  /// One size per stage, or a single size used for every stage.
  std::vector<std::size_t> alphabet_sizes{2};
  Family family = Family::UniformRandom;
  std::size_t count = 1;
  std::uint64_t seed = 0;
  /// Perturbation for Family::BernoulliEps.
  double eps = 0.1;
  /// Probability that a kernel entry is forced to zero before
  /// normalization (random families only; at least one entry survives).
  double hard_zero_fraction = 0.0;
};

struct LawPair {
  ProcessLaw mu;
  ProcessLaw nu;
};

/// Deterministic in `spec.seed`. Random kernels are Dirichlet(1) draws
/// floored at 1e-6, so relative entropies are finite unless hard zeros
/// are requested.
std::vector<LawPair> generate_ensemble(const EnsembleSpec& spec);

/// mu = Bern(1/2 + eps)^n, nu = Bern(1/2)^n, symbol 0 carrying 1/2 + eps.
LawPair bernoulli_pair(std::size_t n, double eps);

/// Fixed 1000-instance sweep: n = 1..4, binary and ternary alphabets, a mix
/// of random, Markov and product families.
std::vector<EnsembleSpec> default_verify_sweep(std::uint64_t seed = 42);

inline constexpr double kInequalityTolerance = 1e-9;

struct BoundCheck {
  bool pass = true;
  double lhs = 0.0;
  double rhs = 0.0;  // +inf when H(mu|nu) is infinite
  double slack = 0.0;
};

/// ATV <= sqrt(n) sqrt(2 H).
BoundCheck check_adapted_pinsker(const ProcessLaw& mu, const ProcessLaw& nu, double tol = kInequalityTolerance);
/// TV <= sqrt(2 H) on full paths.
BoundCheck check_classical_pinsker(const ProcessLaw& mu, const ProcessLaw& nu, double tol = kInequalityTolerance);

struct SandwichCheck {
  bool pass = true;
  double tv = 0.0;
  double atv = 0.0;
  double upper = 0.0;  // (2^n - 1) tv
};

/// TV <= ATV <= (2^n - 1) TV.
SandwichCheck check_sandwich(const ProcessLaw& mu, const ProcessLaw& nu, double tol = kInequalityTolerance);

struct TightnessRow {
  std::size_t n = 0;
  double eps = 0.0;
  double atv = 0.0;
  double atv_closed = 0.0;
  double kl = 0.0;
  double kl_closed = 0.0;
  double ratio = 0.0;  // atv^2 / (2 n kl); the bound reads ratio <= 1
  bool bound_ok = false;
};

/// 2 - 2 (1 - eps)^n.
double atv_closed_form(std::size_t n, double eps);
/// n [(1/2 + eps) log(1 + 2 eps) + (1/2 - eps) log(1 - 2 eps)].
double kl_closed_form(std::size_t n, double eps);

/// Rows sorted by (n, eps) ascending. Throws BadEpsilon for eps outside
/// (0, 1/2) or n = 0.
std::vector<TightnessRow> tightness_experiment(const std::vector<std::size_t>& n_list,
                                               const std::vector<double>& eps_grid);

/// `count` points from `hi` down to `lo`, equally spaced in log scale.
std::vector<double> geometric_grid(double hi, double lo, std::size_t count);

inline const std::vector<std::size_t> kDefaultTightnessN{1, 2, 3, 4, 6};
std::vector<double> default_eps_grid();

struct VerifyOptions {
  double tol = kInequalityTolerance;
  double oracle_tol = 1e-9;
  double lp_tol = 1e-7;
  double chain_tol = 1e-10;
  /// Instances whose bicausal LP would exceed this many variables skip the
  /// LP comparison.
  std::size_t lp_cap = 256;
};

/// Outcome of every property check on one pair. Slack-style fields are
/// "how far inside the bound" (negative means violated); error-style
/// fields are absolute differences.
struct InstanceReport {
  BoundCheck classical;
  BoundCheck adapted;
  SandwichCheck sandwich;
  bool n1_exact = true;          // ATV == TV at n = 1 within 1e-12
  std::optional<double> chain_error;  // |kl_chain - kl| when finite
  bool kl_infinite_agree = true;
  double dp_error = 0.0;
  std::optional<double> lp_error;
  double attainment_error = 0.0;  // |coupling_cost - atv|
  double bicausal_residual = 0.0;
  double atv = 0.0;

  bool pass(const VerifyOptions& options) const;
};

InstanceReport verify_instance(const ProcessLaw& mu, const ProcessLaw& nu, const VerifyOptions& options = {});

}  // namespace atv
