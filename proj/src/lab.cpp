#include "atv/lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "atv/bicausal_lp.hpp"
#include "atv/engine.hpp"
#include "atv/error.hpp"

namespace atv {

namespace {

// Raw engine output mapped by hand so draws do not depend on the standard
// library's distribution implementations.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double exponential() { return -std::log1p(-uniform()); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

  Dist kernel(std::size_t size, double hard_zero_fraction) {
    constexpr double kFloor = 1e-6;
    std::vector<double> w(size);
    for (double& v : w) v = exponential();
    if (hard_zero_fraction > 0.0) {
      for (double& v : w) {
        if (uniform() < hard_zero_fraction) v = 0.0;
      }
      if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) w[index(size)] = 1.0;
    }
    double total = 0.0;
    for (double v : w) total += v;
    if (total == 0.0) {
      std::fill(w.begin(), w.end(), 1.0);
      total = static_cast<double>(size);
    }
    const auto live = static_cast<double>(std::count_if(w.begin(), w.end(), [](double v) { return v > 0.0; }));
    for (double& v : w) {
      if (v > 0.0) v = kFloor + (1.0 - live * kFloor) * (v / total);
    }
    double sum = 0.0;
    for (double v : w) sum += v;
    for (double& v : w) v /= sum;
    return Dist(std::move(w));
  }

 private:
  std::mt19937_64 engine_;
};

std::vector<std::size_t> stage_sizes(const EnsembleSpec& spec) {
  if (spec.alphabet_sizes.size() == 1) return std::vector<std::size_t>(spec.horizon, spec.alphabet_sizes.front());
  if (spec.alphabet_sizes.size() != spec.horizon) {
    throw Error(ErrorCode::BadSpec, "alphabet_sizes must have one entry or one per stage");
  }
  return spec.alphabet_sizes;
}

std::vector<Alphabet> alphabets_of(const std::vector<std::size_t>& sizes) {
  std::vector<Alphabet> out;
  for (auto s : sizes) out.emplace_back(s);
  return out;
}

ProcessLaw draw_law(Sampler& rng, Family family, const std::vector<std::size_t>& sizes, double hard_zero) {
  const std::size_t n = sizes.size();
  switch (family) {
    case Family::UniformRandom:
      return ProcessLaw::from_kernels(alphabets_of(sizes), [&](std::span<const std::size_t> prefix) {
        return rng.kernel(sizes[prefix.size()], hard_zero);
      });
    case Family::Markov: {
      const Dist initial = rng.kernel(sizes[0], hard_zero);
      std::vector<std::vector<Dist>> transition(n);
      for (std::size_t k = 1; k < n; ++k) {
        for (std::size_t s = 0; s < sizes[k - 1]; ++s) transition[k].push_back(rng.kernel(sizes[k], hard_zero));
      }
      return ProcessLaw::from_kernels(alphabets_of(sizes), [&](std::span<const std::size_t> prefix) {
        return prefix.empty() ? initial : transition[prefix.size()][prefix.back()];
      });
    }
    case Family::Product: {
      std::vector<Dist> stages;
      for (auto s : sizes) stages.push_back(rng.kernel(s, hard_zero));
      return ProcessLaw::product(stages);
    }
    case Family::BernoulliEps:
      break;
  }
  throw Error(ErrorCode::BadSpec, "unsupported family for random draws");
}

double pinsker_rhs(double scale, const ExtReal& h) {
  if (h.is_infinite()) return std::numeric_limits<double>::infinity();
  return std::sqrt(scale) * std::sqrt(2.0 * h.value());
}

BoundCheck bound_check(double lhs, double rhs, double tol) {
  return BoundCheck{lhs <= rhs + tol, lhs, rhs, rhs - lhs};
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::UniformRandom: return "uniform-random";
    case Family::Markov: return "markov";
    case Family::Product: return "product";
    case Family::BernoulliEps: return "bernoulli-eps";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
  for (auto f : {Family::UniformRandom, Family::Markov, Family::Product, Family::BernoulliEps}) {
    if (name == to_string(f)) return f;
  }
  return std::nullopt;
}

LawPair bernoulli_pair(std::size_t n, double eps) {
  if (n == 0) throw Error(ErrorCode::BadSpec, "horizon must be positive");
  if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorCode::BadEpsilon, "eps must lie in (0, 1/2)");
  const Dist tilted({0.5 + eps, 0.5 - eps});
  const Dist fair({0.5, 0.5});
  return {ProcessLaw::product(std::vector<Dist>(n, tilted)), ProcessLaw::product(std::vector<Dist>(n, fair))};
}

std::vector<LawPair> generate_ensemble(const EnsembleSpec& spec) {
  if (spec.horizon == 0) throw Error(ErrorCode::BadSpec, "horizon must be positive");
  if (spec.count == 0) throw Error(ErrorCode::BadSpec, "count must be positive");
  if (!(spec.hard_zero_fraction >= 0.0 && spec.hard_zero_fraction < 1.0)) {
    throw Error(ErrorCode::BadSpec, "hard_zero_fraction must lie in [0, 1)");
  }
  const auto sizes = stage_sizes(spec);
  if (std::any_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s == 0; })) {
    throw Error(ErrorCode::BadSpec, "alphabet sizes must be positive");
  }

  std::vector<LawPair> out;
  out.reserve(spec.count);
  if (spec.family == Family::BernoulliEps) {
    if (std::any_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s != 2; })) {
      throw Error(ErrorCode::BadSpec, "bernoulli-eps needs binary alphabets");
    }
    for (std::size_t i = 0; i < spec.count; ++i) out.push_back(bernoulli_pair(spec.horizon, spec.eps));
    return out;
  }
  Sampler rng(spec.seed);
  for (std::size_t i = 0; i < spec.count; ++i) {
    ProcessLaw mu = draw_law(rng, spec.family, sizes, spec.hard_zero_fraction);
    ProcessLaw nu = draw_law(rng, spec.family, sizes, spec.hard_zero_fraction);
    out.push_back({std::move(mu), std::move(nu)});
  }
  return out;
}

std::vector<EnsembleSpec> default_verify_sweep(std::uint64_t seed) {
  std::vector<EnsembleSpec> specs;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (std::size_t a : {2, 3}) {
      const std::uint64_t base = seed * 1000003ULL + n * 100 + a * 10;
      specs.push_back({n, {a}, Family::UniformRandom, 75, base + 1});
      specs.push_back({n, {a}, Family::Markov, 25, base + 2});
      specs.push_back({n, {a}, Family::Product, 25, base + 3});
    }
  }
  return specs;
}

BoundCheck check_adapted_pinsker(const ProcessLaw& mu, const ProcessLaw& nu, double tol) {
  const double lhs = atv_recursive(mu, nu).total;
  return bound_check(lhs, pinsker_rhs(static_cast<double>(mu.horizon()), kl(mu, nu)), tol);
}

BoundCheck check_classical_pinsker(const ProcessLaw& mu, const ProcessLaw& nu, double tol) {
  return bound_check(tv(mu, nu), pinsker_rhs(1.0, kl(mu, nu)), tol);
}

SandwichCheck check_sandwich(const ProcessLaw& mu, const ProcessLaw& nu, double tol) {
  SandwichCheck out;
  out.tv = tv(mu, nu);
  out.atv = atv_recursive(mu, nu).total;
  out.upper = (std::ldexp(1.0, static_cast<int>(mu.horizon())) - 1.0) * out.tv;
  out.pass = out.tv - tol <= out.atv && out.atv <= out.upper + tol;
  return out;
}

double atv_closed_form(std::size_t n, double eps) {
  return -2.0 * std::expm1(static_cast<double>(n) * std::log1p(-eps));
}

double kl_closed_form(std::size_t n, double eps) {
  return static_cast<double>(n) * ((0.5 + eps) * std::log1p(2.0 * eps) + (0.5 - eps) * std::log1p(-2.0 * eps));
}

std::vector<TightnessRow> tightness_experiment(const std::vector<std::size_t>& n_list,
                                               const std::vector<double>& eps_grid) {
  for (double eps : eps_grid) {
    if (!(eps > 0.0 && eps < 0.5)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "eps " << eps << " outside (0, 1/2)";
      throw Error(ErrorCode::BadEpsilon, msg.str());
    }
  }
  std::vector<TightnessRow> rows;
  for (std::size_t n : n_list) {
    if (n == 0) throw Error(ErrorCode::BadEpsilon, "horizon must be positive");
    for (double eps : eps_grid) {
      const auto [mu, nu] = bernoulli_pair(n, eps);
      TightnessRow row;
      row.n = n;
      row.eps = eps;
      row.atv = atv_recursive(mu, nu).total;
      row.atv_closed = atv_closed_form(n, eps);
      row.kl = kl(mu, nu).value();
      row.kl_closed = kl_closed_form(n, eps);
      const double two_n_kl = 2.0 * static_cast<double>(n) * row.kl;
      row.ratio = row.atv * row.atv / two_n_kl;
      row.bound_ok = row.atv * row.atv <= two_n_kl * (1.0 + 1e-9);
      rows.push_back(row);
    }
  }
  std::sort(rows.begin(), rows.end(), [](const TightnessRow& a, const TightnessRow& b) {
    return a.n != b.n ? a.n < b.n : a.eps < b.eps;
  });
  return rows;
}

std::vector<double> geometric_grid(double hi, double lo, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {hi};
  std::vector<double> grid(count);
  const double step = (std::log(lo) - std::log(hi)) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) grid[i] = std::exp(std::log(hi) + step * static_cast<double>(i));
  grid.front() = hi;
  grid.back() = lo;
  return grid;
}

std::vector<double> default_eps_grid() { return geometric_grid(0.25, 1e-5, 12); }

bool InstanceReport::pass(const VerifyOptions& options) const {
  return classical.pass && adapted.pass && sandwich.pass && n1_exact && kl_infinite_agree &&
         (!chain_error || *chain_error <= options.chain_tol) && dp_error <= options.oracle_tol &&
         (!lp_error || *lp_error <= options.lp_tol) && attainment_error <= options.oracle_tol &&
         bicausal_residual <= options.oracle_tol;
}

InstanceReport verify_instance(const ProcessLaw& mu, const ProcessLaw& nu, const VerifyOptions& options) {
  InstanceReport r;
  r.classical = check_classical_pinsker(mu, nu, options.tol);
  r.adapted = check_adapted_pinsker(mu, nu, options.tol);
  r.sandwich = check_sandwich(mu, nu, options.tol);
  r.atv = r.sandwich.atv;
  if (mu.horizon() == 1) r.n1_exact = std::abs(r.sandwich.atv - r.sandwich.tv) <= 1e-12;

  const ExtReal h = kl(mu, nu);
  const ExtReal h_chain = kl_chain(mu, nu);
  r.kl_infinite_agree = h.is_infinite() == h_chain.is_infinite();
  if (!h.is_infinite() && !h_chain.is_infinite()) r.chain_error = std::abs(h.value() - h_chain.value());

  r.dp_error = std::abs(r.atv - atv_dp(mu, nu));
  const std::size_t paths = mu.path_count();
  if (paths * paths <= options.lp_cap) r.lp_error = std::abs(r.atv - atv_lp(mu, nu, {options.lp_cap, true}));

  const Coupling pi = optimal_bicausal_coupling(mu, nu);
  r.attainment_error = std::abs(coupling_cost(pi) - r.atv);
  r.bicausal_residual = is_bicausal(pi, options.oracle_tol).worst_residual;
  return r;
}

}  // namespace atv
