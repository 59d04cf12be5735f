// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "atv/bicausal_lp.hpp"
#include "atv/engine.hpp"
#include "atv/error.hpp"
#include "atv/lab.hpp"

using namespace atv;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<LawPair> sweep_pairs() {
  std::vector<LawPair> all;
  for (const auto& spec : default_verify_sweep(42)) {
    auto part = generate_ensemble(spec);
    for (auto& p : part) all.push_back(std::move(p));
  }
  return all;
}

Outcome closed_form_atv() {
  double worst = 0.0;
  for (std::size_t n = 1; n <= 6; ++n) {
    for (double eps : {0.25, 0.1, 0.01, 1e-3, 1e-4}) {
      const auto [mu, nu] = bernoulli_pair(n, eps);
      const double want = 2.0 - 2.0 * std::pow(1.0 - eps, static_cast<double>(n));
      worst = std::max(worst, std::abs(atv_recursive(mu, nu).total - want));
    }
  }
  return {worst <= 1e-12, fmt("max_abs_err=%.3g (tol 1e-12)", worst)};
}

Outcome oracle_agreement() {
  std::vector<LawPair> pairs;
  const Family families[] = {Family::UniformRandom, Family::Markov, Family::Product};
  std::uint64_t seed = 1000;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (std::size_t a : {2, 3}) {
      for (auto f : families) {
        const std::size_t count = f == Family::UniformRandom ? 32 : (f == Family::Markov ? 16 : 15);
        auto part = generate_ensemble({.horizon = n, .alphabet_sizes = {a}, .family = f, .count = count, .seed = seed++});
        for (auto& p : part) pairs.push_back(std::move(p));
      }
    }
  }
  pairs.erase(pairs.begin() + 500, pairs.end());

  double dp_worst = 0.0;
  for (const auto& [mu, nu] : pairs) dp_worst = std::max(dp_worst, std::abs(atv_recursive(mu, nu).total - atv_dp(mu, nu)));

  std::vector<LawPair> small;
  for (std::size_t n = 1; n <= 3; ++n) {
    const std::size_t count = n == 3 ? 34 : 33;
    auto part = generate_ensemble({.horizon = n, .alphabet_sizes = {2}, .count = count, .seed = 2000 + n, .hard_zero_fraction = 0.0});
    for (auto& p : part) small.push_back(std::move(p));
  }
  double lp_worst = 0.0;
  for (const auto& [mu, nu] : small) lp_worst = std::max(lp_worst, std::abs(atv_recursive(mu, nu).total - atv_lp(mu, nu)));

  const bool ok = pairs.size() == 500 && small.size() == 100 && dp_worst <= 1e-9 && lp_worst <= 1e-7;
  return {ok, "dp: 500 instances max_err=" + fmt("%.3g (tol 1e-9)", dp_worst) + "; lp: 100 instances max_err=" +
                  fmt("%.3g (tol 1e-7)", lp_worst)};
}

Outcome adapted_pinsker(const std::vector<LawPair>& sweep) {
  double worst = std::numeric_limits<double>::infinity();
  std::size_t checked = 0;
  for (const auto& [mu, nu] : sweep) {
    worst = std::min(worst, check_adapted_pinsker(mu, nu).slack);
    ++checked;
  }
  for (auto n : kDefaultTightnessN) {
    for (double eps : default_eps_grid()) {
      const auto [mu, nu] = bernoulli_pair(n, eps);
      worst = std::min(worst, check_adapted_pinsker(mu, nu).slack);
      ++checked;
    }
  }
  return {worst >= -1e-9, std::to_string(checked) + " instances, min_slack=" + fmt("%.3g (tol -1e-9)", worst)};
}

Outcome tightness() {
  bool increasing = true;
  double worst_gap = std::numeric_limits<double>::infinity();
  for (auto n : kDefaultTightnessN) {
    const auto rows = tightness_experiment({n}, default_eps_grid());
    // Ascending eps, so the ratio must strictly decrease along the rows.
    for (std::size_t i = 1; i < rows.size(); ++i) {
      increasing = increasing && rows[i - 1].ratio > rows[i].ratio;
      worst_gap = std::min(worst_gap, rows[i - 1].ratio - rows[i].ratio);
    }
  }
  double min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& r : tightness_experiment(kDefaultTightnessN, {1e-4})) min_ratio = std::min(min_ratio, r.ratio);
  return {increasing && min_ratio >= 0.999,
          std::string("strictly increasing=") + (increasing ? "yes" : "no") + fmt(" (min step %.3g)", worst_gap) +
              fmt(", min ratio at eps=1e-4: %.6f (need >= 0.999)", min_ratio)};
}

Outcome sandwich(const std::vector<LawPair>& sweep) {
  double worst = std::numeric_limits<double>::infinity();
  double n1_worst = 0.0;
  bool all = true;
  for (const auto& [mu, nu] : sweep) {
    const auto s = check_sandwich(mu, nu);
    all = all && s.pass;
    worst = std::min({worst, s.atv - s.tv, s.upper - s.atv});
    if (mu.horizon() == 1) n1_worst = std::max(n1_worst, std::abs(s.atv - s.tv));
  }
  return {all && worst >= -1e-9 && n1_worst <= 1e-12,
          fmt("min_slack=%.3g (tol -1e-9)", worst) + fmt(", n=1 max|atv-tv|=%.3g (tol 1e-12)", n1_worst)};
}

Outcome chain_rule(const std::vector<LawPair>& sweep) {
  double worst = 0.0;
  std::size_t finite = 0;
  bool agree = true;
  for (const auto& [mu, nu] : sweep) {
    const ExtReal h = kl(mu, nu);
    const ExtReal c = kl_chain(mu, nu);
    agree = agree && h.is_infinite() == c.is_infinite();
    if (h.is_infinite()) continue;
    ++finite;
    worst = std::max(worst, std::abs(h.value() - c.value()));
  }
  return {agree && finite > 0 && worst <= 1e-10,
          std::to_string(finite) + " finite instances, max_err=" + fmt("%.3g (tol 1e-10)", worst)};
}

Outcome attainment(const std::vector<LawPair>& sweep) {
  double cost_worst = 0.0;
  double residual_worst = 0.0;
  bool bicausal = true;
  for (const auto& [mu, nu] : sweep) {
    const Coupling pi = optimal_bicausal_coupling(mu, nu);
    cost_worst = std::max(cost_worst, std::abs(coupling_cost(pi) - atv_recursive(mu, nu).total));
    const auto report = is_bicausal(pi, 1e-9);
    bicausal = bicausal && report.bicausal;
    residual_worst = std::max(residual_worst, report.worst_residual);
  }

  auto coins = std::make_shared<const ProcessLaw>(ProcessLaw::product({Dist({0.5, 0.5}), Dist({0.5, 0.5})}));
  std::vector<Coupling::Entry> swap;
  for (std::size_t x1 = 0; x1 < 2; ++x1) {
    for (std::size_t x2 = 0; x2 < 2; ++x2) swap.push_back({2 * x1 + x2, 2 * x2 + x1, 0.25});
  }
  const bool counterexample_rejected = !is_bicausal(Coupling(coins, coins, swap), 1e-9).bicausal;

  return {bicausal && cost_worst <= 1e-9 && counterexample_rejected,
          fmt("max|cost-atv|=%.3g (tol 1e-9)", cost_worst) + fmt(", max causality residual=%.3g (tol 1e-9)", residual_worst) +
              ", anticipative coupling rejected=" + (counterexample_rejected ? "yes" : "no")};
}

Outcome degenerate_inputs() {
  // Absolute continuity fails at depth 2.
  const auto mu = ProcessLaw::product({Dist({0.5, 0.5}), Dist({0.5, 0.5})});
  const auto nu = ProcessLaw::product({Dist({0.5, 0.5}), Dist({1.0, 0.0})});
  const bool infinite = kl(mu, nu).is_infinite() && kl_chain(mu, nu).is_infinite();
  const auto a = check_adapted_pinsker(mu, nu);
  const auto c = check_classical_pinsker(mu, nu);
  const bool vacuous = a.pass && c.pass && std::isinf(a.rhs) && std::isinf(c.rhs);

  std::vector<LawPair> fuzz;
  std::uint64_t seed = 3000;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (std::size_t alphabet : {2, 3}) {
      auto part = generate_ensemble(
          {.horizon = n, .alphabet_sizes = {alphabet}, .count = 25, .seed = seed++, .hard_zero_fraction = 0.1});
      for (auto& p : part) fuzz.push_back(std::move(p));
    }
  }
  std::size_t errors = 0;
  std::size_t failing = 0;
  std::size_t infinite_count = 0;
  std::size_t lp_checked = 0;
  double lp_worst = 0.0;
  for (const auto& [m, v] : fuzz) {
    try {
      const InstanceReport r = verify_instance(m, v);
      if (!r.pass({})) ++failing;
      if (kl(m, v).is_infinite()) ++infinite_count;
      kl(v, m);
      tv(m, v);
      // LP oracle on every shape up to n = 3 ternary (729 variables).
      if (m.path_count() * m.path_count() <= 729) {
        ++lp_checked;
        lp_worst = std::max(lp_worst, std::abs(atv_lp(m, v) - r.atv));
      }
    } catch (const Error&) {
      ++errors;
    }
  }
  return {infinite && vacuous && fuzz.size() == 200 && errors == 0 && failing == 0 && lp_worst <= 1e-7,
          std::string("kl=inf and vacuous pass: ") + (infinite && vacuous ? "yes" : "no") + "; fuzz " +
              std::to_string(fuzz.size()) + " instances (10% hard zeros, " + std::to_string(infinite_count) +
              " with infinite kl): errors=" + std::to_string(errors) + ", failing checks=" + std::to_string(failing) + ", lp on " + std::to_string(lp_checked) + fmt(" max_err=%.3g", lp_worst)};
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  using Clock = std::chrono::steady_clock;
  const auto sweep_start = Clock::now();
  const std::vector<LawPair> sweep = sweep_pairs();
  const double sweep_seconds = std::chrono::duration<double>(Clock::now() - sweep_start).count();

  struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"closed-form atv on Bernoulli products", 1.0, closed_form_atv},
      {"recursive / dp / lp agreement", 60.0, oracle_agreement},
      {"adapted Pinsker on sweep and tightness grid", 60.0, [&] { return adapted_pinsker(sweep); }},
      {"tightness ratio", 0.0, tightness},
      {"sandwich bounds", 0.0, [&] { return sandwich(sweep); }},
      {"entropy chain rule", 0.0, [&] { return chain_rule(sweep); }},
      {"attainment and bicausality", 0.0, [&] { return attainment(sweep); }},
      {"degenerate inputs", 0.0, degenerate_inputs},
  };

  std::printf("sweep: %zu instances generated in %.3f s\n", sweep.size(), sweep_seconds);
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_budget = c.budget_seconds == 0.0 || seconds < c.budget_seconds;
    if (!in_budget) o.detail += fmt("; over time budget of %.0f s", c.budget_seconds);
    const bool pass = o.pass && in_budget;
    all = all && pass;
    std::printf("criterion %zu (%s): %s  %s  [%.3f s]\n", i + 1, c.name, pass ? "PASS" : "FAIL", o.detail.c_str(), seconds);
  }
  std::printf("acceptance: %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}
