#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "atv/bicausal_lp.hpp"
#include "atv/cli.hpp"
#include "atv/engine.hpp"
#include "atv/lab.hpp"

namespace atv::cli {

namespace {

using nlohmann::json;

struct LoadedLaw {
  ProcessLaw law;
  std::string digest;
};

LoadedLaw load_with_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Parse, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return {parse_process_spec(text), "fnv1a64:" + fnv1a64_hex(text)};
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

// Writes to --out when given, else to `out`.
void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw Error(ErrorCode::Usage, "cannot write '" + out_path + "'");
  file << text;
}

struct ComputeArgs {
  std::string mu;
  std::string nu;
  std::string metric;
  std::string method = "recursive";
  bool breakdown = false;
  std::string out;
  std::size_t lp_cap = 4096;
};

int cmd_compute(const ComputeArgs& args, std::ostream& out) {
  const LoadedLaw mu = load_with_digest(args.mu);
  const LoadedLaw nu = load_with_digest(args.nu);
  if (!mu.law.same_shape(nu.law)) throw Error(ErrorCode::ShapeMismatch, "mu and nu differ in horizon or alphabets");

  ResultRecord rec;
  rec.metric = args.metric;
  rec.inputs = {{"mu", mu.digest}, {"nu", nu.digest}};
  rec.tolerances = {{"normalization", kJointTolerance}, {"kernel", kDistTolerance}};

  if (args.breakdown && !(args.metric == "atv" && args.method == "recursive")) {
    throw Error(ErrorCode::Usage, "--breakdown needs --metric atv --method recursive");
  }
  if (args.metric == "tv") {
    rec.method = "path-sum";
    rec.value = ExtReal::finite(tv(mu.law, nu.law));
  } else if (args.metric == "kl") {
    rec.method = "path-sum";
    rec.value = kl(mu.law, nu.law);
  } else if (args.method == "recursive") {
    rec.method = "recursive";
    const AtvBreakdown b = atv_recursive(mu.law, nu.law);
    rec.value = ExtReal::finite(b.total);
    if (args.breakdown) rec.breakdown = b.per_stage;
  } else if (args.method == "dp") {
    rec.method = "dp";
    rec.value = ExtReal::finite(atv_dp(mu.law, nu.law));
  } else {
    rec.method = "lp";
    rec.value = ExtReal::finite(std::max(0.0, atv_lp(mu.law, nu.law, {args.lp_cap, true})));
    rec.tolerances["lp_feasibility"] = 1e-9;
    rec.tolerances["lp_reduced_cost"] = 1e-9;
  }
  emit(to_json(rec).dump(2) + "\n", args.out, out);
  return 0;
}

struct VerifyArgs {
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::size_t n = 0;
  std::size_t alphabet = 0;
  std::string family = "uniform-random";
  double tol = kInequalityTolerance;
  double eps = 0.1;
  double hard_zero = 0.0;
  std::size_t lp_cap = 256;
  std::string reproducer_dir = ".";
};

// Worst-case tracker for one named check.
struct Tally {
  std::string name;
  std::string stat;  // "slack" (larger is better) or "error" (smaller is better)
  std::size_t passed = 0;
  std::size_t evaluated = 0;
  double worst = std::numeric_limits<double>::quiet_NaN();

  void add(bool ok, double v) {
    ++evaluated;
    passed += ok;
    if (std::isnan(worst)) {
      worst = v;
    } else {
      worst = stat == "slack" ? std::min(worst, v) : std::max(worst, v);
    }
  }
};

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  if (args.count == 0) throw Error(ErrorCode::Usage, "--count must be positive");
  if (args.n == 0 || args.alphabet == 0) throw Error(ErrorCode::Usage, "--n and --alphabet must be positive");
  const auto family = parse_family(args.family);
  if (!family) throw Error(ErrorCode::Usage, "unknown family '" + args.family + "'");

  EnsembleSpec spec;
  spec.horizon = args.n;
  spec.alphabet_sizes = {args.alphabet};
  spec.family = *family;
  spec.count = args.count;
  spec.seed = args.seed;
  spec.eps = args.eps;
  spec.hard_zero_fraction = args.hard_zero;
  const auto pairs = generate_ensemble(spec);

  VerifyOptions options;
  options.tol = args.tol;
  options.lp_cap = args.lp_cap;

  Tally classical{"classical_pinsker", "slack"}, adapted{"adapted_pinsker", "slack"},
      sandwich{"sandwich", "slack"}, chain{"chain_rule", "error"}, dp{"recursive_vs_dp", "error"},
      lp{"recursive_vs_lp", "error"}, attain{"attainment", "error"}, bicausal{"bicausality", "error"};
  std::size_t failures = 0;
  std::vector<std::string> reproducers;

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [mu, nu] = pairs[i];
    const InstanceReport r = verify_instance(mu, nu, options);
    classical.add(r.classical.pass, r.classical.slack);
    adapted.add(r.adapted.pass, r.adapted.slack);
    const double sandwich_slack = std::min(r.sandwich.atv - r.sandwich.tv, r.sandwich.upper - r.sandwich.atv);
    sandwich.add(r.sandwich.pass && r.n1_exact, sandwich_slack);
    if (r.chain_error) chain.add(*r.chain_error <= options.chain_tol && r.kl_infinite_agree, *r.chain_error);
    dp.add(r.dp_error <= options.oracle_tol, r.dp_error);
    if (r.lp_error) lp.add(*r.lp_error <= options.lp_tol, *r.lp_error);
    attain.add(r.attainment_error <= options.oracle_tol, r.attainment_error);
    bicausal.add(r.bicausal_residual <= options.oracle_tol, r.bicausal_residual);

    if (!r.pass(options)) {
      ++failures;
      const auto file = std::filesystem::path(args.reproducer_dir) /
                        ("verify_failure_seed" + std::to_string(args.seed) + "_" + std::to_string(i) + ".json");
      json doc = {{"seed", args.seed}, {"index", i}, {"family", args.family},
                  {"mu", process_spec_json(mu)}, {"nu", process_spec_json(nu)}};
      std::ofstream(file) << doc.dump(2) << "\n";
      reproducers.push_back(file.string());
    }
  }

  out << "instances: " << pairs.size() << "\n";
  for (const Tally* t : {&classical, &adapted, &sandwich, &chain, &dp, &lp, &attain, &bicausal}) {
    out << "check " << t->name << ": pass " << t->passed << "/" << t->evaluated;
    if (t->evaluated > 0) out << " worst_" << t->stat << " " << format_double(t->worst);
    out << "\n";
  }
  if (failures == 0) {
    out << "result: PASS\n";
    return 0;
  }
  out << "result: FAIL (" << failures << " instances)\n";
  err << "error: VerifyFailed: " << failures << " failing instances; reproducers:";
  for (const auto& f : reproducers) err << " " << f;
  err << "\n";
  return 1;
}

std::vector<std::size_t> parse_n_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || item.empty() || v == 0) throw Error(ErrorCode::Usage, "bad --n-list entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::Usage, "empty --n-list");
  return out;
}

double parse_real(const std::string& item, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(item, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != item.size() || item.empty()) throw Error(ErrorCode::Usage, "bad " + what + " value '" + item + "'");
  return v;
}

// "geometric:HI:LO:COUNT" or a comma-separated list of values.
std::vector<double> parse_eps_grid(const std::string& text) {
  const std::string prefix = "geometric:";
  if (text.rfind(prefix, 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(text.substr(prefix.size()));
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw Error(ErrorCode::Usage, "--eps-grid expects geometric:HI:LO:COUNT");
    const double hi = parse_real(parts[0], "--eps-grid");
    const double lo = parse_real(parts[1], "--eps-grid");
    const double count = parse_real(parts[2], "--eps-grid");
    if (count < 1 || count != std::floor(count)) throw Error(ErrorCode::Usage, "--eps-grid count must be a positive integer");
    if (!(hi > 0.0 && lo > 0.0)) throw Error(ErrorCode::BadEpsilon, "--eps-grid endpoints must be positive");
    return geometric_grid(hi, lo, static_cast<std::size_t>(count));
  }
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(item, "--eps-grid"));
  if (out.empty()) throw Error(ErrorCode::Usage, "empty --eps-grid");
  return out;
}

struct TightnessArgs {
  std::string n_list = "1,2,3,4,6";
  std::string eps_grid = "geometric:0.25:1e-5:12";
  std::string out;
};

int cmd_tightness(const TightnessArgs& args, std::ostream& out) {
  const auto rows = tightness_experiment(parse_n_list(args.n_list), parse_eps_grid(args.eps_grid));
  std::string csv = "n,eps,atv,atv_closed,kl,kl_closed,ratio,bound_ok\n";
  for (const auto& r : rows) {
    csv += std::to_string(r.n) + "," + format_double(r.eps) + "," + format_double(r.atv) + "," +
           format_double(r.atv_closed) + "," + format_double(r.kl) + "," + format_double(r.kl_closed) + "," +
           format_double(r.ratio) + "," + (r.bound_ok ? "true" : "false") + "\n";
  }
  emit(csv, args.out, out);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adapted total variation toolkit", "atv"};
  app.require_subcommand(1);

  ComputeArgs compute;
  auto* c = app.add_subcommand("compute", "Compute TV, KL or ATV between two process spec files");
  c->add_option("--mu", compute.mu, "Process spec file for mu")->required();
  c->add_option("--nu", compute.nu, "Process spec file for nu")->required();
  c->add_option("--metric", compute.metric, "tv | atv | kl")->required()->check(CLI::IsMember({"tv", "atv", "kl"}));
  c->add_option("--method", compute.method, "recursive | dp | lp (atv only)")
      ->check(CLI::IsMember({"recursive", "dp", "lp"}));
  c->add_flag("--breakdown", compute.breakdown, "Include per-stage ATV terms");
  c->add_option("--out", compute.out, "Write the result record here instead of stdout");
  c->add_option("--lp-cap", compute.lp_cap, "Variable cap for --method lp");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Run every property check on a seeded random ensemble");
  v->add_option("--seed", verify.seed, "RNG seed")->required();
  v->add_option("--count", verify.count, "Number of instances")->required();
  v->add_option("--n", verify.n, "Horizon")->required();
  v->add_option("--alphabet", verify.alphabet, "Alphabet size at every stage")->required();
  v->add_option("--family", verify.family, "uniform-random | markov | product | bernoulli-eps");
  v->add_option("--tol", verify.tol, "Inequality tolerance");
  v->add_option("--eps", verify.eps, "Perturbation for bernoulli-eps");
  v->add_option("--hard-zero", verify.hard_zero, "Probability of forcing a kernel entry to zero");
  v->add_option("--lp-cap", verify.lp_cap, "Largest LP (variables) compared against");
  v->add_option("--reproducer-dir", verify.reproducer_dir, "Where failing instances are written");

  TightnessArgs tight;
  auto* t = app.add_subcommand("tightness", "Bernoulli tightness table as CSV");
  t->add_option("--n-list", tight.n_list, "Comma-separated horizons");
  t->add_option("--eps-grid", tight.eps_grid, "geometric:HI:LO:COUNT or comma-separated values");
  t->add_option("--out", tight.out, "CSV output file (stdout if omitted)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << to_string(ErrorCode::Usage) << ": " << e.what() << "\n";
    return exit_code_for(ErrorCode::Usage);
  }

  try {
    if (c->parsed()) return cmd_compute(compute, out);
    if (v->parsed()) return cmd_verify(verify, out, err);
    return cmd_tightness(tight, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  }
}

}  // namespace atv::cli
