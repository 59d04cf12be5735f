#pragma once

// Command-line surface: process spec files, result records, and the
// compute / verify / tightness subcommands.
//
// Process spec file (JSON):
//   { "n": 2,
//     "alphabets": [2, ["lo", "hi"]],
//     "format": "dense",              // or "sparse"; default "dense"
//     "probs": [0.25, 0.25, 0.25, 0.25] }
// Dense probabilities are row-major with the first stage most significant.
// Sparse: "probs": [ {"path": [0, 1], "p": 0.5}, ... ]. Unknown keys are
// rejected.
//
// Exit codes: 0 success, 1 verify found a failing instance, 2 parse /
// validation / usage error, 3 LP variable cap exceeded, 4 solver failure.
// Every error writes "error: <code>: <message>" as its first stderr line.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "atv/error.hpp"
#include "atv/measure.hpp"

namespace atv::cli {

ProcessLaw parse_process_spec(std::string_view text);
ProcessLaw load_process_spec(const std::string& path);

/// Dense spec document for a law (used for reproducer files).
nlohmann::json process_spec_json(const ProcessLaw& law);

/// Shortest decimal text that parses back to the same double, in the C
/// locale ("inf" for infinity).
std::string format_double(double value);

std::string fnv1a64_hex(std::string_view bytes);

struct ResultRecord {
  std::string metric;
  ExtReal value = ExtReal::finite(0.0);
  std::string method;
  std::optional<std::vector<double>> breakdown;
  nlohmann::json tolerances = nlohmann::json::object();
  nlohmann::json inputs = nlohmann::json::object();
};

nlohmann::json to_json(const ResultRecord& record);

int exit_code_for(ErrorCode code);

/// Runs the tool; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace atv::cli
