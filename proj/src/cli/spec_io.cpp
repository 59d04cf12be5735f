#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "atv/cli.hpp"

namespace atv::cli {

namespace {

using nlohmann::json;

// 1-based line of the first occurrence of "key" in the document, for
// pointing validation errors at the right place.
std::size_t line_of_key(std::string_view text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const auto pos = text.find(quoted);
  if (pos == std::string_view::npos) return 1;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

[[noreturn]] void fail_at(std::string_view text, std::string_view key, ErrorCode code, const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line_of_key(text, key) << ": " << what;
  throw Error(code, msg.str());
}

bool line_referenced(const Error& e) { return std::string_view(e.what()).starts_with("line "); }

std::size_t as_index(const json& v, std::string_view text, std::string_view key, const std::string& what) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail_at(text, key, ErrorCode::BadSpec, what);
  return v.get<std::size_t>();
}

}  // namespace

ProcessLaw parse_process_spec(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    const auto last_nl = text.rfind('\n', upto == 0 ? 0 : upto - 1);
    const auto column = last_nl == std::string_view::npos || upto == 0 ? upto + 1 : upto - last_nl;
    std::ostringstream msg;
    msg << "line " << line << ", column " << column << ": malformed JSON";
    throw Error(ErrorCode::Parse, msg.str());
  }
  if (!doc.is_object()) throw Error(ErrorCode::BadSpec, "line 1: process spec must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "n" && key != "alphabets" && key != "format" && key != "probs") {
      fail_at(text, key, ErrorCode::BadSpec, "unknown key '" + key + "'");
    }
  }
  for (const char* key : {"n", "alphabets", "probs"}) {
    if (!doc.contains(key)) throw Error(ErrorCode::BadSpec, std::string("line 1: missing key '") + key + "'");
  }

  const std::size_t n = as_index(doc["n"], text, "n", "'n' must be a positive integer");
  if (n == 0) fail_at(text, "n", ErrorCode::BadSpec, "'n' must be a positive integer");

  const json& alphabet_doc = doc["alphabets"];
  if (!alphabet_doc.is_array() || alphabet_doc.size() != n) {
    fail_at(text, "alphabets", ErrorCode::ShapeMismatch, "'alphabets' must be an array of length n");
  }
  std::vector<Alphabet> alphabets;
  try {
    for (const auto& a : alphabet_doc) {
      if (a.is_array()) {
        std::vector<std::string> labels;
        for (const auto& l : a) {
          if (!l.is_string()) fail_at(text, "alphabets", ErrorCode::BadSpec, "alphabet labels must be strings");
          labels.push_back(l.get<std::string>());
        }
        alphabets.emplace_back(std::move(labels));
      } else {
        const auto size = as_index(a, text, "alphabets", "alphabet entries must be sizes or label lists");
        alphabets.emplace_back(size);
      }
    }
  } catch (const Error& e) {
    if (line_referenced(e)) throw;
    fail_at(text, "alphabets", e.code(), e.what());
  }

  std::string format = "dense";
  if (doc.contains("format")) {
    if (!doc["format"].is_string()) fail_at(text, "format", ErrorCode::BadSpec, "'format' must be a string");
    format = doc["format"].get<std::string>();
    if (format != "dense" && format != "sparse") {
      fail_at(text, "format", ErrorCode::BadSpec, "'format' must be \"dense\" or \"sparse\"");
    }
  }

  const json& probs = doc["probs"];
  if (!probs.is_array()) fail_at(text, "probs", ErrorCode::BadSpec, "'probs' must be an array");
  try {
    if (format == "dense") {
      std::vector<double> table;
      table.reserve(probs.size());
      for (const auto& v : probs) {
        if (!v.is_number()) fail_at(text, "probs", ErrorCode::BadSpec, "dense probabilities must be numbers");
        table.push_back(v.get<double>());
      }
      return from_joint_dense(table, std::move(alphabets));
    }
    std::vector<PathMass> table;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      const auto& entry = probs[i];
      const std::string where = "sparse entry " + std::to_string(i);
      if (!entry.is_object()) fail_at(text, "probs", ErrorCode::BadSpec, where + " must be an object");
      for (const auto& [key, _] : entry.items()) {
        if (key != "path" && key != "p") fail_at(text, "probs", ErrorCode::BadSpec, where + ": unknown key '" + key + "'");
      }
      if (!entry.contains("path") || !entry["path"].is_array()) {
        fail_at(text, "probs", ErrorCode::BadSpec, where + ": missing 'path' array");
      }
      if (!entry.contains("p") || !entry["p"].is_number()) {
        fail_at(text, "probs", ErrorCode::BadSpec, where + ": missing numeric 'p'");
      }
      PathIndex path;
      for (const auto& s : entry["path"]) path.push_back(as_index(s, text, "probs", where + ": bad symbol"));
      table.push_back({std::move(path), entry["p"].get<double>()});
    }
    return from_joint(table, std::move(alphabets));
  } catch (const Error& e) {
    if (line_referenced(e)) throw;
    fail_at(text, "probs", e.code(), e.what());
  }
}

ProcessLaw load_process_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Parse, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_process_spec(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

nlohmann::json process_spec_json(const ProcessLaw& law) {
  json doc;
  doc["n"] = law.horizon();
  json alphabets = json::array();
  for (const auto& a : law.alphabets()) {
    if (a.labels()) {
      alphabets.push_back(*a.labels());
    } else {
      alphabets.push_back(a.size());
    }
  }
  doc["alphabets"] = std::move(alphabets);
  doc["format"] = "dense";
  std::vector<double> probs(law.path_count(), 0.0);
  const auto sizes = law.alphabet_sizes();
  for (const auto& [path, mass] : law.support()) probs[path_code(sizes, path)] = mass;
  doc["probs"] = probs;
  return doc;
}

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

nlohmann::json to_json(const ResultRecord& record) {
  json doc;
  doc["metric"] = record.metric;
  if (record.value.is_infinite()) {
    doc["value"] = "inf";
  } else {
    doc["value"] = record.value.value();
  }
  doc["method"] = record.method;
  if (record.breakdown) doc["breakdown"] = *record.breakdown;
  doc["tolerances"] = record.tolerances;
  doc["inputs"] = record.inputs;
  return doc;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::CapExceeded: return 3;
    case ErrorCode::SolverFailure:
    case ErrorCode::Infeasible: return 4;
    default: return 2;
  }
}

}  // namespace atv::cli
