#include "dms_cli/schema.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

#include "dms/field_io.hpp"

namespace dms::cli {

namespace {

using nlohmann::json;

bool has_type(const json& v, const std::string& t) {
  if (t == "null") return v.is_null();
  if (t == "boolean") return v.is_boolean();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  if (t == "string") return v.is_string();
  if (t == "array") return v.is_array();
  if (t == "object") return v.is_object();
  throw std::logic_error("schema uses unknown type " + t);
}

std::string where(const std::string& path) { return path.empty() ? "/" : path; }

// One schema per emitted JSON file. Diagnostics that can be undefined (no fit
// window, no bracket) are typed ["number", "null"].
const char* kSchemas = R"({
  "solve": {
    "type": "object",
    "required": ["lambda", "d_av", "E", "kinetic", "N", "omega", "residual", "iterations",
                 "converged", "status", "start", "box_radius", "field", "starts"],
    "properties": {
      "lambda": {"type": "number", "minimum": 0},
      "E": {"type": "number"},
      "omega": {"type": "number"},
      "residual": {"type": "number", "minimum": 0},
      "iterations": {"type": "integer", "minimum": 0},
      "converged": {"type": "boolean"},
      "status": {"enum": ["converged", "not_converged", "no_negative_energy"]},
      "field": {"type": "string"},
      "starts": {"type": "array", "items": {
        "type": "object", "required": ["label", "E", "iterations", "converged"]}}
    }
  },
  "energy_curve": {
    "type": "object",
    "required": ["points", "positive_energy", "monotone_breaks", "subadditivity_pairs",
                 "strict_subadditivity_failures"],
    "properties": {
      "points": {"type": "array", "items": {
        "type": "object", "required": ["lambda", "E", "omega", "residual", "status"],
        "properties": {"lambda": {"type": "number"}, "E": {"type": "number"}}}},
      "positive_energy": {"type": "array", "items": {"type": "integer"}},
      "monotone_breaks": {"type": "array", "items": {"type": "integer"}},
      "subadditivity_pairs": {"type": "array", "items": {
        "type": "object", "required": ["lambda1", "lambda2", "gap"]}},
      "strict_subadditivity_failures": {"type": "integer", "minimum": 0}
    }
  },
  "estimate": {
    "type": "object",
    "required": ["id", "trials", "seed", "worst_ratio", "identity_error", "pass", "witness",
                 "parts"],
    "properties": {
      "id": {"type": "string"},
      "trials": {"type": "integer", "minimum": 0},
      "seed": {"type": "integer"},
      "worst_ratio": {"type": ["number", "null"]},
      "identity_error": {"type": ["number", "null"]},
      "pass": {"type": "boolean"},
      "witness": {"type": "object", "required": ["trial", "seed", "detail"]},
      "parts": {"type": "array", "items": {
        "type": "object",
        "required": ["name", "kind", "worst", "tolerance", "samples", "pass", "witness"],
        "properties": {
          "kind": {"enum": ["identity", "inequality", "fitted", "strict"]},
          "worst": {"type": ["number", "null"]},
          "pass": {"type": "boolean"}}}}
    }
  },
  "verify_summary": {
    "type": "object",
    "required": ["suite", "seed", "trials", "pass", "reports"],
    "properties": {
      "suite": {"enum": ["identities", "estimates", "all"]},
      "pass": {"type": "boolean"},
      "reports": {"type": "array", "items": {
        "type": "object", "required": ["id", "pass", "file"]}}
    }
  },
  "threshold": {
    "type": "object",
    "required": ["lambda_grid", "R_hat", "E_lambda", "R0_hat", "lambda_cr_hat",
                 "scaling_pairs", "lambda_cr_bounds", "checks_passed"],
    "properties": {
      "lambda_grid": {"type": "array", "items": {"type": "number"}},
      "R_hat": {"type": "array", "items": {"type": "number"}},
      "E_lambda": {"type": "array", "items": {"type": "number"}},
      "R0_hat": {"type": ["number", "null"]},
      "lambda_cr_hat": {"type": ["number", "null"]},
      "checks_passed": {"type": "boolean"}
    }
  },
  "decay": {
    "type": "object",
    "required": ["fields"],
    "properties": {
      "fields": {"type": "array", "items": {
        "type": "object",
        "required": ["input", "csv", "box_radius", "floor", "exp_rate", "superexp_rate"],
        "properties": {
          "exp_rate": {"type": ["number", "null"]},
          "superexp_rate": {"type": ["number", "null"]},
          "heuristic_rate": {"type": ["number", "null"]}}}}
    }
  },
  "propagate": {
    "type": "object",
    "required": ["mode", "omega", "steps", "max_deviation", "max_norm_drift",
                 "max_energy_drift", "trajectory", "snapshots"],
    "properties": {
      "mode": {"enum": ["averaged", "full"]},
      "steps": {"type": "integer", "minimum": 0},
      "max_deviation": {"type": "number", "minimum": 0},
      "snapshots": {"type": "array", "items": {
        "type": "object", "required": ["step", "t", "file"]}}
    }
  },
  "breather": {
    "type": "object",
    "required": ["omega", "slow_period", "averaged_deviation", "runs", "strictly_decreasing"],
    "properties": {
      "slow_period": {"type": "number", "minimum": 0},
      "runs": {"type": "array", "items": {
        "type": "object", "required": ["epsilon", "deviation", "steps", "norm_drift", "error"]}},
      "strictly_decreasing": {"type": "boolean"}
    }
  },
  "manifest": {
    "type": "object",
    "required": ["command", "args", "config", "output_dir", "seed", "timestamp", "version",
                 "files"],
    "properties": {
      "command": {"enum": ["solve", "sweep", "threshold", "decay", "verify", "propagate"]},
      "args": {"type": "array", "items": {"type": "string"}},
      "config": {"type": ["string", "null"]},
      "output_dir": {"type": "string"},
      "seed": {"type": "integer", "minimum": 0},
      "timestamp": {"type": "string"},
      "version": {"type": "string"},
      "files": {"type": "array", "items": {"type": "string"}}
    }
  }
})";

}  // namespace

std::vector<std::string> validate_json(const json& doc, const json& schema,
                                       const std::string& path) {
  std::vector<std::string> errors;
  if (schema.contains("type")) {
    const json& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = has_type(doc, t.get<std::string>());
    } else {
      for (const auto& alt : t) ok = ok || has_type(doc, alt.get<std::string>());
    }
    if (!ok) {
      errors.push_back(fmt::format("{}: expected type {}, got {}", where(path), t.dump(),
                                   doc.type_name()));
      return errors;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == doc;
    if (!found) errors.push_back(fmt::format("{}: {} not in {}", where(path), doc.dump(),
                                             schema["enum"].dump()));
  }
  if (schema.contains("minimum") && doc.is_number() &&
      doc.get<double>() < schema["minimum"].get<double>()) {
    errors.push_back(fmt::format("{}: {} below minimum {}", where(path), doc.dump(),
                                 schema["minimum"].dump()));
  }
  if (doc.is_number_float() && !std::isfinite(doc.get<double>())) {
    errors.push_back(fmt::format("{}: non-finite number", where(path)));
  }
  if (doc.is_object()) {
    for (const auto& key : schema.value("required", json::array())) {
      if (!doc.contains(key.get<std::string>())) {
        errors.push_back(fmt::format("{}: missing key {}", where(path), key.dump()));
      }
    }
    if (schema.contains("properties")) {
      for (const auto& [key, sub] : schema["properties"].items()) {
        if (!doc.contains(key)) continue;
        auto more = validate_json(doc[key], sub, path + "/" + key);
        errors.insert(errors.end(), more.begin(), more.end());
      }
    }
  }
  if (doc.is_array() && schema.contains("items")) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      auto more = validate_json(doc[i], schema["items"], fmt::format("{}/{}", path, i));
      errors.insert(errors.end(), more.begin(), more.end());
    }
  }
  return errors;
}

std::vector<std::string> validate_csv(std::istream& in, const std::vector<CsvColumn>& columns) {
  std::vector<std::string> errors;
  std::string expected;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    expected += (i ? "," : "") + columns[i].name;
  }
  std::string line;
  if (!std::getline(in, line)) return {"empty file"};
  if (line != expected) {
    errors.push_back(fmt::format("header '{}' differs from '{}'", line, expected));
    return errors;
  }
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    std::vector<std::string_view> cells;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cells.size() != columns.size()) {
      errors.push_back(fmt::format("row {}: {} cells, expected {}", row, cells.size(),
                                   columns.size()));
      continue;
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!columns[i].numeric) continue;
      double v = 0.0;
      const auto c = cells[i];
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (c.empty() || ec != std::errc{} || ptr != c.data() + c.size() || !std::isfinite(v)) {
        errors.push_back(fmt::format("row {}, column {}: '{}' is not a finite number", row,
                                     columns[i].name, c));
      }
    }
  }
  return errors;
}

const json& json_schema(const std::string& name) {
  static const json all = json::parse(kSchemas);
  if (!all.contains(name)) throw std::logic_error("no JSON schema named " + name);
  return all.at(name);
}

const std::vector<CsvColumn>& csv_schema(const std::string& name) {
  static const std::map<std::string, std::vector<CsvColumn>> all = {
      {"trajectory", {{"t"}, {"norm"}, {"energy"}, {"deviation"}}},
      {"history", {{"iteration"}, {"energy"}, {"grad_norm"}}},
      {"energy_curve",
       {{"lambda"}, {"E"}, {"omega"}, {"residual"}, {"status", false}}},
      {"threshold", {{"lambda"}, {"R_hat"}, {"E_lambda"}}},
  };
  const auto it = all.find(name);
  if (it == all.end()) throw std::logic_error("no CSV schema named " + name);
  return it->second;
}

std::vector<std::string> validate_field_file(const std::filesystem::path& path) {
  try {
    const auto f = load_field(path);
    for (int x = -f.radius(); x <= f.radius(); ++x) {
      if (!std::isfinite(f[x].real()) || !std::isfinite(f[x].imag())) {
        return {fmt::format("site {} is not finite", x)};
      }
    }
  } catch (const std::exception& e) {
    return {e.what()};
  }
  return {};
}

}  // namespace dms::cli
