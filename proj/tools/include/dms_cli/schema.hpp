#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dms::cli {

// Emitted files are checked against small schemas before a run reports
// success. JSON schemas use the subset {type, required, properties, items,
// enum, minimum}; "type" may be a string or a list of strings.

/// Problems found, empty when `doc` conforms. Paths use a '/'-joined form.
std::vector<std::string> validate_json(const nlohmann::json& doc, const nlohmann::json& schema,
                                       const std::string& path = "");

struct CsvColumn {
  std::string name;
  bool numeric = true;
};

/// Header must equal the column names; every row needs the same number of
/// cells and numeric cells must parse completely as finite doubles.
std::vector<std::string> validate_csv(std::istream& in, const std::vector<CsvColumn>& columns);

/// Named schemas for the files the tool writes.
const nlohmann::json& json_schema(const std::string& name);
const std::vector<CsvColumn>& csv_schema(const std::string& name);

/// Field files: "index real imag" rows with consecutive indices.
std::vector<std::string> validate_field_file(const std::filesystem::path& path);

}  // namespace dms::cli
