#pragma once

#include <string>

#include "json.hpp"

namespace modal {

// Serialization used for every emitted JSON file: sorted keys (nlohmann object
// ordering), two-space indent, floating-point numbers at 17 significant
// digits so values round-trip exactly. Throws on non-finite numbers.
std::string to_json_text(const nlohmann::json& j);

void write_json_file(const std::string& path, const nlohmann::json& j);

// Throws std::invalid_argument on missing files or malformed JSON.
nlohmann::json read_json_file(const std::string& path);

}  // namespace modal
