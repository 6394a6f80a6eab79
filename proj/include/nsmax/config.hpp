#pragma once

// JSON model blocks: {"family":"ET","structure":"M1","params":{...},"fixed":[...],"bounds":{...}}

#include <filesystem>

#include <json.hpp>

#include "nsmax/core_types.hpp"

namespace nsmax::config {

// Unknown keys or parameter names raise ValidationError; values are bounds-checked.
DependenceSpec spec_from_json(const nlohmann::json& j);
DependenceSpec read_spec(const std::filesystem::path& path);

nlohmann::json spec_to_json(const DependenceSpec& spec);
nlohmann::json report_to_json(const FitReport& rep);

}  // namespace nsmax::config
