#pragma once

#include <filesystem>
#include <string>

#include "radar/run_config.hpp"

namespace radar {

RunConfig default_run_config();

// Parses the JSON experiment config. Every field is optional and defaults to
// the standard desk-scale setup; unknown keys and malformed values are
// rejected with the offending field path. The top-level `retrieval` section
// also populates funnel.retrieval.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace radar
