#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fiberlink/cascade.hpp"

namespace fiberlink::scenario {

/// Schema violation: carries the offending section/key path.
struct SchemaError : std::runtime_error {
    std::string path;
    SchemaError(std::string p, const std::string& msg)
        : std::runtime_error("[" + p + "] " + msg), path(std::move(p)) {}
};

/// Parses and schema-validates a scenario document. Unknown keys are errors
/// (fail-closed): a typo must never silently change a metrology run.
cascade::Scenario from_toml(const std::string& text);

/// Loads a scenario from a file path or from "preset:NAME".
cascade::Scenario load(const std::string& path_or_preset);

std::string preset_text(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace fiberlink::scenario
