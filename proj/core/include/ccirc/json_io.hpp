#pragma once

#include <json.hpp>

#include "ccirc/attacks.hpp"
#include "ccirc/scenario.hpp"
#include "ccirc/sweep.hpp"

namespace ccirc {

using json = nlohmann::json;

json circuit_to_json(const circuit_node& node);
circuit_node circuit_from_json(const json& j);

json characterization_to_json(const characterization& c);
characterization characterization_from_json(const json& j);

json scenario_to_json(const scenario& sc);
scenario scenario_from_json(const json& j);

json verdict_to_json(const verdict& v);
json run_result_to_json(const run_result& r);
json sweep_to_json(const sweep_result& s);

/// One JSON object per line: {tick, from, to, kind}.
std::string trace_to_jsonl(const std::vector<trace_event>& trace);

json load_json_file(const std::string& path);
void save_text_file(const std::string& path, const std::string& content);

}  // namespace ccirc
