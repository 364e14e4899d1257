#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "opelab/pomdp.hpp"

namespace opelab {

using Json = nlohmann::json;

// Model files: {"H","S","O","A","d1","transition","emission","reward"} with
// transition[h][s][a][s'] (H-1 slices), emission[h][s][o], reward[h][o][a].
// Policy files: {"pi": [h][o][a]}. Unknown fields are rejected.

Json model_to_json(const TabularPOMDP& model);
TabularPOMDP model_from_json(const Json& j);
Json policy_to_json(const MemorylessPolicy& policy);
MemorylessPolicy policy_from_json(const Json& j);

/// Reads a JSON file; ParseError on IO or syntax failure.
Json read_json_file(const std::string& path);
/// Writes `j.dump(2)` plus a trailing newline; ConfigError when the path is unwritable.
void write_json_file(const std::string& path, const Json& j);

TabularPOMDP load_model(const std::string& path);
MemorylessPolicy load_policy(const std::string& path);

/// FNV-1a 64 of the compact canonical model JSON.
std::uint64_t model_fingerprint(const TabularPOMDP& model);
std::string fingerprint_hex(std::uint64_t fp);

}  // namespace opelab
