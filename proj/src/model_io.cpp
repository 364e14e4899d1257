#include "opelab/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "opelab/errors.hpp"

namespace opelab {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const char* what) {
    if (!j.is_object()) throw ParseError(std::string(what) + " must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ParseError(std::string(what) + " has unknown field '" + key + "'");
    for (const std::string& key : allowed)
        if (!j.contains(key)) throw ParseError(std::string(what) + " is missing field '" + key + "'");
}

template <class T>
T field(const Json& j, const char* key, const char* what) {
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ParseError(std::string(what) + " field '" + key + "' has the wrong type: " + e.what());
    }
}

}  // namespace

Json model_to_json(const TabularPOMDP& m) {
    Json j;
    j["H"] = m.horizon();
    j["S"] = m.state_count();
    j["O"] = m.obs_count();
    j["A"] = m.action_count();
    j["d1"] = m.initial_distribution();
    j["transition"] = m.transition_table();
    j["emission"] = m.emission_table();
    j["reward"] = m.reward_table();
    return j;
}

TabularPOMDP model_from_json(const Json& j) {
    reject_unknown(j, {"H", "S", "O", "A", "d1", "transition", "emission", "reward"}, "model");
    const char* w = "model";
    return TabularPOMDP(field<int>(j, "H", w), field<int>(j, "S", w), field<int>(j, "O", w), field<int>(j, "A", w),
                        field<Vec>(j, "d1", w), field<Table4>(j, "transition", w), field<Table3>(j, "emission", w),
                        field<Table3>(j, "reward", w));
}

Json policy_to_json(const MemorylessPolicy& p) { return Json{{"pi", p.table()}}; }

MemorylessPolicy policy_from_json(const Json& j) {
    reject_unknown(j, {"pi"}, "policy");
    const Table3 t = field<Table3>(j, "pi", "policy");
    if (t.empty() || t[0].empty()) throw ParseError("policy table is empty");
    return MemorylessPolicy(static_cast<int>(t[0].size()), static_cast<int>(t[0][0].size()), t);
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw ConfigError("write to '" + path + "' failed");
}

TabularPOMDP load_model(const std::string& path) { return model_from_json(read_json_file(path)); }
MemorylessPolicy load_policy(const std::string& path) { return policy_from_json(read_json_file(path)); }

std::uint64_t model_fingerprint(const TabularPOMDP& model) {
    const std::string text = model_to_json(model).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fingerprint_hex(std::uint64_t fp) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
    return buf;
}

}  // namespace opelab
