#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opelab/pomdp.hpp"

namespace opelab {

struct Fixture {
    std::string name;
    TabularPOMDP model;
    MemorylessPolicy pi_e;
    MemorylessPolicy pi_b;
    std::vector<std::string> tags;
};

/// Dimensions and knobs. Only the kinds that draw random tables read the dimensions.
struct FixtureParams {
    int states = 2;
    int observations = 2;
    int actions = 2;
    int horizon = 3;
    double r_min = 0.05;
    /// uniform kind: entries of Pr_b(f_h | s_h) stay below c_stoch / (OA)^(H-h).
    double c_stoch = 2.0;
    int max_attempts = 1000;
};

/// random | bandit | mdp | reveal | uniform | chain | onpolicy.
const std::vector<std::string>& fixture_kinds();

/// Builds a fixture and machine-checks its defining property. Throws ConfigError
/// for an unknown kind and ModelError when rejection sampling runs out of attempts.
Fixture generate_fixture(const std::string& kind, const FixtureParams& params, std::uint64_t seed);

/// Random dimensions with S, O, A <= 3, H <= 4 and O >= S, keyed by seed.
FixtureParams random_dimensions(std::uint64_t seed);

/// One fixture of every kind, in fixture_kinds() order.
std::vector<Fixture> default_fixture_set(std::uint64_t seed);

}  // namespace opelab
