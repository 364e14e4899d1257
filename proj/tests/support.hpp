#pragma once

#include <doctest.h>

#include "opelab/exact.hpp"
#include "opelab/fixtures.hpp"

namespace opelab::test {

inline Fixture bandit() { return generate_fixture("bandit", {}, 0); }

inline Fixture random_fixture(std::uint64_t seed) { return generate_fixture("random", random_dimensions(seed), seed); }

inline ExactAnalysis analysis(const Fixture& fx) { return analyze(fx.model, fx.pi_e, fx.pi_b); }

/// Two states, two observations, two actions, H = 2, all tables uniform.
inline TabularPOMDP small_uniform_model(double reward = 1.0) {
    const Table4 t(1, Table3(2, Table2(2, Vec{0.5, 0.5})));
    const Table3 e(2, Table2(2, Vec{0.5, 0.5}));
    const Table3 r(2, Table2(2, Vec{reward, reward}));
    return TabularPOMDP(2, 2, 2, 2, {0.5, 0.5}, t, e, r);
}

}  // namespace opelab::test
