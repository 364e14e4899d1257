#include <doctest.h>

#include <algorithm>

#include "opelab/errors.hpp"
#include "support.hpp"

using namespace opelab;

namespace {

const CheckEntry* find_check(const ValidationReport& r, const std::string& name, bool passed) {
    auto it = std::find_if(r.checks.begin(), r.checks.end(),
                           [&](const CheckEntry& c) { return c.name == name && c.passed == passed; });
    return it == r.checks.end() ? nullptr : &*it;
}

}  // namespace

TEST_CASE("bandit passes every structural check") {
    const Fixture fx = test::bandit();
    ValidationReport r = validate_model(fx.model);
    validate_policy(fx.pi_e, fx.model, r, "pi_e");
    validate_policy(fx.pi_b, fx.model, r, "pi_b");
    CHECK(r.all_passed());
    CHECK(r.min_reward == doctest::Approx(0.2));
}

TEST_CASE("unnormalized transition row is reported") {
    Table4 t(1, Table3(2, Table2(2, Vec{0.5, 0.5})));
    t[0][1][0] = {0.5, 0.4};
    const Table3 e(2, Table2(2, Vec{0.5, 0.5}));
    const Table3 r(2, Table2(2, Vec{1.0, 1.0}));
    const ValidationReport rep = validate_model(TabularPOMDP(2, 2, 2, 2, {0.5, 0.5}, t, e, r));
    CHECK_FALSE(rep.all_passed());
    const CheckEntry* c = find_check(rep, "transition_normalized", false);
    REQUIRE(c != nullptr);
    CHECK(c->detail.find("0.9") != std::string::npos);
}

TEST_CASE("zero reward fails positivity") {
    Table3 r(2, Table2(2, Vec{1.0, 1.0}));
    r[1][0][0] = 0.0;
    const Table4 t(1, Table3(2, Table2(2, Vec{0.5, 0.5})));
    const Table3 e(2, Table2(2, Vec{0.5, 0.5}));
    const ValidationReport rep = validate_model(TabularPOMDP(2, 2, 2, 2, {0.5, 0.5}, t, e, r));
    CHECK(find_check(rep, "reward_positive", false) != nullptr);
    CHECK(rep.min_reward == 0.0);
}

TEST_CASE("wrong table shapes are structural errors") {
    const Table4 t(1, Table3(2, Table2(2, Vec{0.5, 0.5})));
    const Table3 e(2, Table2(2, Vec{0.5, 0.5}));
    const Table3 r(2, Table2(2, Vec{1.0, 1.0}));
    CHECK_THROWS_AS(TabularPOMDP(2, 2, 2, 2, {1.0}, t, e, r), ModelError);
    CHECK_THROWS_AS(TabularPOMDP(3, 2, 2, 2, {0.5, 0.5}, t, e, r), ModelError);
    CHECK_THROWS_AS(TabularPOMDP(2, 2, 2, 2, {0.5, 0.5}, t, Table3(2, Table2(2, Vec{1.0})), r), ModelError);
    const TabularPOMDP m = test::small_uniform_model();
    ValidationReport rep;
    CHECK_THROWS_AS(validate_policy(MemorylessPolicy::uniform(3, 2, 2), m, rep, "pi"), ModelError);
}

TEST_CASE("action ratios") {
    const Fixture fx = test::bandit();
    CHECK(action_ratio(fx.pi_e, fx.pi_b, 0, 0, 1) == doctest::Approx(2.0));
    CHECK(action_ratio(fx.pi_e, fx.pi_b, 0, 0, 0) == 0.0);
    CHECK(c_mu(fx.pi_e, fx.pi_b) == doctest::Approx(2.0));
    CHECK(c_mu(fx.pi_b, fx.pi_b) == 1.0);
    CHECK_THROWS_AS(c_mu(fx.pi_b, fx.pi_e), ActionCoverageError);
}

TEST_CASE("reward offset shifts every entry") {
    const TabularPOMDP m = test::small_uniform_model(0.5).with_reward_offset(0.25);
    for (int h = 0; h < 2; ++h)
        for (int o = 0; o < 2; ++o)
            for (int a = 0; a < 2; ++a) CHECK(m.reward(h, o, a) == 0.75);
}
