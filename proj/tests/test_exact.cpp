#include <doctest.h>

#include <cmath>

#include "opelab/errors.hpp"
#include "opelab/step_function.hpp"
#include "support.hpp"

using namespace opelab;

TEST_CASE("bandit values") {
    const Fixture fx = test::bandit();
    const ExactAnalysis ex = test::analysis(fx);
    CHECK(policy_value(fx.model, fx.pi_e) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(policy_value(fx.model, fx.pi_b) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(brute_force_J(fx.model, fx.pi_e) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(ex.value_e[0](0) == doctest::Approx(0.8));
    CHECK(ex.value_e[1](0) == 0.0);
    const StepAlgebra& alg = ex.steps[0];
    CHECK(alg.beliefs.cols() == 1);
    CHECK(alg.beliefs(0, 0) == 1.0);
    REQUIRE(alg.outcome.cols() == 2);
    CHECK(alg.outcome(0, 0) == doctest::Approx(0.5));
    CHECK(alg.outcome(0, 1) == doctest::Approx(0.5));
    CHECK(alg.z(0) == doctest::Approx(0.5));
    CHECK(alg.z(1) == doctest::Approx(0.5));
    CHECK(ex.reward_to_go[0](0) == doctest::Approx(0.2));
    CHECK(ex.reward_to_go[0](1) == doctest::Approx(0.8));
}

TEST_CASE("first belief matrix is the initial distribution") {
    const Fixture fx = test::random_fixture(11);
    const ExactAnalysis ex = test::analysis(fx);
    REQUIRE(ex.steps[0].beliefs.cols() == 1);
    for (int s = 0; s < fx.model.state_count(); ++s)
        CHECK(ex.steps[0].beliefs(s, 0) == doctest::Approx(fx.model.initial(s)).epsilon(1e-14));
}

TEST_CASE("recursion matches enumeration on random models") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Fixture fx = test::random_fixture(seed);
        CHECK(std::abs(policy_value(fx.model, fx.pi_e) - brute_force_J(fx.model, fx.pi_e)) <= 1e-10);
        CHECK(std::abs(policy_value(fx.model, fx.pi_b) - brute_force_J(fx.model, fx.pi_b)) <= 1e-10);
    }
}

TEST_CASE("deterministic model returns the single path") {
    const Table4 t(2, Table3(2, Table2(2, Vec{0.0, 1.0})));
    const Table3 e{{{1.0, 0.0}, {0.0, 1.0}}, {{1.0, 0.0}, {0.0, 1.0}}, {{1.0, 0.0}, {0.0, 1.0}}};
    const Table3 r{{{0.1, 0.2}, {0.3, 0.4}}, {{0.5, 0.6}, {0.7, 0.8}}, {{0.9, 1.0}, {1.1, 1.2}}};
    const TabularPOMDP m(3, 2, 2, 2, {1.0, 0.0}, t, e, r);
    const MemorylessPolicy pi = MemorylessPolicy::deterministic(3, 2, 2, [](int, int o) { return 1 - o; });
    // s = 0, 1, 1; observations follow the state; action = 1 - o.
    const double path = 0.2 + 0.7 + 1.1;
    CHECK(policy_value(m, pi) == doctest::Approx(path).epsilon(1e-14));
    CHECK(brute_force_J(m, pi) == doctest::Approx(path).epsilon(1e-14));
}

TEST_CASE("zero and constant rewards") {
    const TabularPOMDP ones = test::small_uniform_model(1.0);
    const MemorylessPolicy pi = MemorylessPolicy::uniform(2, 2, 2);
    const ExactAnalysis ex = analyze(ones, pi, pi);
    for (int h = 0; h < 2; ++h) CHECK((ex.reward_to_go[h].array() == 2.0 - h).all());
    const TabularPOMDP zero = ones.with_reward_offset(-1.0);
    for (const auto& v : latent_value(zero, pi)) CHECK(v.cwiseAbs().maxCoeff() == 0.0);
    CHECK(reward_to_go(ones, FutureIndex{1, 3}) == 1.0);
}

TEST_CASE("budgets") {
    const Fixture fx = generate_fixture("chain", {}, 0);
    EngineOptions tight;
    tight.budget = 16;
    CHECK_THROWS_AS(analyze(fx.model, fx.pi_e, fx.pi_b, tight), BudgetError);
    tight.brute_force_budget = 1000;
    CHECK_THROWS_AS(brute_force_J(fx.model, fx.pi_e, tight), BudgetError);
}

TEST_CASE("state residual of the zero function is the one-step reward") {
    const Fixture fx = test::random_fixture(3);
    const ExactAnalysis ex = test::analysis(fx);
    const auto res = bellman_residual_S(ex, StepFunction::zero(ex, Domain::Futures));
    for (int h = 0; h < ex.horizon(); ++h)
        CHECK((res[h] - ex.one_step_reward_e[h]).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("first history residual is the initial average of the state residual") {
    const Fixture fx = test::random_fixture(8);
    const ExactAnalysis ex = test::analysis(fx);
    std::vector<Eigen::VectorXd> tables;
    for (const StepAlgebra& alg : ex.steps) tables.push_back(Eigen::VectorXd::LinSpaced(alg.outcome.cols(), -1.0, 2.0));
    const StepFunction v = StepFunction::dense(Domain::Futures, tables);
    const Eigen::VectorXd bs = bellman_residual_S(ex, v)[0];
    const Eigen::VectorXd bh = bellman_residual_H(ex, v)[0];
    REQUIRE(bh.size() == 1);
    const Eigen::Map<const Eigen::VectorXd> d1(fx.model.initial_distribution().data(), fx.model.state_count());
    CHECK(bh(0) == doctest::Approx(d1.dot(bs)).epsilon(1e-12));
    const auto forms = bellman_residual_S_forms(ex, v);
    for (int h = 0; h < ex.horizon(); ++h) CHECK((forms.one_step[h] - forms.weighted[h]).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("one-hot beliefs make history and state residuals agree") {
    const Fixture fx = generate_fixture("mdp", {}, 2);
    const ExactAnalysis ex = test::analysis(fx);
    std::vector<Eigen::VectorXd> tables;
    for (const StepAlgebra& alg : ex.steps) tables.push_back(Eigen::VectorXd::LinSpaced(alg.outcome.cols(), 0.0, 1.0));
    const StepFunction v = StepFunction::dense(Domain::Futures, tables);
    const auto bs = bellman_residual_S(ex, v);
    const auto bh = bellman_residual_H(ex, v);
    for (int h = 0; h < ex.horizon(); ++h) {
        const StepAlgebra& alg = ex.steps[h];
        for (Eigen::Index t = 0; t < alg.beliefs.cols(); ++t) {
            if (!alg.reachable[t]) continue;
            Eigen::Index s = 0;
            CHECK(alg.beliefs.col(t).maxCoeff(&s) == doctest::Approx(1.0));
            CHECK(bh[h](t) == doctest::Approx(bs[h](s)).epsilon(1e-12));
        }
    }
}

TEST_CASE("evaluation error identity") {
    const Fixture fx = test::random_fixture(21);
    const ExactAnalysis ex = test::analysis(fx);
    const ErrorIdentity zero = evaluation_error_identity(ex, StepFunction::zero(ex, Domain::Futures));
    CHECK(zero.lhs == doctest::Approx(policy_value(fx.model, fx.pi_e)).epsilon(1e-12));
    CHECK(zero.rhs == doctest::Approx(zero.lhs).epsilon(1e-10));
    std::vector<Eigen::VectorXd> tables;
    for (const StepAlgebra& alg : ex.steps) tables.push_back(Eigen::VectorXd::LinSpaced(alg.outcome.cols(), 3.0, -1.0));
    const ErrorIdentity id = evaluation_error_identity(ex, StepFunction::dense(Domain::Futures, tables));
    CHECK(std::abs(id.lhs - id.rhs) <= 1e-8);
}

TEST_CASE("belief columns and outcome rows are distributions") {
    const Fixture fx = test::random_fixture(30);
    const ExactAnalysis ex = test::analysis(fx);
    for (const StepAlgebra& alg : ex.steps) {
        CHECK((alg.outcome.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
        for (Eigen::Index t = 0; t < alg.beliefs.cols(); ++t)
            if (alg.reachable[t]) CHECK(alg.beliefs.col(t).sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(alg.history_marginal_b.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(alg.future_marginal_b.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(ex.trajectory_prob_b.sum() == doctest::Approx(1.0).epsilon(1e-12));
}
