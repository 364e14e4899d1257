#include <doctest.h>

#include <cmath>

#include "opelab/errors.hpp"
#include "opelab/fdvf.hpp"
#include "support.hpp"

using namespace opelab;

namespace {

void check_table(const StepFunction& v, int h, std::initializer_list<double> expected) {
    REQUIRE(v.table(h).size() == static_cast<Eigen::Index>(expected.size()));
    int i = 0;
    for (double x : expected) CHECK(v.table(h)(i++) == doctest::Approx(x).epsilon(1e-12));
}

}  // namespace

TEST_CASE("bandit constructions") {
    const ExactAnalysis ex = test::analysis(test::bandit());
    check_table(construct_is_fdvf(ex).value, 0, {0.0, 1.6});
    check_table(construct_pinv_fdvf(ex).value, 0, {0.8, 0.8});
    check_table(construct_l2_weighted_fdvf(ex).value, 0, {0.8, 0.8});
    const FdvfSolution rw = construct_reward_weighted_fdvf(ex);
    check_table(rw.value, 0, {0.32, 1.28});
    REQUIRE(rw.value.linear_form());
    CHECK(rw.value.linear_form()->theta[0](0) == doctest::Approx(1.6).epsilon(1e-12));
    const std::vector<Eigen::VectorXd> prior{Eigen::VectorXd::Constant(1, 3.0)};
    check_table(construct_prior_weighted_fdvf(ex, prior).value, 0, {0.8, 0.8});
}

TEST_CASE("every construction satisfies the defining identity") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const ExactAnalysis ex = test::analysis(test::random_fixture(seed));
        for (Construction c : {Construction::ImportanceSampling, Construction::PseudoInverse, Construction::L2Weighted,
                               Construction::RewardWeighted, Construction::PriorWeighted}) {
            const FdvfSolution s = construct_fdvf(ex, c);
            CHECK(verify_fdvf(ex, s.value) <= 1e-8);
            CHECK(s.value.representation_gap(ex) <= 1e-10);
        }
    }
}

TEST_CASE("on-policy reward-weighted and IS solutions are the return") {
    const ExactAnalysis ex = test::analysis(generate_fixture("onpolicy", {}, 4));
    const FdvfSolution rw = construct_reward_weighted_fdvf(ex);
    const FdvfSolution is = construct_is_fdvf(ex);
    for (int h = 0; h < ex.horizon(); ++h) {
        CHECK((rw.value.table(h) - ex.reward_to_go[h]).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((is.value.table(h) - ex.reward_to_go[h]).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("residual grows linearly with a parameter offset") {
    const ExactAnalysis ex = test::analysis(test::random_fixture(6));
    const FdvfSolution base = construct_pinv_fdvf(ex);
    auto shifted = [&](double eps) {
        LinearForm f = *base.value.linear_form();
        for (auto& t : f.theta) t.array() += eps;
        return verify_fdvf(ex, StepFunction::linear(ex, Domain::Futures, f));
    };
    const double r1 = shifted(1e-3), r2 = shifted(2e-3);
    CHECK(r1 > 1e-6);
    CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("zero function residual is the value sup norm") {
    const ExactAnalysis ex = test::analysis(test::random_fixture(9));
    double sup = 0.0;
    for (int h = 0; h < ex.horizon(); ++h) sup = std::max(sup, ex.value_e[h].cwiseAbs().maxCoeff());
    CHECK(verify_fdvf(ex, StepFunction::zero(ex, Domain::Futures)) == doctest::Approx(sup).epsilon(1e-12));
}

TEST_CASE("uniform prior reproduces the inverse-probability weighting") {
    const ExactAnalysis ex = test::analysis(test::random_fixture(12));
    std::vector<Eigen::VectorXd> prior;
    for (int h = 0; h < ex.horizon(); ++h) prior.push_back(Eigen::VectorXd::Constant(ex.model.state_count(), 0.25));
    const FdvfSolution p = construct_prior_weighted_fdvf(ex, prior);
    const FdvfSolution l = construct_l2_weighted_fdvf(ex);
    for (int h = 0; h < ex.horizon(); ++h) CHECK((p.value.table(h) - l.value.table(h)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("prior-weighted with the initial distribution as first prior") {
    const Fixture fx = test::random_fixture(14);
    const ExactAnalysis ex = test::analysis(fx);
    std::vector<Eigen::VectorXd> prior = ex.occupancy_b;
    prior.resize(ex.horizon());
    REQUIRE(prior[0].minCoeff() > 0.0);
    for (auto& p : prior) p = p.cwiseMax(1e-3);
    CHECK(verify_fdvf(ex, construct_prior_weighted_fdvf(ex, prior).value) <= 1e-8);
    prior[0](0) = 0.0;
    CHECK_THROWS_AS(construct_prior_weighted_fdvf(ex, prior), ConfigError);
}

TEST_CASE("minimum-norm properties") {
    const ExactAnalysis ex = test::analysis(test::random_fixture(17));
    const FdvfSolution p = construct_pinv_fdvf(ex);
    const FdvfSolution l = construct_l2_weighted_fdvf(ex);
    for (Construction c : {Construction::ImportanceSampling, Construction::RewardWeighted}) {
        const FdvfSolution o = construct_fdvf(ex, c);
        for (int h = 0; h < ex.horizon(); ++h) {
            CHECK(p.norms.l2[h] <= o.norms.l2[h] * (1 + 1e-9));
            CHECK(l.norms.z_weighted[h] <= o.norms.z_weighted[h] * (1 + 1e-9));
        }
    }
}

TEST_CASE("history weights") {
    const ExactAnalysis on = test::analysis(generate_fixture("onpolicy", {}, 1));
    const HistoryWeights w = construct_history_weights(on);
    CHECK(verify_weights(on, w.weights) <= 1e-8);
    for (int h = 0; h < on.horizon(); ++h)
        for (Eigen::Index t = 0; t < w.weights.table(h).size(); ++t)
            if (on.steps[h].reachable[t]) CHECK(w.weights.table(h)(t) == doctest::Approx(1.0).epsilon(1e-8));

    const ExactAnalysis ex = test::analysis(test::random_fixture(2));
    CHECK(verify_weights(ex, construct_history_weights(ex).weights) <= 1e-8);
}

TEST_CASE("construction names") {
    for (Construction c : {Construction::ImportanceSampling, Construction::PseudoInverse, Construction::L2Weighted,
                           Construction::RewardWeighted, Construction::PriorWeighted})
        CHECK(parse_construction(to_string(c)) == c);
    CHECK_THROWS_AS(parse_construction("lstd"), ConfigError);
}
