#include <doctest.h>

#include <cmath>

#include "opelab/errors.hpp"
#include "opelab/estimators.hpp"
#include "opelab/fdvf.hpp"
#include "opelab/simulator.hpp"
#include "support.hpp"

using namespace opelab;

namespace {

SampleSet data(const Fixture& fx, std::size_t n, std::uint64_t seed) {
    const TrajectoryDataset d = sample_dataset(fx.model, fx.pi_b, n, seed);
    return samples_from_view(ObservedView(d), fx.model.space(), fx.pi_e);
}

StepFunction constant(const ExactAnalysis& ex, double k) {
    std::vector<Eigen::VectorXd> t;
    for (const StepAlgebra& alg : ex.steps) t.push_back(Eigen::VectorXd::Constant(alg.outcome.cols(), k));
    return StepFunction::dense(Domain::Futures, t);
}

}  // namespace

TEST_CASE("plug-in of a constant") {
    const Fixture fx = test::random_fixture(1);
    const ExactAnalysis ex = test::analysis(fx);
    CHECK(plug_in_estimate(data(fx, 100, 1), constant(ex, 2.5)) == doctest::Approx(2.5));
}

TEST_CASE("on-policy importance sampling is the mean return") {
    const Fixture fx = generate_fixture("onpolicy", {}, 2);
    const SampleSet s = data(fx, 500, 4);
    double mean = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (int h = 0; h < s.horizon; ++h) mean += s.rew[i * s.horizon + h] / s.size();
    CHECK(is_estimate(s, IsMode::FullTrajectory) == doctest::Approx(mean).epsilon(1e-12));
    CHECK(is_estimate(s, IsMode::PerDecision) == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("bandit importance weights") {
    const ExactAnalysis ex = test::analysis(test::bandit());
    const SampleSet pop = population_samples(ex);
    REQUIRE(pop.size() == 2);
    for (double m : pop.mu) CHECK((m == 0.0 || m == 2.0));
    CHECK(is_estimate(pop, IsMode::FullTrajectory) == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("population estimators are exact") {
    for (const char* kind : {"bandit", "random", "reveal", "chain"}) {
        const Fixture fx = generate_fixture(kind, kind == std::string("random") ? random_dimensions(3) : FixtureParams{}, 3);
        const ExactAnalysis ex = test::analysis(fx);
        const FunctionClasses cls = build_classes(ex, {4, 1.0, 7});
        const SampleSet pop = population_samples(ex);
        const double j = policy_value(fx.model, fx.pi_e);
        const EstimateReport a = minimax_fdvf_estimate(pop, cls.v, cls.xi);
        const EstimateReport b = mis_estimate(pop, cls.v, cls.w);
        CHECK(a.estimate == doctest::Approx(j).epsilon(1e-8));
        CHECK(b.estimate == doctest::Approx(j).epsilon(1e-8));
        CHECK(a.v_index == 0);
        CHECK(b.v_index == 0);
        CHECK(std::abs(a.objective[0]) <= 1e-10);
        CHECK(std::abs(b.objective[0]) <= 1e-10);
    }
}

TEST_CASE("classes") {
    const ExactAnalysis ex = test::analysis(test::random_fixture(5));
    const FunctionClasses cls = build_classes(ex, {3, 0.5, 1});
    CHECK(cls.v.members.size() == 4);
    CHECK(cls.xi.members.size() == 4);
    CHECK(cls.w.members.size() == 4);
    CHECK(verify_fdvf(ex, cls.v.members[0]) <= 1e-8);
    CHECK(verify_weights(ex, cls.w.members[0]) <= 1e-8);
    const auto bh = bellman_residual_H(ex, cls.v.members[2]);
    for (int h = 0; h < ex.horizon(); ++h)
        CHECK((cls.xi.members[2].table(h) - bh[h]).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK_THROWS_AS(build_classes(ex, {-1, 1.0, 0}), ConfigError);

    const FunctionClasses single = build_classes(ex, {0, 1.0, 0});
    CHECK(single.v.members.size() == 1);
}

TEST_CASE("singleton classes reduce to plug-in on the exact solution") {
    const Fixture fx = test::random_fixture(6);
    const ExactAnalysis ex = test::analysis(fx);
    const FunctionClasses cls = build_classes(ex, {0, 1.0, 0});
    const SampleSet s = data(fx, 300, 2);
    const double plug = plug_in_estimate(s, cls.v.members[0]);
    CHECK(minimax_fdvf_estimate(s, cls.v, cls.xi).estimate == doctest::Approx(plug).epsilon(1e-14));
    CHECK(mis_estimate(s, cls.v, cls.w).estimate == doctest::Approx(plug).epsilon(1e-14));
}

TEST_CASE("zero helper or weight functions contribute nothing") {
    const Fixture fx = test::random_fixture(7);
    const ExactAnalysis ex = test::analysis(fx);
    const FunctionClasses cls = build_classes(ex, {3, 1.0, 0});
    const SampleSet s = data(fx, 200, 1);
    const FunctionClass zero_xi{Domain::Histories, {StepFunction::zero(ex, Domain::Histories)}};
    const EstimateReport a = minimax_fdvf_estimate(s, cls.v, zero_xi);
    for (double o : a.objective) CHECK(o == 0.0);
    CHECK(a.v_index == 0);
    const EstimateReport b = mis_estimate(s, cls.v, zero_xi);
    for (double o : b.objective) CHECK(o == 0.0);
}

TEST_CASE("median of means") {
    const Fixture fx = test::random_fixture(8);
    const ExactAnalysis ex = test::analysis(fx);
    const FunctionClasses cls = build_classes(ex, {2, 1.0, 0});
    const SampleSet s = data(fx, 40, 3);
    CHECK_THROWS_AS(mis_estimate(s, cls.v, cls.w, MomOptions{41, 0.05}), ConfigError);
    const EstimateReport one = mis_estimate(s, cls.v, cls.w, MomOptions{1, 0.05});
    const EstimateReport plain = mis_estimate(s, cls.v, cls.w);
    CHECK(one.method == "mis-mom");
    CHECK(one.estimate == doctest::Approx(plain.estimate).epsilon(1e-12));
    CHECK(default_mom_blocks(1000, 0.05) == 30);
    CHECK(default_mom_blocks(10, 0.05) == 10);
    CHECK_THROWS_AS(mis_estimate(population_samples(ex), cls.v, cls.w, MomOptions{2, 0.05}), ConfigError);
}

TEST_CASE("realizability surrogates") {
    const ExactAnalysis ex = test::analysis(test::random_fixture(9));
    const FunctionClasses cls = build_classes(ex, {4, 1.0, 2});
    const RealizabilitySurrogates full = realizability_surrogates(ex, cls.v, cls.w);
    CHECK(full.eps_v <= 1e-8);
    CHECK(full.eps_w <= 1e-8);
    double prev_v = 0.0, prev_w = 0.0;
    for (double eps : {0.1, 0.5, 1.0}) {
        FunctionClasses c = build_classes(ex, {4, eps, 2});
        c.v.members.erase(c.v.members.begin());
        c.w.members.erase(c.w.members.begin());
        const RealizabilitySurrogates r = realizability_surrogates(ex, c.v, c.w);
        CHECK(r.eps_v > prev_v);
        CHECK(r.eps_w > prev_w);
        prev_v = r.eps_v;
        prev_w = r.eps_w;
    }
}

TEST_CASE("plug-in of the return converges to the behavior value on-policy") {
    const Fixture fx = generate_fixture("onpolicy", {}, 5);
    const ExactAnalysis ex = test::analysis(fx);
    const StepFunction ret = StepFunction::dense(Domain::Futures, ex.reward_to_go);
    const SampleSet s = data(fx, 100000, 11);
    double m = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double r = ret(0, s.future[i * s.horizon]);
        m += r / s.size();
        m2 += r * r / s.size();
    }
    const double se = std::sqrt((m2 - m * m) / s.size());
    CHECK(plug_in_estimate(s, ret) == doctest::Approx(m).epsilon(1e-12));
    CHECK(std::abs(m - policy_value(fx.model, fx.pi_b)) <= 3.0 * se);
}

TEST_CASE("data errors") {
    const Fixture fx = test::random_fixture(1);
    TrajectoryDataset d = sample_dataset(fx.model, fx.pi_b, 5, 1);
    d.trajectories[2].bprobs[0] = 0.0;
    CHECK_THROWS_AS(samples_from_view(ObservedView(d), fx.model.space(), fx.pi_e), ActionCoverageError);
    d.trajectories[2].bprobs[0] = 0.5;
    d.trajectories[1].obs[0] = 99;
    CHECK_THROWS_AS(samples_from_view(ObservedView(d), fx.model.space(), fx.pi_e), EncodingError);
    TrajectoryDataset empty = d;
    empty.trajectories.clear();
    CHECK_THROWS_AS(samples_from_view(ObservedView(empty), fx.model.space(), fx.pi_e), ConfigError);
}
