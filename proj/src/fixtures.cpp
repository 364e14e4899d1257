#include "opelab/fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "opelab/errors.hpp"
#include "opelab/exact.hpp"
#include "opelab/fdvf.hpp"
#include "opelab/linalg.hpp"
#include "opelab/rng.hpp"
#include "opelab/step_function.hpp"

namespace opelab {

namespace {

// Covariances used by the constructions must stay well inside the solve guard.
constexpr double kFixtureCondition = 1e10;

struct Tables {
    Vec d1;
    Table4 transition;
    Table3 emission;
    Table3 reward;
};

Tables blank(const FixtureParams& p) {
    const int H = p.horizon, S = p.states, O = p.observations, A = p.actions;
    return {Vec(S, 0.0), Table4(H - 1, Table3(S, Table2(A, Vec(S, 0.0)))), Table3(H, Table2(S, Vec(O, 0.0))),
            Table3(H, Table2(O, Vec(A, 0.0)))};
}

TabularPOMDP build(const FixtureParams& p, const Tables& t) {
    return TabularPOMDP(p.horizon, p.states, p.observations, p.actions, t.d1, t.transition, t.emission, t.reward);
}

void random_rewards(Rng& rng, const FixtureParams& p, Tables& t) {
    for (auto& step : t.reward)
        for (auto& row : step)
            for (double& r : row) r = p.r_min + (1.0 - p.r_min) * rng.uniform();
}

void random_transitions(Rng& rng, Tables& t) {
    for (auto& step : t.transition)
        for (auto& row : step)
            for (auto& dist : row) dist = rng.dirichlet(static_cast<int>(dist.size()));
}

/// Dirichlet mixed half-and-half with uniform, so every action keeps mass >= 1/(2A).
MemorylessPolicy random_behavior(Rng& rng, int H, int O, int A) {
    Table3 t(H, Table2(O));
    for (auto& step : t)
        for (auto& row : step) {
            row = rng.dirichlet(A);
            for (double& x : row) x = 0.5 * x + 0.5 / A;
        }
    return MemorylessPolicy(O, A, t);
}

MemorylessPolicy random_policy(Rng& rng, int H, int O, int A) {
    Table3 t(H, Table2(O));
    for (auto& step : t)
        for (auto& row : step) row = rng.dirichlet(A);
    return MemorylessPolicy(O, A, t);
}

/// Structural validity, rank and positivity conditions, and conditioning of
/// every matrix the constructions invert.
/// `allow_impossible_futures` waives Pr_b(f_h) > 0, which deterministic dynamics cannot meet.
bool standing_assumptions_hold(const Fixture& fx, bool allow_impossible_futures = false) {
    ValidationReport report = validate_model(fx.model);
    validate_policy(fx.pi_e, fx.model, report, "pi_e");
    validate_policy(fx.pi_b, fx.model, report, "pi_b");
    if (!report.all_passed()) return false;
    const ExactAnalysis ex = analyze(fx.model, fx.pi_e, fx.pi_b);
    assess_assumptions(ex, report);
    for (const CheckEntry& c : report.checks)
        if (!c.passed && !(allow_impossible_futures && c.name == "future_prob_positive")) return false;
    for (const StepDiagnostics& d : report.steps)
        if (!(d.cond_outcome_gram < kFixtureCondition && d.cond_outcome_cov < kFixtureCondition &&
              d.cond_reward_outcome_cov < kFixtureCondition))
            return false;
    return true;
}

Fixture make_random(const FixtureParams& p, std::uint64_t seed, bool on_policy) {
    const int H = p.horizon, S = p.states, O = p.observations, A = p.actions;
    // At the last step u_s(o, a) = O(o|s) pi_b(a|o), so rank(M_F) <= O.
    if (O < S) throw ConfigError("random fixtures need O >= S for full-rank outcome matrices");
    for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
        Rng rng(seed, static_cast<std::uint64_t>(attempt));
        Tables t = blank(p);
        t.d1 = rng.dirichlet(S);
        random_transitions(rng, t);
        for (auto& step : t.emission)
            for (auto& row : step) row = rng.dirichlet(O);
        random_rewards(rng, p, t);
        MemorylessPolicy pi_b = random_behavior(rng, H, O, A);
        MemorylessPolicy pi_e = on_policy ? pi_b : random_policy(rng, H, O, A);
        Fixture fx{on_policy ? "onpolicy" : "random", build(p, t), pi_e, pi_b,
                   on_policy ? std::vector<std::string>{"onpolicy"} : std::vector<std::string>{}};
        if (standing_assumptions_hold(fx)) return fx;
    }
    throw ModelError("no fixture passed the rank and positivity checks within " + std::to_string(p.max_attempts) +
                     " attempts");
}

Fixture make_bandit() {
    FixtureParams p;
    p.states = 1, p.observations = 1, p.actions = 2, p.horizon = 1;
    Tables t = blank(p);
    t.d1 = {1.0};
    t.emission[0][0] = {1.0};
    t.reward[0][0] = {0.2, 0.8};
    return {"bandit", build(p, t), MemorylessPolicy::deterministic(1, 1, 2, [](int, int) { return 1; }),
            MemorylessPolicy::uniform(1, 1, 2), {"bandit"}};
}

/// Identity emissions and deterministic transitions, so every history reveals s_h.
Fixture make_mdp(FixtureParams p, std::uint64_t seed) {
    p.observations = p.states;
    for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
        Rng rng(seed, static_cast<std::uint64_t>(attempt));
        Tables t = blank(p);
        t.d1[rng.below(p.states)] = 1.0;  // the empty history must reveal s_1 too
        // Deterministic moves: o_{h-1} = s_{h-1} and a_{h-1} then pin down s_h.
        for (auto& step : t.transition)
            for (auto& row : step)
                for (auto& dist : row) dist[rng.below(p.states)] = 1.0;
        for (auto& step : t.emission)
            for (int s = 0; s < p.states; ++s) step[s][s] = 1.0;
        random_rewards(rng, p, t);
        MemorylessPolicy pi_b = random_behavior(rng, p.horizon, p.observations, p.actions);
        Fixture fx{"mdp", build(p, t), random_policy(rng, p.horizon, p.observations, p.actions), pi_b, {"one_hot_beliefs"}};
        if (standing_assumptions_hold(fx, true)) return fx;
    }
    throw ModelError("mdp fixture generation ran out of attempts");
}

/// Latent state fixed after the first draw; the last observation names it.
Fixture make_reveal(FixtureParams p, std::uint64_t seed) {
    p.observations = std::max(p.observations, p.states);
    for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
        Rng rng(seed, static_cast<std::uint64_t>(attempt));
        Tables t = blank(p);
        t.d1 = rng.dirichlet(p.states);
        for (auto& step : t.transition)
            for (int s = 0; s < p.states; ++s)
                for (auto& dist : step[s]) dist[s] = 1.0;
        for (int h = 0; h + 1 < p.horizon; ++h)
            for (auto& row : t.emission[h]) row = rng.dirichlet(p.observations);
        for (int s = 0; s < p.states; ++s) t.emission[p.horizon - 1][s][s] = 1.0;
        random_rewards(rng, p, t);
        MemorylessPolicy pi_b = random_behavior(rng, p.horizon, p.observations, p.actions);
        Fixture fx{"reveal", build(p, t), random_policy(rng, p.horizon, p.observations, p.actions), pi_b,
                   {"revealing_future"}};
        if (standing_assumptions_hold(fx)) return fx;
    }
    throw ModelError("reveal fixture generation ran out of attempts");
}

/// Every emission and behavior entry within a factor (1 +- delta) of uniform, with
/// (1 + delta)^(2H) = c_stoch so outcome probabilities stay below c_stoch / (OA)^(H-h).
Fixture make_uniform(const FixtureParams& p, std::uint64_t seed) {
    if (!(p.c_stoch > 1.0)) throw ConfigError("uniform fixture needs c_stoch > 1");
    const int H = p.horizon, O = p.observations, A = p.actions;
    const double delta = std::pow(p.c_stoch, 1.0 / (2.0 * H)) - 1.0;
    auto near_uniform = [&](Rng& rng, int k) {
        Vec v(k);
        double total = 0.0;
        for (double& x : v) total += (x = 1.0 + delta * (2.0 * rng.uniform() - 1.0));
        // Renormalizing can push an entry past 1 + delta only when total < 1; clamp by mixing with uniform.
        for (double& x : v) x /= total;
        for (double& x : v) x = std::min(x, (1.0 + delta) / k);
        total = 0.0;
        for (double x : v) total += x;
        for (double& x : v) x += (1.0 - total) / k;
        return v;
    };
    for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
        Rng rng(seed, static_cast<std::uint64_t>(attempt));
        Tables t = blank(p);
        t.d1 = rng.dirichlet(p.states);
        random_transitions(rng, t);
        for (auto& step : t.emission)
            for (auto& row : step) row = near_uniform(rng, O);
        random_rewards(rng, p, t);
        Table3 b(H, Table2(O));
        for (auto& step : b)
            for (auto& row : step) row = near_uniform(rng, A);
        Fixture fx{"uniform", build(p, t), random_policy(rng, H, O, A), MemorylessPolicy(O, A, b), {"near_uniform"}};
        if (!standing_assumptions_hold(fx)) continue;
        const ExactAnalysis ex = analyze(fx.model, fx.pi_e, fx.pi_b);
        bool bounded = true;
        for (int h = 0; h < H; ++h) {
            const double cap = p.c_stoch / static_cast<double>(ex.steps[h].outcome.cols());
            bounded = bounded && ex.steps[h].outcome.maxCoeff() <= cap;
        }
        if (bounded) return fx;
    }
    throw ModelError("uniform fixture generation ran out of attempts");
}

/// Two states, observed with 80% accuracy; acting a moves to state a with
/// probability 0.6. pi_e copies the observation, pi_b is uniform.
Fixture make_chain() {
    FixtureParams p;
    p.states = 2, p.observations = 2, p.actions = 2, p.horizon = 8;
    Tables t = blank(p);
    t.d1 = {0.8, 0.2};
    for (auto& step : t.transition)
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a) {
                step[s][a][a] += 0.6;
                step[s][a][s] += 0.4;
            }
    for (auto& step : t.emission)
        for (int s = 0; s < 2; ++s) step[s] = {s == 0 ? 0.8 : 0.2, s == 0 ? 0.2 : 0.8};
    for (auto& step : t.reward)
        for (int o = 0; o < 2; ++o)
            for (int a = 0; a < 2; ++a) step[o][a] = a == o ? 1.0 : 0.1;
    return {"chain", build(p, t), MemorylessPolicy::deterministic(8, 2, 2, [](int, int o) { return o; }),
            MemorylessPolicy::uniform(8, 2, 2), {"long_horizon"}};
}

void require_property(bool ok, const std::string& what) {
    if (!ok) throw ModelError("fixture property failed: " + what);
}

/// Checks the property each tag promises.
void verify_tags(const Fixture& fx) {
    const ExactAnalysis ex = analyze(fx.model, fx.pi_e, fx.pi_b);
    const int S = fx.model.state_count();
    for (const std::string& tag : fx.tags) {
        if (tag == "one_hot_beliefs") {
            for (const StepAlgebra& alg : ex.steps)
                for (Eigen::Index c = 0; c < alg.beliefs.cols(); ++c)
                    if (alg.reachable[c]) require_property(std::abs(alg.beliefs.col(c).maxCoeff() - 1.0) <= 1e-12, tag);
        } else if (tag == "revealing_future") {
            for (const StepAlgebra& alg : ex.steps)
                require_property((outcome_covariance(alg) - Eigen::MatrixXd::Identity(S, S)).cwiseAbs().maxCoeff() <= 1e-8,
                                 tag);
        } else if (tag == "onpolicy") {
            require_property(fx.pi_e == fx.pi_b, tag);
        } else if (tag == "long_horizon") {
            double weight = 1.0;
            for (int h = 0; h < fx.model.horizon(); ++h) {
                double step_max = 0.0;
                for (int o = 0; o < fx.model.obs_count(); ++o)
                    for (int a = 0; a < fx.model.action_count(); ++a)
                        step_max = std::max(step_max, action_ratio(fx.pi_e, fx.pi_b, h, o, a));
                weight *= step_max;
            }
            require_property(weight == 256.0, "long_horizon cumulative weight");
            const HistoryWeights w = construct_history_weights(ex);
            double c_inf = 0.0;
            for (const auto& theta : w.weights.linear_form()->theta) c_inf = std::max(c_inf, theta.cwiseAbs().maxCoeff());
            require_property(c_inf <= 5.0, "long_horizon belief coverage");
        }
    }
}

}  // namespace

const std::vector<std::string>& fixture_kinds() {
    static const std::vector<std::string> kinds{"random", "bandit", "mdp", "reveal", "uniform", "chain", "onpolicy"};
    return kinds;
}

FixtureParams random_dimensions(std::uint64_t seed) {
    Rng rng(seed, 0x64696d73ULL);
    FixtureParams p;
    do {
        p.states = 1 + rng.below(3);
        p.observations = 1 + rng.below(3);
        p.actions = 1 + rng.below(3);
    } while (p.observations < p.states);
    p.horizon = 1 + rng.below(4);
    return p;
}

Fixture generate_fixture(const std::string& kind, const FixtureParams& params, std::uint64_t seed) {
    Fixture fx = [&] {
        if (kind == "random") return make_random(params, seed, false);
        if (kind == "onpolicy") return make_random(params, seed, true);
        if (kind == "bandit") return make_bandit();
        if (kind == "mdp") return make_mdp(params, seed);
        if (kind == "reveal") return make_reveal(params, seed);
        if (kind == "uniform") return make_uniform(params, seed);
        if (kind == "chain") return make_chain();
        throw ConfigError("unknown fixture kind '" + kind + "'");
    }();
    verify_tags(fx);
    return fx;
}

std::vector<Fixture> default_fixture_set(std::uint64_t seed) {
    std::vector<Fixture> out;
    for (const std::string& kind : fixture_kinds()) out.push_back(generate_fixture(kind, FixtureParams{}, seed));
    return out;
}

}  // namespace opelab
