#include "opelab/pomdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "opelab/errors.hpp"

namespace opelab {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ModelError(msg);
}

std::string slice_name(const std::string& table, std::initializer_list<int> idx) {
    std::ostringstream os;
    os << table;
    for (int i : idx) os << '[' << i << ']';
    return os.str();
}

bool is_distribution(const double* p, int n, double& sum) {
    sum = 0.0;
    bool nonneg = true;
    for (int i = 0; i < n; ++i) {
        if (!(p[i] >= 0.0)) nonneg = false;
        sum += p[i];
    }
    return nonneg && std::abs(sum - 1.0) <= kDistributionTol;
}

}  // namespace

TabularPOMDP::TabularPOMDP(int horizon, int states, int observations, int actions, Vec d1,
                           const Table4& transition, const Table3& emission, const Table3& reward)
    : horizon_(horizon), states_(states), observations_(observations), actions_(actions), d1_(std::move(d1)) {
    require(horizon >= 1, "horizon must be positive");
    require(states >= 1 && observations >= 1 && actions >= 1, "S, O, A must be positive");
    require(static_cast<int>(d1_.size()) == states, "d1 has " + std::to_string(d1_.size()) + " entries, expected S");
    require(static_cast<int>(transition.size()) == horizon - 1,
            "transition has " + std::to_string(transition.size()) + " step slices, expected H-1");
    require(static_cast<int>(emission.size()) == horizon,
            "emission has " + std::to_string(emission.size()) + " step slices, expected H");
    require(static_cast<int>(reward.size()) == horizon,
            "reward has " + std::to_string(reward.size()) + " step slices, expected H");

    transition_.reserve(static_cast<std::size_t>(std::max(horizon - 1, 0)) * states * actions * states);
    for (int h = 0; h + 1 < horizon; ++h) {
        require(static_cast<int>(transition[h].size()) == states, slice_name("transition", {h}) + " has wrong size");
        for (int s = 0; s < states; ++s) {
            require(static_cast<int>(transition[h][s].size()) == actions,
                    slice_name("transition", {h, s}) + " has wrong size");
            for (int a = 0; a < actions; ++a) {
                require(static_cast<int>(transition[h][s][a].size()) == states,
                        slice_name("transition", {h, s, a}) + " has wrong size");
                transition_.insert(transition_.end(), transition[h][s][a].begin(), transition[h][s][a].end());
            }
        }
    }
    emission_.reserve(static_cast<std::size_t>(horizon) * states * observations);
    for (int h = 0; h < horizon; ++h) {
        require(static_cast<int>(emission[h].size()) == states, slice_name("emission", {h}) + " has wrong size");
        for (int s = 0; s < states; ++s) {
            require(static_cast<int>(emission[h][s].size()) == observations,
                    slice_name("emission", {h, s}) + " has wrong size");
            emission_.insert(emission_.end(), emission[h][s].begin(), emission[h][s].end());
        }
    }
    reward_.reserve(static_cast<std::size_t>(horizon) * observations * actions);
    for (int h = 0; h < horizon; ++h) {
        require(static_cast<int>(reward[h].size()) == observations, slice_name("reward", {h}) + " has wrong size");
        for (int o = 0; o < observations; ++o) {
            require(static_cast<int>(reward[h][o].size()) == actions,
                    slice_name("reward", {h, o}) + " has wrong size");
            reward_.insert(reward_.end(), reward[h][o].begin(), reward[h][o].end());
        }
    }
}

Table4 TabularPOMDP::transition_table() const {
    Table4 t(std::max(horizon_ - 1, 0), Table3(states_, Table2(actions_, Vec(states_))));
    for (int h = 0; h + 1 < horizon_; ++h)
        for (int s = 0; s < states_; ++s)
            for (int a = 0; a < actions_; ++a)
                for (int n = 0; n < states_; ++n) t[h][s][a][n] = transition(h, s, a, n);
    return t;
}

Table3 TabularPOMDP::emission_table() const {
    Table3 t(horizon_, Table2(states_, Vec(observations_)));
    for (int h = 0; h < horizon_; ++h)
        for (int s = 0; s < states_; ++s)
            for (int o = 0; o < observations_; ++o) t[h][s][o] = emission(h, s, o);
    return t;
}

Table3 TabularPOMDP::reward_table() const {
    Table3 t(horizon_, Table2(observations_, Vec(actions_)));
    for (int h = 0; h < horizon_; ++h)
        for (int o = 0; o < observations_; ++o)
            for (int a = 0; a < actions_; ++a) t[h][o][a] = reward(h, o, a);
    return t;
}

TabularPOMDP TabularPOMDP::with_reward_offset(double offset) const {
    Table3 r = reward_table();
    for (auto& step : r)
        for (auto& row : step)
            for (auto& x : row) x += offset;
    return TabularPOMDP(horizon_, states_, observations_, actions_, d1_, transition_table(), emission_table(), r);
}

MemorylessPolicy::MemorylessPolicy(int observations, int actions, const Table3& table)
    : horizon_(static_cast<int>(table.size())), observations_(observations), actions_(actions) {
    require(horizon_ >= 1, "policy has no step slices");
    table_.reserve(static_cast<std::size_t>(horizon_) * observations * actions);
    for (int h = 0; h < horizon_; ++h) {
        require(static_cast<int>(table[h].size()) == observations, slice_name("pi", {h}) + " has wrong size");
        for (int o = 0; o < observations; ++o) {
            require(static_cast<int>(table[h][o].size()) == actions, slice_name("pi", {h, o}) + " has wrong size");
            table_.insert(table_.end(), table[h][o].begin(), table[h][o].end());
        }
    }
}

Table3 MemorylessPolicy::table() const {
    Table3 t(horizon_, Table2(observations_, Vec(actions_)));
    for (int h = 0; h < horizon_; ++h)
        for (int o = 0; o < observations_; ++o)
            for (int a = 0; a < actions_; ++a) t[h][o][a] = prob(h, o, a);
    return t;
}

MemorylessPolicy MemorylessPolicy::uniform(int horizon, int observations, int actions) {
    return MemorylessPolicy(observations, actions,
                            Table3(horizon, Table2(observations, Vec(actions, 1.0 / actions))));
}

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckEntry& c) { return c.passed; });
}

void ValidationReport::add(std::string name, int step, bool passed, std::string detail) {
    checks.push_back({std::move(name), step, passed, std::move(detail)});
}

ValidationReport validate_model(const TabularPOMDP& model) {
    ValidationReport report;
    const int H = model.horizon(), S = model.state_count(), O = model.obs_count(), A = model.action_count();
    double sum = 0.0;

    {
        const bool ok = is_distribution(model.initial_distribution().data(), S, sum);
        report.add("d1_normalized", -1, ok, ok ? "" : "d1 sums to " + std::to_string(sum));
    }
    for (int h = 0; h + 1 < H; ++h) {
        std::string bad;
        Vec row(S);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                for (int n = 0; n < S; ++n) row[n] = model.transition(h, s, a, n);
                if (!is_distribution(row.data(), S, sum))
                    bad += slice_name("transition", {h, s, a}) + " sums to " + std::to_string(sum) + "; ";
            }
        report.add("transition_normalized", h, bad.empty(), bad);
    }
    for (int h = 0; h < H; ++h) {
        std::string bad;
        Vec row(O);
        for (int s = 0; s < S; ++s) {
            for (int o = 0; o < O; ++o) row[o] = model.emission(h, s, o);
            if (!is_distribution(row.data(), O, sum))
                bad += slice_name("emission", {h, s}) + " sums to " + std::to_string(sum) + "; ";
        }
        report.add("emission_normalized", h, bad.empty(), bad);
    }
    double min_reward = std::numeric_limits<double>::infinity();
    for (int h = 0; h < H; ++h) {
        std::string bad;
        for (int o = 0; o < O; ++o)
            for (int a = 0; a < A; ++a) {
                const double r = model.reward(h, o, a);
                min_reward = std::min(min_reward, r);
                if (!(r > 0.0 && r <= 1.0))
                    bad += slice_name("reward", {h, o, a}) + " = " + std::to_string(r) + "; ";
            }
        report.add("reward_positive", h, bad.empty(),
                   bad.empty() ? "" : bad + "rewards must lie in (0,1] (strict positivity avoids 0/0 ratios)");
    }
    report.min_reward = min_reward;
    return report;
}

void validate_policy(const MemorylessPolicy& policy, const TabularPOMDP& model, ValidationReport& report,
                     const std::string& label) {
    if (policy.horizon() != model.horizon() || policy.obs_count() != model.obs_count() ||
        policy.action_count() != model.action_count())
        throw ModelError(label + " shape does not match the model");
    const int A = policy.action_count();
    Vec row(A);
    double sum = 0.0;
    for (int h = 0; h < policy.horizon(); ++h) {
        std::string bad;
        for (int o = 0; o < policy.obs_count(); ++o) {
            for (int a = 0; a < A; ++a) row[a] = policy.prob(h, o, a);
            if (!is_distribution(row.data(), A, sum))
                bad += slice_name(label, {h, o}) + " sums to " + std::to_string(sum) + "; ";
        }
        report.add(label + "_normalized", h, bad.empty(), bad);
    }
}

double action_ratio(const MemorylessPolicy& pi_e, const MemorylessPolicy& pi_b, int h, int o, int a) {
    const double e = pi_e.prob(h, o, a);
    const double b = pi_b.prob(h, o, a);
    if (b > 0.0) return e / b;
    if (e > 0.0)
        throw ActionCoverageError("pi_e plays action " + std::to_string(a) + " at step " + std::to_string(h) +
                                  ", obs " + std::to_string(o) + " where pi_b has zero probability");
    return 0.0;
}

double c_mu(const MemorylessPolicy& pi_e, const MemorylessPolicy& pi_b) {
    double best = 0.0;
    for (int h = 0; h < pi_e.horizon(); ++h)
        for (int o = 0; o < pi_e.obs_count(); ++o)
            for (int a = 0; a < pi_e.action_count(); ++a) best = std::max(best, action_ratio(pi_e, pi_b, h, o, a));
    return best;
}

}  // namespace opelab
