#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "opelab/encoding.hpp"

namespace opelab {

/// Tolerance for stored probability vectors.
inline constexpr double kDistributionTol = 1e-12;
/// Tolerance for quantities derived from the model.
inline constexpr double kDerivedTol = 1e-8;

using Vec = std::vector<double>;
using Table2 = std::vector<Vec>;
using Table3 = std::vector<Table2>;
using Table4 = std::vector<Table3>;

/**
 * Finite-horizon tabular POMDP with step-indexed tables.
 *
 * Steps are 0-based in the API (h = 0 .. H-1). Every step shares the same
 * state/observation/action cardinalities. Tables are supplied nested:
 *   transition[h][s][a][s'] for h = 0 .. H-2,
 *   emission[h][s][o],
 *   reward[h][o][a].
 * The constructor only checks shapes; normalization and reward positivity
 * are reported by validate_model().
 */
class TabularPOMDP {
public:
    TabularPOMDP(int horizon, int states, int observations, int actions, Vec d1,
                 const Table4& transition, const Table3& emission, const Table3& reward);

    int horizon() const { return horizon_; }
    int state_count() const { return states_; }
    int obs_count() const { return observations_; }
    int action_count() const { return actions_; }
    SequenceSpace space() const { return {horizon_, observations_, actions_}; }

    double initial(int s) const { return d1_[s]; }
    const Vec& initial_distribution() const { return d1_; }
    double transition(int h, int s, int a, int next) const {
        return transition_[((static_cast<std::size_t>(h) * states_ + s) * actions_ + a) * states_ + next];
    }
    double emission(int h, int s, int o) const {
        return emission_[(static_cast<std::size_t>(h) * states_ + s) * observations_ + o];
    }
    double reward(int h, int o, int a) const {
        return reward_[(static_cast<std::size_t>(h) * observations_ + o) * actions_ + a];
    }

    Table4 transition_table() const;
    Table3 emission_table() const;
    Table3 reward_table() const;

    /// Same dynamics, rewards shifted by `offset` everywhere.
    TabularPOMDP with_reward_offset(double offset) const;

private:
    int horizon_;
    int states_;
    int observations_;
    int actions_;
    Vec d1_;
    Vec transition_;
    Vec emission_;
    Vec reward_;
};

/// Observation-conditioned action distributions, one table per step: pi[h][o][a].
class MemorylessPolicy {
public:
    MemorylessPolicy(int observations, int actions, const Table3& table);

    int horizon() const { return horizon_; }
    int obs_count() const { return observations_; }
    int action_count() const { return actions_; }
    double prob(int h, int o, int a) const {
        return table_[(static_cast<std::size_t>(h) * observations_ + o) * actions_ + a];
    }
    Table3 table() const;

    /// Uniform over actions at every (h, o).
    static MemorylessPolicy uniform(int horizon, int observations, int actions);
    /// Deterministic: action chooser(h, o) with probability one.
    template <class F>
    static MemorylessPolicy deterministic(int horizon, int observations, int actions, F chooser) {
        Table3 t(horizon, Table2(observations, Vec(actions, 0.0)));
        for (int h = 0; h < horizon; ++h)
            for (int o = 0; o < observations; ++o) t[h][o][chooser(h, o)] = 1.0;
        return MemorylessPolicy(observations, actions, t);
    }

    friend bool operator==(const MemorylessPolicy&, const MemorylessPolicy&) = default;

private:
    int horizon_;
    int observations_;
    int actions_;
    Vec table_;
};

/// One structural check outcome. `step` is -1 for model-wide checks.
struct CheckEntry {
    std::string name;
    int step = -1;
    bool passed = true;
    std::string detail;
};

/// Per-step numerical facts about the standing invertibility/positivity assumptions.
struct StepDiagnostics {
    int step = 0;
    int rank_belief = 0;
    int rank_outcome = 0;
    double min_future_prob = 0.0;
    double cond_outcome_gram = 0.0;       // M_F M_F^T
    double cond_outcome_cov = 0.0;        // Sigma_F
    double cond_reward_outcome_cov = 0.0; // Sigma^R_F
    double cond_belief_cov = 0.0;         // Sigma_H
};

struct ValidationReport {
    std::vector<CheckEntry> checks;
    double min_reward = 0.0;
    std::vector<StepDiagnostics> steps;  // filled by assess_assumptions()

    bool all_passed() const;
    void add(std::string name, int step, bool passed, std::string detail = {});
};

/// Normalization of d1/transition/emission rows and strict reward positivity.
ValidationReport validate_model(const TabularPOMDP& model);
/// Same checks for a policy; throws ModelError on a horizon/shape mismatch with `model`.
void validate_policy(const MemorylessPolicy& policy, const TabularPOMDP& model, ValidationReport& report,
                     const std::string& label);

/// pi_e(a|o) / pi_b(a|o). Zero when both vanish.
double action_ratio(const MemorylessPolicy& pi_e, const MemorylessPolicy& pi_b, int h, int o, int a);
/// Largest action ratio over all (h, o, a) with pi_b > 0. Always >= 1.
double c_mu(const MemorylessPolicy& pi_e, const MemorylessPolicy& pi_b);

}  // namespace opelab
