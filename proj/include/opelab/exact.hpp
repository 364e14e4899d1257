#pragma once

#include <vector>

#include <Eigen/Dense>

#include "opelab/encoding.hpp"
#include "opelab/pomdp.hpp"

namespace opelab {

class StepFunction;

struct EngineOptions {
    /// Per-step cap on (OA)^max(h, H-h) (0-based h).
    Id budget = Id{1} << 20;
    /// Cap on the (S*O*A)^H paths walked by brute_force_J.
    Id brute_force_budget = Id{1} << 24;
};

/// Per-step matrices for one (pi, pi_b) pair. Steps are 0-based.
struct StepAlgebra {
    int step = 0;
    /// S x |H_h|. Column tau is b(tau); zero for histories impossible under every policy.
    Eigen::MatrixXd beliefs;
    /// 1 where the observation sequence of tau has positive probability given its actions.
    std::vector<char> reachable;
    /// d^pi(tau_h) for the evaluation policy and for pi_b.
    Eigen::VectorXd history_marginal_e;
    Eigen::VectorXd history_marginal_b;
    /// S x |F_h|. Column f is u(f) with u_s(f) = Pr_{pi_b}(f | s_h = s).
    Eigen::MatrixXd outcome;
    /// Column sums of `outcome`.
    Eigen::VectorXd z;
    /// Pr_{pi_b}(f_h).
    Eigen::VectorXd future_marginal_b;
    /// M_H d^pi: mean belief under each policy.
    Eigen::VectorXd mean_belief_e;
    Eigen::VectorXd mean_belief_b;
};

/**
 * Everything the exact engine knows about a (model, pi_e, pi_b) triple.
 * Immutable once built; all downstream constructions read from it.
 */
struct ExactAnalysis {
    TabularPOMDP model;
    MemorylessPolicy pi_e;
    MemorylessPolicy pi_b;
    std::vector<StepAlgebra> steps;
    /// V_S^{pi}[h], h = 0..H (entry H is the zero vector).
    std::vector<Eigen::VectorXd> value_e;
    std::vector<Eigen::VectorXd> value_b;
    /// d^pi(s_h).
    std::vector<Eigen::VectorXd> occupancy_e;
    std::vector<Eigen::VectorXd> occupancy_b;
    /// E_{a_h ~ pi_e}[r_h | s_h].
    std::vector<Eigen::VectorXd> one_step_reward_e;
    /// R^+(f_h) over F_h.
    std::vector<Eigen::VectorXd> reward_to_go;
    /// Pr_{pi_b} of each full trajectory, indexed by its step-0 future id.
    Eigen::VectorXd trajectory_prob_b;

    int horizon() const { return model.horizon(); }
    SequenceSpace space() const { return model.space(); }
    /// Outcome matrix at step h; step H returns the S x 1 all-ones matrix.
    Eigen::MatrixXd outcome_at(int h) const;
};

/// Backward recursion for V_S^pi; entry H is zero.
std::vector<Eigen::VectorXd> latent_value(const TabularPOMDP& model, const MemorylessPolicy& pi);
/// Forward recursion for d^pi(s_h).
std::vector<Eigen::VectorXd> latent_occupancy(const TabularPOMDP& model, const MemorylessPolicy& pi);
/// J(pi) = <d1, V_S^pi at step 0>.
double policy_value(const TabularPOMDP& model, const MemorylessPolicy& pi);
/// Sum over every (s, o, a) path of probability times return. Shares no code with latent_value.
double brute_force_J(const TabularPOMDP& model, const MemorylessPolicy& pi, const EngineOptions& options = {});

/// R^+(f_h): sum of rewards along the future.
double reward_to_go(const TabularPOMDP& model, FutureIndex f);

/// Throws BudgetError when any step's index space exceeds the budget.
void check_budget(const SequenceSpace& space, const EngineOptions& options);

ExactAnalysis analyze(const TabularPOMDP& model, const MemorylessPolicy& pi_e, const MemorylessPolicy& pi_b,
                      const EngineOptions& options = {});
StepAlgebra build_step_algebra(const TabularPOMDP& model, const MemorylessPolicy& pi, const MemorylessPolicy& pi_b,
                               int h, const EngineOptions& options = {});

/// Both evaluation routes of the state residual.
struct StateResidualForms {
    std::vector<Eigen::VectorXd> one_step;  // pi_e one-step expectation form
    std::vector<Eigen::VectorXd> weighted;  // importance-weighted form under pi_b
};
StateResidualForms bellman_residual_S_forms(const ExactAnalysis& ex, const StepFunction& v);
/// (B^S V)(s_h) per step; the pi_e one-step form.
std::vector<Eigen::VectorXd> bellman_residual_S(const ExactAnalysis& ex, const StepFunction& v);
/// (B^H V)(tau_h) = <b(tau_h), B^S_h V>; zero at unreachable histories.
std::vector<Eigen::VectorXd> bellman_residual_H(const ExactAnalysis& ex, const StepFunction& v);
/// (B^H V)(tau_h) from joint trajectory probabilities, without beliefs. Zero where Pr_{pi_b}(tau_h) = 0.
std::vector<Eigen::VectorXd> bellman_residual_H_direct(const ExactAnalysis& ex, const StepFunction& v);
/// g_h(f) = mu(o_h, a_h)(r_h + V(f_{h+1})) - V(f_h) over F_h.
Eigen::VectorXd future_residual(const ExactAnalysis& ex, const StepFunction& v, int h);

struct ErrorIdentity {
    double lhs = 0.0;  // J(pi_e) - E_{pi_b}[V(f_1)]
    double rhs = 0.0;  // sum_h E_{pi_e}[(B^S V)(s_h)]
};
ErrorIdentity evaluation_error_identity(const ExactAnalysis& ex, const StepFunction& v);

/// M_F M_F^T.
Eigen::MatrixXd outcome_gram(const StepAlgebra& alg);
/// Sigma_F = M_F Z^-1 M_F^T (futures with Z = 0 dropped).
Eigen::MatrixXd outcome_covariance(const StepAlgebra& alg);
/// Sigma^R_F = M_F (Z^R)^-1 M_F^T with Z^R(f) = Z(f) / R^+(f).
Eigen::MatrixXd reward_outcome_covariance(const ExactAnalysis& ex, int h);
/// Sigma_H = sum_tau d^{pi_b}(tau) b(tau) b(tau)^T.
Eigen::MatrixXd belief_covariance(const StepAlgebra& alg);

/// Ranks, minimum future probability and condition numbers per step.
void assess_assumptions(const ExactAnalysis& ex, ValidationReport& report);

}  // namespace opelab
