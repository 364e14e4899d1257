#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "opelab/step_function.hpp"

namespace opelab {

struct ExactAnalysis;

enum class Construction { ImportanceSampling, PseudoInverse, L2Weighted, RewardWeighted, PriorWeighted };

std::string to_string(Construction c);
/// Accepts is | pinv | l2_weighted | reward_weighted | prior_weighted.
Construction parse_construction(const std::string& name);

/// Per-step norms of a function of futures.
struct FutureNorms {
    std::vector<double> sup;         // max_f |V(f)|
    std::vector<double> z_weighted;  // sqrt(sum_f Z(f) V(f)^2)
    std::vector<double> l2;          // plain 2-norm
};

struct FdvfSolution {
    Construction construction;
    StepFunction value;
    FutureNorms norms;
};

struct HistoryWeights {
    StepFunction weights;  // belief-linear
    std::vector<double> sup;
    std::vector<double> l2_behavior;  // sqrt(sum_tau d^b(tau) w(tau)^2)
};

FutureNorms future_norms(const ExactAnalysis& ex, const StepFunction& v);

/// V(f_h) = R^+(f_h) * prod mu over the future. Dense only.
FdvfSolution construct_is_fdvf(const ExactAnalysis& ex);
/// Minimum 2-norm solution M^T (M M^T)^-1 V_S.
FdvfSolution construct_pinv_fdvf(const ExactAnalysis& ex);
/// Minimum Z-weighted norm solution Z^-1 M^T Sigma_F^-1 V_S.
FdvfSolution construct_l2_weighted_fdvf(const ExactAnalysis& ex);
/// Z^R in place of Z, with Z^R(f) = Z(f) / R^+(f).
FdvfSolution construct_reward_weighted_fdvf(const ExactAnalysis& ex);
/// Minimum Z^p-weighted solution of diag(p) M V = diag(p) V_S, Z^p = p^T M. Priors must be positive.
FdvfSolution construct_prior_weighted_fdvf(const ExactAnalysis& ex, const std::vector<Eigen::VectorXd>& prior);
/// Dispatch; prior-weighted uses the uniform prior.
FdvfSolution construct_fdvf(const ExactAnalysis& ex, Construction c);

/**
 * w(tau_h) = <b(tau_h), theta_h> with Sigma_H theta_h = b^e_h.
 *
 * Sigma_H is rank deficient at the first step (a single empty history) and
 * whenever reachable beliefs do not span R^S. Among all solutions we take the
 * one nearest the all-ones vector; at full rank this is Sigma_H^-1 b^e.
 */
HistoryWeights construct_history_weights(const ExactAnalysis& ex);

/// max_h || M_F,h V_h - V^e_S,h ||_inf.
double verify_fdvf(const ExactAnalysis& ex, const StepFunction& v);
/// max_h || sum_tau d^b(tau) w(tau) b(tau) - b^e_h ||_inf.
double verify_weights(const ExactAnalysis& ex, const StepFunction& w);

}  // namespace opelab
