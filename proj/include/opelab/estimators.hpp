#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opelab/encoding.hpp"
#include "opelab/pomdp.hpp"
#include "opelab/step_function.hpp"

namespace opelab {

struct ExactAnalysis;
class ObservedView;

/**
 * Weighted trajectories laid out per (sample, step). A dataset gives every
 * trajectory weight 1/n; the population version lists every trajectory with
 * its behavior probability, so the same estimator code computes exact
 * expectations.
 */
struct SampleSet {
    int horizon = 0;
    bool uniform_weights = true;  // true for data; required by median-of-means
    std::vector<double> weight;   // per sample
    std::vector<Id> future;       // [i * H + h]
    std::vector<Id> history;      // [i * H + h]
    std::vector<double> mu;       // [i * H + h]
    std::vector<double> rew;      // [i * H + h]

    std::size_t size() const { return weight.size(); }
};

/// Uses logged rewards and behavior probabilities. Throws ActionCoverageError
/// naming the trajectory when pi_e plays a logged action with probability 0 under pi_b.
SampleSet samples_from_view(const ObservedView& view, const SequenceSpace& space, const MemorylessPolicy& pi_e);
/// Every trajectory with Pr_b > 0, weighted by that probability.
SampleSet population_samples(const ExactAnalysis& ex);

struct FunctionClass {
    Domain domain = Domain::Futures;
    std::vector<StepFunction> members;
    double sup_norm() const;
};

struct ClassSpec {
    int perturbations = 4;   // m
    double magnitude = 1.0;  // epsilon
    std::uint64_t seed = 0;
};

struct FunctionClasses {
    FunctionClass v;   // member 0 is the reward-weighted FDVF
    FunctionClass xi;  // xi[j] = B^H v[j]
    FunctionClass w;   // member 0 is w*
};

/// Perturbations move every parameter by epsilon * eta with |eta| in [0.5, 1] and a random sign.
FunctionClasses build_classes(const ExactAnalysis& ex, const ClassSpec& spec);

struct MomOptions {
    int blocks = 0;  // 0: use default_mom_blocks
    double delta = 0.05;
};
/// min(n, ceil(8 ln(2/delta))).
int default_mom_blocks(std::size_t n, double delta = 0.05);

struct EstimateReport {
    std::string method;
    double estimate = 0.0;
    int v_index = -1;
    int aux_index = -1;                   // maximizing xi or w for the selected V
    std::vector<double> objective;        // per V member
    std::vector<double> step_losses;      // per step, at (v_index, aux_index)
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

/// Weighted mean of V(f_1).
double plug_in_estimate(const SampleSet& samples, const StepFunction& v);

enum class IsMode { FullTrajectory, PerDecision };
double is_estimate(const SampleSet& samples, IsMode mode);

/// argmin_V max_xi sum_h E[g_V xi - xi^2 / 2]; lowest index wins ties.
EstimateReport minimax_fdvf_estimate(const SampleSet& samples, const FunctionClass& vclass, const FunctionClass& xiclass);
/// argmin_V max_w sum_h |E[w g_V]|, with median-of-means over contiguous blocks when `mom` is set.
EstimateReport mis_estimate(const SampleSet& samples, const FunctionClass& vclass, const FunctionClass& wclass,
                            const std::optional<MomOptions>& mom = std::nullopt);

struct RealizabilitySurrogates {
    double eps_v = 0.0;
    double eps_w = 0.0;
};
/// eps_V = min_V max_w |sum_h E_b[w B^H V]|; eps_W = min over single members w of
/// max_V |sum_h E_b[(w* - w) B^H V]|. The second bounds the infimum over the span from above.
RealizabilitySurrogates realizability_surrogates(const ExactAnalysis& ex, const FunctionClass& vclass,
                                                const FunctionClass& wclass);

}  // namespace opelab
