#include "opelab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <thread>

#include "opelab/coverage.hpp"
#include "opelab/errors.hpp"
#include "opelab/estimators.hpp"
#include "opelab/exact.hpp"
#include "opelab/fdvf.hpp"
#include "opelab/format.hpp"
#include "opelab/linalg.hpp"
#include "opelab/rng.hpp"

namespace opelab {

namespace {

constexpr double kEngineTol = 1e-10;
constexpr double kDerived = 1e-8;
constexpr double kBoundSlack = 1e-6;
constexpr int kRandomFunctions = 3;

const Construction kConstructions[] = {Construction::ImportanceSampling, Construction::PseudoInverse,
                                       Construction::L2Weighted, Construction::RewardWeighted,
                                       Construction::PriorWeighted};

struct Context {
    const Fixture& fx;
    const ExactAnalysis& ex;
    const SuiteOptions& opt;
    std::size_t index;

    const CoverageReport& coverage() {
        if (!cov) cov = coverage_report(ex);
        return *cov;
    }
    const FdvfSolution& fdvf(Construction c) {
        auto& slot = solutions[static_cast<int>(c)];
        if (!slot) {
            FdvfSolution s = construct_fdvf(ex, c);
            if (opt.fdvf_perturbation != 0.0 && s.value.linear_form()) {
                LinearForm form = *s.value.linear_form();
                for (auto& t : form.theta) t.array() += opt.fdvf_perturbation;
                s = FdvfSolution{c, StepFunction::linear(ex, Domain::Futures, std::move(form)), {}};
                s.norms = future_norms(ex, s.value);
            }
            slot = std::move(s);
        }
        return *slot;
    }
    const HistoryWeights& weights() {
        if (!hw) hw = construct_history_weights(ex);
        return *hw;
    }
    bool has_tag(const std::string& tag) const {
        return std::find(fx.tags.begin(), fx.tags.end(), tag) != fx.tags.end();
    }
    /// Dense function of futures with entries uniform in [-H, H], keyed by (suite seed, fixture, k).
    StepFunction random_future_function(int k) const {
        Rng rng(opt.seed, index * 1000 + static_cast<std::uint64_t>(k));
        std::vector<Eigen::VectorXd> tables;
        for (const StepAlgebra& alg : ex.steps) {
            Eigen::VectorXd t(alg.outcome.cols());
            for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = ex.horizon() * (2.0 * rng.uniform() - 1.0);
            tables.push_back(std::move(t));
        }
        return StepFunction::dense(Domain::Futures, std::move(tables));
    }

    std::optional<CoverageReport> cov;
    std::optional<FdvfSolution> solutions[5];
    std::optional<HistoryWeights> hw;
};

struct Emit {
    std::vector<CheckRow>& rows;
    std::string check;
    std::string fixture;

    /// Passes when achieved <= tolerance. `h` is 0-based, -1 for fixture-wide.
    void at_most(int h, double achieved, double tol, std::string note = {}) {
        rows.push_back({check, fixture, h + 1, achieved <= tol ? "pass" : "fail", achieved, tol, std::move(note)});
    }
    void skip(int h, std::string note) { rows.push_back({check, fixture, h + 1, "skipped", 0.0, 0.0, std::move(note)}); }
    void fail(int h, std::string note) { rows.push_back({check, fixture, h + 1, "fail", 0.0, 0.0, std::move(note)}); }
};

using CheckFn = std::function<void(Context&, Emit&)>;
struct Check {
    std::string name;
    CheckFn run;
};

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }
double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void fdvf_residual(Context& c, Emit& e, Construction k) {
    const StepFunction& v = c.fdvf(k).value;
    for (int h = 0; h < c.ex.horizon(); ++h)
        e.at_most(h, max_abs(Eigen::VectorXd(c.ex.steps[h].outcome * v.table(h) - c.ex.value_e[h])), kDerived);
}

void require_tag(Context& c, Emit& e, const std::string& tag, const std::function<void()>& body) {
    if (c.has_tag(tag)) {
        body();
    } else {
        e.skip(-1, "fixture is not tagged " + tag);
    }
}

const std::vector<Check>& registry() {
    static const std::vector<Check> checks = {
        {"model_structure",
         [](Context& c, Emit& e) {
             ValidationReport r = validate_model(c.fx.model);
             validate_policy(c.fx.pi_e, c.fx.model, r, "pi_e");
             validate_policy(c.fx.pi_b, c.fx.model, r, "pi_b");
             std::size_t bad = 0;
             std::string first;
             for (const CheckEntry& x : r.checks)
                 if (!x.passed && bad++ == 0) first = x.name + ": " + x.detail;
             e.at_most(-1, static_cast<double>(bad), 0.0, first);
         }},
        {"rank_conditions",
         [](Context& c, Emit& e) {
             ValidationReport r;
             assess_assumptions(c.ex, r);
             for (const CheckEntry& x : r.checks) {
                 if (x.name == "future_prob_positive") continue;
                 e.at_most(x.step, x.passed ? 0.0 : 1.0, 0.0, x.name + ": " + x.detail);
             }
         }},
        {"future_probability_positive",
         [](Context& c, Emit& e) {
             for (int h = 0; h < c.ex.horizon(); ++h) {
                 const double m = c.ex.steps[h].future_marginal_b.minCoeff();
                 if (m > 0.0) {
                     e.at_most(h, 0.0, 0.0, "min Pr_b(f) = " + format_double(m));
                 } else if (c.has_tag("one_hot_beliefs")) {
                     e.skip(h, "deterministic dynamics leave impossible futures; constructions drop them");
                 } else {
                     e.at_most(h, 1.0, 0.0, "a future has probability 0 under pi_b");
                 }
             }
         }},
        {"action_ratio_at_least_one",
         [](Context& c, Emit& e) {
             const double cm = c_mu(c.fx.pi_e, c.fx.pi_b);
             e.at_most(-1, std::max(0.0, 1.0 - cm), 0.0, "C_mu = " + format_double(cm));
         }},
        {"policy_value_matches_enumeration",
         [](Context& c, Emit& e) {
             double bf = 0.0;
             try {
                 bf = brute_force_J(c.fx.model, c.fx.pi_e, c.opt.engine);
             } catch (const BudgetError& err) {
                 e.skip(-1, err.what());
                 return;
             }
             e.at_most(-1, std::abs(bf - policy_value(c.fx.model, c.fx.pi_e)), kEngineTol);
         }},
        {"belief_columns_stochastic",
         [](Context& c, Emit& e) {
             for (const StepAlgebra& alg : c.ex.steps) {
                 double dev = 0.0;
                 for (Eigen::Index t = 0; t < alg.beliefs.cols(); ++t)
                     if (alg.reachable[t]) dev = std::max(dev, std::abs(alg.beliefs.col(t).sum() - 1.0));
                 dev = std::max(dev, -std::min(0.0, alg.beliefs.minCoeff()));
                 e.at_most(alg.step, dev, kEngineTol);
             }
         }},
        {"outcome_rows_stochastic",
         [](Context& c, Emit& e) {
             for (const StepAlgebra& alg : c.ex.steps)
                 e.at_most(alg.step, max_abs(Eigen::VectorXd(alg.outcome.rowwise().sum().array() - 1.0)), kEngineTol);
         }},
        {"mean_belief_matches_occupancy",
         [](Context& c, Emit& e) {
             for (const StepAlgebra& alg : c.ex.steps)
                 e.at_most(alg.step,
                           std::max(max_abs(Eigen::VectorXd(alg.mean_belief_e - c.ex.occupancy_e[alg.step])),
                                    max_abs(Eigen::VectorXd(alg.mean_belief_b - c.ex.occupancy_b[alg.step]))),
                           kEngineTol);
         }},
        {"state_residual_forms_agree",
         [](Context& c, Emit& e) {
             for (int h = 0; h < c.ex.horizon(); ++h) {
                 double worst = 0.0;
                 for (int k = 0; k < kRandomFunctions; ++k) {
                     const auto f = bellman_residual_S_forms(c.ex, c.random_future_function(k));
                     worst = std::max(worst, max_abs(Eigen::VectorXd(f.one_step[h] - f.weighted[h])));
                 }
                 e.at_most(h, worst, kEngineTol);
             }
         }},
        {"history_residual_matches_direct",
         [](Context& c, Emit& e) {
             for (int h = 0; h < c.ex.horizon(); ++h) {
                 double worst = 0.0;
                 for (int k = 0; k < kRandomFunctions; ++k) {
                     const StepFunction v = c.random_future_function(k);
                     const Eigen::VectorXd a = bellman_residual_H(c.ex, v)[h];
                     const Eigen::VectorXd b = bellman_residual_H_direct(c.ex, v)[h];
                     for (Eigen::Index t = 0; t < a.size(); ++t)
                         if (c.ex.steps[h].history_marginal_b(t) > 0.0) worst = std::max(worst, std::abs(a(t) - b(t)));
                 }
                 e.at_most(h, worst, kEngineTol);
             }
         }},
        {"evaluation_error_identity",
         [](Context& c, Emit& e) {
             double worst = 0.0;
             for (int k = 0; k < kRandomFunctions; ++k) {
                 const ErrorIdentity id = evaluation_error_identity(c.ex, c.random_future_function(k));
                 worst = std::max(worst, std::abs(id.lhs - id.rhs));
             }
             const ErrorIdentity zero = evaluation_error_identity(c.ex, StepFunction::zero(c.ex, Domain::Futures));
             worst = std::max(worst, std::abs(zero.lhs - policy_value(c.fx.model, c.fx.pi_e)));
             e.at_most(-1, worst, kDerived);
         }},
        {"fdvf_residual.is", [](Context& c, Emit& e) { fdvf_residual(c, e, Construction::ImportanceSampling); }},
        {"fdvf_residual.pinv", [](Context& c, Emit& e) { fdvf_residual(c, e, Construction::PseudoInverse); }},
        {"fdvf_residual.l2_weighted", [](Context& c, Emit& e) { fdvf_residual(c, e, Construction::L2Weighted); }},
        {"fdvf_residual.reward_weighted",
         [](Context& c, Emit& e) { fdvf_residual(c, e, Construction::RewardWeighted); }},
        {"fdvf_residual.prior_weighted",
         [](Context& c, Emit& e) { fdvf_residual(c, e, Construction::PriorWeighted); }},
        {"fdvf_linear_dense_agree",
         [](Context& c, Emit& e) {
             double gap = 0.0;
             for (Construction k : kConstructions) gap = std::max(gap, c.fdvf(k).value.representation_gap(c.ex));
             e.at_most(-1, gap, kEngineTol);
         }},
        {"fdvf_bellman_residuals_zero",
         [](Context& c, Emit& e) {
             for (int h = 0; h < c.ex.horizon(); ++h) {
                 double worst = 0.0;
                 for (Construction k : kConstructions) {
                     const StepFunction& v = c.fdvf(k).value;
                     worst = std::max({worst, max_abs(bellman_residual_S(c.ex, v)[h]),
                                       max_abs(bellman_residual_H(c.ex, v)[h])});
                 }
                 e.at_most(h, worst, kDerived);
             }
         }},
        {"pinv_minimum_l2_norm",
         [](Context& c, Emit& e) {
             for (int h = 0; h < c.ex.horizon(); ++h) {
                 const double p = c.fdvf(Construction::PseudoInverse).norms.l2[h];
                 double excess = 0.0;
                 for (Construction k : kConstructions)
                     excess = std::max(excess, (p - c.fdvf(k).norms.l2[h]) / std::max(1.0, p));
                 e.at_most(h, excess, 1e-9);
             }
         }},
        {"l2_weighted_minimum_z_norm",
         [](Context& c, Emit& e) {
             for (int h = 0; h < c.ex.horizon(); ++h) {
                 const double p = c.fdvf(Construction::L2Weighted).norms.z_weighted[h];
                 double excess = 0.0;
                 for (Construction k : kConstructions)
                     excess = std::max(excess, (p - c.fdvf(k).norms.z_weighted[h]) / std::max(1.0, p));
                 e.at_most(h, excess, 1e-9);
             }
         }},
        {"prior_uniform_matches_l2_weighted",
         [](Context& c, Emit& e) {
             for (int h = 0; h < c.ex.horizon(); ++h)
                 e.at_most(h,
                           max_abs(Eigen::VectorXd(c.fdvf(Construction::PriorWeighted).value.table(h) -
                                                   c.fdvf(Construction::L2Weighted).value.table(h))),
                           kEngineTol);
         }},
        {"prior_occupancy_residual",
         [](Context& c, Emit& e) {
             for (const auto& occ : c.ex.occupancy_b)
                 if (!(occ.minCoeff() > 0.0)) {
                     e.skip(-1, "behavior occupancy has a zero entry");
                     return;
                 }
             const FdvfSolution s = construct_prior_weighted_fdvf(c.ex, c.ex.occupancy_b);
             e.at_most(-1, verify_fdvf(c.ex, s.value), kDerived);
         }},
        {"l2_weighted_sup_bound",
         [](Context& c, Emit& e) {
             const CoverageReport& r = c.coverage();
             for (int h = 0; h < c.ex.horizon(); ++h) {
                 const double bound = std::sqrt(r.steps[h].c_fv * r.steps[h].c_fu);
                 e.at_most(h, c.fdvf(Construction::L2Weighted).norms.sup[h] - bound, kBoundSlack,
                           "bound " + format_double(bound));
             }
         }},
        {"reward_weighted_sup_bound",
         [](Context& c, Emit& e) {
             const CoverageReport& r = c.coverage();
             for (int h = 0; h < c.ex.horizon(); ++h) {
                 const double bound = c.ex.horizon() * r.steps[h].c_finf;
                 e.at_most(h, c.fdvf(Construction::RewardWeighted).norms.sup[h] - bound, kBoundSlack,
                           "bound " + format_double(bound));
             }
         }},
        {"onpolicy_reward_weighted_equals_return",
         [](Context& c, Emit& e) {
             require_tag(c, e, "onpolicy", [&] {
                 const CoverageReport& r = c.coverage();
                 for (int h = 0; h < c.ex.horizon(); ++h) {
                     const double a = max_abs(Eigen::VectorXd(c.fdvf(Construction::RewardWeighted).value.table(h) -
                                                              c.ex.reward_to_go[h]));
                     const double b = max_abs(Eigen::VectorXd(r.steps[h].theta_rf.array() - 1.0));
                     e.at_most(h, std::max(a, b), kDerived);
                 }
             });
         }},
        {"onpolicy_is_equals_return",
         [](Context& c, Emit& e) {
             require_tag(c, e, "onpolicy", [&] {
                 for (int h = 0; h < c.ex.horizon(); ++h)
                     e.at_most(h,
                               max_abs(Eigen::VectorXd(c.fdvf(Construction::ImportanceSampling).value.table(h) -
                                                       c.ex.reward_to_go[h])),
                               kDerived);
             });
         }},
        {"revealing_future_identity_covariance",
         [](Context& c, Emit& e) {
             require_tag(c, e, "revealing_future", [&] {
                 const CoverageReport& r = c.coverage();
                 const int S = c.fx.model.state_count();
                 for (int h = 0; h < c.ex.horizon(); ++h) {
                     const double dev = max_abs(Eigen::MatrixXd(r.steps[h].sigma_f - Eigen::MatrixXd::Identity(S, S)));
                     const double sup_excess =
                         std::max(0.0, c.fdvf(Construction::L2Weighted).norms.sup[h] - c.ex.horizon());
                     e.at_most(h, std::max({dev, sup_excess, std::abs(r.steps[h].c_fu - 1.0)}), kDerived);
                 }
             });
         }},
        {"revealing_future_reward_covariance_diagonal",
         [](Context& c, Emit& e) {
             require_tag(c, e, "revealing_future", [&] {
                 const CoverageReport& r = c.coverage();
                 for (int h = 0; h < c.ex.horizon(); ++h) {
                     const Eigen::MatrixXd diag = c.ex.value_b[h].asDiagonal();
                     const double ratio = c.ex.value_e[h].cwiseQuotient(c.ex.value_b[h]).maxCoeff();
                     e.at_most(h, std::max(max_abs(Eigen::MatrixXd(r.steps[h].sigma_rf - diag)),
                                           std::abs(r.steps[h].c_finf - ratio)),
                               kDerived);
                 }
             });
         }},
        {"history_weights_mean_matching",
         [](Context& c, Emit& e) { e.at_most(-1, verify_weights(c.ex, c.weights().weights), kDerived); }},
        {"history_weights_l2_bound",
         [](Context& c, Emit& e) {
             const CoverageReport& r = c.coverage();
             for (int h = 0; h < c.ex.horizon(); ++h) {
                 const double l2 = c.weights().l2_behavior[h];
                 e.at_most(h, l2 * l2 - r.steps[h].c_h2, kBoundSlack, "C_H,2 = " + format_double(r.steps[h].c_h2));
             }
         }},
        {"history_weights_sup_bound",
         [](Context& c, Emit& e) {
             const CoverageReport& r = c.coverage();
             for (int h = 0; h < c.ex.horizon(); ++h)
                 e.at_most(h, c.weights().sup[h] - r.steps[h].c_hinf, kBoundSlack,
                           "C_H,inf = " + format_double(r.steps[h].c_hinf));
         }},
        {"onpolicy_history_weights_all_one",
         [](Context& c, Emit& e) {
             require_tag(c, e, "onpolicy", [&] {
                 const CoverageReport& r = c.coverage();
                 for (int h = 0; h < c.ex.horizon(); ++h)
                     e.at_most(h, max_abs(Eigen::VectorXd(r.steps[h].theta_h.array() - 1.0)), kDerived);
             });
         }},
        {"onpolicy_coverage_values",
         [](Context& c, Emit& e) {
             require_tag(c, e, "onpolicy", [&] {
                 const CoverageReport& r = c.coverage();
                 for (const StepCoverage& s : r.steps)
                     e.at_most(s.step,
                               std::max({std::abs(s.c_hinf - 1.0), std::abs(s.c_finf - 1.0), s.c_h2 - 1.0}),
                               kDerived);
             });
         }},
        {"onpolicy_outcome_coverage_bound",
         [](Context& c, Emit& e) {
             require_tag(c, e, "onpolicy", [&] {
                 const double H = c.ex.horizon(), S = c.fx.model.state_count();
                 for (const StepCoverage& s : c.coverage().steps)
                     e.at_most(s.step, s.c_fv - H * H * S, kBoundSlack, "C_F,V = " + format_double(s.c_fv));
             });
         }},
        {"weight_transfer_identity",
         [](Context& c, Emit& e) {
             const StepFunction& w = c.weights().weights;
             for (int h = 0; h < c.ex.horizon(); ++h) {
                 double worst = 0.0;
                 for (int k = 0; k < kRandomFunctions; ++k) {
                     const StepFunction v = c.random_future_function(k);
                     const Eigen::VectorXd bh = bellman_residual_H(c.ex, v)[h];
                     const Eigen::VectorXd bs = bellman_residual_S(c.ex, v)[h];
                     const double lhs = c.ex.steps[h].history_marginal_b.cwiseProduct(w.table(h)).dot(bh);
                     worst = std::max(worst, std::abs(lhs - c.ex.occupancy_e[h].dot(bs)));
                 }
                 e.at_most(h, worst, kDerived);
             }
         }},
        {"outcome_covariance_doubly_stochastic",
         [](Context& c, Emit& e) {
             for (const StepCoverage& s : c.coverage().steps) {
                 const double dev = std::max({s.sf_row_sum_dev / kEngineTol, std::max(0.0, -s.sf_min_entry) / 1e-12,
                                              std::abs(s.sigma_max_sf - 1.0) / kDerived});
                 e.at_most(s.step, dev, 1.0, "normalized by the per-property tolerances");
             }
         }},
        {"posterior_rows_stochastic",
         [](Context& c, Emit& e) {
             for (const StepCoverage& s : c.coverage().steps) e.at_most(s.step, s.posterior_row_dev, kEngineTol);
         }},
        {"one_hot_belief_concentrability",
         [](Context& c, Emit& e) {
             require_tag(c, e, "one_hot_beliefs", [&] {
                 for (const StepCoverage& s : c.coverage().steps)
                     e.at_most(s.step, std::abs(s.c_hinf - s.latent_ratio_max), kDerived);
             });
         }},
        {"belief_l2_le_linf",
         [](Context& c, Emit& e) {
             for (const StepCoverage& s : c.coverage().steps) e.at_most(s.step, s.c_h2 - s.c_hinf, kDerived);
         }},
        {"latent_le_belief_coverage",
         [](Context& c, Emit& e) {
             for (const StepCoverage& s : c.coverage().steps)
                 e.at_most(s.step, s.latent_ratio_second - s.c_h2, kDerived);
         }},
        {"pinv_sigma_scaling",
         [](Context& c, Emit& e) {
             for (const ScalingStep& s : pinv_scaling_check(c.ex, c.opt.c_stoch)) {
                 if (s.status == CheckStatus::Skipped) {
                     e.skip(s.step, s.note);
                 } else {
                     e.at_most(s.step, s.sigma_min - s.bound, kDerived, "bound " + format_double(s.bound));
                 }
             }
         }},
        {"eigen_adversarial_direction",
         [](Context& c, Emit& e) {
             for (int h = 0; h < c.ex.horizon(); ++h) {
                 Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(belief_covariance(c.ex.steps[h]));
                 const Eigen::VectorXd bs = bellman_residual_S(c.ex, eigen_adversarial_V(c.ex, h))[h];
                 const double cosine = bs.dot(es.eigenvectors().col(0)) / bs.norm();
                 e.at_most(h, 1.0 - cosine, kDerived);
             }
         }},
        {"eigen_iv_lower_bound",
         [](Context& c, Emit& e) {
             for (int h = 0; h < c.ex.horizon(); ++h) {
                 const Eigen::MatrixXd sh = belief_covariance(c.ex.steps[h]);
                 if (numerical_rank(sh) < c.fx.model.state_count()) {
                     e.skip(h, "Sigma_H is singular at this step");
                     continue;
                 }
                 const IvDrResult r = iv_dr_diagnostics(c.ex, {eigen_adversarial_V(c.ex, h)});
                 const double lb = iv_lower_bound(c.ex, h);
                 e.at_most(h, lb - r.steps[h].iv, kBoundSlack, "lower bound " + format_double(lb));
             }
         }},
        {"one_hot_iv_equals_one",
         [](Context& c, Emit& e) {
             require_tag(c, e, "one_hot_beliefs", [&] {
                 const FunctionClasses cls = build_classes(c.ex, {4, 1.0, c.opt.seed});
                 const IvDrResult r = iv_dr_diagnostics(c.ex, cls.v.members);
                 for (const IvDrStep& s : r.steps) {
                     if (s.iv_argmax < 0) {
                         e.skip(s.step, "every member has zero history residual");
                     } else {
                         e.at_most(s.step, std::abs(s.iv - 1.0), kDerived);
                     }
                 }
             });
         }},
        {"bound_sampling_scaling",
         [](Context& c, Emit& e) {
             const CoverageReport& r = c.coverage();
             BoundInputs in;
             in.n = 1000, in.class_size_v = 5, in.class_size_aux = 5;
             double worst = 0.0;
             for (int thm : {2, 3}) {
                 BoundInputs quad = in;
                 quad.n = 4 * in.n;
                 const double a = bound_evaluation(thm, r, c.ex.horizon(), in).sampling_term;
                 const double b = bound_evaluation(thm, r, c.ex.horizon(), quad).sampling_term;
                 worst = std::max(worst, std::abs(b / a - 0.5));
             }
             e.at_most(-1, worst, 1e-12);
         }},
        {"is_unbiased",
         [](Context& c, Emit& e) {
             const SampleSet pop = population_samples(c.ex);
             const double j = policy_value(c.fx.model, c.fx.pi_e);
             e.at_most(-1,
                       std::max(std::abs(is_estimate(pop, IsMode::FullTrajectory) - j),
                                std::abs(is_estimate(pop, IsMode::PerDecision) - j)),
                       kEngineTol);
         }},
        {"population_estimators_exact",
         [](Context& c, Emit& e) {
             const FunctionClasses cls = build_classes(c.ex, {4, 1.0, c.opt.seed});
             const SampleSet pop = population_samples(c.ex);
             const double j = policy_value(c.fx.model, c.fx.pi_e);
             const EstimateReport a = minimax_fdvf_estimate(pop, cls.v, cls.xi);
             const EstimateReport b = mis_estimate(pop, cls.v, cls.w);
             e.at_most(-1, std::max(std::abs(a.estimate - j), std::abs(b.estimate - j)), kDerived,
                       "selected " + std::to_string(a.v_index) + " / " + std::to_string(b.v_index));
         }},
        {"realizability_surrogates_zero",
         [](Context& c, Emit& e) {
             const FunctionClasses cls = build_classes(c.ex, {4, 1.0, c.opt.seed});
             const RealizabilitySurrogates s = realizability_surrogates(c.ex, cls.v, cls.w);
             e.at_most(-1, std::max(s.eps_v, s.eps_w), kDerived);
         }},
        {"reward_shift_equivariance",
         [](Context& c, Emit& e) {
             constexpr double shift = 0.5;
             const ExactAnalysis moved = analyze(c.fx.model.with_reward_offset(shift), c.fx.pi_e, c.fx.pi_b, c.opt.engine);
             double worst = 0.0;
             double before[2], after[2];
             for (int pass = 0; pass < 2; ++pass) {
                 const ExactAnalysis& x = pass == 0 ? c.ex : moved;
                 const FunctionClasses cls = build_classes(x, {4, 1.0, c.opt.seed});
                 const SampleSet pop = population_samples(x);
                 double* out = pass == 0 ? before : after;
                 out[0] = minimax_fdvf_estimate(pop, cls.v, cls.xi).estimate;
                 out[1] = mis_estimate(pop, cls.v, cls.w).estimate;
             }
             for (int k = 0; k < 2; ++k)
                 worst = std::max(worst, std::abs(after[k] - before[k] - c.ex.horizon() * shift));
             e.at_most(-1, worst, kDerived);
         }},
    };
    return checks;
}

std::vector<CheckRow> run_fixture(const Fixture& fx, std::size_t index, const SuiteOptions& opt) {
    std::vector<CheckRow> rows;
    std::optional<ExactAnalysis> ex;
    try {
        ex = analyze(fx.model, fx.pi_e, fx.pi_b, opt.engine);
    } catch (const std::exception& err) {
        rows.push_back({"exact_analysis", fx.name, 0, "fail", 0.0, 0.0, err.what()});
        return rows;
    }
    Context ctx{fx, *ex, opt, index, {}, {}, {}};
    for (const Check& check : registry()) {
        Emit emit{rows, check.name, fx.name};
        try {
            check.run(ctx, emit);
        } catch (const std::exception& err) {
            emit.fail(-1, err.what());
        }
    }
    return rows;
}

}  // namespace

std::size_t SuiteReport::failures() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const CheckRow& r) { return r.status == "fail"; }));
}

std::vector<std::string> check_registry() {
    std::vector<std::string> names;
    for (const Check& c : registry()) names.push_back(c.name);
    return names;
}

SuiteReport run_verification_suite(const std::vector<Fixture>& fixtures, const SuiteOptions& options) {
    std::vector<std::vector<CheckRow>> per(fixtures.size());
    const std::size_t workers =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.threads, 1)), 1, std::max<std::size_t>(fixtures.size(), 1));
    auto work = [&](std::size_t w) {
        for (std::size_t i = w; i < fixtures.size(); i += workers) per[i] = run_fixture(fixtures[i], i, options);
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    SuiteReport report;
    for (auto& rows : per) report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    return report;
}

std::string suite_to_csv(const SuiteReport& report) {
    std::ostringstream os;
    os << "check,fixture,step,status,achieved,tolerance,note\n";
    for (const CheckRow& r : report.rows)
        os << csv_field(r.check) << ',' << csv_field(r.fixture) << ',' << r.step << ',' << r.status << ','
           << format_double(r.achieved) << ',' << format_double(r.tolerance) << ',' << csv_field(r.note) << '\n';
    return os.str();
}

Json suite_to_json(const SuiteReport& report) {
    Json rows = Json::array();
    for (const CheckRow& r : report.rows)
        rows.push_back({{"check", r.check},
                        {"fixture", r.fixture},
                        {"step", r.step},
                        {"status", r.status},
                        {"achieved", format_double(r.achieved)},
                        {"tolerance", format_double(r.tolerance)},
                        {"note", r.note}});
    return Json{{"failures", report.failures()}, {"rows", rows}};
}

}  // namespace opelab
