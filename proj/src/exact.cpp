#include "opelab/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "opelab/errors.hpp"
#include "opelab/linalg.hpp"
#include "opelab/step_function.hpp"

namespace opelab {

namespace {

void check_policy_shape(const TabularPOMDP& model, const MemorylessPolicy& pi, const char* label) {
    if (pi.horizon() != model.horizon() || pi.obs_count() != model.obs_count() ||
        pi.action_count() != model.action_count())
        throw ModelError(std::string(label) + " shape does not match the model");
}

/// T_h(a) as an S x S matrix with (s, s') = T(s' | s, a).
Eigen::MatrixXd transition_matrix(const TabularPOMDP& model, int h, int a) {
    const int S = model.state_count();
    Eigen::MatrixXd t(S, S);
    for (int s = 0; s < S; ++s)
        for (int n = 0; n < S; ++n) t(s, n) = model.transition(h, s, a, n);
    return t;
}

struct ForwardPass {
    std::vector<Eigen::MatrixXd> joint;  // action-free Pr(o_{<h}, s_h | a_{<h}), S x |H_h|
    std::vector<Eigen::VectorXd> weight_e;
    std::vector<Eigen::VectorXd> weight_b;
};

ForwardPass forward_pass(const TabularPOMDP& model, const MemorylessPolicy& pi, const MemorylessPolicy& pi_b,
                         int last_step) {
    const int S = model.state_count(), O = model.obs_count(), A = model.action_count();
    const Eigen::Index pairs = static_cast<Eigen::Index>(O) * A;
    ForwardPass fw;
    Eigen::MatrixXd alpha(S, 1);
    for (int s = 0; s < S; ++s) alpha(s, 0) = model.initial(s);
    fw.joint.push_back(alpha);
    fw.weight_e.push_back(Eigen::VectorXd::Ones(1));
    fw.weight_b.push_back(Eigen::VectorXd::Ones(1));

    for (int h = 0; h < last_step; ++h) {
        const Eigen::MatrixXd& prev = fw.joint[h];
        const Eigen::Index count = prev.cols();
        Eigen::MatrixXd next(S, count * pairs);
        Eigen::VectorXd we(count * pairs), wb(count * pairs);
        for (int a = 0; a < A; ++a) {
            const Eigen::MatrixXd t = transition_matrix(model, h, a);
            for (int o = 0; o < O; ++o) {
                Eigen::VectorXd em(S);
                for (int s = 0; s < S; ++s) em(s) = model.emission(h, s, o);
                // column (tau, s'): sum_s alpha(s, tau) O(o|s) T(s'|s, a)
                const Eigen::MatrixXd block = t.transpose() * (em.asDiagonal() * prev);
                const Eigen::Index p = static_cast<Eigen::Index>(o) * A + a;
                for (Eigen::Index tau = 0; tau < count; ++tau) {
                    next.col(tau * pairs + p) = block.col(tau);
                    we(tau * pairs + p) = fw.weight_e[h](tau) * pi.prob(h, o, a);
                    wb(tau * pairs + p) = fw.weight_b[h](tau) * pi_b.prob(h, o, a);
                }
            }
        }
        fw.joint.push_back(std::move(next));
        fw.weight_e.push_back(std::move(we));
        fw.weight_b.push_back(std::move(wb));
    }
    return fw;
}

/// outcome[h] for h = first_step..H, entry H the S x 1 ones matrix.
std::vector<Eigen::MatrixXd> backward_pass(const TabularPOMDP& model, const MemorylessPolicy& pi_b, int first_step) {
    const int H = model.horizon(), S = model.state_count(), O = model.obs_count(), A = model.action_count();
    std::vector<Eigen::MatrixXd> out(H + 1);
    out[H] = Eigen::MatrixXd::Ones(S, 1);
    for (int h = H - 1; h >= first_step; --h) {
        const Eigen::MatrixXd& later = out[h + 1];
        const Eigen::Index tail = later.cols();
        Eigen::MatrixXd m(S, tail * O * A);
        for (int a = 0; a < A; ++a) {
            const Eigen::MatrixXd carried = h + 1 < H ? Eigen::MatrixXd(transition_matrix(model, h, a) * later) : later;
            for (int o = 0; o < O; ++o) {
                Eigen::VectorXd scale(S);
                for (int s = 0; s < S; ++s) scale(s) = model.emission(h, s, o) * pi_b.prob(h, o, a);
                const Eigen::Index p = static_cast<Eigen::Index>(o) * A + a;
                m.middleCols(p * tail, tail) = scale.asDiagonal() * carried;
            }
        }
        out[h] = std::move(m);
    }
    return out;
}

StepAlgebra assemble_step(int h, const ForwardPass& fw, const std::vector<Eigen::MatrixXd>& outcome,
                          const Eigen::VectorXd& occupancy_b) {
    StepAlgebra alg;
    alg.step = h;
    const Eigen::MatrixXd& joint = fw.joint[h];
    const Eigen::Index count = joint.cols();
    alg.beliefs = Eigen::MatrixXd::Zero(joint.rows(), count);
    alg.reachable.assign(static_cast<std::size_t>(count), 0);
    alg.history_marginal_e = Eigen::VectorXd::Zero(count);
    alg.history_marginal_b = Eigen::VectorXd::Zero(count);
    for (Eigen::Index tau = 0; tau < count; ++tau) {
        const double mass = joint.col(tau).sum();
        if (!(mass > 0.0)) continue;
        alg.reachable[tau] = 1;
        alg.beliefs.col(tau) = joint.col(tau) / mass;
        alg.history_marginal_e(tau) = fw.weight_e[h](tau) * mass;
        alg.history_marginal_b(tau) = fw.weight_b[h](tau) * mass;
    }
    alg.mean_belief_e = alg.beliefs * alg.history_marginal_e;
    alg.mean_belief_b = alg.beliefs * alg.history_marginal_b;
    alg.outcome = outcome[h];
    alg.z = alg.outcome.colwise().sum().transpose();
    alg.future_marginal_b = alg.outcome.transpose() * occupancy_b;
    return alg;
}

}  // namespace

Eigen::MatrixXd ExactAnalysis::outcome_at(int h) const {
    if (h >= horizon()) return Eigen::MatrixXd::Ones(model.state_count(), 1);
    return steps[h].outcome;
}

std::vector<Eigen::VectorXd> latent_value(const TabularPOMDP& model, const MemorylessPolicy& pi) {
    check_policy_shape(model, pi, "policy");
    const int H = model.horizon(), S = model.state_count(), O = model.obs_count(), A = model.action_count();
    std::vector<Eigen::VectorXd> v(H + 1, Eigen::VectorXd::Zero(S));
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            double total = 0.0;
            for (int o = 0; o < O; ++o) {
                const double po = model.emission(h, s, o);
                if (po == 0.0) continue;
                for (int a = 0; a < A; ++a) {
                    const double pa = pi.prob(h, o, a);
                    if (pa == 0.0) continue;
                    double cont = 0.0;
                    if (h + 1 < H)
                        for (int n = 0; n < S; ++n) cont += model.transition(h, s, a, n) * v[h + 1](n);
                    total += po * pa * (model.reward(h, o, a) + cont);
                }
            }
            v[h](s) = total;
        }
    }
    return v;
}

std::vector<Eigen::VectorXd> latent_occupancy(const TabularPOMDP& model, const MemorylessPolicy& pi) {
    check_policy_shape(model, pi, "policy");
    const int H = model.horizon(), S = model.state_count(), O = model.obs_count(), A = model.action_count();
    std::vector<Eigen::VectorXd> d(H, Eigen::VectorXd::Zero(S));
    for (int s = 0; s < S; ++s) d[0](s) = model.initial(s);
    for (int h = 0; h + 1 < H; ++h)
        for (int s = 0; s < S; ++s) {
            if (d[h](s) == 0.0) continue;
            for (int o = 0; o < O; ++o)
                for (int a = 0; a < A; ++a) {
                    const double w = d[h](s) * model.emission(h, s, o) * pi.prob(h, o, a);
                    if (w == 0.0) continue;
                    for (int n = 0; n < S; ++n) d[h + 1](n) += w * model.transition(h, s, a, n);
                }
        }
    return d;
}

double policy_value(const TabularPOMDP& model, const MemorylessPolicy& pi) {
    const auto v = latent_value(model, pi);
    double j = 0.0;
    for (int s = 0; s < model.state_count(); ++s) j += model.initial(s) * v[0](s);
    return j;
}

double brute_force_J(const TabularPOMDP& model, const MemorylessPolicy& pi, const EngineOptions& options) {
    check_policy_shape(model, pi, "policy");
    const int H = model.horizon(), S = model.state_count(), O = model.obs_count(), A = model.action_count();
    Id paths = 0;
    if (!checked_pow(static_cast<Id>(S) * O * A, H, paths) || paths > options.brute_force_budget)
        throw BudgetError("brute-force enumeration of (S*O*A)^H paths exceeds the budget");

    // Odometer over (s_1, o_1, a_1, ..., s_H, o_H, a_H).
    std::vector<int> digit(static_cast<std::size_t>(3 * H), 0);
    const int radix[3] = {S, O, A};
    long double total = 0.0L;
    for (Id path = 0; path < paths; ++path) {
        double prob = 1.0, ret = 0.0;
        for (int h = 0; h < H && prob != 0.0; ++h) {
            const int s = digit[3 * h], o = digit[3 * h + 1], a = digit[3 * h + 2];
            prob *= h == 0 ? model.initial(s) : model.transition(h - 1, digit[3 * (h - 1)], digit[3 * (h - 1) + 2], s);
            prob *= model.emission(h, s, o) * pi.prob(h, o, a);
            ret += model.reward(h, o, a);
        }
        total += static_cast<long double>(prob) * ret;
        for (int k = 3 * H - 1; k >= 0; --k) {
            if (++digit[k] < radix[k % 3]) break;
            digit[k] = 0;
        }
    }
    return static_cast<double>(total);
}

double reward_to_go(const TabularPOMDP& model, FutureIndex f) {
    const Sequence seq = decode_future(model.space(), f);
    double total = 0.0;
    for (std::size_t i = 0; i < seq.size(); ++i) total += model.reward(f.step + static_cast<int>(i), seq[i].obs, seq[i].act);
    return total;
}

void check_budget(const SequenceSpace& space, const EngineOptions& options) {
    for (int h = 0; h < space.horizon; ++h) {
        Id n = 0;
        const int len = std::max(h, space.horizon - h);
        if (!checked_pow(space.pair_count(), len, n) || n > options.budget)
            throw BudgetError("step " + std::to_string(h + 1) + " needs (OA)^" + std::to_string(len) +
                              " index entries, over the enumeration budget of " + std::to_string(options.budget));
    }
}

ExactAnalysis analyze(const TabularPOMDP& model, const MemorylessPolicy& pi_e, const MemorylessPolicy& pi_b,
                      const EngineOptions& options) {
    check_policy_shape(model, pi_e, "pi_e");
    check_policy_shape(model, pi_b, "pi_b");
    check_budget(model.space(), options);
    const int H = model.horizon(), S = model.state_count(), O = model.obs_count(), A = model.action_count();

    ExactAnalysis ex{model, pi_e, pi_b, {}, {}, {}, {}, {}, {}, {}, {}};
    ex.value_e = latent_value(model, pi_e);
    ex.value_b = latent_value(model, pi_b);
    ex.occupancy_e = latent_occupancy(model, pi_e);
    ex.occupancy_b = latent_occupancy(model, pi_b);

    const ForwardPass fw = forward_pass(model, pi_e, pi_b, H - 1);
    const std::vector<Eigen::MatrixXd> outcome = backward_pass(model, pi_b, 0);
    for (int h = 0; h < H; ++h) ex.steps.push_back(assemble_step(h, fw, outcome, ex.occupancy_b[h]));

    ex.one_step_reward_e.assign(H, Eigen::VectorXd::Zero(S));
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s)
            for (int o = 0; o < O; ++o)
                for (int a = 0; a < A; ++a)
                    ex.one_step_reward_e[h](s) += model.emission(h, s, o) * pi_e.prob(h, o, a) * model.reward(h, o, a);

    ex.reward_to_go.assign(H + 1, Eigen::VectorXd());
    ex.reward_to_go[H] = Eigen::VectorXd::Zero(1);
    for (int h = H - 1; h >= 0; --h) {
        const Eigen::VectorXd& tail = ex.reward_to_go[h + 1];
        Eigen::VectorXd r(tail.size() * O * A);
        for (int o = 0; o < O; ++o)
            for (int a = 0; a < A; ++a) {
                const Eigen::Index p = static_cast<Eigen::Index>(o) * A + a;
                r.segment(p * tail.size(), tail.size()) = tail.array() + model.reward(h, o, a);
            }
        ex.reward_to_go[h] = std::move(r);
    }
    ex.reward_to_go.pop_back();

    Eigen::VectorXd d1(S);
    for (int s = 0; s < S; ++s) d1(s) = model.initial(s);
    ex.trajectory_prob_b = ex.steps[0].outcome.transpose() * d1;
    return ex;
}

StepAlgebra build_step_algebra(const TabularPOMDP& model, const MemorylessPolicy& pi, const MemorylessPolicy& pi_b,
                               int h, const EngineOptions& options) {
    check_policy_shape(model, pi, "pi");
    check_policy_shape(model, pi_b, "pi_b");
    check_budget(model.space(), options);
    if (h < 0 || h >= model.horizon()) throw ModelError("step out of range");
    const ForwardPass fw = forward_pass(model, pi, pi_b, h);
    const std::vector<Eigen::MatrixXd> outcome = backward_pass(model, pi_b, h);
    const auto occ = latent_occupancy(model, pi_b);
    return assemble_step(h, fw, outcome, occ[h]);
}

Eigen::VectorXd future_residual(const ExactAnalysis& ex, const StepFunction& v, int h) {
    const TabularPOMDP& m = ex.model;
    const int O = m.obs_count(), A = m.action_count();
    const Eigen::Index count = ex.steps[h].outcome.cols();
    const Eigen::Index tail = count / (static_cast<Eigen::Index>(O) * A);
    Eigen::VectorXd g(count);
    for (int o = 0; o < O; ++o)
        for (int a = 0; a < A; ++a) {
            const double mu = action_ratio(ex.pi_e, ex.pi_b, h, o, a);
            const double r = m.reward(h, o, a);
            const Eigen::Index p = static_cast<Eigen::Index>(o) * A + a;
            for (Eigen::Index j = 0; j < tail; ++j) {
                const Eigen::Index f = p * tail + j;
                g(f) = mu * (r + v(h + 1, static_cast<Id>(j))) - v(h, static_cast<Id>(f));
            }
        }
    return g;
}

StateResidualForms bellman_residual_S_forms(const ExactAnalysis& ex, const StepFunction& v) {
    if (v.domain() != Domain::Futures) throw ConfigError("Bellman residuals need a function of futures");
    const TabularPOMDP& m = ex.model;
    const int H = m.horizon(), S = m.state_count(), O = m.obs_count(), A = m.action_count();
    StateResidualForms out;
    for (int h = 0; h < H; ++h) {
        const Eigen::MatrixXd& mf = ex.steps[h].outcome;
        Eigen::VectorXd next = Eigen::VectorXd::Zero(S);
        if (h + 1 < H) next = ex.steps[h + 1].outcome * v.table(h + 1);

        Eigen::VectorXd one_step(S);
        for (int s = 0; s < S; ++s) {
            double total = 0.0;
            for (int o = 0; o < O; ++o)
                for (int a = 0; a < A; ++a) {
                    const double w = m.emission(h, s, o) * ex.pi_e.prob(h, o, a);
                    if (w == 0.0) continue;
                    double cont = 0.0;
                    if (h + 1 < H)
                        for (int n = 0; n < S; ++n) cont += m.transition(h, s, a, n) * next(n);
                    total += w * (m.reward(h, o, a) + cont);
                }
            one_step(s) = total;
        }
        one_step -= mf * v.table(h);
        out.one_step.push_back(std::move(one_step));
        out.weighted.push_back(mf * future_residual(ex, v, h));
    }
    return out;
}

std::vector<Eigen::VectorXd> bellman_residual_S(const ExactAnalysis& ex, const StepFunction& v) {
    return bellman_residual_S_forms(ex, v).one_step;
}

std::vector<Eigen::VectorXd> bellman_residual_H(const ExactAnalysis& ex, const StepFunction& v) {
    const auto bs = bellman_residual_S(ex, v);
    std::vector<Eigen::VectorXd> out;
    for (int h = 0; h < ex.horizon(); ++h) out.push_back(ex.steps[h].beliefs.transpose() * bs[h]);
    return out;
}

std::vector<Eigen::VectorXd> bellman_residual_H_direct(const ExactAnalysis& ex, const StepFunction& v) {
    std::vector<Eigen::VectorXd> out;
    for (int h = 0; h < ex.horizon(); ++h) {
        const Eigen::VectorXd g = future_residual(ex, v, h);
        const Eigen::Index nf = g.size();
        const Eigen::Index nh = ex.steps[h].beliefs.cols();
        Eigen::VectorXd r = Eigen::VectorXd::Zero(nh);
        for (Eigen::Index tau = 0; tau < nh; ++tau) {
            const auto joint = ex.trajectory_prob_b.segment(tau * nf, nf);
            const double mass = joint.sum();
            if (mass > 0.0) r(tau) = joint.dot(g) / mass;
        }
        out.push_back(std::move(r));
    }
    return out;
}

ErrorIdentity evaluation_error_identity(const ExactAnalysis& ex, const StepFunction& v) {
    const auto bs = bellman_residual_S(ex, v);
    double j = 0.0;
    for (int s = 0; s < ex.model.state_count(); ++s) j += ex.model.initial(s) * ex.value_e[0](s);
    ErrorIdentity id;
    id.lhs = j - ex.trajectory_prob_b.dot(v.table(0));
    for (int h = 0; h < ex.horizon(); ++h) id.rhs += ex.occupancy_e[h].dot(bs[h]);
    return id;
}

Eigen::MatrixXd outcome_gram(const StepAlgebra& alg) { return weighted_gram(alg.outcome, Eigen::VectorXd()); }

Eigen::MatrixXd outcome_covariance(const StepAlgebra& alg) {
    Eigen::VectorXd w(alg.z.size());
    for (Eigen::Index f = 0; f < w.size(); ++f) w(f) = alg.z(f) > 0.0 ? 1.0 / alg.z(f) : 0.0;
    return weighted_gram(alg.outcome, w);
}

Eigen::MatrixXd reward_outcome_covariance(const ExactAnalysis& ex, int h) {
    const StepAlgebra& alg = ex.steps[h];
    Eigen::VectorXd w(alg.z.size());
    for (Eigen::Index f = 0; f < w.size(); ++f) w(f) = alg.z(f) > 0.0 ? ex.reward_to_go[h](f) / alg.z(f) : 0.0;
    return weighted_gram(alg.outcome, w);
}

Eigen::MatrixXd belief_covariance(const StepAlgebra& alg) {
    return weighted_gram(alg.beliefs, alg.history_marginal_b);
}

void assess_assumptions(const ExactAnalysis& ex, ValidationReport& report) {
    const int S = ex.model.state_count();
    report.steps.clear();
    for (int h = 0; h < ex.horizon(); ++h) {
        const StepAlgebra& alg = ex.steps[h];
        StepDiagnostics d;
        d.step = h;
        Eigen::VectorXd reach(alg.beliefs.cols());
        for (Eigen::Index t = 0; t < reach.size(); ++t) reach(t) = alg.reachable[t] ? 1.0 : 0.0;
        d.rank_belief = numerical_rank(weighted_gram(alg.beliefs, reach));
        const Eigen::MatrixXd gram = outcome_gram(alg);
        d.rank_outcome = numerical_rank(gram);
        d.min_future_prob = alg.future_marginal_b.minCoeff();
        d.cond_outcome_gram = condition_number(gram);
        d.cond_outcome_cov = condition_number(outcome_covariance(alg));
        d.cond_reward_outcome_cov = condition_number(reward_outcome_covariance(ex, h));
        d.cond_belief_cov = condition_number(belief_covariance(alg));
        report.steps.push_back(d);

        // A single empty history cannot span more than one direction; the belief
        // rank requirement is only meaningful once histories exist.
        const bool belief_ok = h == 0 ? d.rank_belief == 1 : d.rank_belief == S;
        report.add("belief_rank", h, belief_ok, "rank(M_H) = " + std::to_string(d.rank_belief));
        report.add("outcome_rank", h, d.rank_outcome == S, "rank(M_F) = " + std::to_string(d.rank_outcome));
        report.add("future_prob_positive", h, d.min_future_prob > 0.0,
                   "min Pr_b(f) = " + std::to_string(d.min_future_prob));
    }
}

}  // namespace opelab
