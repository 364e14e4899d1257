#include "opelab/fdvf.hpp"

#include <cmath>

#include "opelab/errors.hpp"
#include "opelab/exact.hpp"
#include "opelab/linalg.hpp"

namespace opelab {

namespace {

// Null-space leakage allowed when solving for history weights.
constexpr double kConsistencyTol = 1e-8;

FdvfSolution finish(const ExactAnalysis& ex, Construction c, StepFunction v) {
    FutureNorms norms = future_norms(ex, v);
    return FdvfSolution{c, std::move(v), std::move(norms)};
}

std::string step_label(const char* what, int h) { return std::string(what) + " at step " + std::to_string(h + 1); }

FdvfSolution linear_solution(const ExactAnalysis& ex, Construction c, FeatureKind kind,
                             const std::vector<Eigen::MatrixXd>& systems, const std::vector<Eigen::VectorXd>& rhs,
                             std::vector<Eigen::VectorXd> prior, const char* what) {
    LinearForm form;
    form.kind = kind;
    form.prior = std::move(prior);
    for (int h = 0; h < ex.horizon(); ++h) form.theta.push_back(guarded_solve(systems[h], rhs[h], step_label(what, h)));
    return finish(ex, c, StepFunction::linear(ex, Domain::Futures, std::move(form)));
}

}  // namespace

std::string to_string(Construction c) {
    switch (c) {
        case Construction::ImportanceSampling: return "is";
        case Construction::PseudoInverse: return "pinv";
        case Construction::L2Weighted: return "l2_weighted";
        case Construction::RewardWeighted: return "reward_weighted";
        case Construction::PriorWeighted: return "prior_weighted";
    }
    return "unknown";
}

Construction parse_construction(const std::string& name) {
    for (Construction c : {Construction::ImportanceSampling, Construction::PseudoInverse, Construction::L2Weighted,
                           Construction::RewardWeighted, Construction::PriorWeighted})
        if (to_string(c) == name) return c;
    throw ConfigError("unknown construction '" + name + "'");
}

FutureNorms future_norms(const ExactAnalysis& ex, const StepFunction& v) {
    FutureNorms n;
    for (int h = 0; h < ex.horizon(); ++h) {
        const Eigen::VectorXd& t = v.table(h);
        n.sup.push_back(v.sup_norm(h));
        n.z_weighted.push_back(std::sqrt(ex.steps[h].z.dot(t.cwiseAbs2())));
        n.l2.push_back(t.norm());
    }
    return n;
}

FdvfSolution construct_is_fdvf(const ExactAnalysis& ex) {
    const int H = ex.horizon(), O = ex.model.obs_count(), A = ex.model.action_count();
    // Cumulative ratio over the future, built back to front like reward_to_go.
    std::vector<Eigen::VectorXd> ratio(H + 1);
    ratio[H] = Eigen::VectorXd::Ones(1);
    for (int h = H - 1; h >= 0; --h) {
        const Eigen::VectorXd& tail = ratio[h + 1];
        Eigen::VectorXd r(tail.size() * O * A);
        for (int o = 0; o < O; ++o)
            for (int a = 0; a < A; ++a) {
                const Eigen::Index p = static_cast<Eigen::Index>(o) * A + a;
                r.segment(p * tail.size(), tail.size()) = tail * action_ratio(ex.pi_e, ex.pi_b, h, o, a);
            }
        ratio[h] = std::move(r);
    }
    std::vector<Eigen::VectorXd> tables;
    for (int h = 0; h < H; ++h) tables.push_back(ex.reward_to_go[h].cwiseProduct(ratio[h]));
    return finish(ex, Construction::ImportanceSampling, StepFunction::dense(Domain::Futures, std::move(tables)));
}

FdvfSolution construct_pinv_fdvf(const ExactAnalysis& ex) {
    std::vector<Eigen::MatrixXd> sys;
    for (int h = 0; h < ex.horizon(); ++h) sys.push_back(outcome_gram(ex.steps[h]));
    return linear_solution(ex, Construction::PseudoInverse, FeatureKind::Outcome, sys,
                           {ex.value_e.begin(), ex.value_e.end() - 1}, {}, "M_F M_F^T");
}

FdvfSolution construct_l2_weighted_fdvf(const ExactAnalysis& ex) {
    std::vector<Eigen::MatrixXd> sys;
    for (int h = 0; h < ex.horizon(); ++h) sys.push_back(outcome_covariance(ex.steps[h]));
    return linear_solution(ex, Construction::L2Weighted, FeatureKind::OutcomeOverZ, sys,
                           {ex.value_e.begin(), ex.value_e.end() - 1}, {}, "Sigma_F");
}

FdvfSolution construct_reward_weighted_fdvf(const ExactAnalysis& ex) {
    std::vector<Eigen::MatrixXd> sys;
    for (int h = 0; h < ex.horizon(); ++h) {
        if (!(ex.reward_to_go[h].minCoeff() > 0.0))
            throw ModelError("reward-weighted construction needs strictly positive rewards");
        sys.push_back(reward_outcome_covariance(ex, h));
    }
    return linear_solution(ex, Construction::RewardWeighted, FeatureKind::OutcomeOverZR, sys,
                           {ex.value_e.begin(), ex.value_e.end() - 1}, {}, "Sigma^R_F");
}

FdvfSolution construct_prior_weighted_fdvf(const ExactAnalysis& ex, const std::vector<Eigen::VectorXd>& prior) {
    const int H = ex.horizon();
    if (static_cast<int>(prior.size()) != H) throw ConfigError("prior-weighted construction needs one prior per step");
    std::vector<Eigen::MatrixXd> sys;
    std::vector<Eigen::VectorXd> rhs;
    for (int h = 0; h < H; ++h) {
        const Eigen::VectorXd& p = prior[h];
        if (p.size() != ex.model.state_count() || !(p.minCoeff() > 0.0))
            throw ConfigError("prior at step " + std::to_string(h + 1) + " must be a positive S-vector");
        const Eigen::MatrixXd scaled = p.asDiagonal() * ex.steps[h].outcome;
        const Eigen::VectorXd zp = scaled.colwise().sum().transpose();
        Eigen::VectorXd w(zp.size());
        for (Eigen::Index f = 0; f < w.size(); ++f) w(f) = zp(f) > 0.0 ? 1.0 / zp(f) : 0.0;
        sys.push_back(weighted_gram(scaled, w));
        rhs.push_back(p.cwiseProduct(ex.value_e[h]));
    }
    return linear_solution(ex, Construction::PriorWeighted, FeatureKind::PriorOutcome, sys, rhs, prior,
                           "prior-weighted Sigma_F");
}

FdvfSolution construct_fdvf(const ExactAnalysis& ex, Construction c) {
    switch (c) {
        case Construction::ImportanceSampling: return construct_is_fdvf(ex);
        case Construction::PseudoInverse: return construct_pinv_fdvf(ex);
        case Construction::L2Weighted: return construct_l2_weighted_fdvf(ex);
        case Construction::RewardWeighted: return construct_reward_weighted_fdvf(ex);
        case Construction::PriorWeighted:
            return construct_prior_weighted_fdvf(
                ex, std::vector<Eigen::VectorXd>(ex.horizon(), Eigen::VectorXd::Ones(ex.model.state_count())));
    }
    throw ConfigError("unknown construction");
}

HistoryWeights construct_history_weights(const ExactAnalysis& ex) {
    const int S = ex.model.state_count();
    LinearForm form;
    form.kind = FeatureKind::Belief;
    for (int h = 0; h < ex.horizon(); ++h) {
        const StepAlgebra& alg = ex.steps[h];
        form.theta.push_back(anchored_psd_solve(belief_covariance(alg), alg.mean_belief_e, Eigen::VectorXd::Ones(S),
                                                step_label("Sigma_H", h), kConsistencyTol));
    }
    HistoryWeights out{StepFunction::linear(ex, Domain::Histories, std::move(form)), {}, {}};
    for (int h = 0; h < ex.horizon(); ++h) {
        const Eigen::VectorXd& w = out.weights.table(h);
        out.sup.push_back(out.weights.sup_norm(h));
        out.l2_behavior.push_back(std::sqrt(ex.steps[h].history_marginal_b.dot(w.cwiseAbs2())));
    }
    return out;
}

double verify_fdvf(const ExactAnalysis& ex, const StepFunction& v) {
    double worst = 0.0;
    for (int h = 0; h < ex.horizon(); ++h)
        worst = std::max(worst, (ex.steps[h].outcome * v.table(h) - ex.value_e[h]).cwiseAbs().maxCoeff());
    return worst;
}

double verify_weights(const ExactAnalysis& ex, const StepFunction& w) {
    double worst = 0.0;
    for (int h = 0; h < ex.horizon(); ++h) {
        const StepAlgebra& alg = ex.steps[h];
        const Eigen::VectorXd matched = alg.beliefs * alg.history_marginal_b.cwiseProduct(w.table(h));
        worst = std::max(worst, (matched - alg.mean_belief_e).cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace opelab
