#include "opelab/step_function.hpp"

#include <algorithm>
#include <cmath>

#include "opelab/errors.hpp"
#include "opelab/exact.hpp"

namespace opelab {

Eigen::MatrixXd feature_matrix(const ExactAnalysis& ex, FeatureKind kind, int h, const Eigen::VectorXd* prior) {
    const StepAlgebra& alg = ex.steps.at(h);
    if (kind == FeatureKind::Belief) return alg.beliefs.transpose();

    Eigen::MatrixXd phi = alg.outcome.transpose();  // |F_h| x S
    switch (kind) {
        case FeatureKind::Outcome:
            break;
        case FeatureKind::OutcomeOverZ:
            for (Eigen::Index f = 0; f < phi.rows(); ++f)
                phi.row(f) *= alg.z(f) > 0.0 ? 1.0 / alg.z(f) : 0.0;
            break;
        case FeatureKind::OutcomeOverZR:
            for (Eigen::Index f = 0; f < phi.rows(); ++f)
                phi.row(f) *= alg.z(f) > 0.0 ? ex.reward_to_go[h](f) / alg.z(f) : 0.0;
            break;
        case FeatureKind::PriorOutcome: {
            if (prior == nullptr) throw ConfigError("prior-weighted features need a prior");
            for (Eigen::Index f = 0; f < phi.rows(); ++f) {
                const double zp = phi.row(f).dot(*prior);
                phi.row(f) = zp > 0.0 ? Eigen::RowVectorXd(phi.row(f).cwiseProduct(prior->transpose()) / zp)
                                      : Eigen::RowVectorXd::Zero(phi.cols());
            }
            break;
        }
        case FeatureKind::Belief:
            break;
    }
    return phi;
}

StepFunction StepFunction::dense(Domain domain, std::vector<Eigen::VectorXd> tables) {
    return StepFunction(domain, std::move(tables), std::nullopt);
}

StepFunction StepFunction::linear(const ExactAnalysis& ex, Domain domain, LinearForm form) {
    const int H = ex.horizon();
    if (static_cast<int>(form.theta.size()) != H) throw ConfigError("linear form needs one theta per step");
    if ((domain == Domain::Histories) != (form.kind == FeatureKind::Belief))
        throw ConfigError("feature kind does not match the function domain");
    std::vector<Eigen::VectorXd> tables(H);
    for (int h = 0; h < H; ++h) {
        const Eigen::VectorXd* prior = form.kind == FeatureKind::PriorOutcome ? &form.prior.at(h) : nullptr;
        tables[h] = feature_matrix(ex, form.kind, h, prior) * form.theta[h];
    }
    return StepFunction(domain, std::move(tables), std::move(form));
}

StepFunction StepFunction::zero(const ExactAnalysis& ex, Domain domain) {
    std::vector<Eigen::VectorXd> tables;
    for (const auto& alg : ex.steps)
        tables.push_back(Eigen::VectorXd::Zero(domain == Domain::Futures ? alg.outcome.cols() : alg.beliefs.cols()));
    return dense(domain, std::move(tables));
}

double StepFunction::evaluate_linear(const ExactAnalysis& ex, int h, Id id) const {
    if (!form_) throw ConfigError("function has no linear form");
    if (h >= horizon()) return 0.0;
    const StepAlgebra& alg = ex.steps.at(h);
    const auto col = static_cast<Eigen::Index>(id);
    const Eigen::VectorXd& theta = form_->theta[h];
    if (form_->kind == FeatureKind::Belief) return alg.beliefs.col(col).dot(theta);

    const Eigen::VectorXd u = alg.outcome.col(col);
    const double z = alg.z(col);
    switch (form_->kind) {
        case FeatureKind::Outcome:
            return u.dot(theta);
        case FeatureKind::OutcomeOverZ:
            return z > 0.0 ? u.dot(theta) / z : 0.0;
        case FeatureKind::OutcomeOverZR:
            return z > 0.0 ? ex.reward_to_go[h](col) * u.dot(theta) / z : 0.0;
        case FeatureKind::PriorOutcome: {
            const Eigen::VectorXd& p = form_->prior[h];
            const double zp = u.dot(p);
            return zp > 0.0 ? u.cwiseProduct(p).dot(theta) / zp : 0.0;
        }
        case FeatureKind::Belief:
            break;
    }
    return 0.0;
}

double StepFunction::representation_gap(const ExactAnalysis& ex) const {
    if (!form_) return 0.0;
    double gap = 0.0;
    for (int h = 0; h < horizon(); ++h)
        for (Eigen::Index i = 0; i < tables_[h].size(); ++i)
            gap = std::max(gap, std::abs(tables_[h](i) - evaluate_linear(ex, h, static_cast<Id>(i))));
    return gap;
}

double StepFunction::sup_norm(int h) const {
    return tables_[h].size() == 0 ? 0.0 : tables_[h].cwiseAbs().maxCoeff();
}

double StepFunction::sup_norm() const {
    double m = 0.0;
    for (int h = 0; h < horizon(); ++h) m = std::max(m, sup_norm(h));
    return m;
}

}  // namespace opelab
