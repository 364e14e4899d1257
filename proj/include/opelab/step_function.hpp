#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "opelab/encoding.hpp"

namespace opelab {

struct ExactAnalysis;

enum class Domain { Futures, Histories };

/// How a linear step function turns a domain point into an S-dim feature.
enum class FeatureKind {
    Outcome,        // u(f)
    OutcomeOverZ,   // u(f) / Z(f)
    OutcomeOverZR,  // u(f) R^+(f) / Z(f)
    PriorOutcome,   // (p o u(f)) / <p, u(f)>
    Belief,         // b(tau)
};

struct LinearForm {
    FeatureKind kind = FeatureKind::OutcomeOverZ;
    std::vector<Eigen::VectorXd> theta;  // one S-vector per step
    std::vector<Eigen::VectorXd> prior;  // PriorOutcome only
};

/// |domain| x S feature matrix at step h. Rows for futures with zero
/// denominator (or unreachable histories) are zero.
Eigen::MatrixXd feature_matrix(const ExactAnalysis& ex, FeatureKind kind, int h, const Eigen::VectorXd* prior = nullptr);

/**
 * Real-valued function on futures or histories, one table per step.
 *
 * Future functions evaluate to 0 at step H (the empty future). A function
 * built from a LinearForm keeps its parameters next to the dense tables.
 */
class StepFunction {
public:
    static StepFunction dense(Domain domain, std::vector<Eigen::VectorXd> tables);
    static StepFunction linear(const ExactAnalysis& ex, Domain domain, LinearForm form);
    static StepFunction zero(const ExactAnalysis& ex, Domain domain);

    Domain domain() const { return domain_; }
    int horizon() const { return static_cast<int>(tables_.size()); }

    double operator()(int h, Id id) const {
        if (h >= horizon()) return 0.0;
        return tables_[h](static_cast<Eigen::Index>(id));
    }
    const Eigen::VectorXd& table(int h) const { return tables_[h]; }
    const std::vector<Eigen::VectorXd>& tables() const { return tables_; }
    const std::optional<LinearForm>& linear_form() const { return form_; }

    /// Recomputes the value from the linear parameters; requires a linear form.
    double evaluate_linear(const ExactAnalysis& ex, int h, Id id) const;
    /// Largest |dense - linear| over all domain points; 0 for dense-only functions.
    double representation_gap(const ExactAnalysis& ex) const;

    double sup_norm() const;
    double sup_norm(int h) const;

private:
    StepFunction(Domain domain, std::vector<Eigen::VectorXd> tables, std::optional<LinearForm> form)
        : domain_(domain), tables_(std::move(tables)), form_(std::move(form)) {}

    Domain domain_;
    std::vector<Eigen::VectorXd> tables_;
    std::optional<LinearForm> form_;
};

}  // namespace opelab
