#include "opelab/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "opelab/errors.hpp"
#include "opelab/exact.hpp"
#include "opelab/linalg.hpp"

namespace opelab {

namespace {

constexpr double kConsistencyTol = 1e-8;
// Second moments at or below this are treated as exact zeros (squared round-off).
constexpr double kNegligibleMoment = 1e-20;

std::string at_step(const char* what, int h) { return std::string(what) + " at step " + std::to_string(h + 1); }

double max_over(const CoverageReport& r, double StepCoverage::*field) {
    double m = 0.0;
    for (const StepCoverage& s : r.steps) m = std::max(m, s.*field);
    return m;
}

}  // namespace

double CoverageReport::max_c_fv() const { return max_over(*this, &StepCoverage::c_fv); }
double CoverageReport::max_c_fu() const { return max_over(*this, &StepCoverage::c_fu); }
double CoverageReport::max_c_finf() const { return max_over(*this, &StepCoverage::c_finf); }
double CoverageReport::max_c_h2() const { return max_over(*this, &StepCoverage::c_h2); }
double CoverageReport::max_c_hinf() const { return max_over(*this, &StepCoverage::c_hinf); }

CoverageReport coverage_report(const ExactAnalysis& ex) {
    const int S = ex.model.state_count();
    CoverageReport report;
    report.c_mu = c_mu(ex.pi_e, ex.pi_b);
    for (int h = 0; h < ex.horizon(); ++h) {
        const StepAlgebra& alg = ex.steps[h];
        StepCoverage c;
        c.step = h;
        c.sigma_f = outcome_covariance(alg);
        c.sigma_rf = reward_outcome_covariance(ex, h);
        c.sigma_h = belief_covariance(alg);
        const Eigen::VectorXd& vs = ex.value_e[h];

        c.c_fv = vs.dot(guarded_solve(c.sigma_f, vs, at_step("Sigma_F", h)));
        Eigen::MatrixXd scaled = alg.outcome;
        for (Eigen::Index f = 0; f < scaled.cols(); ++f) scaled.col(f) *= alg.z(f) > 0.0 ? 1.0 / alg.z(f) : 0.0;
        const Eigen::MatrixXd solved = c.sigma_f.partialPivLu().solve(scaled);
        c.c_fu = scaled.cwiseProduct(solved).colwise().sum().maxCoeff();

        c.theta_rf = guarded_solve(c.sigma_rf, vs, at_step("Sigma^R_F", h));
        c.c_finf = c.theta_rf.cwiseAbs().maxCoeff();
        c.theta_h = anchored_psd_solve(c.sigma_h, alg.mean_belief_e, Eigen::VectorXd::Ones(S), at_step("Sigma_H", h),
                                       kConsistencyTol);
        c.c_h2 = alg.mean_belief_e.dot(c.theta_h);
        c.c_hinf = c.theta_h.cwiseAbs().maxCoeff();

        c.sigma_min_mf = singular_values_wide(alg.outcome)(0);
        c.sigma_max_sf = std::sqrt(std::max(0.0, symmetric_eigenvalues(c.sigma_f.transpose() * c.sigma_f)(S - 1)));
        c.sigma_min_sh = std::max(0.0, symmetric_eigenvalues(c.sigma_h)(0));

        const Eigen::VectorXd& de = ex.occupancy_e[h];
        const Eigen::VectorXd& db = ex.occupancy_b[h];
        for (int s = 0; s < S; ++s) {
            if (de(s) == 0.0) continue;
            if (db(s) == 0.0) {
                c.latent_ratio_max = c.latent_ratio_second = std::numeric_limits<double>::infinity();
                break;
            }
            c.latent_ratio_max = std::max(c.latent_ratio_max, de(s) / db(s));
            c.latent_ratio_second += de(s) * de(s) / db(s);
        }

        const Eigen::VectorXd rows = c.sigma_f.rowwise().sum();
        const Eigen::VectorXd cols = c.sigma_f.colwise().sum().transpose();
        c.sf_row_sum_dev = std::max((rows.array() - 1.0).abs().maxCoeff(), (cols.array() - 1.0).abs().maxCoeff());
        c.sf_min_entry = c.sigma_f.minCoeff();
        for (Eigen::Index f = 0; f < scaled.cols(); ++f)
            if (alg.z(f) > 0.0) c.posterior_row_dev = std::max(c.posterior_row_dev, std::abs(scaled.col(f).sum() - 1.0));
        report.steps.push_back(std::move(c));
    }
    return report;
}

std::vector<bool> belief_coverage_order_check(const CoverageReport& report, double tol) {
    std::vector<bool> out;
    for (const StepCoverage& s : report.steps) out.push_back(s.c_h2 <= s.c_hinf + tol);
    return out;
}

std::vector<bool> belief_vs_latent_check(const CoverageReport& report, double tol) {
    std::vector<bool> out;
    for (const StepCoverage& s : report.steps) out.push_back(s.latent_ratio_second <= s.c_h2 + tol);
    return out;
}

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Skipped: return "skipped";
    }
    return "unknown";
}

double sigma_min_future(const ExactAnalysis& ex, int h) { return singular_values_wide(ex.steps.at(h).outcome)(0); }

std::vector<ScalingStep> pinv_scaling_check(const ExactAnalysis& ex, double c_stoch, double tol) {
    const double S = ex.model.state_count();
    std::vector<ScalingStep> out;
    for (int h = 0; h < ex.horizon(); ++h) {
        const StepAlgebra& alg = ex.steps[h];
        ScalingStep st;
        st.step = h;
        const double width = static_cast<double>(alg.outcome.cols());  // (OA)^(H-h)
        st.cap = c_stoch / width;
        st.bound = c_stoch * std::sqrt(S) / std::sqrt(width);
        st.max_outcome = alg.outcome.maxCoeff();
        st.sigma_min = sigma_min_future(ex, h);
        if (st.max_outcome > st.cap) {
            st.status = CheckStatus::Skipped;
            st.note = "outcome probability " + std::to_string(st.max_outcome) + " exceeds the cap " +
                      std::to_string(st.cap);
        } else {
            st.status = st.sigma_min <= st.bound + tol ? CheckStatus::Pass : CheckStatus::Fail;
        }
        out.push_back(std::move(st));
    }
    return out;
}

IvDrResult iv_dr_diagnostics(const ExactAnalysis& ex, const std::vector<StepFunction>& vclass) {
    if (vclass.empty()) throw ConfigError("IV/Dr diagnostics need a nonempty class");
    const int H = ex.horizon();
    IvDrResult out;
    for (int h = 0; h < H; ++h) out.steps.push_back(IvDrStep{h});
    for (std::size_t i = 0; i < vclass.size(); ++i) {
        const auto bs = bellman_residual_S(ex, vclass[i]);
        const auto bh = bellman_residual_H(ex, vclass[i]);
        const int member = static_cast<int>(i);
        for (int h = 0; h < H; ++h) {
            const double sb = ex.occupancy_b[h].dot(bs[h].cwiseAbs2());
            const double se = ex.occupancy_e[h].dot(bs[h].cwiseAbs2());
            const double hb = ex.steps[h].history_marginal_b.dot(bh[h].cwiseAbs2());
            IvDrStep& st = out.steps[h];
            if (hb > kNegligibleMoment) {
                const double iv = std::sqrt(sb / hb);
                if (iv > st.iv) st.iv = iv, st.iv_argmax = member;
            } else {
                out.skipped_iv.emplace_back(member, h);
            }
            if (sb > kNegligibleMoment) {
                const double dr = std::sqrt(se / sb);
                if (dr > st.dr) st.dr = dr, st.dr_argmax = member;
            } else {
                out.skipped_dr.emplace_back(member, h);
            }
        }
    }
    for (const IvDrStep& st : out.steps) {
        out.iv = std::max(out.iv, st.iv);
        out.dr = std::max(out.dr, st.dr);
    }
    return out;
}

StepFunction eigen_adversarial_V(const ExactAnalysis& ex, int h, double c0) {
    const StepAlgebra& alg = ex.steps.at(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(belief_covariance(alg));
    const Eigen::VectorXd v_min = es.eigenvectors().col(0);
    const Eigen::VectorXd target = ex.one_step_reward_e[h] - c0 * v_min;
    const Eigen::VectorXd theta = guarded_solve(outcome_gram(alg), target, at_step("M_F M_F^T", h));
    std::vector<Eigen::VectorXd> tables;
    for (int k = 0; k < ex.horizon(); ++k)
        tables.push_back(k == h ? Eigen::VectorXd(alg.outcome.transpose() * theta)
                                : Eigen::VectorXd::Zero(ex.steps[k].outcome.cols()));
    return StepFunction::dense(Domain::Futures, std::move(tables));
}

double iv_lower_bound(const ExactAnalysis& ex, int h) {
    const double lambda = symmetric_eigenvalues(belief_covariance(ex.steps.at(h)))(0);
    if (!(lambda > 0.0)) throw ConditioningError(at_step("Sigma_H", h) + " is singular", 0.0);
    return std::sqrt(ex.occupancy_b[h].minCoeff() / lambda);
}

BoundEvaluation bound_evaluation(int kind, const CoverageReport& report, int horizon, const BoundInputs& in) {
    if (!(in.n > 0.0) || !(in.delta > 0.0 && in.delta < 1.0)) throw ConfigError("bounds need n > 0 and 0 < delta < 1");
    const double H = horizon;
    BoundEvaluation b{kind, in, 0.0, 0.0};
    const double log_term = std::log(in.class_size_v * in.class_size_aux / in.delta);
    switch (kind) {
        case 1:
            b.sampling_term = in.c * H * std::max(in.c_v + 1.0, in.c_aux) * in.iv * in.dr *
                              std::sqrt(report.c_mu * log_term / in.n);
            b.value = b.sampling_term;
            break;
        case 2:
            b.sampling_term = in.c * H * H * (report.max_c_finf() + 1.0) *
                              std::sqrt(report.max_c_h2() * report.c_mu * log_term / in.n);
            b.value = b.sampling_term;
            break;
        case 3:
            b.sampling_term = in.c * H * H * report.max_c_hinf() * (report.max_c_finf() + 1.0) *
                              std::sqrt(report.c_mu * log_term / in.n);
            b.value = in.eps_v + in.eps_w + b.sampling_term;
            break;
        default:
            throw ConfigError("bound kind must be 1, 2 or 3");
    }
    return b;
}

}  // namespace opelab
