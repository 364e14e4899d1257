#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "opelab/step_function.hpp"

namespace opelab {

struct ExactAnalysis;

struct StepCoverage {
    int step = 0;
    Eigen::MatrixXd sigma_f;   // M_F Z^-1 M_F^T
    Eigen::MatrixXd sigma_rf;  // M_F (Z^R)^-1 M_F^T
    Eigen::MatrixXd sigma_h;   // sum_tau d^b(tau) b b^T
    double c_fv = 0.0;         // ||V^e_S||^2 in the Sigma_F^-1 norm
    double c_fu = 0.0;         // max_f ||u(f)/Z(f)||^2 in the Sigma_F^-1 norm
    double c_finf = 0.0;       // ||(Sigma^R_F)^-1 V^e_S||_inf
    double c_h2 = 0.0;         // <b^e, theta>
    double c_hinf = 0.0;       // ||theta||_inf
    Eigen::VectorXd theta_h;   // Sigma_H theta = b^e, nearest the all-ones vector
    Eigen::VectorXd theta_rf;  // (Sigma^R_F)^-1 V^e_S
    double sigma_min_mf = 0.0;
    double sigma_max_sf = 0.0;
    double sigma_min_sh = 0.0;
    double latent_ratio_max = 0.0;     // max_s d^e(s)/d^b(s)
    double latent_ratio_second = 0.0;  // E_b[(d^e/d^b)^2]
    double sf_row_sum_dev = 0.0;       // max |row/column sum of Sigma_F - 1|
    double sf_min_entry = 0.0;
    double posterior_row_dev = 0.0;    // max |row sum of Z^-1 M_F^T - 1| over futures with Z > 0
};

struct CoverageReport {
    double c_mu = 1.0;
    std::vector<StepCoverage> steps;

    /// Maxima over steps, as used in the bounds.
    double max_c_fv() const;
    double max_c_fu() const;
    double max_c_finf() const;
    double max_c_h2() const;
    double max_c_hinf() const;
};

CoverageReport coverage_report(const ExactAnalysis& ex);

/// Per-step C_H,2 <= C_H,inf + tol.
std::vector<bool> belief_coverage_order_check(const CoverageReport& report, double tol = 1e-8);
/// Per-step E_b[(d^e/d^b)^2] <= C_H,2 + tol.
std::vector<bool> belief_vs_latent_check(const CoverageReport& report, double tol = 1e-8);

enum class CheckStatus { Pass, Fail, Skipped };
std::string to_string(CheckStatus s);

double sigma_min_future(const ExactAnalysis& ex, int h);

struct ScalingStep {
    int step = 0;
    CheckStatus status = CheckStatus::Skipped;
    double sigma_min = 0.0;
    double bound = 0.0;        // c_stoch sqrt(S) / (OA)^((H-h)/2)
    double max_outcome = 0.0;  // largest Pr_b(f|s)
    double cap = 0.0;          // c_stoch / (OA)^(H-h)
    std::string note;
};
/// sigma_min(M_F,h) against its near-uniform upper bound. A step whose outcome
/// probabilities exceed the cap is skipped, not failed.
std::vector<ScalingStep> pinv_scaling_check(const ExactAnalysis& ex, double c_stoch, double tol = 1e-8);

struct IvDrStep {
    int step = 0;
    double iv = 0.0;
    double dr = 0.0;
    int iv_argmax = -1;
    int dr_argmax = -1;
};
struct IvDrResult {
    double iv = 0.0;  // max over steps and members; 0 when everything was skipped
    double dr = 0.0;
    std::vector<IvDrStep> steps;
    /// (member, step) pairs whose denominator vanished.
    std::vector<std::pair<int, int>> skipped_iv;
    std::vector<std::pair<int, int>> skipped_dr;
};
/// Exact second moments of B^S and B^H for every member. Throws ConfigError on an empty class.
IvDrResult iv_dr_diagnostics(const ExactAnalysis& ex, const std::vector<StepFunction>& vclass);

/// V zero away from step h, with M_F,h V_h = rbar^e_h - c0 v_min(Sigma_H,h) solved by pseudo-inverse,
/// so that B^S_h V = c0 v_min.
StepFunction eigen_adversarial_V(const ExactAnalysis& ex, int h, double c0 = 1.0);
/// sqrt(min_s d^b(s_h) / lambda_min(Sigma_H,h)).
double iv_lower_bound(const ExactAnalysis& ex, int h);

struct BoundInputs {
    double n = 1.0;
    double delta = 0.05;
    double class_size_v = 1.0;
    double class_size_aux = 1.0;  // |Xi| or |W|
    double c_v = 0.0;
    double c_aux = 0.0;  // C_Xi
    double iv = 0.0;
    double dr = 0.0;
    double eps_v = 0.0;
    double eps_w = 0.0;
    double c = 1.0;  // absolute constant
};
struct BoundEvaluation {
    int kind = 0;
    BoundInputs inputs;
    double sampling_term = 0.0;
    double value = 0.0;
};
/// kind 1, minimax FDVF via IV/Dr: c H max{C_V + 1, C_Xi} IV Dr sqrt(C_mu log(|V||Xi|/delta) / n)
/// kind 2, minimax FDVF via belief coverage: c H^2 (C_F,inf + 1) sqrt(C_H,2 C_mu log(|V||Xi|/delta) / n)
/// kind 3, MIS: eps_V + eps_W + c H^2 C_H,inf (C_F,inf + 1) sqrt(C_mu log(|V||W|/delta) / n)
/// Coverage coefficients enter as their maxima over steps. Values hold up to the absolute constant c.
BoundEvaluation bound_evaluation(int kind, const CoverageReport& report, int horizon, const BoundInputs& in);

}  // namespace opelab
