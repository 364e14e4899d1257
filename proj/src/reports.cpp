#include "opelab/reports.hpp"

#include <sstream>

#include "opelab/format.hpp"

namespace opelab {

namespace {

Json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Json rows(const Eigen::MatrixXd& m) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vec(m.row(i).transpose()));
    return out;
}

Json tables(const std::vector<Eigen::VectorXd>& t) {
    Json out = Json::array();
    for (const auto& v : t) out.push_back(vec(v));
    return out;
}

const char* kind_name(FeatureKind k) {
    switch (k) {
        case FeatureKind::Outcome: return "outcome";
        case FeatureKind::OutcomeOverZ: return "outcome_over_z";
        case FeatureKind::OutcomeOverZR: return "outcome_over_z_reward";
        case FeatureKind::PriorOutcome: return "prior_outcome";
        case FeatureKind::Belief: return "belief";
    }
    return "unknown";
}

}  // namespace

Json validation_to_json(const ValidationReport& report) {
    Json checks = Json::array();
    for (const CheckEntry& c : report.checks)
        checks.push_back({{"name", c.name}, {"step", c.step + 1}, {"passed", c.passed}, {"detail", c.detail}});
    Json steps = Json::array();
    for (const StepDiagnostics& d : report.steps)
        steps.push_back({{"step", d.step + 1},
                         {"rank_belief", d.rank_belief},
                         {"rank_outcome", d.rank_outcome},
                         {"min_future_prob", d.min_future_prob},
                         {"cond_outcome_gram", d.cond_outcome_gram},
                         {"cond_outcome_cov", d.cond_outcome_cov},
                         {"cond_reward_outcome_cov", d.cond_reward_outcome_cov},
                         {"cond_belief_cov", d.cond_belief_cov}});
    return Json{{"passed", report.all_passed()}, {"min_reward", report.min_reward}, {"checks", checks}, {"steps", steps}};
}

Json exact_to_json(const ExactAnalysis& ex) {
    Json steps = Json::array();
    for (const StepAlgebra& alg : ex.steps)
        steps.push_back({{"step", alg.step + 1},
                         {"value_e", vec(ex.value_e[alg.step])},
                         {"value_b", vec(ex.value_b[alg.step])},
                         {"occupancy_e", vec(ex.occupancy_e[alg.step])},
                         {"occupancy_b", vec(ex.occupancy_b[alg.step])},
                         {"beliefs", rows(alg.beliefs)},
                         {"history_marginal_b", vec(alg.history_marginal_b)},
                         {"outcome", rows(alg.outcome)},
                         {"future_marginal_b", vec(alg.future_marginal_b)}});
    return Json{{"horizon", ex.horizon()},
                {"J_e", policy_value(ex.model, ex.pi_e)},
                {"J_b", policy_value(ex.model, ex.pi_b)},
                {"c_mu", c_mu(ex.pi_e, ex.pi_b)},
                {"steps", steps}};
}

std::string coverage_to_csv(const CoverageReport& report) {
    std::ostringstream os;
    os << "step,c_fv,c_fu,c_finf,c_h2,c_hinf,sigma_min_mf,sigma_max_sf,sigma_min_sh,latent_ratio_max,"
          "latent_ratio_second\n";
    for (const StepCoverage& s : report.steps)
        os << s.step + 1 << ',' << format_double(s.c_fv) << ',' << format_double(s.c_fu) << ','
           << format_double(s.c_finf) << ',' << format_double(s.c_h2) << ',' << format_double(s.c_hinf) << ','
           << format_double(s.sigma_min_mf) << ',' << format_double(s.sigma_max_sf) << ','
           << format_double(s.sigma_min_sh) << ',' << format_double(s.latent_ratio_max) << ','
           << format_double(s.latent_ratio_second) << '\n';
    return os.str();
}

Json coverage_to_json(const CoverageReport& report) {
    Json steps = Json::array();
    for (const StepCoverage& s : report.steps)
        steps.push_back({{"step", s.step + 1},
                         {"c_fv", s.c_fv},
                         {"c_fu", s.c_fu},
                         {"c_finf", s.c_finf},
                         {"c_h2", s.c_h2},
                         {"c_hinf", s.c_hinf},
                         {"theta_h", vec(s.theta_h)},
                         {"theta_rf", vec(s.theta_rf)},
                         {"sigma_f", rows(s.sigma_f)},
                         {"sigma_rf", rows(s.sigma_rf)},
                         {"sigma_h", rows(s.sigma_h)},
                         {"sigma_min_mf", s.sigma_min_mf},
                         {"sigma_max_sf", s.sigma_max_sf},
                         {"sigma_min_sh", s.sigma_min_sh},
                         {"latent_ratio_max", s.latent_ratio_max},
                         {"latent_ratio_second", s.latent_ratio_second}});
    return Json{{"c_mu", report.c_mu},
                {"max",
                 {{"c_fv", report.max_c_fv()},
                  {"c_fu", report.max_c_fu()},
                  {"c_finf", report.max_c_finf()},
                  {"c_h2", report.max_c_h2()},
                  {"c_hinf", report.max_c_hinf()}}},
                {"steps", steps}};
}

Json fdvf_to_json(const ExactAnalysis& ex, const FdvfSolution& s) {
    Json j{{"construction", to_string(s.construction)},
           {"residual", verify_fdvf(ex, s.value)},
           {"sup", s.norms.sup},
           {"z_weighted", s.norms.z_weighted},
           {"l2", s.norms.l2},
           {"tables", tables(s.value.tables())}};
    if (const auto& form = s.value.linear_form()) {
        j["feature"] = kind_name(form->kind);
        j["theta"] = tables(form->theta);
        if (!form->prior.empty()) j["prior"] = tables(form->prior);
    }
    return j;
}

Json history_weights_to_json(const ExactAnalysis& ex, const HistoryWeights& w) {
    Json j{{"residual", verify_weights(ex, w.weights)},
           {"sup", w.sup},
           {"l2_behavior", w.l2_behavior},
           {"tables", tables(w.weights.tables())}};
    if (const auto& form = w.weights.linear_form()) j["theta"] = tables(form->theta);
    return j;
}

Json estimate_to_json(const EstimateReport& r) {
    return Json{{"method", r.method},
                {"estimate", format_double(r.estimate)},
                {"v_index", r.v_index},
                {"aux_index", r.aux_index},
                {"objective", r.objective},
                {"step_losses", r.step_losses},
                {"n", r.n},
                {"seed", r.seed}};
}

}  // namespace opelab
