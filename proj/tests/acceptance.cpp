// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "opelab/coverage.hpp"
#include "opelab/estimators.hpp"
#include "opelab/exact.hpp"
#include "opelab/fdvf.hpp"
#include "opelab/fixtures.hpp"
#include "opelab/format.hpp"
#include "opelab/rng.hpp"
#include "opelab/study.hpp"

using namespace opelab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::vector<Fixture> random_set() {
    std::vector<Fixture> out;
    for (std::uint64_t s = 0; s < 50; ++s) out.push_back(generate_fixture("random", random_dimensions(s), s));
    return out;
}

std::vector<Fixture> all_fixtures() {
    std::vector<Fixture> out = default_fixture_set(0);
    for (Fixture& fx : random_set()) out.push_back(std::move(fx));
    return out;
}

std::string g(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

Outcome oracle_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (const Fixture& fx : random_set())
        worst = std::max(worst, std::abs(policy_value(fx.model, fx.pi_e) - brute_force_J(fx.model, fx.pi_e)));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst <= 1e-10 && secs < 60.0, "max |J - J_enum| = " + g(worst) + " in " + g(secs) + " s"};
}

Outcome fdvf_closure() {
    double worst = 0.0;
    for (const Fixture& fx : all_fixtures()) {
        const ExactAnalysis ex = analyze(fx.model, fx.pi_e, fx.pi_b);
        for (Construction c : {Construction::PseudoInverse, Construction::L2Weighted, Construction::RewardWeighted,
                               Construction::PriorWeighted, Construction::ImportanceSampling})
            worst = std::max(worst, verify_fdvf(ex, construct_fdvf(ex, c).value));
    }
    return {worst <= 1e-8, "max residual " + g(worst)};
}

Outcome doubly_stochastic() {
    double rows = 0.0, top = 0.0, neg = 0.0;
    for (const Fixture& fx : all_fixtures()) {
        const CoverageReport r = coverage_report(analyze(fx.model, fx.pi_e, fx.pi_b));
        for (const StepCoverage& s : r.steps) {
            rows = std::max(rows, s.sf_row_sum_dev);
            top = std::max(top, std::abs(s.sigma_max_sf - 1.0));
            neg = std::max(neg, -s.sf_min_entry);
        }
    }
    return {rows <= 1e-10 && top <= 1e-8 && neg <= 1e-12,
            "row/col sum dev " + g(rows) + ", |sigma_max - 1| " + g(top)};
}

Outcome onpolicy_identities() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const ExactAnalysis ex = [&] {
            const Fixture fx = generate_fixture("onpolicy", {}, seed);
            return analyze(fx.model, fx.pi_e, fx.pi_b);
        }();
        const CoverageReport r = coverage_report(ex);
        const FdvfSolution rw = construct_reward_weighted_fdvf(ex);
        for (const StepCoverage& s : r.steps) {
            worst = std::max(worst, (s.theta_h.array() - 1.0).abs().maxCoeff());
            worst = std::max(worst, (s.theta_rf.array() - 1.0).abs().maxCoeff());
            worst = std::max(worst, (rw.value.table(s.step) - ex.reward_to_go[s.step]).cwiseAbs().maxCoeff());
        }
    }
    return {worst <= 1e-8, "max deviation " + g(worst) + " over 10 fixtures"};
}

Outcome reveal_and_mdp() {
    double cov = 0.0, sup_excess = -1e300, ratio = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Fixture rv = generate_fixture("reveal", {}, seed);
        const ExactAnalysis ex = analyze(rv.model, rv.pi_e, rv.pi_b);
        const int S = rv.model.state_count();
        for (const StepCoverage& s : coverage_report(ex).steps)
            cov = std::max(cov, (s.sigma_f - Eigen::MatrixXd::Identity(S, S)).cwiseAbs().maxCoeff());
        for (double sup : construct_l2_weighted_fdvf(ex).norms.sup) sup_excess = std::max(sup_excess, sup - ex.horizon());

        const Fixture md = generate_fixture("mdp", {}, seed);
        for (const StepCoverage& s : coverage_report(analyze(md.model, md.pi_e, md.pi_b)).steps)
            ratio = std::max(ratio, std::abs(s.c_hinf - s.latent_ratio_max));
    }
    return {cov <= 1e-8 && sup_excess <= 0.0 && ratio <= 1e-8,
            "|Sigma_F - I| " + g(cov) + ", max(sup - H) " + g(sup_excess) + ", |C_H,inf - ratio| " + g(ratio)};
}

Outcome inequality_suite() {
    int violations = 0, checked = 0;
    for (const Fixture& fx : random_set()) {
        const ExactAnalysis ex = analyze(fx.model, fx.pi_e, fx.pi_b);
        const CoverageReport r = coverage_report(ex);
        const FdvfSolution l2 = construct_l2_weighted_fdvf(ex);
        const FdvfSolution rw = construct_reward_weighted_fdvf(ex);
        const HistoryWeights w = construct_history_weights(ex);
        for (const StepCoverage& s : r.steps) {
            const int h = s.step;
            const bool ok[] = {s.c_h2 <= s.c_hinf + 1e-8, s.latent_ratio_second <= s.c_h2 + 1e-8,
                               l2.norms.sup[h] <= std::sqrt(s.c_fv * s.c_fu) + 1e-6,
                               rw.norms.sup[h] <= ex.horizon() * s.c_finf + 1e-6,
                               w.l2_behavior[h] * w.l2_behavior[h] <= s.c_h2 + 1e-6};
            for (bool b : ok) {
                ++checked;
                violations += !b;
            }
        }
    }
    return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(checked) + " checks"};
}

Outcome error_identity() {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const std::uint64_t seed = static_cast<std::uint64_t>(k % 50);
        const Fixture fx = generate_fixture("random", random_dimensions(seed), seed);
        const ExactAnalysis ex = analyze(fx.model, fx.pi_e, fx.pi_b);
        Rng rng(1234, static_cast<std::uint64_t>(k));
        std::vector<Eigen::VectorXd> tables;
        for (const StepAlgebra& alg : ex.steps) {
            Eigen::VectorXd t(alg.outcome.cols());
            for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = ex.horizon() * (2.0 * rng.uniform() - 1.0);
            tables.push_back(t);
        }
        const ErrorIdentity id = evaluation_error_identity(ex, StepFunction::dense(Domain::Futures, tables));
        worst = std::max(worst, std::abs(id.lhs - id.rhs));
    }
    return {worst <= 1e-8, "max |lhs - rhs| " + g(worst) + " over 100 functions"};
}

Outcome sigma_scaling() {
    const Fixture fx = generate_fixture("uniform", {}, 0);
    const ExactAnalysis ex = analyze(fx.model, fx.pi_e, fx.pi_b);
    bool ok = true;
    double slack = 1e300;
    for (const ScalingStep& s : pinv_scaling_check(ex, 2.0)) {
        ok = ok && s.status == CheckStatus::Pass && s.sigma_min <= s.bound + 1e-8;
        slack = std::min(slack, s.bound - s.sigma_min);
    }
    return {ok, "min(bound - sigma_min) " + g(slack) + " over " + std::to_string(ex.horizon()) + " steps"};
}

Outcome iv_lower_bound_check() {
    int evaluated = 0, violations = 0;
    double margin = 1e300;
    for (const Fixture& fx : all_fixtures()) {
        const ExactAnalysis ex = analyze(fx.model, fx.pi_e, fx.pi_b);
        for (int h = 0; h < ex.horizon(); ++h) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(belief_covariance(ex.steps[h]));
            if (es.eigenvalues()(0) <= 1e-10 * es.eigenvalues().maxCoeff()) continue;  // singular Sigma_H
            const IvDrResult r = iv_dr_diagnostics(ex, {eigen_adversarial_V(ex, h)});
            const double lb = iv_lower_bound(ex, h);
            ++evaluated;
            violations += r.steps[h].iv < lb - 1e-6;
            margin = std::min(margin, r.steps[h].iv - lb);
        }
    }
    return {evaluated > 0 && violations == 0,
            std::to_string(evaluated) + " steps, " + std::to_string(violations) + " violations, min margin " + g(margin)};
}

Outcome estimator_rates(int threads) {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::ostringstream detail;
    for (const char* kind : {"bandit", "random"}) {
        StudyConfig c;
        c.fixture = kind;
        c.fixture_seed = 3;
        c.n_grid = {100, 1000, 10000};
        c.seeds = 100;
        c.estimators = {"minimax", "mis"};
        c.threads = threads;
        const Fixture fx = study_fixture(c);
        const StudyResult r = run_convergence_study(fx, c);
        for (const std::string& e : c.estimators) {
            const StudyRow* big = r.find(e, 10000);
            const bool good = big->slope >= -0.65 && big->slope <= -0.35 && big->rmse <= 0.05 * fx.model.horizon();
            ok = ok && good;
            detail << kind << "/" << e << " slope " << g(big->slope) << " rmse " << g(big->rmse) << "; ";
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    detail << g(secs) << " s";
    return {ok && secs <= 600.0, detail.str()};
}

Outcome exponential_gap(int threads) {
    StudyConfig c;
    c.fixture = "chain";
    c.n_grid = {100, 1000, 10000};
    c.seeds = 100;
    c.estimators = {"is", "mis"};
    c.threads = threads;
    const Fixture fx = study_fixture(c);
    const StudyResult r = run_convergence_study(fx, c);
    bool ok = true;
    std::ostringstream detail;
    for (std::size_t n : c.n_grid) {
        const double is = r.find("is", n)->rmse, mis = r.find("mis", n)->rmse;
        ok = ok && is > mis;
        detail << "n=" << n << " IS " << g(is) << " MIS " << g(mis) << "; ";
    }
    const ExactAnalysis ex = analyze(fx.model, fx.pi_e, fx.pi_b);
    const double chinf = coverage_report(ex).max_c_hinf();
    const double weight = construct_is_fdvf(ex).value.table(0).cwiseQuotient(ex.reward_to_go[0]).maxCoeff();
    ok = ok && chinf <= 5.0 && std::abs(weight - 256.0) <= 1e-9;
    detail << "C_H,inf " << g(chinf) << ", max weight " << g(weight);
    return {ok, detail.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome determinism(const std::string& cli, const fs::path& work) {
    if (cli.empty()) return {false, "no --cli given"};
    fs::remove_all(work);
    fs::create_directories(work);
    {
        StudyConfig c;
        c.fixture = "chain";
        c.n_grid = {100, 1000};
        c.seeds = 30;
        c.estimators = study_estimators();
        std::ofstream(work / "study.json") << study_config_to_json(c).dump(2) << '\n';
    }
    const std::vector<std::pair<std::string, int>> runs{{"a", 1}, {"b", 1}, {"c", 4}};
    for (const auto& [tag, threads] : runs) {
        const fs::path out = work / tag;
        for (const std::string& sub : {std::string("verify --random 20"),
                                       std::string("study --config ") + (work / "study.json").string()}) {
            const std::string cmd = "\"" + cli + "\" --seed 5 --threads " + std::to_string(threads) + " --out-dir \"" +
                                    out.string() + "\" " + sub + " 2>/dev/null";
            if (std::system(cmd.c_str()) != 0) return {false, "command failed: " + cmd};
        }
    }
    int files = 0;
    for (const char* name : {"verify.csv", "verify.json", "study.csv", "study.json"}) {
        const std::string ref = slurp(work / "a" / name);
        if (ref.empty()) return {false, std::string(name) + " is empty"};
        for (const char* tag : {"b", "c"})
            if (slurp(work / tag / name) != ref) return {false, std::string(name) + " differs in run " + tag};
        ++files;
    }
    return {true, std::to_string(files) + " files identical across 2 runs and thread counts 1/4"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::string cli, work = "acceptance-work";
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    app.add_option("--cli", cli, "Path to the opelab executable");
    app.add_option("--work-dir", work, "Scratch directory");
    app.add_option("--threads", threads, "Threads for the Monte-Carlo criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence on 50 random models", oracle_equivalence},
        {"FDVF constructions solve M_F V = V_S", fdvf_closure},
        {"Sigma_F doubly stochastic with sigma_max 1", doubly_stochastic},
        {"on-policy all-one identities", onpolicy_identities},
        {"revealing-future and one-hot fixtures", reveal_and_mdp},
        {"coverage inequality suite on 50 random models", inequality_suite},
        {"evaluation error identity for 100 random V", error_identity},
        {"singular-value scaling on the near-uniform fixture", sigma_scaling},
        {"IV lower bound for the eigen-adversarial V", iv_lower_bound_check},
        {"minimax estimator rates", [&] { return estimator_rates(threads); }},
        {"IS vs MIS on the long-horizon chain", [&] { return exponential_gap(threads); }},
        {"byte-identical verify/study outputs", [&] { return determinism(cli, work); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("%s %2zu  %-52s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
