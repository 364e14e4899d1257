// Command-line front end. Exit codes: 0 ok, 1 a check failed, 2 usage or IO error.
#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "opelab/coverage.hpp"
#include "opelab/errors.hpp"
#include "opelab/estimators.hpp"
#include "opelab/exact.hpp"
#include "opelab/fdvf.hpp"
#include "opelab/fixtures.hpp"
#include "opelab/format.hpp"
#include "opelab/model_io.hpp"
#include "opelab/reports.hpp"
#include "opelab/simulator.hpp"
#include "opelab/study.hpp"
#include "opelab/verify.hpp"

using namespace opelab;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    Id budget = Id{1} << 20;
    double tol = 1e-8;
    std::string out_dir;
    int threads = 1;

    EngineOptions engine() const {
        EngineOptions e;
        e.budget = budget;
        return e;
    }
};

struct Inputs {
    std::string fixture;
    std::uint64_t fixture_seed = 0;
    std::string model, pie, pib;

    void add_to(CLI::App* cmd, bool need_pib = true) {
        cmd->add_option("--fixture", fixture, "Built-in fixture kind")
            ->check(CLI::IsMember(fixture_kinds()));
        cmd->add_option("--fixture-seed", fixture_seed, "Seed for the fixture generator");
        cmd->add_option("--model", model, "Model JSON file")->check(CLI::ExistingFile);
        cmd->add_option("--pie", pie, "Evaluation policy JSON file")->check(CLI::ExistingFile);
        if (need_pib) cmd->add_option("--pib", pib, "Behavior policy JSON file")->check(CLI::ExistingFile);
    }

    Fixture load() const {
        if (!fixture.empty()) {
            if (!model.empty()) throw ConfigError("give either --fixture or --model, not both");
            const FixtureParams params = fixture == "random" ? random_dimensions(fixture_seed) : FixtureParams{};
            return generate_fixture(fixture, params, fixture_seed);
        }
        if (model.empty() || pie.empty() || pib.empty())
            throw ConfigError("need --fixture, or all of --model, --pie and --pib");
        Fixture fx{"custom", load_model(model), load_policy(pie), load_policy(pib), {}};
        return fx;
    }
};

class CheckFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Writes to out-dir/name, or to stdout when no out-dir was given.
void emit(const Globals& g, const std::string& name, const std::string& text) {
    if (g.out_dir.empty()) {
        std::cout << text;
        return;
    }
    std::filesystem::create_directories(g.out_dir);
    const std::string path = (std::filesystem::path(g.out_dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
    if (!out) throw ConfigError("write to '" + path + "' failed");
    std::cerr << "wrote " << path << '\n';
}

void emit_json(const Globals& g, const std::string& name, const Json& j) { emit(g, name, j.dump(2) + "\n"); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Off-policy evaluation laboratory for tabular POMDPs"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Root seed")->capture_default_str();
    app.add_option("--budget", g.budget, "Per-step cap on enumerated histories/futures")->capture_default_str();
    app.add_option("--tol", g.tol, "Residual tolerance for construct and exact --brute-force")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "Directory for output files (default: stdout)");
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

    // validate
    Inputs validate_in;
    bool do_export = false;
    auto* validate = app.add_subcommand("validate", "Structural and rank/positivity checks");
    validate_in.add_to(validate);
    validate->add_flag("--export", do_export, "Also write model.json, pi_e.json and pi_b.json");

    // exact
    Inputs exact_in;
    bool exact_json = false, exact_brute = false;
    auto* exact = app.add_subcommand("exact", "Exact values, beliefs and outcome matrices");
    exact_in.add_to(exact);
    exact->add_flag("--json", exact_json, "Write the full analysis as exact.json");
    exact->add_flag("--brute-force", exact_brute, "Cross-check J(pi_e) by path enumeration");

    // coverage
    Inputs coverage_in;
    auto* coverage = app.add_subcommand("coverage", "Coverage coefficients per step");
    coverage_in.add_to(coverage);

    // construct
    Inputs construct_in;
    std::string construction = "all";
    bool with_weights = false;
    auto* construct = app.add_subcommand("construct", "Future-dependent value functions and history weights");
    construct_in.add_to(construct);
    construct->add_option("--construction", construction, "is|pinv|l2_weighted|reward_weighted|prior_weighted|all")
        ->capture_default_str();
    construct->add_flag("--weights", with_weights, "Include the effective history weights");

    // simulate
    Inputs simulate_in;
    std::size_t sim_n = 1000;
    std::string sim_out;
    bool no_latent = false;
    auto* simulate = app.add_subcommand("simulate", "Sample trajectories under pi_b");
    simulate_in.add_to(simulate);
    simulate->add_option("-n,--n", sim_n, "Number of trajectories")->capture_default_str();
    simulate->add_option("--out", sim_out, "JSONL path (default: out-dir/data.jsonl or stdout)");
    simulate->add_flag("--no-latent", no_latent, "Drop latent states");

    // estimate
    Inputs estimate_in;
    std::string data_path, method = "minimax";
    int mom_blocks = -1;
    ClassSpec classes;
    auto* estimate = app.add_subcommand("estimate", "Estimate J(pi_e) from a dataset");
    estimate_in.add_to(estimate);
    estimate->add_option("--data", data_path, "Dataset JSONL")->required()->check(CLI::ExistingFile);
    estimate->add_option("--method", method, "minimax|mis|is|pd-is|plugin")
        ->check(CLI::IsMember({"minimax", "mis", "is", "pd-is", "plugin"}))
        ->capture_default_str();
    estimate->add_option("--mom-blocks", mom_blocks, "Median-of-means blocks for mis (0: default count)");
    estimate->add_option("--perturbations", classes.perturbations, "Extra class members")->capture_default_str();
    estimate->add_option("--magnitude", classes.magnitude, "Perturbation size")->capture_default_str();
    estimate->add_option("--class-seed", classes.seed, "Seed for the class perturbations")->capture_default_str();

    // verify
    Inputs verify_in;
    int random_count = 20;
    double perturb = 0.0;
    auto* verify = app.add_subcommand("verify", "Run every registered check");
    verify_in.add_to(verify);
    verify->add_option("--random", random_count, "Random fixtures added to the default set")->capture_default_str();
    verify->add_option("--perturb", perturb, "Offset added to every linear FDVF parameter");
    double c_stoch = 2.0;
    verify->add_option("--c-stoch", c_stoch, "C_stoch for the singular-value scaling check")->capture_default_str();

    // study
    std::string study_config_path, study_fixture;
    std::vector<std::size_t> n_grid;
    std::vector<std::string> study_est;
    int study_seeds = 0;
    std::uint64_t study_fixture_seed = 0;
    auto* study = app.add_subcommand("study", "Monte-Carlo convergence study");
    study->add_option("--config", study_config_path, "Study config JSON")->check(CLI::ExistingFile);
    study->add_option("--fixture", study_fixture, "Fixture kind")->check(CLI::IsMember(fixture_kinds()));
    study->add_option("--fixture-seed", study_fixture_seed, "Seed for the fixture generator");
    study->add_option("--n-grid", n_grid, "Sample sizes");
    study->add_option("--seeds", study_seeds, "Seed count (>= 30)");
    study->add_option("--estimators", study_est, "Subset of minimax, mis, mis-mom, is, pd-is, plugin");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) {
            const Fixture fx = validate_in.load();
            ValidationReport r = validate_model(fx.model);
            validate_policy(fx.pi_e, fx.model, r, "pi_e");
            validate_policy(fx.pi_b, fx.model, r, "pi_b");
            if (r.all_passed()) assess_assumptions(analyze(fx.model, fx.pi_e, fx.pi_b, g.engine()), r);
            emit_json(g, "validation.json", validation_to_json(r));
            if (do_export) {
                if (g.out_dir.empty()) throw ConfigError("--export needs --out-dir");
                emit_json(g, "model.json", model_to_json(fx.model));
                emit_json(g, "pi_e.json", policy_to_json(fx.pi_e));
                emit_json(g, "pi_b.json", policy_to_json(fx.pi_b));
            }
            if (!r.all_passed()) throw CheckFailed("validation failed");
        } else if (exact->parsed()) {
            const Fixture fx = exact_in.load();
            const ExactAnalysis ex = analyze(fx.model, fx.pi_e, fx.pi_b, g.engine());
            const double j = policy_value(fx.model, fx.pi_e);
            std::cout << "J_e " << format_double(j) << "\nJ_b " << format_double(policy_value(fx.model, fx.pi_b))
                      << '\n';
            if (exact_json) emit_json(g, "exact.json", exact_to_json(ex));
            if (exact_brute) {
                EngineOptions e = g.engine();
                const double bf = brute_force_J(fx.model, fx.pi_e, e);
                std::cout << "brute_force " << format_double(bf) << '\n';
                if (std::abs(bf - j) > g.tol) throw CheckFailed("enumeration disagrees with the recursion");
            }
        } else if (coverage->parsed()) {
            const Fixture fx = coverage_in.load();
            const CoverageReport r = coverage_report(analyze(fx.model, fx.pi_e, fx.pi_b, g.engine()));
            emit(g, "coverage.csv", coverage_to_csv(r));
            if (!g.out_dir.empty()) emit_json(g, "coverage.json", coverage_to_json(r));
        } else if (construct->parsed()) {
            const Fixture fx = construct_in.load();
            const ExactAnalysis ex = analyze(fx.model, fx.pi_e, fx.pi_b, g.engine());
            std::vector<Construction> which;
            if (construction == "all") {
                which = {Construction::ImportanceSampling, Construction::PseudoInverse, Construction::L2Weighted,
                         Construction::RewardWeighted, Construction::PriorWeighted};
            } else {
                which = {parse_construction(construction)};
            }
            Json out{{"fixture", fx.name}, {"fdvf", Json::array()}};
            bool ok = true;
            for (Construction c : which) {
                Json j = fdvf_to_json(ex, construct_fdvf(ex, c));
                ok = ok && j["residual"].get<double>() <= g.tol;
                out["fdvf"].push_back(std::move(j));
            }
            if (with_weights) {
                Json j = history_weights_to_json(ex, construct_history_weights(ex));
                ok = ok && j["residual"].get<double>() <= g.tol;
                out["history_weights"] = std::move(j);
            }
            emit_json(g, "construct.json", out);
            if (!ok) throw CheckFailed("a construction misses its defining identity");
        } else if (simulate->parsed()) {
            const Fixture fx = simulate_in.load();
            SampleOptions opt;
            opt.keep_latent = !no_latent;
            opt.threads = g.threads;
            const TrajectoryDataset d = sample_dataset(fx.model, fx.pi_b, sim_n, g.seed, opt);
            if (!sim_out.empty()) {
                write_dataset(sim_out, d);
                std::cerr << "wrote " << sim_out << '\n';
            } else {
                emit(g, "data.jsonl", dataset_to_jsonl(d));
            }
        } else if (estimate->parsed()) {
            const Fixture fx = estimate_in.load();
            const ExactAnalysis ex = analyze(fx.model, fx.pi_e, fx.pi_b, g.engine());
            const TrajectoryDataset d = read_dataset(data_path, &fx.model);
            const SampleSet s = samples_from_view(ObservedView(d), fx.model.space(), fx.pi_e);
            EstimateReport r;
            if (method == "is" || method == "pd-is") {
                r.method = method;
                r.estimate = is_estimate(s, method == "is" ? IsMode::FullTrajectory : IsMode::PerDecision);
            } else {
                const FunctionClasses cls = build_classes(ex, classes);
                if (method == "minimax") {
                    r = minimax_fdvf_estimate(s, cls.v, cls.xi);
                } else if (method == "mis") {
                    std::optional<MomOptions> mom;
                    if (mom_blocks >= 0) mom = MomOptions{mom_blocks, 0.05};
                    r = mis_estimate(s, cls.v, cls.w, mom);
                } else {
                    r.method = "plugin";
                    r.estimate = plug_in_estimate(s, cls.v.members.front());
                    r.v_index = 0;
                }
            }
            r.n = s.size();
            r.seed = d.seed;
            emit_json(g, "estimate.json", estimate_to_json(r));
        } else if (verify->parsed()) {
            std::vector<Fixture> fixtures;
            if (!verify_in.fixture.empty() || !verify_in.model.empty()) {
                fixtures.push_back(verify_in.load());
            } else {
                fixtures = default_fixture_set(g.seed);
                for (int i = 0; i < random_count; ++i) {
                    const std::uint64_t s = g.seed + static_cast<std::uint64_t>(i);
                    Fixture fx = generate_fixture("random", random_dimensions(s), s);
                    fx.name = "random-" + std::to_string(s);
                    fixtures.push_back(std::move(fx));
                }
            }
            SuiteOptions opt;
            opt.threads = g.threads;
            opt.seed = g.seed;
            opt.c_stoch = c_stoch;
            opt.fdvf_perturbation = perturb;
            opt.engine = g.engine();
            const SuiteReport r = run_verification_suite(fixtures, opt);
            emit(g, "verify.csv", suite_to_csv(r));
            if (!g.out_dir.empty()) emit_json(g, "verify.json", suite_to_json(r));
            std::cerr << r.rows.size() << " rows, " << r.failures() << " failures\n";
            if (!r.passed()) throw CheckFailed("verification failed");
        } else if (study->parsed()) {
            StudyConfig c;
            if (!study_config_path.empty()) c = study_config_from_json(read_json_file(study_config_path));
            if (!study_fixture.empty()) c.fixture = study_fixture;
            if (study->count("--fixture-seed")) c.fixture_seed = study_fixture_seed;
            if (!n_grid.empty()) c.n_grid = n_grid;
            if (study_seeds > 0) c.seeds = study_seeds;
            if (!study_est.empty()) c.estimators = study_est;
            if (app.count("--seed")) c.root_seed = g.seed;
            if (app.count("--threads")) c.threads = g.threads;
            const StudyResult r = run_convergence_study(c);
            emit(g, "study.csv", study_to_csv(r));
            if (!g.out_dir.empty()) emit_json(g, "study.json", study_to_json(r));
        }
    } catch (const CheckFailed& e) {
        std::cerr << "check failed: " << e.what() << '\n';
        return 1;
    } catch (const ConditioningError& e) {
        std::cerr << "check failed: " << e.what() << '\n';
        return 1;
    } catch (const ActionCoverageError& e) {
        std::cerr << "check failed: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
