#include "opelab/study.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

#include "opelab/coverage.hpp"
#include "opelab/errors.hpp"
#include "opelab/exact.hpp"
#include "opelab/format.hpp"
#include "opelab/simulator.hpp"

namespace opelab {

const std::vector<std::string>& study_estimators() {
    static const std::vector<std::string> names{"minimax", "mis", "mis-mom", "is", "pd-is", "plugin"};
    return names;
}

void validate_study_config(const StudyConfig& config) {
    const auto& kinds = fixture_kinds();
    if (std::find(kinds.begin(), kinds.end(), config.fixture) == kinds.end())
        throw ConfigError("unknown fixture kind '" + config.fixture + "'");
    if (config.n_grid.empty()) throw ConfigError("n grid is empty");
    for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
        if (config.n_grid[i] == 0) throw ConfigError("n grid entries must be positive");
        if (i > 0 && config.n_grid[i] <= config.n_grid[i - 1]) throw ConfigError("n grid must be strictly increasing");
    }
    if (config.seeds < 30) throw ConfigError("a study needs at least 30 seeds, got " + std::to_string(config.seeds));
    if (config.estimators.empty()) throw ConfigError("no estimators requested");
    const auto& names = study_estimators();
    std::set<std::string> seen;
    for (const std::string& e : config.estimators) {
        if (std::find(names.begin(), names.end(), e) == names.end())
            throw ConfigError("unknown estimator '" + e + "'");
        if (!seen.insert(e).second) throw ConfigError("estimator '" + e + "' listed twice");
    }
    if (config.classes.perturbations < 0) throw ConfigError("perturbation count must be >= 0");
    if (config.mom_blocks < 0) throw ConfigError("mom_blocks must be >= 0");
    if (!(config.delta > 0.0 && config.delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    if (config.threads < 1) throw ConfigError("threads must be >= 1");
}

Json study_config_to_json(const StudyConfig& c) {
    return Json{{"fixture", c.fixture},
                {"fixture_seed", c.fixture_seed},
                {"n_grid", c.n_grid},
                {"seeds", c.seeds},
                {"root_seed", c.root_seed},
                {"estimators", c.estimators},
                {"perturbations", c.classes.perturbations},
                {"magnitude", c.classes.magnitude},
                {"class_seed", c.classes.seed},
                {"mom_blocks", c.mom_blocks},
                {"delta", c.delta},
                {"c", c.c},
                {"threads", c.threads}};
}

StudyConfig study_config_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("study config must be a JSON object");
    StudyConfig c;
    const Json defaults = study_config_to_json(c);
    for (const auto& [key, _] : j.items())
        if (!defaults.contains(key)) throw ParseError("study config has unknown field '" + key + "'");
    auto get = [&](const char* key, auto& out) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(out);
        } catch (const Json::exception& e) {
            throw ParseError(std::string("study config field '") + key + "' has the wrong type: " + e.what());
        }
    };
    get("fixture", c.fixture);
    get("fixture_seed", c.fixture_seed);
    get("n_grid", c.n_grid);
    get("seeds", c.seeds);
    get("root_seed", c.root_seed);
    get("estimators", c.estimators);
    get("perturbations", c.classes.perturbations);
    get("magnitude", c.classes.magnitude);
    get("class_seed", c.classes.seed);
    get("mom_blocks", c.mom_blocks);
    get("delta", c.delta);
    get("c", c.c);
    get("threads", c.threads);
    return c;
}

Fixture study_fixture(const StudyConfig& config) {
    const FixtureParams params = config.fixture == "random" ? random_dimensions(config.fixture_seed) : FixtureParams{};
    return generate_fixture(config.fixture, params, config.fixture_seed);
}

const StudyRow* StudyResult::find(const std::string& estimator, std::size_t n) const {
    for (const StudyRow& r : rows)
        if (r.estimator == estimator && r.n == n) return &r;
    return nullptr;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return std::nan("");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) return std::nan("");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

StudyResult run_convergence_study(const StudyConfig& config) {
    validate_study_config(config);
    return run_convergence_study(study_fixture(config), config);
}

StudyResult run_convergence_study(const Fixture& fx, const StudyConfig& config) {
    validate_study_config(config);
    const ExactAnalysis ex = analyze(fx.model, fx.pi_e, fx.pi_b);
    const FunctionClasses cls = build_classes(ex, config.classes);
    const std::size_t E = config.estimators.size(), N = config.n_grid.size(), K = config.seeds;
    const std::size_t n_max = config.n_grid.back();

    // est[(e * N + i) * K + k]
    std::vector<double> est(E * N * K);
    auto run_seed = [&](std::size_t k) {
        SampleOptions opt;
        opt.keep_latent = false;
        const TrajectoryDataset data = sample_dataset(fx.model, fx.pi_b, n_max, config.root_seed + k, opt);
        for (std::size_t i = 0; i < N; ++i) {
            const SampleSet s = samples_from_view(ObservedView(data, config.n_grid[i]), fx.model.space(), fx.pi_e);
            for (std::size_t e = 0; e < E; ++e) {
                const std::string& name = config.estimators[e];
                double value = 0.0;
                if (name == "minimax") {
                    value = minimax_fdvf_estimate(s, cls.v, cls.xi).estimate;
                } else if (name == "mis") {
                    value = mis_estimate(s, cls.v, cls.w).estimate;
                } else if (name == "mis-mom") {
                    MomOptions mom;
                    mom.blocks = std::min<int>(config.mom_blocks, static_cast<int>(s.size()));
                    mom.delta = config.delta;
                    value = mis_estimate(s, cls.v, cls.w, mom).estimate;
                } else if (name == "is") {
                    value = is_estimate(s, IsMode::FullTrajectory);
                } else if (name == "pd-is") {
                    value = is_estimate(s, IsMode::PerDecision);
                } else {
                    value = plug_in_estimate(s, cls.v.members.front());
                }
                est[(e * N + i) * K + k] = value;
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(config.threads, 1, K);
    if (workers == 1) {
        for (std::size_t k = 0; k < K; ++k) run_seed(k);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t k = w; k < K; k += workers) run_seed(k);
            });
        for (auto& t : pool) t.join();
    }

    // Bound overlays; NaN when the coverage report cannot be formed.
    std::vector<double> thm2(N, std::nan("")), thm3(N, std::nan(""));
    try {
        const CoverageReport report = coverage_report(ex);
        const RealizabilitySurrogates eps = realizability_surrogates(ex, cls.v, cls.w);
        for (std::size_t i = 0; i < N; ++i) {
            BoundInputs in;
            in.n = static_cast<double>(config.n_grid[i]);
            in.delta = config.delta;
            in.c = config.c;
            in.class_size_v = static_cast<double>(cls.v.members.size());
            in.class_size_aux = static_cast<double>(cls.xi.members.size());
            thm2[i] = bound_evaluation(2, report, ex.horizon(), in).value;
            in.class_size_aux = static_cast<double>(cls.w.members.size());
            in.eps_v = eps.eps_v;
            in.eps_w = eps.eps_w;
            thm3[i] = bound_evaluation(3, report, ex.horizon(), in).value;
        }
    } catch (const ConditioningError&) {
    }

    StudyResult result;
    result.fixture = fx.name;
    result.truth = policy_value(fx.model, fx.pi_e);
    std::vector<double> ns;
    for (std::size_t n : config.n_grid) ns.push_back(static_cast<double>(n));
    for (std::size_t e = 0; e < E; ++e) {
        std::vector<double> rmse;
        const std::size_t first = result.rows.size();
        for (std::size_t i = 0; i < N; ++i) {
            StudyRow row;
            row.estimator = config.estimators[e];
            row.n = config.n_grid[i];
            row.seed_count = config.seeds;
            row.estimates.assign(est.begin() + (e * N + i) * K, est.begin() + (e * N + i + 1) * K);
            double sum = 0.0, sq = 0.0;
            for (double v : row.estimates) {
                sum += v;
                sq += (v - result.truth) * (v - result.truth);
            }
            row.mean = sum / K;
            row.rmse = std::sqrt(sq / K);
            row.bound_thm2 = thm2[i];
            row.bound_thm3 = thm3[i];
            rmse.push_back(row.rmse);
            result.rows.push_back(std::move(row));
        }
        const double slope = loglog_slope(ns, rmse);
        for (std::size_t r = first; r < result.rows.size(); ++r) result.rows[r].slope = slope;
    }
    return result;
}

std::string study_to_csv(const StudyResult& result) {
    std::ostringstream os;
    os << "fixture,estimator,n,seed_count,mean,rmse,slope,bound_thm2,bound_thm3\n";
    for (const StudyRow& r : result.rows)
        os << csv_field(result.fixture) << ',' << csv_field(r.estimator) << ',' << r.n << ',' << r.seed_count << ','
           << format_double(r.mean) << ',' << format_double(r.rmse) << ',' << format_double(r.slope) << ','
           << format_double(r.bound_thm2) << ',' << format_double(r.bound_thm3) << '\n';
    return os.str();
}

Json study_to_json(const StudyResult& result) {
    Json rows = Json::array();
    for (const StudyRow& r : result.rows) {
        Json estimates = Json::array();
        for (double v : r.estimates) estimates.push_back(format_double(v));
        rows.push_back({{"estimator", r.estimator},
                        {"n", r.n},
                        {"seed_count", r.seed_count},
                        {"mean", format_double(r.mean)},
                        {"rmse", format_double(r.rmse)},
                        {"slope", format_double(r.slope)},
                        {"bound_thm2", format_double(r.bound_thm2)},
                        {"bound_thm3", format_double(r.bound_thm3)},
                        {"estimates", estimates}});
    }
    return Json{{"fixture", result.fixture}, {"truth", format_double(result.truth)}, {"rows", rows}};
}

StudyResult study_from_json(const Json& j) {
    try {
        StudyResult result;
        result.fixture = j.at("fixture").get<std::string>();
        result.truth = parse_double(j.at("truth").get<std::string>());
        for (const Json& r : j.at("rows")) {
            StudyRow row;
            row.estimator = r.at("estimator").get<std::string>();
            row.n = r.at("n").get<std::size_t>();
            row.seed_count = r.at("seed_count").get<int>();
            row.mean = parse_double(r.at("mean").get<std::string>());
            row.rmse = parse_double(r.at("rmse").get<std::string>());
            row.slope = parse_double(r.at("slope").get<std::string>());
            row.bound_thm2 = parse_double(r.at("bound_thm2").get<std::string>());
            row.bound_thm3 = parse_double(r.at("bound_thm3").get<std::string>());
            for (const Json& v : r.at("estimates")) row.estimates.push_back(parse_double(v.get<std::string>()));
            result.rows.push_back(std::move(row));
        }
        return result;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("malformed study result: ") + e.what());
    }
}

}  // namespace opelab
