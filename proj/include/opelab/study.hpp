#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opelab/estimators.hpp"
#include "opelab/fixtures.hpp"
#include "opelab/model_io.hpp"

namespace opelab {

/// Estimator names: minimax, mis, mis-mom, is, pd-is, plugin.
const std::vector<std::string>& study_estimators();

struct StudyConfig {
    std::string fixture = "bandit";
    std::uint64_t fixture_seed = 0;  // random kind also draws its dimensions from it
    std::vector<std::size_t> n_grid{100, 1000, 10000};
    int seeds = 100;
    std::uint64_t root_seed = 0;  // seed k samples its dataset with root_seed + k
    std::vector<std::string> estimators{"minimax", "mis"};
    ClassSpec classes;
    int mom_blocks = 0;  // mis-mom; 0 picks default_mom_blocks
    double delta = 0.05;
    double c = 1.0;  // absolute constant in the bound overlays
    int threads = 1;
};

/// Checks names, grid and seed count (>= 30). Throws ConfigError.
void validate_study_config(const StudyConfig& config);
Json study_config_to_json(const StudyConfig& config);
/// Missing fields keep their defaults; unknown fields raise ParseError.
StudyConfig study_config_from_json(const Json& j);

struct StudyRow {
    std::string estimator;
    std::size_t n = 0;
    int seed_count = 0;
    double mean = 0.0;
    double rmse = 0.0;
    double slope = 0.0;  // least-squares slope of log rmse on log n, shared by the estimator's rows
    double bound_thm2 = 0.0;
    double bound_thm3 = 0.0;
    std::vector<double> estimates;  // per seed
};

struct StudyResult {
    std::string fixture;
    double truth = 0.0;
    std::vector<StudyRow> rows;  // estimator-major, n ascending within an estimator
    const StudyRow* find(const std::string& estimator, std::size_t n) const;
};

/// Seeds run in parallel; reduction order is fixed, so results do not depend on threads.
StudyResult run_convergence_study(const StudyConfig& config);
StudyResult run_convergence_study(const Fixture& fixture, const StudyConfig& config);

/// Fixture named by the config, with random dimensions for the random kind.
Fixture study_fixture(const StudyConfig& config);

/// Slope of log y on log x. NaN with fewer than two points or a non-positive y.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Columns: fixture, estimator, n, seed_count, mean, rmse, slope, bound_thm2, bound_thm3.
std::string study_to_csv(const StudyResult& result);
/// Numbers are stored as 17-digit decimal strings, so json -> result -> json is byte-identical.
Json study_to_json(const StudyResult& result);
StudyResult study_from_json(const Json& j);

}  // namespace opelab
