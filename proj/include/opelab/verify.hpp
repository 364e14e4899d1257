#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "opelab/exact.hpp"
#include "opelab/fixtures.hpp"
#include "opelab/model_io.hpp"

namespace opelab {

struct CheckRow {
    std::string check;
    std::string fixture;
    int step = 0;  // 1-based; 0 for fixture-wide checks
    std::string status;  // pass | fail | skipped
    double achieved = 0.0;
    double tolerance = 0.0;
    std::string note;
};

struct SuiteOptions {
    int threads = 1;
    std::uint64_t seed = 0;  // random test functions
    double c_stoch = 2.0;
    /// Added to every parameter of the linear FDVFs before the residual checks; 0 leaves them intact.
    double fdvf_perturbation = 0.0;
    EngineOptions engine;
};

struct SuiteReport {
    std::vector<CheckRow> rows;
    std::size_t failures() const;
    bool passed() const { return failures() == 0; }
};

/// Names of every check the suite runs, in execution order.
std::vector<std::string> check_registry();

/// Runs every registered check on every fixture. Failures are rows, not exceptions;
/// an exception inside a check becomes a failing row carrying its message.
/// Fixtures are processed in parallel but rows keep fixture order.
SuiteReport run_verification_suite(const std::vector<Fixture>& fixtures, const SuiteOptions& options = {});

/// Columns: check, fixture, step, status, achieved, tolerance, note.
std::string suite_to_csv(const SuiteReport& report);
Json suite_to_json(const SuiteReport& report);

}  // namespace opelab
