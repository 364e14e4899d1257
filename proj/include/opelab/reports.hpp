#pragma once

#include <string>

#include "opelab/coverage.hpp"
#include "opelab/estimators.hpp"
#include "opelab/exact.hpp"
#include "opelab/fdvf.hpp"
#include "opelab/model_io.hpp"

namespace opelab {

// JSON/CSV forms of the analysis objects for the command line. Steps are 1-based.

Json validation_to_json(const ValidationReport& report);
/// Values, occupancies, beliefs and outcome matrices per step.
Json exact_to_json(const ExactAnalysis& ex);
/// Columns: step, c_fv, c_fu, c_finf, c_h2, c_hinf, sigma_min_mf, sigma_max_sf, sigma_min_sh,
/// latent_ratio_max, latent_ratio_second.
std::string coverage_to_csv(const CoverageReport& report);
Json coverage_to_json(const CoverageReport& report);
/// Tables, linear parameters when present, norms and the defining residual.
Json fdvf_to_json(const ExactAnalysis& ex, const FdvfSolution& solution);
Json history_weights_to_json(const ExactAnalysis& ex, const HistoryWeights& weights);
Json estimate_to_json(const EstimateReport& report);

}  // namespace opelab
