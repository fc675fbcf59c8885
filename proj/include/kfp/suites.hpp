#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "kfp/config.hpp"

namespace kfp {

// Result of one experiment suite: a JSON report, one CSV body, and the
// aggregate verdict flags the CLI turns into exit codes.
struct SuiteOutcome {
    nlohmann::json report;
    std::string csv;
    bool invariants_ok = true;
};

SuiteOutcome run_geometry_suite(const ExperimentConfig& cfg);
SuiteOutcome run_solve_suite(const ExperimentConfig& cfg);
SuiteOutcome run_estimate_suite(const ExperimentConfig& cfg);
SuiteOutcome run_poincare_suite(const ExperimentConfig& cfg);
SuiteOutcome run_kernel_suite(const ExperimentConfig& cfg);
SuiteOutcome run_multiplier_suite(const ExperimentConfig& cfg);
SuiteOutcome run_maximal_sharp_suite(const ExperimentConfig& cfg);

// writes <out>/<suite>.json and <out>/<suite>.csv (creating the directory)
void write_outcome(const ExperimentConfig& cfg, const std::string& suite,
                   const SuiteOutcome& outcome);

const std::map<std::string, SuiteOutcome (*)(const ExperimentConfig&)>& suite_registry();

}  // namespace kfp
