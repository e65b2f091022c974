#pragma once

#include <string>
#include <vector>

#include "dfc/analysis.hpp"

namespace dfc {

struct CriterionResult {
    int id = 0;
    std::string label;
    bool pass = false;
    std::string detail;
};

struct ReproduceOptions {
    std::string out_dir;  // empty: evaluate only, write nothing
    bool plots = false;
};

struct ReproduceReport {
    std::vector<CriterionResult> criteria;
    ComparisonTable table;

    bool all_pass() const;
    std::string summary() const;  // one PASS/FAIL line per criterion
};

// Runs the full case-study reproduction: both published designs, the matched
// baseline, every comparison-table scenario, the spectrum/integrator/tuner
// validation checks; optionally writes the artifact set (roots, trajectories,
// table, tuning trace, criteria summary) into out_dir.
ReproduceReport run_acceptance(const ReproduceOptions& opt = {});

}  // namespace dfc
