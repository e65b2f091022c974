#pragma once

#include <optional>
#include <string>

#include "dfc/core_model.hpp"
#include "dfc/signal.hpp"
#include "dfc/tuner.hpp"

namespace dfc {

// Parsed and cross-validated experiment description (JSON file). Unknown
// keys are rejected; matrix dimensions are checked at load time.
struct ExperimentConfig {
    std::optional<Plant> plant;
    std::optional<DelayedFeedbackController> controller;
    Signal r, d1, d2;
    double horizon = 60.0;
    double step = 0.0;  // 0: default rule min(delay)/20 capped at 1e-2
    std::optional<TuneSpec> tune;
    std::string out_dir = "out";
    bool plots = false;
};

// Throws std::runtime_error with a field-qualified message on any problem.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "config");

// Controller section as a JSON fragment that load_config accepts back
// unchanged (full double round-trip).
std::string controller_json(const DelayedFeedbackController& ctrl);

}  // namespace dfc
