#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dfc/core_model.hpp"

namespace dfc {

// Named scalar inside a controller. Accepted names: "tau", "tau_q",
// "K(i,j)" / "K1(i,j)" zero-based, and for single-input plants the short
// forms "k1".."k9" (entries of K) and "k11" (the scalar K1).
struct ParamRef {
    enum class Kind { K, K1, Tau, TauQ };
    Kind kind = Kind::Tau;
    int row = 0;
    int col = 0;
};

ParamRef resolve_parameter(const std::string& name, int n, int m, int r);
double get_parameter(const DelayedFeedbackController& ctrl, const ParamRef& ref);
void set_parameter(DelayedFeedbackController& ctrl, const ParamRef& ref, double value);

enum class Coupling {
    None,
    K2NegInvTauQ,  // K2 = -(1/tau_q) I, recomputed whenever tau_q moves
};

void apply_coupling(DelayedFeedbackController& ctrl, Coupling coupling);

struct Schedule {
    double T0 = 1.0;
    double gamma = 0.97;
};

struct TuneSpec {
    std::vector<std::string> free_parameters;
    std::map<std::string, std::pair<double, double>> bounds;  // missing names get defaults
    Coupling coupling = Coupling::None;
    double threshold = -1.0;
    int max_iterations = 2000;
    unsigned long long seed = 1;
    Schedule schedule;
    int restarts = 1;

    // default bounds: gains in [-10, 10], delays in [0.01, 2]
    std::pair<double, double> bounds_for(const std::string& name, const ParamRef& ref) const;
    void validate(const Plant& plant) const;
};

struct TraceRecord {
    int iteration = 0;
    double temperature = 0.0;
    std::vector<double> candidate;
    double candidate_cost = 0.0;
    double best_cost = 0.0;
};

struct TuneTrace {
    std::vector<std::string> parameter_names;
    std::vector<TraceRecord> records;
    std::vector<double> best_parameters;
    double best_cost = 0.0;
    bool reached_threshold = false;
    bool any_finite = false;  // false: every candidate evaluated to +inf
};

struct AnnealResult {
    DelayedFeedbackController best;
    TuneTrace trace;
    bool success = false;  // threshold reached with a finite cost
};

// Spectral abscissa of the closed loop after applying `params` to the
// template; +inf when the spectrum yields no validated roots.
double cost(const Plant& plant, const DelayedFeedbackController& tmpl, const TuneSpec& spec,
            const std::vector<double>& params);

// Metropolis chain with per-parameter Gaussian proposals (sd proportional to
// interval width times T/T0), reflection at the bounds, geometric cooling,
// early stop at the threshold. Deterministic for a fixed seed.
AnnealResult anneal(const TuneSpec& spec, const Plant& plant,
                    const DelayedFeedbackController& tmpl);

// Generic core used by anneal; exposed for optimizer sanity problems.
TuneTrace anneal_minimize(const std::vector<std::string>& names, const std::vector<double>& x0,
                          const std::vector<std::pair<double, double>>& bounds,
                          const std::function<double(const std::vector<double>&)>& cost_fn,
                          double threshold, int max_iterations, unsigned long long seed,
                          const Schedule& schedule);

// iter,T,cost,best_cost,<param columns>
void write_trace_csv(const std::string& path, const TuneTrace& trace);

}  // namespace dfc
