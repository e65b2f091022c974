#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dfc/core_model.hpp"
#include "dfc/signal.hpp"

namespace dfc {

// Outcome of a final-value computation for one input scenario.
enum class LimitKind {
    Rejected,  // error settles to zero
    Settles,   // error settles to a nonzero value (e_limit)
    Diverges,  // error grows without bound
};

struct LimitResult {
    LimitKind kind = LimitKind::Rejected;
    Vector e_limit;                 // settled output error (zero when Rejected)
    std::optional<Vector> x_limit;  // settled state when it exists
};

// Exact final values from the truncated Laurent expansion of Delta(s)^{-1}
// about s = 0. `k` is the Laplace order of the input (1 step, 2 ramp,
// 3 parabola, ...). Directions default to the all-ones vectors.
LimitResult final_value_d1(const Plant& plant, const DelayedFeedbackController& ctrl, int k,
                           const Vector& V = Vector());
LimitResult final_value_d2(const Plant& plant, const DelayedFeedbackController& ctrl, int k,
                           const Vector& V = Vector());
LimitResult final_value_reference(const Plant& plant, const DelayedFeedbackController& ctrl, int k,
                                  const Vector& M = Vector());

struct D1Prediction {
    int max_rejected_order = 0;       // largest k with D1 = V/s^k rejected
    std::optional<Vector> x_limit;    // state limit at the first non-rejected order
    std::optional<Vector> e_limit;    // output limit at the first non-rejected order
};

struct D2Prediction {
    bool step_rejected = false;
    bool ramp_rejected = false;
    std::optional<Vector> e_limit;  // settled output under ramp when not rejected
};

struct TrackingPrediction {
    bool step_tracked = false;
    bool ramp_tracked = false;
    std::optional<Vector> e_limit;  // Eq.-(33)-style ramp error when not tracked
    bool limit_undefined = false;   // singular A: use simulation
};

// Rejection orders and limits per the delay-feedback conditions; all three
// refuse (throw) when the closed loop is unstable.
D1Prediction predict_d1(const Plant& plant, const DelayedFeedbackController& ctrl);
D2Prediction predict_d2(const Plant& plant, const DelayedFeedbackController& ctrl);
TrackingPrediction predict_tracking(const Plant& plant, const DelayedFeedbackController& ctrl);

struct PredictionReport {
    int d1_max_rejected_laplace_order = 0;
    bool d2_step_rejected = false;
    bool d2_ramp_rejected = false;
    bool ramp_reference_tracked = false;
    std::optional<Vector> d1_ss_error;
    std::optional<Vector> d2_ramp_ss_error;
    std::optional<Vector> ramp_tracking_error;
    double condition_det = 0.0;  // det(I + K2 tau_q)
    bool condition_full = false; // I + K2 tau_q == 0 entrywise
};

PredictionReport predict(const Plant& plant, const DelayedFeedbackController& ctrl);

// Single-input Ackermann pole placement on the augmented pair; returns the
// 1 x (n+m) gain row [K' K''] with eig(A_aug - B_aug*gain) at desired_poles.
Matrix design_baseline(const Plant& plant, const std::vector<Complex>& desired_poles);

// Baseline gain as a controller (p = 0, no delays) for shared tooling.
DelayedFeedbackController baseline_controller(const Plant& plant, const Matrix& gain);

struct TableCell {
    std::string method;
    std::string category;  // d1 | d2 | tracking
    std::string order;     // One | Two | Higher
    bool predicted_yes = false;
    bool simulated_yes = false;
    bool conflict = false;
};

struct ComparisonTable {
    std::vector<TableCell> cells;
    bool any_conflict = false;

    std::string formatted() const;
};

// Each cell decided two ways: the analytic prediction and a 60 s simulation
// with the matching signal order (step / ramp / parabola). Disagreement is
// flagged, never silently resolved.
ComparisonTable comparison_table(const Plant& plant,
                                 const std::vector<std::pair<std::string, DelayedFeedbackController>>& proposed,
                                 const Matrix& baseline_gain);

void write_table_csv(const std::string& path, const ComparisonTable& table);

}  // namespace dfc
