#pragma once

#include <vector>

#include "dfc/analysis.hpp"
#include "dfc/core_model.hpp"
#include "dfc/signal.hpp"

namespace dfc::casestudy {

// Built-in unstable second-order plant (open-loop eigenvalues 0.5 and 1.5)
// with the two published delayed-feedback designs and the matched
// conventional baseline.
Plant plant();

// p = 1, tau_q = 0: K = [1.2, 0.3319], K1 = -0.5523, tau = 0.41.
DelayedFeedbackController design1();

// p = 1, tau_q = 0.44, K2 = -1/tau_q: K = [3.097, 0.8184], K1 = -4.346, tau = 0.34.
DelayedFeedbackController design2();

// design2 with K2 tau_q moved off -1 to -0.9 (breaks the rejection/tracking
// conditions while staying stable).
DelayedFeedbackController design2_perturbed();

// Pole set the conventional baseline is placed at: -1.36 +/- 0.9646i, -2.6729.
std::vector<Complex> baseline_poles();
Matrix baseline_gain();

// Disturbance/reference stand-ins used by the reproduction runs.
Signal fig4_d1();        // step 0.5 at t=10 plus ramp slope 0.1 at t=25, all states
Signal fig6_d1();        // parabola 0.02 (t-10)^2 from t=10, all states
Signal fig6_d2();        // step 0.5 at t=15 plus ramp slope 0.05 at t=30
Signal step_reference(); // unit step at t=0
Signal fig8_reference(); // unit step at t=0 plus ramp slope 0.1 at t=35

}  // namespace dfc::casestudy
