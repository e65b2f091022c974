#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dfc/core_model.hpp"
#include "dfc/signal.hpp"

namespace dfc {

// Logged closed-loop run on a uniform grid; one row per grid node.
struct Trajectory {
    Vector times;
    Matrix X;  // samples x n
    Matrix Q;  // samples x m
    Matrix U;  // samples x r
    Matrix Y;  // samples x m, Y = X C^T
    Matrix E;  // samples x m, E = Y - r(t)
    bool diverged = false;

    int samples() const { return static_cast<int>(times.size()); }
};

struct SteadyState {
    bool settled = false;
    Vector error;        // mean of e over the settling window
    double max_dev = 0;  // max |e - mean| inside the window
};

// Time-varying vector input; must evaluate to zero for t < 0.
using VectorSignalFn = std::function<Vector(double)>;

// u(t) = -( K * sum_i w_i x_meas(t - i tau) + K1 q ). x_meas holds the
// measured states for i = 0..p (current first).
Vector control_law(const DelayedFeedbackController& ctrl,
                   const std::vector<Vector>& x_meas, const Vector& q);

// Step satisfying step <= min(delays)/10: min(delay)/20 capped at 1e-2.
double default_step(const ClosedLoopDDE& cl);

// Fixed-step RK4 with cubic-Hermite dense history for the delayed reads.
// d1 corrupts the measured states inside the control law only; d2 adds to
// xdot. Initial history is identically zero (system at rest).
Trajectory simulate(const ClosedLoopDDE& cl, const DelayedFeedbackController& ctrl,
                    const Signal& r, const Signal& d1, const Signal& d2,
                    double horizon, double step = 0.0);

// As simulate but with G(t) = initial_state for all t <= 0.
Trajectory simulate_from(const ClosedLoopDDE& cl, const DelayedFeedbackController& ctrl,
                         const Vector& initial_state,
                         const Signal& r, const Signal& d1, const Signal& d2,
                         double horizon, double step = 0.0);

// Generic-input core (r is m-dim, d1 and d2 n-dim; zero for t < 0).
Trajectory simulate_fn(const ClosedLoopDDE& cl, const DelayedFeedbackController& ctrl,
                       const VectorSignalFn& r, const VectorSignalFn& d1,
                       const VectorSignalFn& d2, const Vector& initial_state,
                       double horizon, double step = 0.0);

// Mean tracking error over the final 10% of the horizon; settled when the
// error deviates from that mean by < 1e-4 throughout the window.
SteadyState steady_state_error(const Trajectory& traj);

// header t,x1..xn,q1..qm,u1..ur,y1..ym,e1..em, full double precision
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

}  // namespace dfc
