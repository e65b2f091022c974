#include "dfc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dfc/csv.hpp"

namespace dfc {

namespace {

constexpr double kDivergenceCap = 1e12;   // state norms beyond this count as divergence
constexpr double kSettleFlatTol = 1e-4;

// Dense solution history on the uniform grid: values and derivatives at the
// nodes, cubic Hermite in between, constant pre-history for t <= 0.
class History {
  public:
    History(Vector init, double step, int capacity)
        : init_(std::move(init)), step_(step) {
        values_.reserve(capacity);
        derivs_.reserve(capacity);
    }

    void push(const Vector& value, const Vector& deriv) {
        values_.push_back(value);
        derivs_.push_back(deriv);
    }

    Vector at(double t) const {
        if (t <= 0.0) return init_;
        const double pos = t / step_;
        int k = static_cast<int>(std::floor(pos));
        const int last = static_cast<int>(values_.size()) - 1;
        if (k >= last) k = last - 1;  // clamp; reads stay >= one delay behind the front
        if (k < 0) return init_;
        const double th = pos - k;
        const double th2 = th * th, th3 = th2 * th;
        const double h00 = 2 * th3 - 3 * th2 + 1;
        const double h10 = th3 - 2 * th2 + th;
        const double h01 = -2 * th3 + 3 * th2;
        const double h11 = th3 - th2;
        return h00 * values_[k] + (h10 * step_) * derivs_[k] + h01 * values_[k + 1] +
               (h11 * step_) * derivs_[k + 1];
    }

  private:
    Vector init_;
    double step_;
    std::vector<Vector> values_;
    std::vector<Vector> derivs_;
};

Vector eval_or_zero(const VectorSignalFn& f, double t, int dim) {
    if (!f) return Vector::Zero(dim);
    Vector v = f(t);
    if (v.size() == 0) return Vector::Zero(dim);
    return v;
}

VectorSignalFn wrap(const Signal& s, int dim, const char* name) {
    s.validate();
    if (!s.empty() && s.dim() != dim)
        throw std::invalid_argument(std::string(name) + " signal dimension " +
                                    std::to_string(s.dim()) + " does not match expected " +
                                    std::to_string(dim));
    if (s.empty()) return {};
    return [s](double t) { return s.value(t); };
}

}  // namespace

Vector control_law(const DelayedFeedbackController& ctrl,
                   const std::vector<Vector>& x_meas, const Vector& q) {
    if (static_cast<int>(x_meas.size()) != ctrl.p + 1)
        throw std::invalid_argument("control_law: need p+1 measured state samples");
    const auto w = binomial_weights(ctrl.p);
    Vector sum = Vector::Zero(x_meas.front().size());
    for (int i = 0; i <= ctrl.p; ++i) sum += static_cast<double>(w[i]) * x_meas[i];
    return -(ctrl.K * sum + ctrl.K1 * q);
}

double default_step(const ClosedLoopDDE& cl) {
    double step = 1e-2;
    const auto delays = cl.delays();
    if (!delays.empty()) {
        const double dmin = *std::min_element(delays.begin(), delays.end());
        step = std::min(step, dmin / 20.0);
    }
    return step;
}

Trajectory simulate_fn(const ClosedLoopDDE& cl, const DelayedFeedbackController& ctrl,
                       const VectorSignalFn& r, const VectorSignalFn& d1,
                       const VectorSignalFn& d2, const Vector& initial_state,
                       double horizon, double step) {
    const int n = cl.n, m = cl.m;
    if (initial_state.size() != n + m)
        throw std::invalid_argument("simulate: initial state must have dimension n+m");
    if (step <= 0.0) step = default_step(cl);
    const auto delays = cl.delays();
    for (double d : delays)
        if (step > d / 10.0 + 1e-15)
            throw std::invalid_argument("simulate: step must be <= min(delay)/10");
    if (horizon < 10.0 * step)
        throw std::invalid_argument("simulate: horizon must be >= 10*step");

    const int steps = static_cast<int>(std::llround(horizon / step));
    const auto w = binomial_weights(ctrl.p);
    const Matrix K2a = ctrl.k2_active();
    const bool q_delay = ctrl.tau_q_active() && !K2a.isZero(0.0);

    History hist(initial_state, step, steps + 1);

    auto control = [&](double t, const Vector& x, const Vector& q) -> Vector {
        Vector sum = x + eval_or_zero(d1, t, n);  // i = 0 term
        for (int i = 1; i <= ctrl.p; ++i) {
            const double td = t - i * ctrl.tau;
            const Vector xd = hist.at(td).head(n) + eval_or_zero(d1, td, n);
            sum += static_cast<double>(w[i]) * xd;
        }
        return -(ctrl.K * sum + ctrl.K1 * q);
    };
    auto deriv = [&](double t, const Vector& G) -> Vector {
        const Vector x = G.head(n);
        const Vector q = G.tail(m);
        const Vector u = control(t, x, q);
        Vector out(n + m);
        out.head(n) = cl.plant.A * x + cl.plant.B * u + eval_or_zero(d2, t, n);
        Vector qdot = cl.plant.C * x - eval_or_zero(r, t, m);
        if (q_delay) qdot -= K2a * (q - hist.at(t - ctrl.tau_q).tail(m));
        out.tail(m) = qdot;
        return out;
    };

    Trajectory traj;
    traj.times.resize(steps + 1);
    traj.X.resize(steps + 1, n);
    traj.Q.resize(steps + 1, m);
    traj.U.resize(steps + 1, cl.plant.r());
    traj.Y.resize(steps + 1, m);
    traj.E.resize(steps + 1, m);

    Vector G = initial_state;
    int logged = 0;
    for (int k = 0; k <= steps; ++k) {
        const double t = k * step;
        if (!G.allFinite() || G.lpNorm<Eigen::Infinity>() > kDivergenceCap) {
            traj.diverged = true;
            break;
        }
        const Vector x = G.head(n);
        const Vector q = G.tail(m);
        const Vector u = control(t, x, q);
        const Vector y = cl.plant.C * x;
        traj.times[k] = t;
        traj.X.row(k) = x.transpose();
        traj.Q.row(k) = q.transpose();
        traj.U.row(k) = u.transpose();
        traj.Y.row(k) = y.transpose();
        traj.E.row(k) = (y - eval_or_zero(r, t, m)).transpose();
        logged = k + 1;
        if (k == steps) break;

        const Vector k1 = deriv(t, G);
        hist.push(G, k1);
        const Vector k2 = deriv(t + step / 2, G + (step / 2) * k1);
        const Vector k3 = deriv(t + step / 2, G + (step / 2) * k2);
        const Vector k4 = deriv(t + step, G + step * k3);
        G += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    if (logged <= steps) {  // truncated
        traj.times.conservativeResize(logged);
        traj.X.conservativeResize(logged, Eigen::NoChange);
        traj.Q.conservativeResize(logged, Eigen::NoChange);
        traj.U.conservativeResize(logged, Eigen::NoChange);
        traj.Y.conservativeResize(logged, Eigen::NoChange);
        traj.E.conservativeResize(logged, Eigen::NoChange);
    }
    return traj;
}

Trajectory simulate(const ClosedLoopDDE& cl, const DelayedFeedbackController& ctrl,
                    const Signal& r, const Signal& d1, const Signal& d2,
                    double horizon, double step) {
    return simulate_fn(cl, ctrl, wrap(r, cl.m, "r"), wrap(d1, cl.n, "d1"),
                       wrap(d2, cl.n, "d2"), Vector::Zero(cl.dim()), horizon, step);
}

Trajectory simulate_from(const ClosedLoopDDE& cl, const DelayedFeedbackController& ctrl,
                         const Vector& initial_state,
                         const Signal& r, const Signal& d1, const Signal& d2,
                         double horizon, double step) {
    return simulate_fn(cl, ctrl, wrap(r, cl.m, "r"), wrap(d1, cl.n, "d1"),
                       wrap(d2, cl.n, "d2"), initial_state, horizon, step);
}

SteadyState steady_state_error(const Trajectory& traj) {
    SteadyState ss;
    if (traj.diverged || traj.samples() < 2) return ss;
    const int total = traj.samples();
    const int start = total - std::max(1, total / 10);
    const int count = total - start;
    ss.error = traj.E.middleRows(start, count).colwise().mean().transpose();
    ss.max_dev = (traj.E.middleRows(start, count).rowwise() - ss.error.transpose())
                     .cwiseAbs()
                     .maxCoeff();
    ss.settled = ss.max_dev < kSettleFlatTol;
    return ss;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    CsvWriter csv(path);
    std::vector<std::string> header{"t"};
    auto extend = [&](const char* base, int count) {
        for (int i = 1; i <= count; ++i) header.push_back(std::string(base) + std::to_string(i));
    };
    extend("x", static_cast<int>(traj.X.cols()));
    extend("q", static_cast<int>(traj.Q.cols()));
    extend("u", static_cast<int>(traj.U.cols()));
    extend("y", static_cast<int>(traj.Y.cols()));
    extend("e", static_cast<int>(traj.E.cols()));
    csv.header(header);
    for (int k = 0; k < traj.samples(); ++k) {
        csv.value(traj.times[k]);
        for (const Matrix* M : {&traj.X, &traj.Q, &traj.U, &traj.Y, &traj.E})
            for (int j = 0; j < M->cols(); ++j) csv.value((*M)(k, j));
        csv.end_row();
    }
}

}  // namespace dfc
