#include "dfc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "dfc/csv.hpp"
#include "dfc/simulator.hpp"
#include "dfc/spectrum.hpp"

namespace dfc {

namespace {

constexpr int kSeriesOrder = 6;         // truncation of the s-expansion
constexpr double kZeroTol = 1e-9;       // a Laurent coefficient below this counts as zero
constexpr double kDetZeroTol = 1e-9;
constexpr double kSimHorizon = 60.0;
constexpr double kSimZeroTol = 1e-3;    // settled |e| below this counts as rejected

using Series = std::vector<Matrix>;  // coefficient of s^j at index j

Series series_mul(const Series& a, const Series& b) {
    const int L = kSeriesOrder;
    Series c(L + 1, Matrix::Zero(a[0].rows(), b[0].cols()));
    for (int i = 0; i <= L; ++i)
        for (int j = 0; i + j <= L; ++j) c[i + j] += a[i] * b[j];
    return c;
}

Series series_scale(const Series& a, const std::vector<double>& scalar) {
    const int L = kSeriesOrder;
    Series c(L + 1, Matrix::Zero(a[0].rows(), a[0].cols()));
    for (int i = 0; i <= L; ++i)
        for (int j = 0; i + j <= L && j < static_cast<int>(scalar.size()); ++j)
            c[i + j] += a[i] * scalar[j];
    return c;
}

// Inverse of a matrix power series with invertible constant term:
// R_0 = A_0^{-1}, R_j = -R_0 sum_{l=1..j} A_l R_{j-l}.
Series series_inverse(const Series& a) {
    const int L = kSeriesOrder;
    Eigen::FullPivLU<Matrix> lu(a[0]);
    if (!lu.isInvertible())
        throw std::runtime_error("final value: Delta(0) is singular; limit undefined");
    Series r(L + 1);
    r[0] = lu.inverse();
    for (int j = 1; j <= L; ++j) {
        Matrix acc = Matrix::Zero(a[0].rows(), a[0].cols());
        for (int l = 1; l <= j; ++l) acc += a[l] * r[j - l];
        r[j] = -r[0] * acc;
    }
    return r;
}

double factorial(int j) {
    double f = 1.0;
    for (int i = 2; i <= j; ++i) f *= i;
    return f;
}

// Taylor coefficients of Delta(s) about s = 0.
Series delta_series(const ClosedLoopDDE& cl) {
    const int d = cl.dim();
    Series ds(kSeriesOrder + 1, Matrix::Zero(d, d));
    ds[0] = -cl.A0;
    ds[1] = Matrix::Identity(d, d);
    for (int i = 1; i <= cl.p(); ++i) {
        const double w = static_cast<double>(cl.weights[i]);
        for (int j = 0; j <= kSeriesOrder; ++j)
            ds[j] -= cl.A1 * (w * std::pow(-i * cl.tau, j) / factorial(j));
    }
    if (cl.tau_q > 0.0)
        for (int j = 0; j <= kSeriesOrder; ++j)
            ds[j] -= cl.A2 * (std::pow(-cl.tau_q, j) / factorial(j));
    return ds;
}

// Coefficients of ((1 - e^{-s tau})/s)^p via the binomial weights; the first
// p Taylor coefficients of (1 - e^{-s tau})^p vanish exactly, so the shift
// by s^p is exact.
std::vector<double> delayed_difference_series(const ClosedLoopDDE& cl) {
    const int p = cl.p();
    std::vector<double> full(kSeriesOrder + p + 1, 0.0);
    for (int j = 0; j < static_cast<int>(full.size()); ++j) {
        double c = 0.0;
        for (int i = 0; i <= p; ++i)
            c += static_cast<double>(cl.weights[i]) * std::pow(-i * cl.tau, j) / factorial(j);
        full[j] = c;
    }
    return {full.begin() + p, full.end()};
}

struct LaurentTerms {
    // e-coefficients of s^(shift + j) for j = 0..kSeriesOrder, likewise for x
    std::vector<Vector> e;
    std::vector<Vector> x;
    int shift = 0;
};

// sE(s) and sX(s) expansions for one scenario.
LaurentTerms scenario_terms(const ClosedLoopDDE& cl, char scenario, int k, Vector dir) {
    const int n = cl.n, m = cl.m;
    const Series inv = series_inverse(delta_series(cl));

    Matrix Cg = Matrix::Zero(m, n + m);
    Cg.leftCols(n) = cl.plant.C;
    Matrix Xg = Matrix::Zero(n, n + m);
    Xg.leftCols(n) = Matrix::Identity(n, n);

    LaurentTerms out;
    if (scenario == '1') {  // d1 through the K-difference path
        if (dir.size() == 0) dir = Vector::Ones(n);
        Matrix inj = Matrix::Zero(n + m, n);
        inj.topRows(n) = -cl.plant.B * cl.ctrl.K;
        Series g(kSeriesOrder + 1);
        for (int j = 0; j <= kSeriesOrder; ++j) g[j] = inv[j] * inj;
        g = series_scale(g, delayed_difference_series(cl));
        out.shift = 1 + cl.p() - k;
        for (int j = 0; j <= kSeriesOrder; ++j) {
            out.e.push_back(Cg * g[j] * dir);
            out.x.push_back(Xg * g[j] * dir);
        }
    } else if (scenario == '2') {  // d2 additive on xdot
        if (dir.size() == 0) dir = Vector::Ones(n);
        Matrix inj = Matrix::Zero(n + m, n);
        inj.topRows(n) = Matrix::Identity(n, n);
        out.shift = 1 - k;
        for (int j = 0; j <= kSeriesOrder; ++j) {
            out.e.push_back(Cg * inv[j] * inj * dir);
            out.x.push_back(Xg * inv[j] * inj * dir);
        }
    } else {  // reference: e = y - r
        if (dir.size() == 0) dir = Vector::Ones(m);
        out.shift = 1 - k;
        for (int j = 0; j <= kSeriesOrder; ++j) {
            Matrix term = Cg * inv[j] * cl.T;
            if (j == 0) term -= Matrix::Identity(m, m);
            out.e.push_back(term * dir);
            out.x.push_back(Xg * inv[j] * cl.T * dir);
        }
    }
    return out;
}

LimitResult classify(const LaurentTerms& t) {
    double scale = 1.0;
    const int limit_j = -t.shift;
    for (int j = 0; j <= std::max(0, limit_j) && j < static_cast<int>(t.e.size()); ++j)
        scale = std::max({scale, t.e[j].lpNorm<Eigen::Infinity>(),
                          t.x[j].lpNorm<Eigen::Infinity>()});
    auto negligible = [&](const Vector& v) {
        return v.lpNorm<Eigen::Infinity>() <= kZeroTol * scale;
    };

    LimitResult res;
    const int m = static_cast<int>(t.e.front().size());
    // any nonzero coefficient at a negative power of s means unbounded growth
    bool e_diverges = false, x_diverges = false;
    for (int j = 0; j < limit_j && j < static_cast<int>(t.e.size()); ++j) {
        if (!negligible(t.e[j])) e_diverges = true;
        if (!negligible(t.x[j])) x_diverges = true;
    }
    if (e_diverges) {
        res.kind = LimitKind::Diverges;
        res.e_limit = Vector::Zero(m);
        return res;
    }
    Vector e_lim = Vector::Zero(m);
    if (limit_j >= 0 && limit_j < static_cast<int>(t.e.size())) e_lim = t.e[limit_j];
    res.e_limit = e_lim;
    res.kind = negligible(e_lim) ? LimitKind::Rejected : LimitKind::Settles;
    if (!x_diverges && limit_j >= 0 && limit_j < static_cast<int>(t.x.size()))
        res.x_limit = t.x[limit_j];
    else if (!x_diverges && limit_j < 0)
        res.x_limit = Vector::Zero(static_cast<int>(t.x.front().size()));
    return res;
}

void require_stable(const Plant& plant, const DelayedFeedbackController& ctrl) {
    const auto spec = rightmost_roots(build_closed_loop(plant, ctrl), 5);
    if (spec.roots.empty() || !(spec.abscissa < 0.0))
        throw std::runtime_error(
            "prediction requires a stable closed loop (final value theorem); abscissa = " +
            std::to_string(spec.abscissa));
}

double condition_det(const DelayedFeedbackController& ctrl) {
    const Matrix M = Matrix::Identity(ctrl.K2.rows(), ctrl.K2.cols()) +
                     ctrl.k2_active() * ctrl.tau_q;
    return M.determinant();
}

bool condition_full(const DelayedFeedbackController& ctrl) {
    const Matrix M = Matrix::Identity(ctrl.K2.rows(), ctrl.K2.cols()) +
                     ctrl.k2_active() * ctrl.tau_q;
    return M.isZero(1e-12);
}

Signal order_signal(int k, double onset, const Vector& dir) {
    switch (k) {
        case 1: return Signal::step(onset, 1.0, dir);
        case 2: return Signal::ramp(onset, 0.1, dir);
        case 3: return Signal::parabola(onset, 0.02, dir);
        default: throw std::invalid_argument("order_signal: k must be 1..3");
    }
}

bool simulated_yes(const ClosedLoopDDE& cl, const DelayedFeedbackController& ctrl,
                   const std::string& category, int k) {
    const Vector vn = Vector::Ones(cl.n);
    const Vector vm = Vector::Ones(cl.m);
    Signal r, d1, d2;
    if (category == "d1") d1 = order_signal(k, 5.0, vn);
    else if (category == "d2") d2 = order_signal(k, 5.0, vn);
    else r = order_signal(k, 5.0, vm);
    const Trajectory traj = simulate(cl, ctrl, r, d1, d2, kSimHorizon);
    const SteadyState ss = steady_state_error(traj);
    return ss.settled && ss.error.lpNorm<Eigen::Infinity>() < kSimZeroTol;
}

}  // namespace

LimitResult final_value_d1(const Plant& plant, const DelayedFeedbackController& ctrl, int k,
                           const Vector& V) {
    return classify(scenario_terms(build_closed_loop(plant, ctrl), '1', k, V));
}

LimitResult final_value_d2(const Plant& plant, const DelayedFeedbackController& ctrl, int k,
                           const Vector& V) {
    return classify(scenario_terms(build_closed_loop(plant, ctrl), '2', k, V));
}

LimitResult final_value_reference(const Plant& plant, const DelayedFeedbackController& ctrl,
                                  int k, const Vector& M) {
    return classify(scenario_terms(build_closed_loop(plant, ctrl), 'r', k, M));
}

D1Prediction predict_d1(const Plant& plant, const DelayedFeedbackController& ctrl) {
    require_stable(plant, ctrl);
    D1Prediction pred;
    const bool det_zero = std::abs(condition_det(ctrl)) < kDetZeroTol;
    pred.max_rejected_order = ctrl.p + (det_zero ? 2 : 1);
    const LimitResult lim = final_value_d1(plant, ctrl, pred.max_rejected_order + 1);
    if (lim.kind != LimitKind::Diverges) pred.e_limit = lim.e_limit;
    pred.x_limit = lim.x_limit;
    return pred;
}

D2Prediction predict_d2(const Plant& plant, const DelayedFeedbackController& ctrl) {
    require_stable(plant, ctrl);
    D2Prediction pred;
    pred.step_rejected = true;
    pred.ramp_rejected = std::abs(condition_det(ctrl)) < kDetZeroTol;
    if (!pred.ramp_rejected) {
        const LimitResult lim = final_value_d2(plant, ctrl, 2);
        if (lim.kind != LimitKind::Diverges) pred.e_limit = lim.e_limit;
    }
    return pred;
}

TrackingPrediction predict_tracking(const Plant& plant, const DelayedFeedbackController& ctrl) {
    require_stable(plant, ctrl);
    TrackingPrediction pred;
    pred.step_tracked = true;
    pred.ramp_tracked = condition_full(ctrl);
    if (!pred.ramp_tracked) {
        // lim sE = (I + K2 tau_q) (C (-A)^{-1} B K1)^{-1} M, needs A invertible
        Eigen::FullPivLU<Matrix> luA(plant.A);
        if (!luA.isInvertible()) {
            pred.limit_undefined = true;
            return pred;
        }
        const Matrix G0 = plant.C * luA.solve(-plant.B);  // C (-A)^{-1} B, up to sign below
        const Matrix dc = -G0 * ctrl.K1;                  // C (-A)^{-1} B K1
        Eigen::FullPivLU<Matrix> ludc(dc);
        if (!ludc.isInvertible()) {
            pred.limit_undefined = true;
            return pred;
        }
        const Matrix cond = Matrix::Identity(plant.m(), plant.m()) + ctrl.k2_active() * ctrl.tau_q;
        pred.e_limit = cond * ludc.solve(Vector::Ones(plant.m()));
    }
    return pred;
}

PredictionReport predict(const Plant& plant, const DelayedFeedbackController& ctrl) {
    PredictionReport rep;
    const D1Prediction d1 = predict_d1(plant, ctrl);
    const D2Prediction d2 = predict_d2(plant, ctrl);
    const TrackingPrediction tr = predict_tracking(plant, ctrl);
    rep.d1_max_rejected_laplace_order = d1.max_rejected_order;
    rep.d1_ss_error = d1.e_limit;
    rep.d2_step_rejected = d2.step_rejected;
    rep.d2_ramp_rejected = d2.ramp_rejected;
    rep.d2_ramp_ss_error = d2.e_limit;
    rep.ramp_reference_tracked = tr.ramp_tracked;
    rep.ramp_tracking_error = tr.e_limit;
    rep.condition_det = condition_det(ctrl);
    rep.condition_full = condition_full(ctrl);
    return rep;
}

Matrix design_baseline(const Plant& plant, const std::vector<Complex>& desired_poles) {
    plant.validate();
    if (plant.r() != 1)
        throw std::invalid_argument("design_baseline: single-input plants only");
    const auto [A_aug, B_aug] = build_augmented(plant);
    const int na = static_cast<int>(A_aug.rows());
    if (static_cast<int>(desired_poles.size()) != na)
        throw std::invalid_argument("design_baseline: need n+m poles, got " +
                                    std::to_string(desired_poles.size()));
    // conjugate closure
    for (const Complex& pole : desired_poles) {
        if (std::abs(pole.imag()) < 1e-12) continue;
        bool found = false;
        for (const Complex& other : desired_poles)
            if (std::abs(other - std::conj(pole)) < 1e-9) { found = true; break; }
        if (!found)
            throw std::invalid_argument("design_baseline: pole set not conjugate-closed");
    }

    Matrix ctrb(na, na);
    Vector col = B_aug.col(0);
    for (int i = 0; i < na; ++i) {
        ctrb.col(i) = col;
        col = A_aug * col;
    }
    Eigen::FullPivLU<Matrix> lu(ctrb);
    if (!lu.isInvertible())
        throw std::invalid_argument("design_baseline: augmented pair is uncontrollable");
    if (lu.rcond() < 1e-10)
        std::cerr << "design_baseline: controllability matrix nearly singular (rcond "
                  << lu.rcond() << ")\n";

    // real characteristic polynomial from the conjugate-closed pole set
    std::vector<Complex> coeff{1.0};
    for (const Complex& pole : desired_poles) {
        std::vector<Complex> next(coeff.size() + 1, 0.0);
        for (size_t i = 0; i < coeff.size(); ++i) {
            next[i] += coeff[i];
            next[i + 1] -= coeff[i] * pole;
        }
        coeff = next;
    }
    // phi(A_aug) by Horner in the (real) coefficients
    Matrix phi = Matrix::Zero(na, na);
    for (const Complex& c : coeff) phi = phi * A_aug + c.real() * Matrix::Identity(na, na);

    // gain = [0 ... 0 1] Ctrb^{-1} phi(A_aug)
    Matrix gain = Matrix::Zero(1, na);
    gain.row(0) = lu.solve(phi).row(na - 1);

    // verify the placement actually achieved the request
    const Matrix Acl = A_aug - B_aug * gain;
    Eigen::EigenSolver<Matrix> es(Acl, false);
    std::vector<Complex> got(es.eigenvalues().data(), es.eigenvalues().data() + na);
    for (const Complex& pole : desired_poles) {
        double best = std::numeric_limits<double>::max();
        for (const Complex& g : got) best = std::min(best, std::abs(g - pole));
        if (best > 1e-8)
            throw std::runtime_error("design_baseline: placement residual " + std::to_string(best) +
                                     " exceeds 1e-8 (ill-conditioned pair)");
    }
    return gain;
}

DelayedFeedbackController baseline_controller(const Plant& plant, const Matrix& gain) {
    DelayedFeedbackController ctrl;
    ctrl.K = gain.leftCols(plant.n());
    ctrl.K1 = gain.rightCols(plant.m());
    ctrl.K2 = Matrix::Zero(plant.m(), plant.m());
    ctrl.tau = 1.0;  // inert: p = 0 has no delayed terms
    ctrl.tau_q = 0.0;
    ctrl.p = 0;
    return ctrl;
}

std::string ComparisonTable::formatted() const {
    std::ostringstream os;
    os << std::left << std::setw(12) << "method" << std::setw(10) << "category" << std::setw(8)
       << "order" << std::setw(11) << "predicted" << std::setw(11) << "simulated"
       << "status\n";
    for (const auto& cell : cells) {
        os << std::left << std::setw(12) << cell.method << std::setw(10) << cell.category
           << std::setw(8) << cell.order << std::setw(11) << (cell.predicted_yes ? "Yes" : "No")
           << std::setw(11) << (cell.simulated_yes ? "Yes" : "No")
           << (cell.conflict ? "CONFLICT" : "ok") << "\n";
    }
    return os.str();
}

ComparisonTable comparison_table(
    const Plant& plant,
    const std::vector<std::pair<std::string, DelayedFeedbackController>>& proposed,
    const Matrix& baseline_gain) {
    ComparisonTable table;
    std::vector<std::pair<std::string, DelayedFeedbackController>> methods = proposed;
    methods.emplace_back("baseline", baseline_controller(plant, baseline_gain));

    const char* order_names[] = {"One", "Two", "Higher"};
    for (const auto& [name, ctrl] : methods) {
        const PredictionReport rep = predict(plant, ctrl);
        const ClosedLoopDDE cl = build_closed_loop(plant, ctrl);
        for (const std::string category : {"d1", "d2", "tracking"}) {
            for (int k = 1; k <= 3; ++k) {
                TableCell cell;
                cell.method = name;
                cell.category = category;
                cell.order = order_names[k - 1];
                if (category == "d1") cell.predicted_yes = k <= rep.d1_max_rejected_laplace_order;
                else if (category == "d2")
                    cell.predicted_yes = (k == 1)   ? rep.d2_step_rejected
                                         : (k == 2) ? rep.d2_ramp_rejected
                                                    : false;
                else
                    cell.predicted_yes = (k == 1) ? true
                                         : (k == 2) ? rep.ramp_reference_tracked
                                                    : false;
                cell.simulated_yes = simulated_yes(cl, ctrl, category, k);
                cell.conflict = cell.predicted_yes != cell.simulated_yes;
                table.any_conflict = table.any_conflict || cell.conflict;
                table.cells.push_back(cell);
            }
        }
    }
    return table;
}

void write_table_csv(const std::string& path, const ComparisonTable& table) {
    CsvWriter csv(path);
    csv.header({"method", "category", "order", "predicted", "simulated"});
    for (const auto& cell : table.cells) {
        csv.value(cell.method);
        csv.value(cell.category);
        csv.value(cell.order);
        csv.value(cell.predicted_yes ? "Yes" : "No");
        csv.value(cell.simulated_yes ? "Yes" : "No");
        csv.end_row();
    }
}

}  // namespace dfc
