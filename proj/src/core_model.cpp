#include "dfc/core_model.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace dfc {

namespace {

std::string shape(const Matrix& M) {
    std::ostringstream os;
    os << M.rows() << "x" << M.cols();
    return os.str();
}

}  // namespace

void Plant::validate() const {
    if (A.rows() < 1 || A.rows() != A.cols())
        throw std::invalid_argument("plant A must be square with n >= 1, got " + shape(A));
    if (B.rows() != A.rows() || B.cols() < 1)
        throw std::invalid_argument("plant B must be " + std::to_string(A.rows()) +
                                    "x r with r >= 1, got " + shape(B));
    if (C.cols() != A.rows() || C.rows() < 1)
        throw std::invalid_argument("plant C must be m x " + std::to_string(A.rows()) +
                                    " with m >= 1, got " + shape(C));
}

Matrix DelayedFeedbackController::k2_active() const {
    if (tau_q_active()) return K2;
    return Matrix::Zero(K2.rows(), K2.cols());
}

void DelayedFeedbackController::validate(const Plant& plant) const {
    plant.validate();
    if (K.rows() != plant.r() || K.cols() != plant.n())
        throw std::invalid_argument("controller K must be " + std::to_string(plant.r()) + "x" +
                                    std::to_string(plant.n()) + ", got " + shape(K));
    if (K1.rows() != plant.r() || K1.cols() != plant.m())
        throw std::invalid_argument("controller K1 must be " + std::to_string(plant.r()) + "x" +
                                    std::to_string(plant.m()) + ", got " + shape(K1));
    if (K2.rows() != plant.m() || K2.cols() != plant.m())
        throw std::invalid_argument("controller K2 must be " + std::to_string(plant.m()) + "x" +
                                    std::to_string(plant.m()) + ", got " + shape(K2));
    if (!(tau > 0.0)) throw std::invalid_argument("controller tau must be > 0");
    if (tau_q < 0.0) throw std::invalid_argument("controller tau_q must be >= 0");
    if (p < 0) throw std::invalid_argument("controller p must be >= 0");
}

std::vector<double> ClosedLoopDDE::delays() const {
    std::vector<double> d;
    for (int i = 1; i <= p(); ++i) d.push_back(i * tau);
    if (tau_q > 0.0) d.push_back(tau_q);
    return d;
}

double ClosedLoopDDE::max_delay() const {
    double h = 0.0;
    for (double d : delays()) h = std::max(h, d);
    return h;
}

bool ClosedLoopDDE::delay_free() const {
    const bool a1_inert = p() == 0 || A1.isZero(0.0);
    const bool a2_inert = !(tau_q > 0.0) || A2.isZero(0.0);
    return a1_inert && a2_inert;
}

std::vector<long long> binomial_weights(int p) {
    if (p < 0) throw std::invalid_argument("binomial_weights: p must be >= 0");
    std::vector<long long> w(p + 1);
    long long binom = 1;  // binom(p, 0)
    for (int i = 0; i <= p; ++i) {
        w[i] = (i % 2 == 0) ? binom : -binom;
        if (i < p) binom = binom * (p - i) / (i + 1);
    }
    return w;
}

std::pair<Matrix, Matrix> build_augmented(const Plant& plant) {
    plant.validate();
    const int n = plant.n(), r = plant.r(), m = plant.m();
    Matrix A_aug = Matrix::Zero(n + m, n + m);
    A_aug.topLeftCorner(n, n) = plant.A;
    A_aug.bottomLeftCorner(m, n) = plant.C;
    Matrix B_aug = Matrix::Zero(n + m, r);
    B_aug.topRows(n) = plant.B;
    return {A_aug, B_aug};
}

ClosedLoopDDE build_closed_loop(const Plant& plant, const DelayedFeedbackController& ctrl) {
    ctrl.validate(plant);
    const int n = plant.n(), m = plant.m();
    const Matrix BK  = plant.B * ctrl.K;
    const Matrix BK1 = plant.B * ctrl.K1;
    const Matrix K2a = ctrl.k2_active();

    ClosedLoopDDE cl;
    cl.n = n;
    cl.m = m;
    cl.tau = ctrl.tau;
    cl.tau_q = ctrl.tau_q;
    cl.weights = binomial_weights(ctrl.p);
    cl.plant = plant;
    cl.ctrl = ctrl;

    cl.A0 = Matrix::Zero(n + m, n + m);
    cl.A0.topLeftCorner(n, n) = plant.A - BK;
    cl.A0.topRightCorner(n, m) = -BK1;
    cl.A0.bottomLeftCorner(m, n) = plant.C;
    cl.A0.bottomRightCorner(m, m) = -K2a;

    cl.A1 = Matrix::Zero(n + m, n + m);
    cl.A1.topLeftCorner(n, n) = -BK;

    cl.A2 = Matrix::Zero(n + m, n + m);
    cl.A2.bottomRightCorner(m, m) = K2a;

    cl.T = Matrix::Zero(n + m, m);
    cl.T.bottomRows(m) = -Matrix::Identity(m, m);
    return cl;
}

CMatrix char_matrix(const ClosedLoopDDE& cl, Complex s) {
    const int d = cl.dim();
    CMatrix M = s * CMatrix::Identity(d, d) - cl.A0;
    Complex delayed_sum = 0.0;
    for (int i = 1; i <= cl.p(); ++i)
        delayed_sum += static_cast<double>(cl.weights[i]) * std::exp(-s * (i * cl.tau));
    M -= cl.A1 * delayed_sum;
    if (cl.tau_q > 0.0) M -= cl.A2 * std::exp(-s * cl.tau_q);
    return M;
}

CMatrix char_matrix_derivative(const ClosedLoopDDE& cl, Complex s) {
    const int d = cl.dim();
    CMatrix M = CMatrix::Identity(d, d);
    Complex delayed_sum = 0.0;
    for (int i = 1; i <= cl.p(); ++i)
        delayed_sum += static_cast<double>(cl.weights[i]) * (i * cl.tau) * std::exp(-s * (i * cl.tau));
    M += cl.A1 * delayed_sum;
    if (cl.tau_q > 0.0) M += cl.A2 * (cl.tau_q * std::exp(-s * cl.tau_q));
    return M;
}

}  // namespace dfc
