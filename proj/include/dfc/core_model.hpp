#pragma once

#include <vector>

#include "dfc/types.hpp"

namespace dfc {

// Open-loop LTI plant xdot = A x + B u, y = C x.
struct Plant {
    Matrix A;  // n x n
    Matrix B;  // n x r
    Matrix C;  // m x n

    int n() const { return static_cast<int>(A.rows()); }
    int r() const { return static_cast<int>(B.cols()); }
    int m() const { return static_cast<int>(C.rows()); }

    // Throws std::invalid_argument naming the offending matrix.
    void validate() const;
};

// Parameters of the delayed feedback law
//   u(t) = -( K * sum_{i=0}^p (-1)^i binom(p,i) x(t - i*tau) + K1 * q(t) )
// with the modified integral state
//   qdot(t) = C x(t) - r(t) - K2 (q(t) - q(t - tau_q)).
// K2 is stored even when tau_q == 0 but is inactive in that case.
struct DelayedFeedbackController {
    Matrix K;      // r x n
    Matrix K1;     // r x m
    Matrix K2;     // m x m
    double tau   = 0.0;
    double tau_q = 0.0;
    int    p     = 0;

    bool tau_q_active() const { return tau_q > 0.0; }
    // K2 as it enters the closed loop: zero when tau_q == 0.
    Matrix k2_active() const;

    void validate(const Plant& plant) const;
};

// Assembled closed loop
//   Gdot(t) = A0 G(t) + A1 * sum_{i=1}^p w_i G(t - i*tau) + A2 G(t - tau_q) + T r(t)
// with G = [x; q] and w_i = (-1)^i binom(p, i).
struct ClosedLoopDDE {
    Matrix A0;  // (n+m) x (n+m)
    Matrix A1;
    Matrix A2;
    Matrix T;   // (n+m) x m reference injection [0; -I]
    std::vector<long long> weights;  // w_0 .. w_p
    double tau   = 0.0;
    double tau_q = 0.0;
    int    n     = 0;
    int    m     = 0;

    // Constituents kept so they can be recovered exactly (B and K only
    // appear as products in the block matrices).
    Plant plant;
    DelayedFeedbackController ctrl;

    int dim() const { return n + m; }
    int p() const { return static_cast<int>(weights.size()) - 1; }

    // Strictly positive delays: {i*tau : i=1..p} plus tau_q when active.
    std::vector<double> delays() const;
    double max_delay() const;

    // True when no delayed term actually enters the dynamics (A1 never
    // applied because p == 0 or A1 == 0, and A2 == 0 or tau_q inactive).
    bool delay_free() const;
};

// w_i = (-1)^i * binom(p, i), i = 0..p.
std::vector<long long> binomial_weights(int p);

// Augmented open-loop pair of the integrator-extended system:
// A_aug = [[A, 0], [C, 0]], B_aug = [[B], [0]].
std::pair<Matrix, Matrix> build_augmented(const Plant& plant);

ClosedLoopDDE build_closed_loop(const Plant& plant, const DelayedFeedbackController& ctrl);

// Characteristic matrix of the closed loop,
//   Delta(s) = s I - A0 - A1 * sum_{i=1}^p w_i e^{-s i tau} - A2 e^{-s tau_q}.
CMatrix char_matrix(const ClosedLoopDDE& cl, Complex s);

// d Delta / ds = I + A1 * sum_{i=1}^p w_i (i tau) e^{-s i tau} + A2 tau_q e^{-s tau_q}.
CMatrix char_matrix_derivative(const ClosedLoopDDE& cl, Complex s);

}  // namespace dfc
