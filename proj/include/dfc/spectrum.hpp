#pragma once

#include <vector>

#include "dfc/core_model.hpp"

namespace dfc {

struct Root {
    Complex value;
    double residual = 0.0;  // sigma_min(Delta)/max(sigma_max(Delta), |s|)
};

struct SpectrumResult {
    std::vector<Root> roots;       // sorted by descending real part, conjugate-closed
    double abscissa = 0.0;         // real part of the first root
    int discretization_order = 0;  // N actually used (0 for the dense delay-free path)
    double max_delay = 0.0;
    bool complete = true;          // false when fewer validated roots than requested
};

struct NewtonResult {
    Complex root;
    double residual = 0.0;
    bool converged = false;
    int iterations = 0;
};

struct SpectrumOptions {
    int discretization_order = 32;    // N; doubled once on N vs 2N disagreement
    double residual_tol = 1e-8;       // acceptance bound on validated roots
    double dedup_tol = 1e-6;
    double agreement_tol = 1e-6;      // N vs 2N comparison of the rightmost candidates
};

// Scale-invariant singularity measure of Delta(s); <= residual_tol at a root.
double char_residual(const ClosedLoopDDE& cl, Complex s);

// Collocation matrix of the solution operator's generator on N+1
// Chebyshev-Gauss-Lobatto nodes over [-max_delay, 0]; its eigenvalues
// approximate the characteristic roots. Requires N >= 4 and at least one
// positive delay. Prints a warning to stderr if two delays are closer than
// the minimum node spacing.
Matrix discretize(const ClosedLoopDDE& cl, int N);

// Newton iteration on det Delta(s) = 0 via the logarithmic derivative
// step -1 / tr(Delta^{-1} Delta'). Stops on step < 1e-12 or residual < 1e-13.
NewtonResult newton_refine(const ClosedLoopDDE& cl, Complex s0);

// The `count` rightmost validated characteristic roots. Delay-free systems
// use a dense eigensolver on A0 directly. The returned abscissa is exact for
// the returned finite set; callers treating it as the true spectral abscissa
// rely on the discretization capturing all roots with Re s >= abscissa - 1.
SpectrumResult rightmost_roots(const ClosedLoopDDE& cl, int count,
                               const SpectrumOptions& opt = {});

inline constexpr int kDefaultRootCount = 10;

// columns re,im,residual
void write_roots_csv(const std::string& path, const SpectrumResult& result);

}  // namespace dfc
