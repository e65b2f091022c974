#pragma once

#include <array>
#include <vector>

#include "dfc/types.hpp"

namespace dfc {

// Piecewise-polynomial vector signal of degree <= 2. Each piece contributes
//   direction * (c0 + c1*(t - t_start) + c2*(t - t_start)^2)   for t >= t_start
// and the value is the zero vector before the earliest t_start.
struct Signal {
    struct Piece {
        double t_start = 0.0;
        std::array<double, 3> coeffs{0.0, 0.0, 0.0};  // c0, c1, c2
        Vector direction;
    };

    std::vector<Piece> pieces;

    // Dimension of the signal; 0 when empty (evaluates to a zero vector of
    // whatever size the caller resizes to).
    int dim() const { return pieces.empty() ? 0 : static_cast<int>(pieces.front().direction.size()); }
    bool empty() const { return pieces.empty(); }

    Vector value(double t) const;
    void validate() const;  // consistent dimensions, t_start >= 0

    static Signal zero() { return {}; }
    static Signal step(double t0, double amplitude, Vector direction);
    static Signal ramp(double t0, double slope, Vector direction);
    static Signal parabola(double t0, double c2, Vector direction);
    Signal& add(const Signal& other);
};

}  // namespace dfc
