#include "dfc/signal.hpp"

#include <stdexcept>

namespace dfc {

Vector Signal::value(double t) const {
    if (pieces.empty()) return Vector();
    Vector v = Vector::Zero(pieces.front().direction.size());
    for (const auto& piece : pieces) {
        const double dt = t - piece.t_start;
        if (dt < 0.0) continue;
        v += piece.direction * (piece.coeffs[0] + dt * (piece.coeffs[1] + dt * piece.coeffs[2]));
    }
    return v;
}

void Signal::validate() const {
    for (const auto& piece : pieces) {
        if (piece.direction.size() == 0)
            throw std::invalid_argument("signal piece has empty direction");
        if (piece.direction.size() != pieces.front().direction.size())
            throw std::invalid_argument("signal pieces have inconsistent direction dimensions");
        if (piece.t_start < 0.0)
            throw std::invalid_argument("signal piece starts before t = 0");
    }
}

Signal Signal::step(double t0, double amplitude, Vector direction) {
    Signal s;
    s.pieces.push_back({t0, {amplitude, 0.0, 0.0}, std::move(direction)});
    return s;
}

Signal Signal::ramp(double t0, double slope, Vector direction) {
    Signal s;
    s.pieces.push_back({t0, {0.0, slope, 0.0}, std::move(direction)});
    return s;
}

Signal Signal::parabola(double t0, double c2, Vector direction) {
    Signal s;
    s.pieces.push_back({t0, {0.0, 0.0, c2}, std::move(direction)});
    return s;
}

Signal& Signal::add(const Signal& other) {
    pieces.insert(pieces.end(), other.pieces.begin(), other.pieces.end());
    return *this;
}

}  // namespace dfc
