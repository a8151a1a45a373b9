// Core algebra of the first Heisenberg group H^1: group law, dilations,
// homogeneous norm/distance, the pavage decomposition and the induced
// torus distance. Everything here is a pure function on immutable values.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace heisflow {

// A point of H^1 = R^3 with the noncommutative law `mul`.
struct HPoint {
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;

    friend bool operator==(const HPoint&, const HPoint&) = default;
};

using IntTriple = std::array<std::int64_t, 3>;

// x (+) y = (x1+y1, x2+y2, x3+y3 - x2*y1 + x1*y2)
inline HPoint mul(const HPoint& x, const HPoint& y) {
    return {x.x1 + y.x1, x.x2 + y.x2, x.x3 + y.x3 - x.x2 * y.x1 + x.x1 * y.x2};
}

inline HPoint inverse(const HPoint& x) { return {-x.x1, -x.x2, -x.x3}; }

inline HPoint to_point(const IntTriple& n) {
    return {static_cast<double>(n[0]), static_cast<double>(n[1]),
            static_cast<double>(n[2])};
}

// delta_lambda(x) = (l*x1, l*x2, l^2*x3), lambda > 0
inline HPoint dilate(double lambda, const HPoint& x) {
    if (!(lambda > 0.0)) throw std::invalid_argument("dilate: lambda must be > 0");
    return {lambda * x.x1, lambda * x.x2, lambda * lambda * x.x3};
}

// ||x||_H = ((x1^2+x2^2)^2 + x3^2)^(1/4)
inline double h_norm(const HPoint& x) {
    const double s = x.x1 * x.x1 + x.x2 * x.x2;
    return std::pow(s * s + x.x3 * x.x3, 0.25);
}

// Fourth power of the homogeneous norm; avoids the pow in hot loops.
inline double h_norm4(const HPoint& x) {
    const double s = x.x1 * x.x1 + x.x2 * x.x2;
    return s * s + x.x3 * x.x3;
}

// d_H(x,y) = ||y^-1 (+) x||_H (left-invariant)
inline double h_dist(const HPoint& x, const HPoint& y) {
    return h_norm(mul(inverse(y), x));
}

// The 3x2 matrix B(x) whose columns are the horizontal fields X_1, X_2.
// Rows: (1,0), (0,1), (-x2, x1).
struct HorizontalFrame {
    std::array<std::array<double, 2>, 3> b;
};

inline HorizontalFrame horizontal_frame(const HPoint& x) {
    return {{{{1.0, 0.0}, {0.0, 1.0}, {-x.x2, x.x1}}}};
}

// Velocity of the horizontal dynamics: alpha * B^T(x) as a tangent vector.
inline HPoint horizontal_velocity(const HPoint& x, double a1, double a2) {
    return {a1, a2, -x.x2 * a1 + x.x1 * a2};
}

// The unique pair n in Z^3, q in [0,1)^3 with n (+) q = x.
struct PavageDecomposition {
    IntTriple n;
    HPoint q;
};

// Integer/fractional split adapted to the group law: the first two
// coordinates split as in R, the third is corrected by the commutator
// terms before taking its floor.
inline PavageDecomposition pavage(const HPoint& x) {
    const double n1 = std::floor(x.x1);
    const double q1 = x.x1 - n1;
    const double n2 = std::floor(x.x2);
    const double q2 = x.x2 - n2;
    const double a = x.x3 + n2 * q1 - n1 * q2;
    const double n3 = std::floor(a);
    const double q3 = a - n3;
    return {{static_cast<std::int64_t>(n1), static_cast<std::int64_t>(n2),
             static_cast<std::int64_t>(n3)},
            {q1, q2, q3}};
}

inline HPoint fundamental(const HPoint& x) { return pavage(x).q; }

// Distance on the Heisenberg torus H^1 / Z^3:
//   min over n in a lattice window of d_H(q(x), n (+) q(y)).
// By left-invariance and the subgroup property of Z^3 the double infimum
// over translates of both arguments collapses to a single window sweep.
// W = 2 suffices for points of the fundamental domain (see tests).
inline double torus_dist(const HPoint& x, const HPoint& y, int window = 2) {
    const HPoint qx = fundamental(x);
    const HPoint qy = fundamental(y);
    double best = h_dist(qx, qy);
    for (int n1 = -window; n1 <= window; ++n1)
        for (int n2 = -window; n2 <= window; ++n2)
            for (int n3 = -window; n3 <= window; ++n3) {
                if (n1 == 0 && n2 == 0 && n3 == 0) continue;
                const HPoint n{static_cast<double>(n1), static_cast<double>(n2),
                               static_cast<double>(n3)};
                const double d = h_dist(qx, mul(n, qy));
                if (d < best) best = d;
            }
    return best;
}

}  // namespace heisflow
