// Backward semi-Lagrangian dynamic programming for the periodic
// Hamilton-Jacobi equation -du/dt + |D_H u|^2/2 = f, u(.,T) = g, over a
// sampled disk of horizontal controls, plus the optimal-synthesis drift
// -D_H u.
#pragma once

#include <array>
#include <functional>
#include <vector>

#include "heisflow/continuity.hpp"
#include "heisflow/grid.hpp"

namespace heisflow {

struct CostData {
    std::function<double(const HPoint&, double)> f;  // running cost
    std::function<double(const HPoint&)> g;          // terminal cost
    double f_sup = 0.0;
    double g_sup = 0.0;

    static CostData zero() {
        return {[](const HPoint&, double) { return 0.0; },
                [](const HPoint&) { return 0.0; }, 0.0, 0.0};
    }
};

class ControlDisk {
  public:
    // Concentric rings including the zero control, samples ordered by
    // increasing modulus (ties in the one-step value then resolve toward
    // the smaller control).
    static ControlDisk rings(double radius, int n_rings, int per_ring);

    // The default bound 2*sqrt(2C(T+1)) from the energy estimate for the
    // optimal control; validated by the doubling test.
    static double default_radius(double cost_bound, double horizon) {
        return 2.0 * std::sqrt(2.0 * std::max(cost_bound, 1e-12) * (horizon + 1.0));
    }

    double radius() const { return radius_; }
    const std::vector<std::array<double, 2>>& samples() const { return samples_; }

  private:
    double radius_ = 0.0;
    std::vector<std::array<double, 2>> samples_;
};

struct ValueFunction {
    std::vector<double> times;
    std::vector<GridField> slices;  // one per time node, terminal = g

    std::size_t nearest_slice(double t) const;
    double lookup(const HPoint& x, double t) const;
};

// One RK2 (midpoint) displacement along x' = alpha B^T(x).
HPoint control_step(const HPoint& x, const std::array<double, 2>& alpha, double dt);

ValueFunction solve_hjb(const CostData& cost, const ControlDisk& controls,
                        Resolution res, const std::vector<double>& times);

// Centered finite differences of (X_1 u, X_2 u) with Heisenberg-periodic
// neighbor fetch.
VectorGridField horizontal_gradient(const GridField& u_slice);

// Feedback drift alpha(x,t) = -D_H u(x,t); space trilinear, time nearest
// slice.
DriftField synthesis_drift(const ValueFunction& u);

struct DppReport {
    double max_residual = 0.0;
    std::vector<double> residuals;
};

// Recompute the one-step minimum at sample points and compare with the
// stored slices.
DppReport verify_dpp(const ValueFunction& u, const CostData& cost,
                     const ControlDisk& controls,
                     const std::vector<std::pair<HPoint, std::size_t>>& samples);

}  // namespace heisflow
