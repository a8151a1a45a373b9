// Characteristics of the periodic continuity equation: horizontal drifts,
// RK4 integration in the universal cover, trajectory bundles (the discrete
// carrier of the superposition measure) and weak-form residual checks.
#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "heisflow/cloud.hpp"
#include "heisflow/grid.hpp"
#include "heisflow/heis.hpp"
#include "heisflow/kernel.hpp"

namespace heisflow {

// A bounded Q_H-periodic horizontal drift v(x,t) with two components;
// the full velocity of the dynamics is v * B^T(x).
struct DriftField {
    std::function<std::array<double, 2>(const HPoint&, double)> eval;
    double bound = 0.0;
    std::optional<double> lipschitz_hint;

    static DriftField zero() {
        return {[](const HPoint&, double) { return std::array<double, 2>{0.0, 0.0}; },
                0.0, 0.0};
    }
    static DriftField constant(double v1, double v2) {
        return {[v1, v2](const HPoint&, double) {
                    return std::array<double, 2>{v1, v2};
                },
                std::hypot(v1, v2), 0.0};
    }
    // The stock cellular rotation field omega * (-sin(2 pi x2), sin(2 pi x1)),
    // Lipschitz and Q_H-periodic (no x3 dependence); the reference drift for
    // the weak-form refinement studies and the example configs.
    static DriftField rotating(double omega = 1.0);
};

// One RK4 step of Y' = v(Y,t) B^T(Y) in the universal cover.
HPoint rk4_step(const DriftField& v, const HPoint& y, double t, double dt);

// Full path from x0 at time s to t_end with fixed step dt (dt is rounded
// to divide the interval). States live in the cover; no projection.
// Throws on a non-finite state, reporting the offending time.
std::vector<HPoint> integrate_characteristic(const DriftField& v, const HPoint& x0,
                                             double s, double t_end, double dt);

// Per-atom characteristics observed on a time grid.
struct TrajectoryBundle {
    std::vector<double> times;
    // states[ti][atom], in the universal cover
    std::vector<std::vector<HPoint>> states;
    std::vector<double> weights;

    ParticleCloud cloud_at(std::size_t time_index) const;
};

// Integrate every atom of m0 through the drift; the measure flow m_t is
// e_t # eta read off the bundle columns. `dt` is the integration substep
// between observation times.
TrajectoryBundle solve_continuity(const DriftField& v, const ParticleCloud& m0,
                                  const std::vector<double>& times, double dt);

// A smooth Q_H-periodic test function with its horizontal gradient.
struct TestFunction {
    std::string name;
    std::function<double(const HPoint&)> value;
    std::function<std::array<double, 2>(const HPoint&)> hgrad;
};

struct WeakResidualReport {
    // max over interior times of |d/dt int zeta dm - int v . D_H zeta dm|,
    // one entry per test function
    std::vector<double> residuals;
    double max_residual = 0.0;
};

WeakResidualReport weak_residual(const TrajectoryBundle& bundle,
                                 const DriftField& v,
                                 const std::vector<TestFunction>& tests);

// A small catalogue of periodic test functions (constant, coordinate
// waves, one with genuine x3 dependence through the periodic vertical
// coordinate).
std::vector<TestFunction> standard_test_functions();

struct MollifiedSystemConfig {
    Resolution res{12, 12, 12};
    int time_nodes = 9;
    double t_end = 0.5;
    double dt = 0.01;
    std::size_t atoms = 4000;
    std::uint64_t seed = 7;
};

struct MollifiedSystemReport {
    WeakResidualReport residual;
    // per time node: integral |v_eps|^p dm_eps (left) vs |v|^p dm (right)
    struct JensenRow {
        double t;
        double p;
        double lhs;
        double rhs;
    };
    std::vector<JensenRow> jensen;
    bool jensen_ok(double slack) const;
};

// Builds m_eps, E_eps, v_eps = E_eps/m_eps at each observation time,
// transports a cloud sampled from m_eps_0 along v_eps and certifies the
// weak form of the mollified equation; reports the integrability bound
// for p in {1,2,4}.
MollifiedSystemReport mollified_system_check(const ParticleCloud& m0,
                                             const DriftField& v, double eps,
                                             const MollifiedSystemConfig& cfg = {});

// CSV dump: atom_id, t, x1, x2, x3, w.
void save_bundle_csv(const TrajectoryBundle& bundle, const std::string& path);

}  // namespace heisflow
