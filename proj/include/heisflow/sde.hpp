// Monte Carlo side of the vanishing-viscosity limit: Euler-Maruyama paths
// of the horizontal SDE dY = v(Y,t) B^T(Y) dt + sqrt(2 sigma) B(Y) dW,
// coupled across viscosities by a counter-based generator (common random
// numbers), with law comparisons against the deterministic push-forward.
#pragma once

#include <cstdint>
#include <vector>

#include "heisflow/cloud.hpp"
#include "heisflow/continuity.hpp"
#include "heisflow/fit.hpp"

namespace heisflow {

struct SdeConfig {
    double sigma = 0.1;  // viscosity, in [0,1)
    double dt = 1e-3;    // Euler-Maruyama step
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
};

// Euler-Maruyama paths observed on `times`. Start points are drawn from m0
// by weight (with replacement) using the config seed, and the Brownian
// increments are keyed by (seed, path, step), so runs with different sigma
// share both start points and noise. The horizontal increment is applied
// as a group translation Y (+) (h1, h2, 0), which equals Y + B(Y) h
// exactly. Throws on a non-finite state with the path and time.
TrajectoryBundle simulate_sde(const DriftField& drift, const SdeConfig& cfg,
                              const ParticleCloud& m0,
                              const std::vector<double>& times);

struct MomentRow {
    double t = 0.0;
    double mean1 = 0.0, mean2 = 0.0;  // E Y1, E Y2 (martingales when v = 0)
    double var1 = 0.0, var2 = 0.0;    // Var Y1, Var Y2 (= 2 sigma t when v = 0)
    double second_moment = 0.0;       // E |Y|^2 in the cover
};

// Per-observation-time moment table of a path bundle.
std::vector<MomentRow> moment_table(const TrajectoryBundle& bundle);

struct LawDistanceReport {
    std::vector<double> sigmas;
    std::vector<double> times;
    // distance[s][ti]: coupling upper bound on d1 between the sigma_s law
    // and the deterministic push-forward at times[ti], through the shared
    // (start point, noise) coupling
    std::vector<std::vector<double>> distance;
    // per sigma: fit of t - s -> d1 bound between the laws at two times
    std::vector<PowerFit> holder;
};

// Simulates every sigma with common random numbers against the sigma = 0
// deterministic flow of the same start points and reports the coupled d1
// bounds and the time-modulus fits.
LawDistanceReport law_distance_curve(const DriftField& drift,
                                     const ParticleCloud& m0,
                                     const std::vector<double>& sigmas,
                                     const std::vector<double>& times,
                                     const SdeConfig& base);

// Coupling upper bound on d1 between the time-ti and time-tj marginals of
// one bundle (same-path torus distances, averaged by weight).
double bundle_marginal_gap(const TrajectoryBundle& bundle, std::size_t ti,
                           std::size_t tj);

}  // namespace heisflow
