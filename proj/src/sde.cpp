#include "heisflow/sde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "heisflow/rng.hpp"

namespace heisflow {

namespace {

void validate(const SdeConfig& cfg) {
    if (!(cfg.sigma >= 0.0) || cfg.sigma >= 1.0)
        throw std::invalid_argument("simulate_sde: sigma must lie in [0, 1)");
    if (!(cfg.dt > 0.0))
        throw std::invalid_argument("simulate_sde: dt must be positive");
    if (cfg.n_paths == 0)
        throw std::invalid_argument("simulate_sde: need at least one path");
}

// start points drawn by weight with replacement; deterministic in the seed
std::vector<HPoint> draw_starts(const ParticleCloud& m0, std::size_t n,
                                std::uint64_t seed) {
    std::vector<double> cum;
    cum.reserve(m0.size());
    double acc = 0.0;
    for (const auto& a : m0.atoms()) {
        acc += a.w;
        cum.push_back(acc);
    }
    Pcg64 rng(seed ^ 0x5de1a2f0c3b4d596ULL);
    std::vector<HPoint> starts(n);
    for (std::size_t p = 0; p < n; ++p) {
        const double u = rng.uniform() * acc;
        const auto it = std::lower_bound(cum.begin(), cum.end(), u);
        const std::size_t idx =
            std::min<std::size_t>(it - cum.begin(), m0.size() - 1);
        starts[p] = m0.atoms()[idx].p;
    }
    return starts;
}

}  // namespace

TrajectoryBundle simulate_sde(const DriftField& drift, const SdeConfig& cfg,
                              const ParticleCloud& m0,
                              const std::vector<double>& times) {
    validate(cfg);
    if (times.size() < 2)
        throw std::invalid_argument("simulate_sde: need at least two times");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("simulate_sde: times must increase");

    TrajectoryBundle bundle;
    bundle.times = times;
    bundle.states.assign(times.size(),
                         std::vector<HPoint>(cfg.n_paths));
    bundle.weights.assign(cfg.n_paths, 1.0 / static_cast<double>(cfg.n_paths));

    const std::vector<HPoint> starts = draw_starts(m0, cfg.n_paths, cfg.seed);
    const double noise = std::sqrt(2.0 * cfg.sigma);

    for (std::size_t p = 0; p < cfg.n_paths; ++p) {
        HPoint y = starts[p];
        bundle.states[0][p] = y;
        std::uint64_t step = 0;  // global along the path: the key of the CRN
        for (std::size_t ti = 0; ti + 1 < times.size(); ++ti) {
            const double span = times[ti + 1] - times[ti];
            const int nsteps =
                std::max(1, static_cast<int>(std::ceil(span / cfg.dt - 1e-12)));
            const double h = span / nsteps;
            const double root = noise * std::sqrt(h);
            double t = times[ti];
            for (int n = 0; n < nsteps; ++n, ++step) {
                const auto a = drift.eval(y, t);
                double z1, z2;
                counter_normal_pair(cfg.seed, p, step, z1, z2);
                // group increment: y (+) (h1, h2, 0) = y + B(y) (h1, h2)
                y = mul(y, {a[0] * h + root * z1, a[1] * h + root * z2, 0.0});
                t += h;
                if (!std::isfinite(y.x1) || !std::isfinite(y.x2) ||
                    !std::isfinite(y.x3))
                    throw std::runtime_error(
                        "simulate_sde: path " + std::to_string(p) +
                        " left the finite range at t = " + std::to_string(t));
            }
            bundle.states[ti + 1][p] = y;
        }
    }
    return bundle;
}

std::vector<MomentRow> moment_table(const TrajectoryBundle& bundle) {
    std::vector<MomentRow> rows;
    rows.reserve(bundle.times.size());
    for (std::size_t ti = 0; ti < bundle.times.size(); ++ti) {
        MomentRow r;
        r.t = bundle.times[ti];
        double w1 = 0.0;
        for (std::size_t p = 0; p < bundle.weights.size(); ++p) {
            const double w = bundle.weights[p];
            const HPoint& y = bundle.states[ti][p];
            w1 += w;
            r.mean1 += w * y.x1;
            r.mean2 += w * y.x2;
            r.var1 += w * y.x1 * y.x1;
            r.var2 += w * y.x2 * y.x2;
            r.second_moment += w * (y.x1 * y.x1 + y.x2 * y.x2 + y.x3 * y.x3);
        }
        r.mean1 /= w1;
        r.mean2 /= w1;
        r.var1 = r.var1 / w1 - r.mean1 * r.mean1;
        r.var2 = r.var2 / w1 - r.mean2 * r.mean2;
        r.second_moment /= w1;
        rows.push_back(r);
    }
    return rows;
}

double bundle_marginal_gap(const TrajectoryBundle& bundle, std::size_t ti,
                           std::size_t tj) {
    if (ti >= bundle.times.size() || tj >= bundle.times.size())
        throw std::invalid_argument("bundle_marginal_gap: time index range");
    double s = 0.0;
    for (std::size_t p = 0; p < bundle.weights.size(); ++p)
        s += bundle.weights[p] * torus_dist(fundamental(bundle.states[ti][p]),
                                            fundamental(bundle.states[tj][p]));
    return s;
}

LawDistanceReport law_distance_curve(const DriftField& drift,
                                     const ParticleCloud& m0,
                                     const std::vector<double>& sigmas,
                                     const std::vector<double>& times,
                                     const SdeConfig& base) {
    LawDistanceReport rep;
    rep.sigmas = sigmas;
    rep.times = times;

    SdeConfig det = base;
    det.sigma = 0.0;
    const TrajectoryBundle reference = simulate_sde(drift, det, m0, times);

    for (double s : sigmas) {
        SdeConfig cfg = base;
        cfg.sigma = s;
        const TrajectoryBundle bundle = simulate_sde(drift, cfg, m0, times);

        std::vector<double> dist(times.size(), 0.0);
        for (std::size_t ti = 0; ti < times.size(); ++ti) {
            double acc = 0.0;
            for (std::size_t p = 0; p < bundle.weights.size(); ++p)
                acc += bundle.weights[p] *
                       torus_dist(fundamental(bundle.states[ti][p]),
                                  fundamental(reference.states[ti][p]));
            dist[ti] = acc;
        }
        rep.distance.push_back(std::move(dist));

        std::vector<double> gaps_dt, gaps_d;
        for (std::size_t i = 0; i < times.size(); ++i)
            for (std::size_t j = i + 1; j < times.size();
                 j += (j - i < 4 ? 1 : 3)) {
                gaps_dt.push_back(times[j] - times[i]);
                gaps_d.push_back(bundle_marginal_gap(bundle, i, j));
            }
        rep.holder.push_back(fit_power(gaps_dt, gaps_d));
    }
    return rep;
}

}  // namespace heisflow
