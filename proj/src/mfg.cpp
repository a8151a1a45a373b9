#include "heisflow/mfg.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "heisflow/rng.hpp"
#include "heisflow/transport.hpp"

namespace heisflow {

GridField eval_coupling(const Kernel& k, double weight, const ParticleCloud& cloud,
                        Resolution res) {
    GridField f = density_from_cloud(cloud, k, res);
    f *= weight;
    return f;
}

namespace {

// time-indexed grid fields packaged as the running cost of an HJB solve
CostData cost_from_fields(std::shared_ptr<std::vector<GridField>> f_fields,
                          std::shared_ptr<GridField> g_field,
                          std::vector<double> times) {
    CostData cost;
    double fs = 0.0;
    for (const auto& f : *f_fields) fs = std::max(fs, f.max_abs());
    cost.f_sup = fs;
    cost.g_sup = g_field->max_abs();
    cost.f = [f_fields, times](const HPoint& x, double t) {
        std::size_t best = 0;
        double bd = std::abs(times[0] - t);
        for (std::size_t i = 1; i < times.size(); ++i) {
            const double d = std::abs(times[i] - t);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        return (*f_fields)[best].lookup(x);
    };
    cost.g = [g_field](const HPoint& x) { return g_field->lookup(x); };
    return cost;
}

double same_atom_d1(const std::vector<HPoint>& a, const std::vector<HPoint>& b,
                    const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        s += w[i] * torus_dist(fundamental(a[i]), fundamental(b[i]));
    return s;
}

}  // namespace

std::pair<ValueFunction, DriftField> best_response_fields(
    const std::vector<GridField>& f_fields, const GridField& g_field,
    const std::vector<double>& times, Resolution res, const ControlDisk& controls) {
    if (f_fields.size() != times.size())
        throw std::invalid_argument("best_response: one f field per time node");
    auto fshared = std::make_shared<std::vector<GridField>>(f_fields);
    auto gshared = std::make_shared<GridField>(g_field);
    const CostData cost = cost_from_fields(fshared, gshared, times);
    ValueFunction u = solve_hjb(cost, controls, res, times);
    DriftField drift = synthesis_drift(u);
    return {std::move(u), std::move(drift)};
}

std::pair<ValueFunction, DriftField> best_response(
    const std::vector<ParticleCloud>& flow, const Coupling& c,
    const std::vector<double>& times, Resolution res, const ControlDisk& controls) {
    if (flow.size() != times.size())
        throw std::invalid_argument("best_response: one cloud per time node");
    std::vector<GridField> f_fields;
    f_fields.reserve(flow.size());
    for (const auto& m : flow)
        f_fields.push_back(eval_coupling(c.kernel, c.weight_f, m, res));
    const GridField g_field =
        eval_coupling(c.kernel, c.weight_g, flow.back(), res);
    return best_response_fields(f_fields, g_field, times, res, controls);
}

MfgState fixed_point(const ParticleCloud& m0, const Coupling& c,
                     const MfgConfig& cfg) {
    if (cfg.time_steps < 1 || cfg.max_iterations < 1 || !(cfg.tol > 0.0))
        throw std::invalid_argument("fixed_point: bad configuration");
    const std::size_t nt = static_cast<std::size_t>(cfg.time_steps) + 1;
    std::vector<double> times(nt);
    for (std::size_t i = 0; i < nt; ++i)
        times[i] = cfg.t_end * static_cast<double>(i) /
                   static_cast<double>(cfg.time_steps);

    MfgState state;
    state.times = times;

    // population average starts from the static flow m_t = m0
    const ParticleCloud kde0 = m0.subsample(cfg.kde_atoms);
    const GridField d0 = density_from_cloud(kde0, c.kernel, cfg.res);
    std::vector<GridField> avg_density(nt, d0);
    state.flow.assign(nt, m0.subsample(cfg.flow_atom_cap));

    // control bound from the coupling sup on the initial population
    const double cost_bound =
        std::max(std::abs(c.weight_f), std::abs(c.weight_g)) * d0.max_value();
    const double radius =
        cfg.control_radius > 0.0
            ? cfg.control_radius
            : std::max(ControlDisk::default_radius(cost_bound, cfg.t_end), 1e-2);
    const ControlDisk controls =
        ControlDisk::rings(radius, cfg.control_rings, cfg.control_per_ring);

    std::vector<double> weights(m0.size());
    for (std::size_t a = 0; a < m0.size(); ++a) weights[a] = m0.atoms()[a].w;

    // flow clouds accumulate one equal-size block per play; renormalization
    // then weights the plays uniformly, which is the fictitious-play average
    const std::size_t per_play = std::max<std::size_t>(
        1, cfg.flow_atom_cap / static_cast<std::size_t>(cfg.max_iterations));
    std::vector<std::vector<Atom>> flow_blocks(nt);

    for (int k = 1; k <= cfg.max_iterations; ++k) {
        std::vector<GridField> f_fields;
        f_fields.reserve(nt);
        for (const auto& d : avg_density) {
            GridField f = d;
            f *= c.weight_f;
            f_fields.push_back(std::move(f));
        }
        GridField g_field = avg_density.back();
        g_field *= c.weight_g;

        auto [u, drift] =
            best_response_fields(f_fields, g_field, times, cfg.res, controls);
        TrajectoryBundle play = solve_continuity(drift, m0, times, cfg.ode_dt);
        state.f_fields = std::move(f_fields);
        state.g_field = std::move(g_field);

        // fictitious-play update m^k = ((k-1) m^{k-1} + play^k)/k; the
        // residual is a transport upper bound on sup_t d1(m^{k-1}_t, m^k_t)
        // between the successive population densities
        const double old_w = static_cast<double>(k - 1) / static_cast<double>(k);
        double c0 = 0.0;
        double residual = 0.0;
        for (std::size_t ti = 0; ti < nt; ++ti) {
            const GridField nd = density_from_cloud(
                play.cloud_at(ti).subsample(cfg.kde_atoms), c.kernel, cfg.res);
            const GridField prev = avg_density[ti];
            avg_density[ti] *= old_w;
            GridField scaled = nd;
            scaled *= 1.0 - old_w;
            avg_density[ti] += scaled;
            residual = std::max(residual, rectilinear_d1(avg_density[ti], prev));
            c0 = std::max(c0, avg_density[ti].max_value());
            if (ti > 0) {
                const ParticleCloud sub = play.cloud_at(ti).subsample(per_play);
                flow_blocks[ti].insert(flow_blocks[ti].end(),
                                       sub.atoms().begin(), sub.atoms().end());
                state.flow[ti] = ParticleCloud(flow_blocks[ti]);
            }
        }
        state.residuals.push_back(residual);
        state.c0_history.push_back(c0);

        state.u = std::move(u);
        state.drift = std::move(drift);
        state.bundle = std::move(play);
        state.iterations = k;
        if (residual < cfg.tol) {
            state.converged = true;
            break;
        }
    }

    // quarter-Holder fit of t -> m_t in d1 on the equilibrium bundle,
    // through the same-atom coupling (free of subsampling noise)
    {
        std::vector<double> dts, ds;
        for (std::size_t i = 0; i < nt; ++i)
            for (std::size_t j = i + 1; j < nt; j += (j - i < 4 ? 1 : 3)) {
                dts.push_back(times[j] - times[i]);
                ds.push_back(same_atom_d1(state.bundle.states[i],
                                          state.bundle.states[j], weights));
            }
        state.holder = fit_power(dts, ds);
    }
    return state;
}

CertificateReport mild_certificate(const MfgState& state, const Coupling& c,
                                   std::size_t sample_atoms, std::uint64_t seed) {
    if (state.flow.empty() || state.times.size() < 2)
        throw std::invalid_argument("mild_certificate: empty state");
    const Resolution res = state.u.slices.front().res();
    const std::vector<double>& times = state.times;

    // the cost that defined the final best response: the stored fields when
    // available, otherwise rebuilt from the averaged flow clouds
    std::vector<GridField> f_fields = state.f_fields;
    GridField g_field = state.g_field;
    if (f_fields.empty()) {
        f_fields.reserve(times.size());
        for (const auto& m : state.flow)
            f_fields.push_back(eval_coupling(c.kernel, c.weight_f, m, res));
        g_field = eval_coupling(c.kernel, c.weight_g, state.flow.back(), res);
    }

    // discrete trajectory cost with the scheme's own stepping and stage
    // quadrature; alpha is read from the synthesis drift at the arrival
    // slice (the first-order optimal feedback of the backward step)
    auto trajectory_cost = [&](const HPoint& x0, double p1, double p2) {
        HPoint y = x0;
        double J = 0.0;
        for (std::size_t ti = 0; ti + 1 < times.size(); ++ti) {
            const double dt = times[ti + 1] - times[ti];
            auto a = state.drift.eval(y, times[ti + 1]);
            a[0] += p1;
            a[1] += p2;
            J += dt * (0.5 * (a[0] * a[0] + a[1] * a[1]) +
                       f_fields[ti].lookup(y));
            y = control_step(y, a, dt);
        }
        return J + g_field.lookup(y);
    };

    const ParticleCloud probes =
        state.flow.front().subsample(std::max<std::size_t>(sample_atoms, 1));
    Pcg64 rng(seed);
    CertificateReport rep;
    for (const auto& atom : probes.atoms()) {
        if (rep.samples == sample_atoms) break;
        ++rep.samples;
        const double J = trajectory_cost(atom.p, 0.0, 0.0);
        const double u0 = state.u.slices.front().lookup(atom.p);
        const double gap = std::abs(J - u0) / std::max(1.0, std::abs(u0));
        rep.max_gap = std::max(rep.max_gap, gap);
        rep.mean_gap += gap;
        const double th = rng.uniform(0.0, 6.283185307179586);
        const double Jp =
            trajectory_cost(atom.p, 0.4 * std::cos(th), 0.4 * std::sin(th));
        if (Jp > J) ++rep.perturbation_wins;
    }
    if (rep.samples > 0) rep.mean_gap /= static_cast<double>(rep.samples);
    return rep;
}

ParticleCloud benchmark_m0(std::size_t atoms, std::uint64_t seed) {
    const double tp = 6.283185307179586;
    return ParticleCloud::sample(
        [tp](const HPoint& x) {
            return 1.0 + 0.5 * std::cos(tp * x.x1) * std::cos(tp * x.x2);
        },
        1.5, atoms, seed);
}

}  // namespace heisflow
