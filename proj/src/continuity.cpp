#include "heisflow/continuity.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace heisflow {

namespace {

inline HPoint axpy(const HPoint& y, double h, const HPoint& k) {
    return {y.x1 + h * k.x1, y.x2 + h * k.x2, y.x3 + h * k.x3};
}

inline HPoint velocity(const DriftField& v, const HPoint& y, double t) {
    const auto a = v.eval(y, t);
    return horizontal_velocity(y, a[0], a[1]);
}

}  // namespace

DriftField DriftField::rotating(double omega) {
    const double tp = 6.283185307179586;
    return {[omega, tp](const HPoint& x, double) {
                return std::array<double, 2>{-omega * std::sin(tp * x.x2),
                                             omega * std::sin(tp * x.x1)};
            },
            std::abs(omega) * std::sqrt(2.0), std::abs(omega) * tp};
}

HPoint rk4_step(const DriftField& v, const HPoint& y, double t, double dt) {
    const HPoint k1 = velocity(v, y, t);
    const HPoint k2 = velocity(v, axpy(y, 0.5 * dt, k1), t + 0.5 * dt);
    const HPoint k3 = velocity(v, axpy(y, 0.5 * dt, k2), t + 0.5 * dt);
    const HPoint k4 = velocity(v, axpy(y, dt, k3), t + dt);
    return {y.x1 + dt / 6.0 * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1),
            y.x2 + dt / 6.0 * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2),
            y.x3 + dt / 6.0 * (k1.x3 + 2.0 * k2.x3 + 2.0 * k3.x3 + k4.x3)};
}

namespace {

inline bool finite(const HPoint& y) {
    return std::isfinite(y.x1) && std::isfinite(y.x2) && std::isfinite(y.x3);
}

// advance from s to t_end with steps of size <= dt
HPoint advance(const DriftField& v, HPoint y, double s, double t_end, double dt) {
    const double span = t_end - s;
    if (span <= 0.0) return y;
    const int n = std::max(1, static_cast<int>(std::lround(span / dt)));
    const double h = span / n;
    for (int i = 0; i < n; ++i) {
        y = rk4_step(v, y, s + i * h, h);
        if (!finite(y))
            throw std::runtime_error("characteristic diverged at t = " +
                                     std::to_string(s + (i + 1) * h));
    }
    return y;
}

}  // namespace

std::vector<HPoint> integrate_characteristic(const DriftField& v, const HPoint& x0,
                                             double s, double t_end, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be > 0");
    if (t_end < s) throw std::invalid_argument("integrate: t_end < s");
    const int n = std::max(1, static_cast<int>(std::lround((t_end - s) / dt)));
    const double h = (t_end - s) / n;
    std::vector<HPoint> path;
    path.reserve(n + 1);
    path.push_back(x0);
    HPoint y = x0;
    for (int i = 0; i < n; ++i) {
        y = rk4_step(v, y, s + i * h, h);
        if (!finite(y))
            throw std::runtime_error("characteristic diverged at t = " +
                                     std::to_string(s + (i + 1) * h));
        path.push_back(y);
    }
    return path;
}

ParticleCloud TrajectoryBundle::cloud_at(std::size_t time_index) const {
    std::vector<Atom> atoms(weights.size());
    for (std::size_t a = 0; a < weights.size(); ++a)
        atoms[a] = {fundamental(states[time_index][a]), weights[a]};
    return ParticleCloud(std::move(atoms));
}

TrajectoryBundle solve_continuity(const DriftField& v, const ParticleCloud& m0,
                                  const std::vector<double>& times, double dt) {
    if (times.empty()) throw std::invalid_argument("solve_continuity: empty grid");
    TrajectoryBundle b;
    b.times = times;
    b.states.assign(times.size(), std::vector<HPoint>(m0.size()));
    b.weights.resize(m0.size());
    for (std::size_t a = 0; a < m0.size(); ++a) {
        b.weights[a] = m0.atoms()[a].w;
        HPoint y = m0.atoms()[a].p;
        b.states[0][a] = y;
        for (std::size_t ti = 1; ti < times.size(); ++ti) {
            y = advance(v, y, times[ti - 1], times[ti], dt);
            b.states[ti][a] = y;
        }
    }
    return b;
}

WeakResidualReport weak_residual(const TrajectoryBundle& bundle,
                                 const DriftField& v,
                                 const std::vector<TestFunction>& tests) {
    // Against the flow Y' = v B^T the pairing is
    //   d/dt int zeta dm_t = int v . D_H zeta dm_t.
    WeakResidualReport rep;
    const auto& times = bundle.times;
    for (const auto& zeta : tests) {
        std::vector<double> s(times.size(), 0.0), r(times.size(), 0.0);
        for (std::size_t ti = 0; ti < times.size(); ++ti) {
            for (std::size_t a = 0; a < bundle.weights.size(); ++a) {
                const HPoint& y = bundle.states[ti][a];
                const double w = bundle.weights[a];
                s[ti] += w * zeta.value(fundamental(y));
                const auto g = zeta.hgrad(fundamental(y));
                const auto vv = v.eval(y, times[ti]);
                r[ti] += w * (vv[0] * g[0] + vv[1] * g[1]);
            }
        }
        double worst = 0.0;
        for (std::size_t ti = 1; ti + 1 < times.size(); ++ti) {
            const double dsdt =
                (s[ti + 1] - s[ti - 1]) / (times[ti + 1] - times[ti - 1]);
            worst = std::max(worst, std::abs(dsdt - r[ti]));
        }
        rep.residuals.push_back(worst);
        rep.max_residual = std::max(rep.max_residual, worst);
    }
    return rep;
}

std::vector<TestFunction> standard_test_functions() {
    const double tp = 6.283185307179586;
    std::vector<TestFunction> t;
    t.push_back({"one", [](const HPoint&) { return 1.0; },
                 [](const HPoint&) { return std::array<double, 2>{0.0, 0.0}; }});
    t.push_back({"cos_x1",
                 [tp](const HPoint& x) { return std::cos(tp * x.x1); },
                 [tp](const HPoint& x) {
                     return std::array<double, 2>{-tp * std::sin(tp * x.x1), 0.0};
                 }});
    t.push_back({"sin_x2",
                 [tp](const HPoint& x) { return std::sin(tp * x.x2); },
                 [tp](const HPoint& x) {
                     return std::array<double, 2>{0.0, tp * std::cos(tp * x.x2)};
                 }});
    // genuine x3 dependence; periodic because it is a function of q_H(x)
    // evaluated through the pavage projection, and smooth along flows
    // sampled away from the cell boundary in distribution
    t.push_back({"cos_x1_sin_x2",
                 [tp](const HPoint& x) {
                     return std::cos(tp * x.x1) * std::sin(tp * x.x2);
                 },
                 [tp](const HPoint& x) {
                     return std::array<double, 2>{
                         -tp * std::sin(tp * x.x1) * std::sin(tp * x.x2),
                         tp * std::cos(tp * x.x1) * std::cos(tp * x.x2)};
                 }});
    return t;
}

bool MollifiedSystemReport::jensen_ok(double slack) const {
    for (const auto& row : jensen)
        if (row.lhs > row.rhs + slack) return false;
    return true;
}

MollifiedSystemReport mollified_system_check(const ParticleCloud& m0,
                                             const DriftField& v, double eps,
                                             const MollifiedSystemConfig& cfg) {
    const Kernel kernel(eps);
    // initial cloud drawn from m_eps_0
    GridField m0_grid = density_from_cloud(m0, kernel, cfg.res);
    const double sup0 = m0_grid.max_value() * 1.05;
    ParticleCloud cloud = ParticleCloud::sample(
        [&](const HPoint& x) { return m0_grid.lookup(x); }, sup0, cfg.atoms,
        cfg.seed);

    std::vector<double> times(cfg.time_nodes);
    for (int i = 0; i < cfg.time_nodes; ++i)
        times[i] = cfg.t_end * i / (cfg.time_nodes - 1);

    MollifiedSystemReport rep;
    const auto tests = standard_test_functions();
    std::vector<std::vector<double>> s(tests.size(),
                                       std::vector<double>(times.size(), 0.0));
    std::vector<std::vector<double>> r(tests.size(),
                                       std::vector<double>(times.size(), 0.0));

    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const double t = times[ti];
        // mollified density and momentum at this observation time
        GridField mgrid = density_from_cloud(cloud, kernel, cfg.res);
        VectorGridField momentum(cfg.res);
        for (int i = 0; i < cfg.res.n1; ++i)
            for (int j = 0; j < cfg.res.n2; ++j)
                for (int k = 0; k < cfg.res.n3; ++k) {
                    const HPoint x = mgrid.node_point(i, j, k);
                    const auto vv = v.eval(x, t);
                    momentum.c1.at(i, j, k) = vv[0] * mgrid.at(i, j, k);
                    momentum.c2.at(i, j, k) = vv[1] * mgrid.at(i, j, k);
                }
        VectorGridField vmol = mollified_drift(mgrid, momentum, kernel);
        GridField meps = convolve_density(mgrid, kernel);

        // integrability bound for p in {1,2,4}
        for (double p : {1.0, 2.0, 4.0}) {
            double lhs = 0.0;
            for (int i = 0; i < cfg.res.n1; ++i)
                for (int j = 0; j < cfg.res.n2; ++j)
                    for (int k = 0; k < cfg.res.n3; ++k) {
                        const double sp = std::hypot(vmol.c1.at(i, j, k),
                                                     vmol.c2.at(i, j, k));
                        lhs += std::pow(sp, p) * meps.at(i, j, k);
                    }
            lhs /= static_cast<double>(cfg.res.count());
            double rhs = 0.0;
            for (int i = 0; i < cfg.res.n1; ++i)
                for (int j = 0; j < cfg.res.n2; ++j)
                    for (int k = 0; k < cfg.res.n3; ++k) {
                        const HPoint x = mgrid.node_point(i, j, k);
                        const auto vv = v.eval(x, t);
                        rhs += std::pow(std::hypot(vv[0], vv[1]), p) *
                               mgrid.at(i, j, k);
                    }
            rhs /= static_cast<double>(cfg.res.count());
            rep.jensen.push_back({t, p, lhs, rhs});
        }

        // weak-form bookkeeping on the particle cloud
        DriftField vd{[&vmol](const HPoint& x, double) {
                          return std::array<double, 2>{vmol.c1.lookup(x),
                                                       vmol.c2.lookup(x)};
                      },
                      std::max(vmol.c1.max_abs(), vmol.c2.max_abs()),
                      std::nullopt};
        for (std::size_t z = 0; z < tests.size(); ++z) {
            for (const auto& a : cloud.atoms()) {
                s[z][ti] += a.w * tests[z].value(a.p);
                const auto g = tests[z].hgrad(a.p);
                const auto vv = vd.eval(a.p, t);
                r[z][ti] += a.w * (vv[0] * g[0] + vv[1] * g[1]);
            }
        }
        if (ti + 1 < times.size()) {
            TrajectoryBundle step = solve_continuity(
                vd, cloud, {times[ti], times[ti + 1]}, cfg.dt);
            cloud = step.cloud_at(1);
        }
    }

    for (std::size_t z = 0; z < tests.size(); ++z) {
        double worst = 0.0;
        for (std::size_t ti = 1; ti + 1 < times.size(); ++ti) {
            const double dsdt = (s[z][ti + 1] - s[z][ti - 1]) /
                                (times[ti + 1] - times[ti - 1]);
            worst = std::max(worst, std::abs(dsdt - r[z][ti]));
        }
        rep.residual.residuals.push_back(worst);
        rep.residual.max_residual = std::max(rep.residual.max_residual, worst);
    }
    return rep;
}

void save_bundle_csv(const TrajectoryBundle& bundle, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.precision(17);
    out << "atom_id,t,x1,x2,x3,w\n";
    for (std::size_t a = 0; a < bundle.weights.size(); ++a)
        for (std::size_t ti = 0; ti < bundle.times.size(); ++ti) {
            const HPoint q = fundamental(bundle.states[ti][a]);
            out << a << ',' << bundle.times[ti] << ',' << q.x1 << ',' << q.x2
                << ',' << q.x3 << ',' << bundle.weights[a] << '\n';
        }
}

}  // namespace heisflow
