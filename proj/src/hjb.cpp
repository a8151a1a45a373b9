#include "heisflow/hjb.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace heisflow {

ControlDisk ControlDisk::rings(double radius, int n_rings, int per_ring) {
    if (!(radius > 0.0)) throw std::invalid_argument("ControlDisk: radius <= 0");
    if (n_rings < 1 || per_ring < 1)
        throw std::invalid_argument("ControlDisk: empty sampling");
    ControlDisk d;
    d.radius_ = radius;
    d.samples_.push_back({0.0, 0.0});
    for (int r = 1; r <= n_rings; ++r) {
        const double rho = radius * r / n_rings;
        for (int a = 0; a < per_ring; ++a) {
            const double th = 6.283185307179586 * a / per_ring;
            d.samples_.push_back({rho * std::cos(th), rho * std::sin(th)});
        }
    }
    return d;
}

std::size_t ValueFunction::nearest_slice(double t) const {
    std::size_t best = 0;
    double bd = std::abs(times[0] - t);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double d = std::abs(times[i] - t);
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

double ValueFunction::lookup(const HPoint& x, double t) const {
    return slices[nearest_slice(t)].lookup(x);
}

HPoint control_step(const HPoint& x, const std::array<double, 2>& alpha,
                    double dt) {
    const HPoint k1 = horizontal_velocity(x, alpha[0], alpha[1]);
    const HPoint mid{x.x1 + 0.5 * dt * k1.x1, x.x2 + 0.5 * dt * k1.x2,
                     x.x3 + 0.5 * dt * k1.x3};
    const HPoint k2 = horizontal_velocity(mid, alpha[0], alpha[1]);
    return {x.x1 + dt * k2.x1, x.x2 + dt * k2.x2, x.x3 + dt * k2.x3};
}

namespace {

double one_step_value(const CostData& cost, const ControlDisk& controls,
                      const GridField& next, const HPoint& x, double t,
                      double dt) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : controls.samples()) {
        const double stage = 0.5 * (a[0] * a[0] + a[1] * a[1]) + cost.f(x, t);
        const double val = dt * stage + next.lookup(control_step(x, a, dt));
        if (val < best) best = val;  // strict: ties keep the smaller control
    }
    return best;
}

}  // namespace

ValueFunction solve_hjb(const CostData& cost, const ControlDisk& controls,
                        Resolution res, const std::vector<double>& times) {
    if (times.size() < 2) throw std::invalid_argument("solve_hjb: need >= 2 times");
    ValueFunction u;
    u.times = times;
    u.slices.assign(times.size(), GridField(res));
    u.slices.back().assign([&](const HPoint& x) { return cost.g(x); });
    for (std::size_t n = times.size() - 1; n-- > 0;) {
        const double dt = times[n + 1] - times[n];
        const GridField& next = u.slices[n + 1];
        u.slices[n].assign([&](const HPoint& x) {
            return one_step_value(cost, controls, next, x, times[n], dt);
        });
    }
    return u;
}

VectorGridField horizontal_gradient(const GridField& u) {
    const Resolution res = u.res();
    const double h1 = 1.0 / res.n1, h2 = 1.0 / res.n2, h3 = 1.0 / res.n3;
    VectorGridField g(res);
    for (int i = 0; i < res.n1; ++i)
        for (int j = 0; j < res.n2; ++j)
            for (int k = 0; k < res.n3; ++k) {
                const double d1 =
                    (u.corner_value(i + 1, j, k) - u.corner_value(i - 1, j, k)) /
                    (2.0 * h1);
                const double d2 =
                    (u.corner_value(i, j + 1, k) - u.corner_value(i, j - 1, k)) /
                    (2.0 * h2);
                const double d3 =
                    (u.corner_value(i, j, k + 1) - u.corner_value(i, j, k - 1)) /
                    (2.0 * h3);
                const HPoint x = u.node_point(i, j, k);
                g.c1.at(i, j, k) = d1 - x.x2 * d3;
                g.c2.at(i, j, k) = d2 + x.x1 * d3;
            }
    return g;
}

DriftField synthesis_drift(const ValueFunction& u) {
    auto grads = std::make_shared<std::vector<VectorGridField>>();
    grads->reserve(u.slices.size());
    double bound = 0.0;
    for (const auto& slice : u.slices) {
        grads->push_back(horizontal_gradient(slice));
        bound = std::max(bound, std::max(grads->back().c1.max_abs(),
                                         grads->back().c2.max_abs()));
    }
    auto times = u.times;
    DriftField d;
    d.bound = bound;
    d.eval = [grads, times](const HPoint& x, double t) {
        std::size_t best = 0;
        double bd = std::abs(times[0] - t);
        for (std::size_t i = 1; i < times.size(); ++i) {
            const double dd = std::abs(times[i] - t);
            if (dd < bd) {
                bd = dd;
                best = i;
            }
        }
        const auto& g = (*grads)[best];
        return std::array<double, 2>{-g.c1.lookup(x), -g.c2.lookup(x)};
    };
    return d;
}

DppReport verify_dpp(const ValueFunction& u, const CostData& cost,
                     const ControlDisk& controls,
                     const std::vector<std::pair<HPoint, std::size_t>>& samples) {
    DppReport rep;
    for (const auto& [x, n] : samples) {
        if (n + 1 >= u.times.size())
            throw std::invalid_argument("verify_dpp: sample at terminal time");
        const double dt = u.times[n + 1] - u.times[n];
        const double recomputed =
            one_step_value(cost, controls, u.slices[n + 1], x, u.times[n], dt);
        const double stored = u.slices[n].lookup(x);
        rep.residuals.push_back(std::abs(recomputed - stored));
        rep.max_residual = std::max(rep.max_residual, rep.residuals.back());
    }
    return rep;
}

}  // namespace heisflow
