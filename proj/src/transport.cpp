#include "heisflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace heisflow {

namespace {

std::vector<double> cost_matrix(const ParticleCloud& a, const ParticleCloud& b,
                                int window) {
    std::vector<double> c(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            c[i * b.size() + j] =
                torus_dist(a.atoms()[i].p, b.atoms()[j].p, window);
    return c;
}

// Transportation simplex (MODI). The supplies carry a tiny Charnes
// perturbation so the basis stays nondegenerate; the perturbation is
// orders of magnitude below the reported tolerances.
class TransportSimplex {
  public:
    TransportSimplex(std::vector<double> a, std::vector<double> b,
                     const std::vector<double>& cost)
        : m_(a.size()), n_(b.size()), a_(std::move(a)), b_(std::move(b)), c_(cost) {
        const double xi = 1e-13;
        for (std::size_t i = 0; i < m_; ++i) a_[i] += xi;
        b_[n_ - 1] += xi * static_cast<double>(m_);
        northwest_corner();
    }

    TransportResult solve() {
        const std::size_t max_pivots = 200 * (m_ + n_);
        for (std::size_t it = 0; it < max_pivots; ++it) {
            compute_potentials();
            std::size_t ei = 0, ej = 0;
            double best = -1e-11;
            for (std::size_t i = 0; i < m_; ++i)
                for (std::size_t j = 0; j < n_; ++j) {
                    const double rc = c_[i * n_ + j] - u_[i] - v_[j];
                    if (rc < best) {
                        best = rc;
                        ei = i;
                        ej = j;
                    }
                }
            if (best >= -1e-11) return extract();
            pivot(ei, ej);
        }
        throw std::runtime_error("transportation simplex: pivot limit exceeded");
    }

  private:
    struct Cell {
        std::size_t i, j;
        double x;
    };

    void northwest_corner() {
        std::vector<double> a = a_, b = b_;
        std::size_t i = 0, j = 0;
        while (i < m_ && j < n_) {
            const double t = std::min(a[i], b[j]);
            basis_.push_back({i, j, t});
            a[i] -= t;
            b[j] -= t;
            if (i + 1 == m_ && j + 1 == n_) break;
            if (i + 1 < m_ && (a[i] <= b[j] || j + 1 == n_))
                ++i;
            else
                ++j;
        }
    }

    // nodes 0..m-1 rows, m..m+n-1 columns; basis cells are tree edges
    void compute_potentials() {
        u_.assign(m_, 0.0);
        v_.assign(n_, 0.0);
        std::vector<std::vector<std::size_t>> adj(m_ + n_);
        for (std::size_t e = 0; e < basis_.size(); ++e) {
            adj[basis_[e].i].push_back(e);
            adj[m_ + basis_[e].j].push_back(e);
        }
        std::vector<char> seen(m_ + n_, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const std::size_t node = stack.back();
            stack.pop_back();
            for (std::size_t e : adj[node]) {
                const auto& cell = basis_[e];
                const std::size_t other = (node < m_) ? m_ + cell.j : cell.i;
                if (seen[other]) continue;
                seen[other] = 1;
                if (node < m_)
                    v_[cell.j] = c_[cell.i * n_ + cell.j] - u_[cell.i];
                else
                    u_[cell.i] = c_[cell.i * n_ + cell.j] - v_[cell.j];
                stack.push_back(other);
            }
        }
    }

    // unique tree path from row ei to column ej; the entering cell closes
    // the cycle. Plus positions get +theta, minus positions -theta.
    void pivot(std::size_t ei, std::size_t ej) {
        std::vector<std::vector<std::size_t>> adj(m_ + n_);
        for (std::size_t e = 0; e < basis_.size(); ++e) {
            adj[basis_[e].i].push_back(e);
            adj[m_ + basis_[e].j].push_back(e);
        }
        const std::size_t src = ei, dst = m_ + ej;
        std::vector<std::size_t> parent_edge(m_ + n_, SIZE_MAX);
        std::vector<std::size_t> parent_node(m_ + n_, SIZE_MAX);
        std::vector<char> seen(m_ + n_, 0);
        std::vector<std::size_t> stack{src};
        seen[src] = 1;
        while (!stack.empty() && !seen[dst]) {
            const std::size_t node = stack.back();
            stack.pop_back();
            for (std::size_t e : adj[node]) {
                const auto& cell = basis_[e];
                const std::size_t other = (node < m_) ? m_ + cell.j : cell.i;
                if (seen[other]) continue;
                seen[other] = 1;
                parent_edge[other] = e;
                parent_node[other] = node;
                stack.push_back(other);
            }
        }
        if (!seen[dst])
            throw std::runtime_error("transportation simplex: basis not connected");
        // walk back: edges at odd positions (1st, 3rd, ...) lose theta
        std::vector<std::size_t> path;
        for (std::size_t node = dst; node != src; node = parent_node[node])
            path.push_back(parent_edge[node]);
        double theta = std::numeric_limits<double>::infinity();
        std::size_t leave = SIZE_MAX;
        for (std::size_t pos = 0; pos < path.size(); ++pos) {
            if (pos % 2 != 0) continue;  // minus positions along the cycle
            const std::size_t e = path[pos];
            if (basis_[e].x < theta) {
                theta = basis_[e].x;
                leave = e;
            }
        }
        for (std::size_t pos = 0; pos < path.size(); ++pos) {
            if (pos % 2 == 0)
                basis_[path[pos]].x -= theta;
            else
                basis_[path[pos]].x += theta;
        }
        basis_[leave] = {ei, ej, theta};
    }

    TransportResult extract() const {
        TransportResult r;
        for (const auto& cell : basis_) {
            if (cell.x <= 0.0) continue;
            r.cost += cell.x * c_[cell.i * n_ + cell.j];
            r.plan.push_back({cell.i, cell.j, cell.x});
        }
        return r;
    }

    std::size_t m_, n_;
    std::vector<double> a_, b_, c_;
    std::vector<Cell> basis_;
    std::vector<double> u_, v_;
};

}  // namespace

TransportResult solve_transport(const std::vector<double>& weights_a,
                                const std::vector<double>& weights_b,
                                const std::vector<double>& cost) {
    if (cost.size() != weights_a.size() * weights_b.size())
        throw std::invalid_argument("solve_transport: cost matrix size mismatch");
    double sa = 0.0, sb = 0.0;
    for (double w : weights_a) sa += w;
    for (double w : weights_b) sb += w;
    if (std::abs(sa - sb) > 1e-9)
        throw std::invalid_argument("solve_transport: marginals are unbalanced");
    TransportSimplex s(weights_a, weights_b, cost);
    return s.solve();
}

TransportResult kantorovich_d1(const ParticleCloud& a, const ParticleCloud& b,
                               int window, std::size_t cap) {
    if (a.size() > cap || b.size() > cap)
        throw std::runtime_error(
            "kantorovich_d1: cloud above exact-solve cap; use sinkhorn_d1");
    std::vector<double> wa(a.size()), wb(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) wa[i] = a.atoms()[i].w;
    for (std::size_t j = 0; j < b.size(); ++j) wb[j] = b.atoms()[j].w;
    return solve_transport(wa, wb, cost_matrix(a, b, window));
}

SinkhornResult sinkhorn_d1(const ParticleCloud& a, const ParticleCloud& b,
                           double reg, int max_iter, double marginal_tol,
                           int window) {
    if (!(reg > 0.0)) throw std::invalid_argument("sinkhorn_d1: reg must be > 0");
    const std::size_t m = a.size(), n = b.size();
    const std::vector<double> c = cost_matrix(a, b, window);
    std::vector<double> la(m), lb(n);  // log weights
    for (std::size_t i = 0; i < m; ++i) la[i] = std::log(a.atoms()[i].w);
    for (std::size_t j = 0; j < n; ++j) lb[j] = std::log(b.atoms()[j].w);

    std::vector<double> f(m, 0.0), g(n, 0.0);
    auto lse_row = [&](std::size_t i, double e) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            mx = std::max(mx, (g[j] - c[i * n + j]) / e + lb[j]);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            s += std::exp((g[j] - c[i * n + j]) / e + lb[j] - mx);
        return mx + std::log(s);
    };
    auto lse_col = [&](std::size_t j, double e) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i)
            mx = std::max(mx, (f[i] - c[i * n + j]) / e + la[i]);
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            s += std::exp((f[i] - c[i * n + j]) / e + la[i] - mx);
        return mx + std::log(s);
    };

    // regularization annealing: start warm and shrink toward the target,
    // reusing the potentials across levels (plain iterations at small reg
    // contract far too slowly to be practical)
    std::vector<double> levels{reg};
    double cmax = 0.0;
    for (double v : c) cmax = std::max(cmax, v);
    while (levels.back() < 0.25 * cmax) levels.push_back(3.0 * levels.back());

    SinkhornResult r;
    r.reg = reg;
    r.iterations = 0;
    for (std::size_t lvl = levels.size(); lvl-- > 0;) {
        const double e = levels[lvl];
        const double goal = (lvl == 0) ? marginal_tol : 1e-4;
        const int cap = (lvl == 0) ? max_iter : std::min(max_iter, 500);
        for (int it = 0; it < cap && r.iterations < max_iter; ++it) {
            for (std::size_t i = 0; i < m; ++i) f[i] = -e * lse_row(i, e);
            for (std::size_t j = 0; j < n; ++j) g[j] = -e * lse_col(j, e);
            ++r.iterations;
            if (it % 10 == 9 || it + 1 == cap || r.iterations == max_iter) {
                double err = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    double rowmass = 0.0;
                    for (std::size_t j = 0; j < n; ++j)
                        rowmass += std::exp((f[i] + g[j] - c[i * n + j]) / e +
                                            la[i] + lb[j]);
                    err += std::abs(rowmass - a.atoms()[i].w);
                }
                r.marginal_residual = err;
                if (err < goal) {
                    if (lvl == 0) r.converged = true;
                    break;
                }
            }
        }
    }
    double cost = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cost += c[i * n + j] *
                    std::exp((f[i] + g[j] - c[i * n + j]) / reg + la[i] + lb[j]);
    r.cost = cost;
    r.reg_slack = reg * std::log(static_cast<double>(m) * static_cast<double>(n));
    return r;
}

namespace {

// cost of the optimal 1-D periodic rebalancing of per-cell imbalances d
// toward zero: flux across each boundary is the cumulative sum shifted by
// its median, each crossing priced at step_cost
double sweep_cost(std::vector<double>& d, double step_cost) {
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(d.size());
    std::vector<double> flux(d.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        acc += d[i] - mean;
        flux[i] = acc;
    }
    std::vector<double> sorted = flux;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    const double med = sorted[sorted.size() / 2];
    double cost = 0.0;
    for (double f : flux) cost += std::abs(f - med);
    return cost * step_cost;
}

}  // namespace

double rectilinear_d1(const GridField& a, const GridField& b) {
    if (!(a.res() == b.res()))
        throw std::invalid_argument("rectilinear_d1: resolution mismatch");
    const Resolution res = a.res();
    const int n1 = res.n1, n2 = res.n2, n3 = res.n3;
    const double cells = static_cast<double>(res.count());

    // per-cell mass imbalance, recentered so the total is exactly zero
    // (the two densities integrate to one only up to quadrature)
    std::vector<double> delta(a.values().size());
    double total = 0.0;
    for (std::size_t i = 0; i < delta.size(); ++i) {
        delta[i] = (a.values()[i] - b.values()[i]) / cells;
        total += delta[i];
    }
    for (double& v : delta) v -= total / cells;

    double cost = 0.0;

    // stage 1: rebalance every vertical column to its mean; the x3 wrap is
    // untwisted and one step costs the vertical distance sqrt(h3)
    const double cstep3 =
        torus_dist(a.node_point(0, 0, 0), a.node_point(0, 0, 1));
    std::vector<double> col(n3);
    std::vector<std::vector<double>> slab(n1, std::vector<double>(n2));
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            double sum = 0.0;
            for (int k = 0; k < n3; ++k) {
                col[k] = delta[a.index(i, j, k)];
                sum += col[k];
            }
            cost += sweep_cost(col, cstep3);
            slab[i][j] = sum;  // what remains, now uniform in k
        }

    // stage 2: rebalance along x2 within each x1-slice; the remaining mass
    // is uniform in x3, so the twisted x2 wrap lands on identified cells
    std::vector<double> line(n2);
    std::vector<double> bar(n1);
    for (int i = 0; i < n1; ++i) {
        const double c2 =
            torus_dist(a.node_point(i, 0, 0), a.node_point(i, 1, 0));
        double sum = 0.0;
        for (int j = 0; j < n2; ++j) {
            line[j] = slab[i][j];
            sum += line[j];
        }
        cost += sweep_cost(line, c2);
        bar[i] = sum;
    }

    // stage 3: rebalance along x1; the mass is uniform in (x2, x3), so each
    // crossing is priced at the x2-average of the node step distance
    double c1 = 0.0;
    for (int j = 0; j < n2; ++j)
        c1 += torus_dist(a.node_point(0, j, 0), a.node_point(1, j, 0));
    c1 /= static_cast<double>(n2);
    cost += sweep_cost(bar, c1);

    return cost;
}

}  // namespace heisflow
