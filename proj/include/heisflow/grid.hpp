// Scalar fields sampled on a uniform grid over the fundamental domain
// Q_H = [0,1)^3, with lookup that is periodic in the Heisenberg sense:
// values at arbitrary points are read through the pavage projection, so
// crossing the x1 = 1 face lands at (0, x2, x3 - x2) and not at the
// Euclidean wrap. Nodes sit at (i/N1, j/N2, k/N3).
#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "heisflow/heis.hpp"

namespace heisflow {

struct Resolution {
    int n1 = 0, n2 = 0, n3 = 0;
    int count() const { return n1 * n2 * n3; }
    friend bool operator==(const Resolution&, const Resolution&) = default;
};

class GridField {
  public:
    GridField() = default;
    GridField(Resolution res, double fill = 0.0)
        : res_(res), values_(static_cast<std::size_t>(res.count()), fill) {
        if (res.n1 <= 0 || res.n2 <= 0 || res.n3 <= 0)
            throw std::invalid_argument("GridField: resolution must be positive");
    }

    const Resolution& res() const { return res_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * res_.n2 + j) * res_.n3 + k;
    }
    double& at(int i, int j, int k) { return values_[index(i, j, k)]; }
    double at(int i, int j, int k) const { return values_[index(i, j, k)]; }

    HPoint node_point(int i, int j, int k) const {
        return {static_cast<double>(i) / res_.n1, static_cast<double>(j) / res_.n2,
                static_cast<double>(k) / res_.n3};
    }

    // Fill from a function of the node point.
    template <class F>
    void assign(F&& f) {
        for (int i = 0; i < res_.n1; ++i)
            for (int j = 0; j < res_.n2; ++j)
                for (int k = 0; k < res_.n3; ++k)
                    at(i, j, k) = f(node_point(i, j, k));
    }

    // Midpoint quadrature of the field over Q_H (cell volume 1/(N1*N2*N3)).
    double integral() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s / static_cast<double>(values_.size());
    }

    double min_value() const {
        double m = values_[0];
        for (double v : values_) m = std::min(m, v);
        return m;
    }
    double max_value() const {
        double m = values_[0];
        for (double v : values_) m = std::max(m, v);
        return m;
    }
    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    // Value at a lattice column (i,j) and arbitrary vertical coordinate,
    // linear interpolation with the (trivial) wrap in x3.
    double column_value(int i, int j, double x3) const {
        const double f = x3 * res_.n3;
        double kf = std::floor(f);
        double t = f - kf;
        int k0 = static_cast<int>(kf) % res_.n3;
        if (k0 < 0) k0 += res_.n3;
        const int k1 = (k0 + 1) % res_.n3;
        return (1.0 - t) * at(i, j, k0) + t * at(i, j, k1);
    }

    // Value at a corner of the interpolation cell; the corner may lie on a
    // far face of Q_H, in which case it is fetched through the pavage
    // identification (which shifts x3 by a node-x2 amount).
    double corner_value(int ci, int cj, int ck) const {
        if (ci >= 0 && cj >= 0 && ck >= 0 && ci < res_.n1 && cj < res_.n2 &&
            ck < res_.n3)
            return values_[index(ci, cj, ck)];
        const HPoint p{static_cast<double>(ci) / res_.n1,
                       static_cast<double>(cj) / res_.n2,
                       static_cast<double>(ck) / res_.n3};
        const HPoint q = fundamental(p);
        int i = static_cast<int>(std::lround(q.x1 * res_.n1)) % res_.n1;
        int j = static_cast<int>(std::lround(q.x2 * res_.n2)) % res_.n2;
        return column_value(i, j, q.x3);
    }

    // Trilinear interpolation at q_H(x) with Heisenberg-periodic wrap.
    double lookup(const HPoint& x) const {
        const HPoint q = fundamental(x);
        const double f1 = q.x1 * res_.n1;
        const double f2 = q.x2 * res_.n2;
        const double f3 = q.x3 * res_.n3;
        int i0 = static_cast<int>(std::floor(f1));
        int j0 = static_cast<int>(std::floor(f2));
        int k0 = static_cast<int>(std::floor(f3));
        const double t1 = f1 - i0, t2 = f2 - j0, t3 = f3 - k0;
        // pavage targets q in [0,1)^3, but a coordinate may round up to 1.0
        // exactly; corner_value resolves such far-face indices through the
        // lattice identification, so they are allowed here
        assert(i0 >= 0 && i0 <= res_.n1 && j0 >= 0 && j0 <= res_.n2 && k0 >= 0 &&
               k0 <= res_.n3);
        double acc = 0.0;
        for (int d1 = 0; d1 <= 1; ++d1)
            for (int d2 = 0; d2 <= 1; ++d2)
                for (int d3 = 0; d3 <= 1; ++d3) {
                    const double w = (d1 ? t1 : 1.0 - t1) * (d2 ? t2 : 1.0 - t2) *
                                     (d3 ? t3 : 1.0 - t3);
                    if (w == 0.0) continue;
                    acc += w * corner_value(i0 + d1, j0 + d2, k0 + d3);
                }
        return acc;
    }

    GridField& operator+=(const GridField& o) {
        assert(res_ == o.res_);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    GridField& operator*=(double c) {
        for (double& v : values_) v *= c;
        return *this;
    }

  private:
    Resolution res_;
    std::vector<double> values_;
};

// Pair of grid fields treated as the two horizontal components of a
// vector field (drift components, horizontal gradients, momenta).
struct VectorGridField {
    GridField c1, c2;

    VectorGridField() = default;
    explicit VectorGridField(Resolution res) : c1(res), c2(res) {}
};

}  // namespace heisflow
