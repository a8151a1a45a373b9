// The homogeneous mollifier rho_eps(x) = C(eps) * exp(-||delta_{1/eps}(x)||_H^4)
// and group convolution of periodic grid fields against it.
#pragma once

#include "heisflow/grid.hpp"
#include "heisflow/heis.hpp"

namespace heisflow {

class Kernel {
  public:
    // The normalizer is computed by quadrature of the radial profile over a
    // ball of homogeneous radius 8*eps (the analytic scaling law
    // C(eps) = C(1) eps^-4 is a test, not the implementation).
    explicit Kernel(double epsilon);

    double epsilon() const { return epsilon_; }
    double normalizer() const { return normalizer_; }

    // Homogeneous radius beyond which the kernel is below tail_tol * C(eps).
    double cutoff_radius() const { return cutoff_; }

    double eval(const HPoint& x) const {
        const double r4 = h_norm4(x);
        if (r4 > cutoff4_) return 0.0;
        return normalizer_ * std::exp(-r4 * inv_eps4_);
    }

    // Kernel mass outside a ball of homogeneous radius r (by quadrature).
    double mass_outside(double r) const;

  private:
    double epsilon_;
    double inv_eps4_;
    double normalizer_;
    double cutoff_;
    double cutoff4_;
};

// Group convolution (psi * rho)(x) = int psi(y) rho(x (+) y^-1) dy by
// midpoint quadrature over the fundamental cell and `halo` lattice shells.
// Throws if the kernel mass unaccounted for by the halo exceeds 1e-8.
GridField convolve_density(const GridField& psi, const Kernel& k, int halo = 1);

// v_eps = (E * rho) / (m * rho), componentwise on the two horizontal slots.
// The denominator is strictly positive for nonnegative m of unit mass; a
// value below 1e-14 signals a normalization bug upstream and throws.
VectorGridField mollified_drift(const GridField& m, const VectorGridField& E,
                                const Kernel& k, int halo = 1);

}  // namespace heisflow
