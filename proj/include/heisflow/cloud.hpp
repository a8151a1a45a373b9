// Weighted atomic measures on the Heisenberg torus. Atoms are stored as
// their pavage fundamental part; weights sum to one.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "heisflow/grid.hpp"
#include "heisflow/heis.hpp"
#include "heisflow/kernel.hpp"

namespace heisflow {

struct Atom {
    HPoint p;   // in [0,1)^3
    double w = 0.0;
};

class ParticleCloud {
  public:
    ParticleCloud() = default;
    explicit ParticleCloud(std::vector<Atom> atoms);

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    double total_mass() const;

    // Dirac mass at q_H(x).
    static ParticleCloud dirac(const HPoint& x);

    // n atoms at uniform positions with equal weights.
    static ParticleCloud uniform(std::size_t n, std::uint64_t seed);

    // Rejection sampling from a nonnegative density on Q_H.
    static ParticleCloud sample(const std::function<double(const HPoint&)>& density,
                                double density_sup, std::size_t n,
                                std::uint64_t seed);

    // Keep every stride-th atom (deterministic), renormalized.
    ParticleCloud subsample(std::size_t max_atoms) const;

  private:
    std::vector<Atom> atoms_;
};

// Move every atom through `map` and re-project by pavage; weights unchanged.
ParticleCloud push_forward(const ParticleCloud& cloud,
                           const std::function<HPoint(const HPoint&)>& map);

// Kernel density estimate on a grid: f(x) = sum_a w_a rho_eps(x (+) y_a^-1)
// summed over the atoms and their lattice translates. Periodic by
// construction; integrates to one up to the quadrature of rho_eps.
GridField density_from_cloud(const ParticleCloud& cloud, const Kernel& k,
                             Resolution res);

// Reference implementation without spatial acceleration (test oracle for
// density_from_cloud at small sizes).
GridField density_from_cloud_naive(const ParticleCloud& cloud, const Kernel& k,
                                   Resolution res, int halo);

// CSV with columns x1,x2,x3,w.
void save_cloud_csv(const ParticleCloud& cloud, const std::string& path);
ParticleCloud load_cloud_csv(const std::string& path);

}  // namespace heisflow
