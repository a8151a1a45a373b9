#include "heisflow/cloud.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "heisflow/rng.hpp"

namespace heisflow {

ParticleCloud::ParticleCloud(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    double mass = 0.0;
    for (auto& a : atoms_) {
        if (a.w < 0.0) throw std::invalid_argument("ParticleCloud: negative weight");
        a.p = fundamental(a.p);
        mass += a.w;
    }
    if (!(mass > 0.0)) throw std::invalid_argument("ParticleCloud: zero total mass");
    for (auto& a : atoms_) a.w /= mass;
}

double ParticleCloud::total_mass() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.w;
    return s;
}

ParticleCloud ParticleCloud::dirac(const HPoint& x) {
    return ParticleCloud({Atom{fundamental(x), 1.0}});
}

ParticleCloud ParticleCloud::uniform(std::size_t n, std::uint64_t seed) {
    Pcg64 rng(seed);
    std::vector<Atom> atoms(n);
    for (auto& a : atoms) a = {{rng.uniform(), rng.uniform(), rng.uniform()}, 1.0};
    return ParticleCloud(std::move(atoms));
}

ParticleCloud ParticleCloud::sample(
    const std::function<double(const HPoint&)>& density, double density_sup,
    std::size_t n, std::uint64_t seed) {
    if (!(density_sup > 0.0))
        throw std::invalid_argument("sample: density_sup must be > 0");
    Pcg64 rng(seed);
    std::vector<Atom> atoms;
    atoms.reserve(n);
    while (atoms.size() < n) {
        const HPoint p{rng.uniform(), rng.uniform(), rng.uniform()};
        const double d = density(p);
        if (d > density_sup * (1.0 + 1e-12))
            throw std::runtime_error("sample: density exceeds declared sup");
        if (rng.uniform() * density_sup < d) atoms.push_back({p, 1.0});
    }
    return ParticleCloud(std::move(atoms));
}

ParticleCloud ParticleCloud::subsample(std::size_t max_atoms) const {
    if (atoms_.size() <= max_atoms) return *this;
    const std::size_t stride = (atoms_.size() + max_atoms - 1) / max_atoms;
    std::vector<Atom> kept;
    kept.reserve(max_atoms);
    for (std::size_t i = 0; i < atoms_.size(); i += stride) kept.push_back(atoms_[i]);
    return ParticleCloud(std::move(kept));
}

ParticleCloud push_forward(const ParticleCloud& cloud,
                           const std::function<HPoint(const HPoint&)>& map) {
    std::vector<Atom> atoms = cloud.atoms();
    for (auto& a : atoms) a.p = fundamental(map(a.p));
    return ParticleCloud(std::move(atoms));
}

namespace {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

GridField density_from_cloud(const ParticleCloud& cloud, const Kernel& k,
                             Resolution res) {
    // atoms binned into the grid cells; per output node only the cells
    // whose translates can reach the kernel support are visited
    const double h1 = 1.0 / res.n1, h2 = 1.0 / res.n2, h3 = 1.0 / res.n3;
    const double rc = k.cutoff_radius();
    const double rc4 = rc * rc * rc * rc;
    std::vector<std::vector<const Atom*>> cells(
        static_cast<std::size_t>(res.count()));
    auto cell_index = [&](int i, int j, int kk) {
        return (static_cast<std::size_t>(i) * res.n2 + j) * res.n3 + kk;
    };
    for (const auto& a : cloud.atoms()) {
        int i = std::min(static_cast<int>(a.p.x1 * res.n1), res.n1 - 1);
        int j = std::min(static_cast<int>(a.p.x2 * res.n2), res.n2 - 1);
        int kk = std::min(static_cast<int>(a.p.x3 * res.n3), res.n3 - 1);
        cells[cell_index(i, j, kk)].push_back(&a);
    }

    const int w1 = static_cast<int>(std::ceil(rc * res.n1)) + 1;
    const int w2 = static_cast<int>(std::ceil(rc * res.n2)) + 1;
    GridField out(res);
    for (int i = 0; i < res.n1; ++i)
        for (int j = 0; j < res.n2; ++j)
            for (int kk = 0; kk < res.n3; ++kk) {
                const HPoint x = out.node_point(i, j, kk);
                double acc = 0.0;
                for (int d1 = -w1; d1 <= w1; ++d1) {
                    const std::int64_t bi = i + d1;
                    const std::int64_t n1 = floor_div(bi, res.n1);
                    const int i0 = static_cast<int>(bi - n1 * res.n1);
                    for (int d2 = -w2; d2 <= w2; ++d2) {
                        const std::int64_t bj = j + d2;
                        const std::int64_t n2 = floor_div(bj, res.n2);
                        const int j0 = static_cast<int>(bj - n2 * res.n2);
                        // vertical window for this column of cells, with
                        // slack for the in-cell spread of atom positions
                        const double y1lo = static_cast<double>(bi) * h1;
                        const double y2lo = static_cast<double>(bj) * h2;
                        const double c0 = x.x3 + x.x2 * y1lo - x.x1 * y2lo +
                                          static_cast<double>(n2) * (i0 * h1) -
                                          static_cast<double>(n1) * (j0 * h2);
                        const double slack =
                            h3 + h1 * (x.x2 + std::abs(static_cast<double>(n2))) +
                            h2 * (x.x1 + std::abs(static_cast<double>(n1)));
                        const double zmax = rc * rc + slack;
                        const auto klo = static_cast<std::int64_t>(
                            std::floor((c0 - zmax) * res.n3)) - 1;
                        const auto khi = static_cast<std::int64_t>(
                            std::ceil((c0 + zmax) * res.n3));
                        for (std::int64_t K = klo; K <= khi; ++K) {
                            const std::int64_t n3 = floor_div(K, res.n3);
                            const int k0 = static_cast<int>(K - n3 * res.n3);
                            const auto& bucket = cells[cell_index(i0, j0, k0)];
                            if (bucket.empty()) continue;
                            const HPoint n{static_cast<double>(n1),
                                           static_cast<double>(n2),
                                           static_cast<double>(n3)};
                            for (const Atom* a : bucket) {
                                const HPoint z = mul(x, inverse(mul(n, a->p)));
                                if (h_norm4(z) > rc4) continue;
                                acc += a->w * k.eval(z);
                            }
                        }
                    }
                }
                out.at(i, j, kk) = acc;
            }
    return out;
}

GridField density_from_cloud_naive(const ParticleCloud& cloud, const Kernel& k,
                                   Resolution res, int halo) {
    GridField out(res);
    out.assign([&](const HPoint& x) {
        double acc = 0.0;
        for (const auto& a : cloud.atoms())
            for (int n1 = -halo; n1 <= halo; ++n1)
                for (int n2 = -halo; n2 <= halo; ++n2)
                    for (int n3 = -halo; n3 <= halo; ++n3) {
                        const HPoint n{static_cast<double>(n1),
                                       static_cast<double>(n2),
                                       static_cast<double>(n3)};
                        acc += a.w * k.eval(mul(x, inverse(mul(n, a.p))));
                    }
        return acc;
    });
    return out;
}

void save_cloud_csv(const ParticleCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.precision(17);
    out << "x1,x2,x3,w\n";
    for (const auto& a : cloud.atoms())
        out << a.p.x1 << ',' << a.p.x2 << ',' << a.p.x3 << ',' << a.w << '\n';
}

ParticleCloud load_cloud_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<Atom> atoms;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ss(line);
        Atom a;
        char comma;
        if (!(ss >> a.p.x1 >> comma >> a.p.x2 >> comma >> a.p.x3 >> comma >> a.w))
            throw std::runtime_error("malformed CSV row " + std::to_string(row) +
                                     " in " + path);
        atoms.push_back(a);
    }
    return ParticleCloud(std::move(atoms));
}

}  // namespace heisflow
