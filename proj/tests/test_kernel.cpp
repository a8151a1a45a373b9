#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "heisflow/kernel.hpp"
#include "heisflow/rng.hpp"

using namespace heisflow;

TEST_CASE("normalizer matches the closed form at epsilon = 1") {
    // int exp(-||x||^4) dx = sqrt(pi) * pi^{3/2} / 2 = pi^2 / 2
    const Kernel k(1.0);
    CHECK(k.normalizer() == doctest::Approx(2.0 / (M_PI * M_PI)).epsilon(1e-6));
}

TEST_CASE("normalizer scales like eps^-4") {
    const double c1 = Kernel(1.0).normalizer();
    for (double eps : {0.1, 0.15, 0.25, 0.5, 2.0}) {
        const Kernel k(eps);
        CHECK(k.normalizer() ==
              doctest::Approx(c1 / (eps * eps * eps * eps)).epsilon(1e-8));
    }
}

TEST_CASE("pointwise evaluation") {
    const Kernel k(0.5);
    CHECK(k.eval({0, 0, 0}) == doctest::Approx(k.normalizer()));
    Pcg64 rng(41);
    for (int i = 0; i < 2000; ++i) {
        const HPoint x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        CHECK(k.eval(x) >= 0.0);
        // even under the group inverse
        CHECK(k.eval(inverse(x)) == doctest::Approx(k.eval(x)).epsilon(1e-13));
        // homogeneous profile: depends on x only through the norm
        const double r = h_norm(x);
        CHECK(k.eval({r, 0, 0}) == doctest::Approx(k.eval(x)).epsilon(1e-12));
    }
    CHECK(k.eval({10, 0, 0}) == 0.0);
}

TEST_CASE("mass concentrates inside the cutoff") {
    for (double eps : {0.1, 0.3, 1.0}) {
        const Kernel k(eps);
        CHECK(k.mass_outside(0.0) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(k.mass_outside(k.cutoff_radius()) < 1e-10);
        CHECK(k.mass_outside(2.0 * eps) < 0.1);
        CHECK(k.cutoff_radius() < 8.0 * eps);
    }
    CHECK_THROWS(Kernel(0.0));
    CHECK_THROWS(Kernel(-0.1));
}

TEST_CASE("convolution preserves constants and total mass") {
    // the node sum is spectrally accurate once the vertical width eps^2 is
    // comparable with the grid step, hence eps = 0.3 on a 16^3 grid
    const Kernel k(0.3);
    const Resolution res{16, 16, 16};
    GridField one(res, 1.0);
    const GridField c = convolve_density(one, k);
    CHECK(c.max_value() == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(c.min_value() == doctest::Approx(1.0).epsilon(2e-3));

    GridField psi(res);
    psi.assign([](const HPoint& x) {
        return 1.0 + 0.5 * std::cos(2 * M_PI * x.x1) * std::cos(2 * M_PI * x.x2);
    });
    const GridField s = convolve_density(psi, k);
    CHECK(s.integral() == doctest::Approx(psi.integral()).epsilon(2e-3));
    CHECK(s.min_value() > 0.0);
    // smoothing shrinks the oscillation
    CHECK(s.max_value() - s.min_value() < psi.max_value() - psi.min_value());
}

TEST_CASE("halo width does not change the result for small eps") {
    const Kernel k(0.12);
    const Resolution res{12, 12, 12};
    GridField psi(res);
    Pcg64 rng(42);
    psi.assign([&](const HPoint&) { return rng.uniform(0.5, 1.5); });
    const GridField a = convolve_density(psi, k, 1);
    const GridField b = convolve_density(psi, k, 2);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a.values()[i] == doctest::Approx(b.values()[i]).epsilon(1e-10));
}

TEST_CASE("halo check rejects kernels wider than the window") {
    const Kernel wide(3.0);
    GridField psi({8, 8, 8}, 1.0);
    CHECK_THROWS(convolve_density(psi, wide, 1));
}

TEST_CASE("mollified drift recovers a constant velocity") {
    const Kernel k(0.15);
    const Resolution res{12, 12, 12};
    GridField m(res);
    m.assign([](const HPoint& x) { return 1.0 + 0.3 * std::sin(2 * M_PI * x.x2); });
    VectorGridField E(res);
    const double v1 = 0.7, v2 = -0.4;
    for (std::size_t i = 0; i < m.size(); ++i) {
        E.c1.values()[i] = v1 * m.values()[i];
        E.c2.values()[i] = v2 * m.values()[i];
    }
    const VectorGridField v = mollified_drift(m, E, k);
    CHECK(v.c1.max_value() == doctest::Approx(v1).epsilon(1e-10));
    CHECK(v.c1.min_value() == doctest::Approx(v1).epsilon(1e-10));
    CHECK(v.c2.max_value() == doctest::Approx(v2).epsilon(1e-10));

    GridField zero(res, 0.0);
    CHECK_THROWS(mollified_drift(zero, E, k));
}
