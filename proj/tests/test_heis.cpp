#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "heisflow/heis.hpp"
#include "heisflow/rng.hpp"

using namespace heisflow;

namespace {

// random point on a dyadic lattice so that the group arithmetic is exact
HPoint dyadic_point(Pcg64& rng, double lo, double hi) {
    auto coord = [&] {
        const double steps = 1 << 20;
        return lo + std::floor(rng.uniform() * steps) / steps * (hi - lo);
    };
    return {coord(), coord(), coord()};
}

double linf(const HPoint& a, const HPoint& b) {
    return std::max({std::abs(a.x1 - b.x1), std::abs(a.x2 - b.x2),
                     std::abs(a.x3 - b.x3)});
}

}  // namespace

TEST_CASE("group law basics") {
    const HPoint y{0.3, -1.2, 2.5};
    CHECK(linf(mul({0, 0, 0}, y), y) == 0.0);
    CHECK(linf(mul(y, {0, 0, 0}), y) == 0.0);
    CHECK(mul(HPoint{1, 1, 0}, HPoint{1, 0, 0}) == HPoint{2, 1, -1});
    CHECK(inverse(HPoint{1, 2, 3}) == HPoint{-1, -2, -3});

    Pcg64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const HPoint x = dyadic_point(rng, -4, 4);
        CHECK(linf(mul(x, inverse(x)), {0, 0, 0}) <= 1e-12);
        CHECK(linf(inverse(inverse(x)), x) == 0.0);
    }
}

TEST_CASE("associativity") {
    Pcg64 rng(12);
    for (int i = 0; i < 10000; ++i) {
        const HPoint x = dyadic_point(rng, -3, 3);
        const HPoint y = dyadic_point(rng, -3, 3);
        const HPoint z = dyadic_point(rng, -3, 3);
        CHECK(linf(mul(mul(x, y), z), mul(x, mul(y, z))) <= 1e-12);
    }
}

TEST_CASE("dilations") {
    CHECK(dilate(2.0, {1, 1, 1}) == HPoint{2, 2, 4});
    CHECK(dilate(1.0, {0.3, 0.4, 0.5}) == HPoint{0.3, 0.4, 0.5});
    CHECK_THROWS(dilate(0.0, {1, 0, 0}));
    CHECK_THROWS(dilate(-1.0, {1, 0, 0}));

    Pcg64 rng(13);
    for (int i = 0; i < 1000; ++i) {
        const HPoint x = dyadic_point(rng, -2, 2);
        const double l = rng.uniform(0.1, 3.0);
        const double m = rng.uniform(0.1, 3.0);
        CHECK(linf(dilate(l, dilate(m, x)), dilate(l * m, x)) <= 1e-12);
        // homogeneity of the norm
        CHECK(h_norm(dilate(l, x)) ==
              doctest::Approx(l * h_norm(x)).epsilon(1e-12));
    }
}

TEST_CASE("norm and distance") {
    CHECK(h_norm({0, 0, 0}) == 0.0);
    CHECK(h_norm({0, 0, 1}) == 1.0);
    CHECK(h_dist({1, 0, 0}, {0, 0, 0}) == 1.0);

    Pcg64 rng(14);
    for (int i = 0; i < 10000; ++i) {
        const HPoint x = dyadic_point(rng, -2, 2);
        const HPoint y = dyadic_point(rng, -2, 2);
        const HPoint z = dyadic_point(rng, -2, 2);
        CHECK(h_dist(x, x) == 0.0);
        // left-invariance
        CHECK(h_dist(mul(z, x), mul(z, y)) ==
              doctest::Approx(h_dist(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("pavage reconstruction and range") {
    {
        const auto d = pavage({1.5, -0.3, 2.0});
        CHECK(d.n == IntTriple{1, -1, 0});
        CHECK(linf(d.q, {0.5, 0.7, 0.8}) <= 1e-12);
    }
    {
        // interior point decomposes trivially
        const HPoint x{0.25, 0.5, 0.75};
        const auto d = pavage(x);
        CHECK(d.n == IntTriple{0, 0, 0});
        CHECK(linf(d.q, x) == 0.0);
    }
    {
        // integer boundary: half-open convention assigns q = 0
        const auto d = pavage({1.0, 2.0, 3.0});
        CHECK(d.q == HPoint{0, 0, 0});
        CHECK(d.n == IntTriple{1, 2, 3});
    }

    Pcg64 rng(15);
    for (int i = 0; i < 10000; ++i) {
        const HPoint x = dyadic_point(rng, -5, 5);
        const auto d = pavage(x);
        CHECK(d.q.x1 >= 0.0);
        CHECK(d.q.x1 < 1.0);
        CHECK(d.q.x2 >= 0.0);
        CHECK(d.q.x2 < 1.0);
        CHECK(d.q.x3 >= 0.0);
        CHECK(d.q.x3 < 1.0);
        CHECK(linf(mul(to_point(d.n), d.q), x) <= 1e-12);
    }
}

TEST_CASE("pavage uniqueness against window search") {
    Pcg64 rng(16);
    for (int i = 0; i < 300; ++i) {
        const HPoint x = dyadic_point(rng, -2.5, 2.5);
        const auto d = pavage(x);
        int found = 0;
        for (int n1 = -7; n1 <= 7; ++n1)
            for (int n2 = -7; n2 <= 7; ++n2)
                for (int n3 = -7; n3 <= 7; ++n3) {
                    const HPoint n{static_cast<double>(n1),
                                   static_cast<double>(n2),
                                   static_cast<double>(n3)};
                    const HPoint q = mul(inverse(n), x);
                    if (q.x1 >= 0 && q.x1 < 1 && q.x2 >= 0 && q.x2 < 1 &&
                        q.x3 >= 0 && q.x3 < 1)
                        ++found;
                }
        CHECK(found == 1);
        CHECK(linf(mul(to_point(d.n), d.q), x) <= 1e-12);
    }
}

TEST_CASE("fundamental part is lattice-invariant") {
    Pcg64 rng(17);
    for (int i = 0; i < 2000; ++i) {
        const HPoint x = dyadic_point(rng, -2, 2);
        const HPoint n{static_cast<double>(static_cast<int>(rng.uniform(-3, 4))),
                       static_cast<double>(static_cast<int>(rng.uniform(-3, 4))),
                       static_cast<double>(static_cast<int>(rng.uniform(-3, 4)))};
        CHECK(linf(fundamental(mul(n, x)), fundamental(x)) <= 1e-12);
    }
}

TEST_CASE("integer triples form a subgroup") {
    Pcg64 rng(18);
    for (int i = 0; i < 1000; ++i) {
        auto r = [&] { return std::floor(rng.uniform(-5, 6)); };
        const HPoint n{r(), r(), r()};
        const HPoint m{r(), r(), r()};
        const HPoint p = mul(n, m);
        CHECK(p.x1 == std::floor(p.x1));
        CHECK(p.x2 == std::floor(p.x2));
        CHECK(p.x3 == std::floor(p.x3));
    }
}

TEST_CASE("torus distance identifications") {
    // (-1,0,0) (+) (1,x2,x3) = (0,x2,x3-x2)
    CHECK(torus_dist({1, 0.25, 0.5}, {0, 0.25, 0.25}) <= 1e-12);
    // (1,1,x3) ~ (0,0,x3)
    CHECK(torus_dist({1, 1, 0.7}, {0, 0, 0.7}) <= 1e-12);
    CHECK(torus_dist({0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}) == 0.0);

    Pcg64 rng(19);
    for (int i = 0; i < 500; ++i) {
        const double x2 = rng.uniform(), x3 = rng.uniform();
        const double s = x3 - x2;
        const HPoint rhs = (s >= 0) ? HPoint{0, x2, s} : HPoint{0, x2, s + 1};
        CHECK(torus_dist({1, x2, x3}, rhs) <= 1e-12);
    }
}

TEST_CASE("torus distance metric properties") {
    Pcg64 rng(20);
    for (int i = 0; i < 2000; ++i) {
        const HPoint x = dyadic_point(rng, 0, 1);
        const HPoint y = dyadic_point(rng, 0, 1);
        const HPoint z = dyadic_point(rng, 0, 1);
        const double dxy = torus_dist(x, y);
        CHECK(dxy == doctest::Approx(torus_dist(y, x)).epsilon(1e-10));
        CHECK(dxy <= torus_dist(x, z) + torus_dist(z, y) + 1e-10);
    }
}

TEST_CASE("torus window sufficiency") {
    Pcg64 rng(21);
    for (int i = 0; i < 2000; ++i) {
        const HPoint x = dyadic_point(rng, 0, 1);
        const HPoint y = dyadic_point(rng, 0, 1);
        CHECK(torus_dist(x, y, 2) == doctest::Approx(torus_dist(x, y, 5)));
    }
}

TEST_CASE("horizontal frame") {
    const auto f0 = horizontal_frame({0, 0, 0});
    CHECK(f0.b[0] == std::array<double, 2>{1, 0});
    CHECK(f0.b[1] == std::array<double, 2>{0, 1});
    CHECK(f0.b[2] == std::array<double, 2>{0, 0});
    const auto f = horizontal_frame({1, 2, 5});
    CHECK(f.b[2] == std::array<double, 2>{-2, 1});
}

TEST_CASE("commutator square loop in closed form") {
    // exact flows: along X1 for time h is x (+) (h,0,0); along X2 it is
    // x (+) (0,h,0); the four legs close up to a vertical displacement
    for (double h : {0.5, 0.1, 0.01}) {
        HPoint y{0.2, -0.4, 0.9};
        const HPoint start = y;
        y = mul(y, {h, 0, 0});
        y = mul(y, {0, h, 0});
        y = mul(y, {-h, 0, 0});
        y = mul(y, {0, -h, 0});
        CHECK(y.x1 == doctest::Approx(start.x1).epsilon(1e-13));
        CHECK(y.x2 == doctest::Approx(start.x2).epsilon(1e-13));
        CHECK(y.x3 - start.x3 == doctest::Approx(2 * h * h).epsilon(1e-12));
    }
}
