#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "heisflow/grid.hpp"
#include "heisflow/rng.hpp"

using namespace heisflow;

TEST_CASE("construction and node layout") {
    GridField f({4, 5, 6}, 2.5);
    CHECK(f.size() == 120);
    CHECK(f.integral() == doctest::Approx(2.5));
    CHECK(f.node_point(0, 0, 0) == HPoint{0, 0, 0});
    CHECK(f.node_point(1, 1, 3) == HPoint{0.25, 0.2, 0.5});
    CHECK_THROWS(GridField({0, 4, 4}));
    CHECK_THROWS(GridField({4, -1, 4}));
}

TEST_CASE("lookup reproduces node values") {
    GridField f({6, 6, 6});
    Pcg64 rng(31);
    f.assign([&](const HPoint&) { return rng.uniform(-1, 1); });
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            for (int k = 0; k < 6; ++k)
                CHECK(f.lookup(f.node_point(i, j, k)) ==
                      doctest::Approx(f.at(i, j, k)).epsilon(1e-13));
}

TEST_CASE("lookup is invariant under lattice translations") {
    GridField f({8, 8, 8});
    Pcg64 rng(32);
    f.assign([&](const HPoint&) { return rng.uniform(-1, 1); });
    for (int trial = 0; trial < 500; ++trial) {
        const HPoint x{rng.uniform(), rng.uniform(), rng.uniform()};
        const HPoint n{std::floor(rng.uniform(-3, 4)), std::floor(rng.uniform(-3, 4)),
                       std::floor(rng.uniform(-3, 4))};
        CHECK(f.lookup(mul(n, x)) == doctest::Approx(f.lookup(x)).epsilon(1e-12));
    }
}

TEST_CASE("far-face corners follow the twisted identification") {
    const int N = 8;
    GridField f({N, N, N});
    Pcg64 rng(33);
    f.assign([&](const HPoint&) { return rng.uniform(-1, 1); });
    for (int j = 0; j < N; ++j)
        for (int k = 0; k < N; ++k) {
            // crossing x1 = 1 shifts the vertical index by -j
            CHECK(f.corner_value(N, j, k) ==
                  doctest::Approx(f.at(0, j, ((k - j) % N + N) % N)).epsilon(1e-13));
            // crossing x2 = 1 shifts it by +i (here i = j for variety)
            CHECK(f.corner_value(j, N, k) ==
                  doctest::Approx(f.at(j, 0, (k + j) % N)).epsilon(1e-13));
            // the vertical wrap is untwisted
            CHECK(f.corner_value(j, k, N) == doctest::Approx(f.at(j, k, 0)));
        }
}

TEST_CASE("interpolation converges quadratically on smooth periodic data") {
    auto smooth = [](const HPoint& x) {
        return std::cos(2 * M_PI * x.x1) + 0.5 * std::sin(2 * M_PI * x.x2);
    };
    Pcg64 rng(34);
    std::vector<HPoint> probes;
    for (int i = 0; i < 200; ++i)
        probes.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});

    double prev = 0.0;
    for (int N : {8, 16, 32}) {
        GridField f({N, N, N});
        f.assign(smooth);
        double err = 0.0;
        for (const auto& p : probes)
            err = std::max(err, std::abs(f.lookup(p) - smooth(fundamental(p))));
        if (N > 8) CHECK(err < 0.35 * prev);  // ~4x drop per refinement
        prev = err;
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("integral is the midpoint quadrature") {
    GridField f({16, 16, 16});
    f.assign([](const HPoint& x) { return std::sin(2 * M_PI * x.x1); });
    CHECK(f.integral() == doctest::Approx(0.0).epsilon(1e-12));
    f.assign([](const HPoint&) { return 3.0; });
    CHECK(f.integral() == doctest::Approx(3.0));
}

TEST_CASE("arithmetic operators") {
    GridField a({4, 4, 4}, 1.0), b({4, 4, 4}, 2.0);
    a += b;
    a *= 0.5;
    CHECK(a.max_value() == doctest::Approx(1.5));
    CHECK(a.min_value() == doctest::Approx(1.5));
    CHECK(a.max_abs() == doctest::Approx(1.5));
}

TEST_CASE("column value wraps vertically") {
    GridField f({4, 4, 4});
    Pcg64 rng(35);
    f.assign([&](const HPoint&) { return rng.uniform(); });
    CHECK(f.column_value(1, 2, 0.25) == doctest::Approx(f.at(1, 2, 1)));
    // midway between k = 3 and the wrap to k = 0
    const double expect = 0.5 * (f.at(1, 2, 3) + f.at(1, 2, 0));
    CHECK(f.column_value(1, 2, 0.875) == doctest::Approx(expect));
    CHECK(f.column_value(1, 2, -0.125) == doctest::Approx(expect));
}
