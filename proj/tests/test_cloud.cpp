#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "heisflow/cloud.hpp"
#include "heisflow/rng.hpp"

using namespace heisflow;

TEST_CASE("construction normalizes and projects") {
    ParticleCloud c({{{1.5, -0.3, 2.0}, 2.0}, {{0.2, 0.2, 0.2}, 6.0}});
    CHECK(c.size() == 2);
    CHECK(c.total_mass() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c.atoms()[0].w == doctest::Approx(0.25));
    // the first atom lands at its fundamental representative
    CHECK(c.atoms()[0].p.x1 == doctest::Approx(0.5));
    CHECK(c.atoms()[0].p.x2 == doctest::Approx(0.7));
    CHECK(c.atoms()[0].p.x3 == doctest::Approx(0.8));

    CHECK_THROWS(ParticleCloud({{{0, 0, 0}, -1.0}}));
    CHECK_THROWS(ParticleCloud({{{0, 0, 0}, 0.0}}));
    CHECK_THROWS(ParticleCloud(std::vector<Atom>{}));
}

TEST_CASE("dirac and uniform") {
    const auto d = ParticleCloud::dirac({2.5, 0.5, 0.25});
    CHECK(d.size() == 1);
    CHECK(d.atoms()[0].w == 1.0);

    const auto u = ParticleCloud::uniform(5000, 91);
    CHECK(u.size() == 5000);
    CHECK(u.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    double m1 = 0.0;
    for (const auto& a : u.atoms()) m1 += a.w * a.p.x1;
    CHECK(m1 == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("rejection sampling matches the target marginals") {
    auto density = [](const HPoint& x) {
        return 1.0 + 0.5 * std::cos(2 * M_PI * x.x1);
    };
    const auto c = ParticleCloud::sample(density, 1.5, 40000, 92);
    CHECK(c.size() == 40000);
    // E[cos(2 pi x1)] = 0.25 for this density
    double mc = 0.0;
    for (const auto& a : c.atoms()) mc += a.w * std::cos(2 * M_PI * a.p.x1);
    CHECK(mc == doctest::Approx(0.25).epsilon(0.05));

    CHECK_THROWS(ParticleCloud::sample(density, 0.9, 100, 93));
    CHECK_THROWS(ParticleCloud::sample(density, 0.0, 100, 94));
}

TEST_CASE("subsample keeps the stride and renormalizes") {
    const auto u = ParticleCloud::uniform(1000, 95);
    const auto s = u.subsample(200);
    CHECK(s.size() == 200);
    CHECK(s.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.atoms()[1].p == u.atoms()[5].p);
    // no-op below the cap
    CHECK(u.subsample(2000).size() == 1000);
}

TEST_CASE("push forward applies the map atomwise") {
    const auto u = ParticleCloud::uniform(50, 96);
    const HPoint g{0.3, 0.6, 0.1};
    const auto moved =
        push_forward(u, [&](const HPoint& p) { return mul(g, p); });
    for (std::size_t i = 0; i < u.size(); ++i) {
        CHECK(moved.atoms()[i].w ==
              doctest::Approx(u.atoms()[i].w).epsilon(1e-14));
        CHECK(torus_dist(moved.atoms()[i].p, mul(g, u.atoms()[i].p)) <= 1e-10);
    }
}

TEST_CASE("kernel density estimate agrees with the naive sum") {
    const Kernel k(0.25);
    const Resolution res{10, 10, 10};
    const auto c = ParticleCloud::uniform(60, 97);
    const GridField fast = density_from_cloud(c, k, res);
    const GridField slow = density_from_cloud_naive(c, k, res, 2);
    for (std::size_t i = 0; i < fast.size(); ++i)
        CHECK(fast.values()[i] ==
              doctest::Approx(slow.values()[i]).epsilon(1e-10));
}

TEST_CASE("kernel density estimate integrates to one") {
    // grid step fine relative to the vertical kernel width
    const Kernel k(0.3);
    const auto c = ParticleCloud::uniform(500, 98);
    const GridField f = density_from_cloud(c, k, {16, 16, 16});
    CHECK(f.integral() == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(f.min_value() >= 0.0);
}

TEST_CASE("kernel density estimate is translation equivariant") {
    const Kernel k(0.3);
    const Resolution res{8, 8, 8};
    const auto c = ParticleCloud::uniform(40, 99);
    // left translation by a lattice element leaves the projected cloud alone
    const auto shifted =
        push_forward(c, [](const HPoint& p) { return mul({1, -2, 3}, p); });
    const GridField a = density_from_cloud(c, k, res);
    const GridField b = density_from_cloud(shifted, k, res);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a.values()[i] == doctest::Approx(b.values()[i]).epsilon(1e-11));
}

TEST_CASE("csv round trip") {
    const auto c = ParticleCloud::uniform(25, 100);
    const std::string path = "cloud_roundtrip_test.csv";
    save_cloud_csv(c, path);
    const auto back = load_cloud_csv(path);
    REQUIRE(back.size() == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(back.atoms()[i].p == c.atoms()[i].p);
        CHECK(back.atoms()[i].w == doctest::Approx(c.atoms()[i].w).epsilon(1e-15));
    }
    std::remove(path.c_str());

    CHECK_THROWS(load_cloud_csv("does_not_exist_anywhere.csv"));

    {
        std::FILE* f = std::fopen("cloud_bad_test.csv", "w");
        std::fputs("x1,x2,x3,w\n0.1,0.2,0.3,0.4\nnot-a-number,,,\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_WITH(load_cloud_csv("cloud_bad_test.csv"),
                      doctest::Contains("row 3"));
    std::remove("cloud_bad_test.csv");
}
