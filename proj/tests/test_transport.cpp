#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <nlohmann/json.hpp>

#include "heisflow/rng.hpp"
#include "heisflow/transport.hpp"

using namespace heisflow;

namespace {

ParticleCloud cloud_from_json(const nlohmann::json& rows) {
    std::vector<Atom> atoms;
    for (const auto& r : rows)
        atoms.push_back({{r[0].get<double>(), r[1].get<double>(), r[2].get<double>()},
                         r[3].get<double>()});
    return ParticleCloud(std::move(atoms));
}

}  // namespace

TEST_CASE("explicit cost matrix instances") {
    // 1x1: everything moves across the single edge
    auto r = solve_transport({1.0}, {1.0}, {0.7});
    CHECK(r.cost == doctest::Approx(0.7));
    REQUIRE(r.plan.size() == 1);
    CHECK(r.plan[0].mass == doctest::Approx(1.0));

    // 2x2 with an obvious diagonal assignment
    r = solve_transport({0.5, 0.5}, {0.5, 0.5}, {0.0, 1.0, 1.0, 0.0});
    CHECK(r.cost == doctest::Approx(0.0).epsilon(1e-12));

    // 2x2 forced split: all of source 0 goes to target 1 and vice versa
    r = solve_transport({0.3, 0.7}, {0.6, 0.4}, {1.0, 2.0, 3.0, 1.0});
    // optimum: pi = [[0.3,0],[0.3,0.4]] -> 0.3 + 0.9 + 0.4 = 1.6
    CHECK(r.cost == doctest::Approx(1.6).epsilon(1e-12));

    CHECK_THROWS(solve_transport({1.0}, {0.5}, {1.0}));   // unbalanced
    CHECK_THROWS(solve_transport({1.0}, {1.0}, {1.0, 2.0}));  // bad matrix
}

TEST_CASE("plan is a feasible coupling") {
    Pcg64 rng(51);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = ParticleCloud::uniform(7, 500 + trial);
        const auto b = ParticleCloud::uniform(5, 600 + trial);
        const auto r = kantorovich_d1(a, b);
        std::vector<double> row(a.size(), 0.0), col(b.size(), 0.0);
        double planned = 0.0;
        for (const auto& e : r.plan) {
            CHECK(e.mass > 0.0);
            row[e.source] += e.mass;
            col[e.target] += e.mass;
            planned += e.mass * torus_dist(a.atoms()[e.source].p,
                                           b.atoms()[e.target].p);
        }
        for (std::size_t i = 0; i < a.size(); ++i)
            CHECK(row[i] == doctest::Approx(a.atoms()[i].w).epsilon(1e-9));
        for (std::size_t j = 0; j < b.size(); ++j)
            CHECK(col[j] == doctest::Approx(b.atoms()[j].w).epsilon(1e-9));
        CHECK(planned == doctest::Approx(r.cost).epsilon(1e-10));
    }
}

TEST_CASE("metric axioms on the atomic level") {
    Pcg64 rng(52);
    for (int trial = 0; trial < 15; ++trial) {
        const auto a = ParticleCloud::uniform(6, 700 + trial);
        const auto b = ParticleCloud::uniform(6, 800 + trial);
        const auto c = ParticleCloud::uniform(6, 900 + trial);
        const double dab = kantorovich_d1(a, b).cost;
        const double dba = kantorovich_d1(b, a).cost;
        const double dac = kantorovich_d1(a, c).cost;
        const double dcb = kantorovich_d1(c, b).cost;
        CHECK(dab == doctest::Approx(dba).epsilon(1e-9));
        CHECK(dab <= dac + dcb + 1e-9);
        CHECK(kantorovich_d1(a, a).cost <= 1e-12);
    }
}

TEST_CASE("dirac pair reduces to the ground metric") {
    Pcg64 rng(53);
    for (int trial = 0; trial < 50; ++trial) {
        const HPoint x{rng.uniform(), rng.uniform(), rng.uniform()};
        const HPoint y{rng.uniform(), rng.uniform(), rng.uniform()};
        const double d =
            kantorovich_d1(ParticleCloud::dirac(x), ParticleCloud::dirac(y)).cost;
        CHECK(d == doctest::Approx(torus_dist(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("frozen linear-programming oracle") {
    std::ifstream in(std::string(HEISFLOW_TEST_DATA_DIR) + "/ot_oracle.json");
    REQUIRE(in.good());
    const auto data = nlohmann::json::parse(in);
    REQUIRE(data.size() == 50);
    for (const auto& inst : data) {
        const auto a = cloud_from_json(inst["a"]);
        const auto b = cloud_from_json(inst["b"]);
        const double expect = inst["cost"].get<double>();
        CHECK(kantorovich_d1(a, b).cost == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("size cap routes large problems away from the exact solver") {
    const auto a = ParticleCloud::uniform(30, 54);
    const auto b = ParticleCloud::uniform(30, 55);
    CHECK_THROWS(kantorovich_d1(a, b, 2, 20));
}

TEST_CASE("sinkhorn approximates the exact cost") {
    const auto a = ParticleCloud::uniform(200, 56);
    const auto b = ParticleCloud::uniform(200, 57);
    const auto exact = kantorovich_d1(a, b);
    const auto s = sinkhorn_d1(a, b, 1e-3);
    CHECK(s.converged);
    CHECK(s.marginal_residual <= 1e-5);
    // within 1% of the exact value at this regularization
    CHECK(std::abs(s.cost - exact.cost) <= 0.01 * exact.cost);
    // the entropic bracket holds with the additive slack
    CHECK(exact.cost >= s.cost - s.reg_slack - 1e-12);
}

TEST_CASE("sinkhorn tightens as the regularization decreases") {
    const auto a = ParticleCloud::uniform(80, 58);
    const auto b = ParticleCloud::uniform(80, 59);
    const double exact = kantorovich_d1(a, b).cost;
    double prev_gap = 1e100;
    for (double reg : {3e-2, 1e-2, 3e-3, 1e-3}) {
        const auto s = sinkhorn_d1(a, b, reg);
        const double gap = std::abs(s.cost - exact);
        CHECK(gap < prev_gap + 1e-12);
        prev_gap = gap;
    }
    CHECK(prev_gap < 5e-3 * exact + 1e-6);
}
