#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "cmn/grid.hpp"

using namespace cmn;

namespace {

Field random_field(const GridPtr& g, unsigned seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Field f(g, 0.0);
    for (int i = 0; i < g->cells(); ++i) f[i] = dist(rng);
    return f;
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("unit ball volumes") {
    CHECK(unit_ball_volume(2) == std::numbers::pi);
    CHECK(unit_ball_volume(3) == 4.0 * std::numbers::pi / 3.0);
}

TEST_CASE("integral of constants") {
    const GridPtr g2 = RadialGrid::uniform(2, 1.0, 200);
    CHECK(integral(Field(g2, 1.0)) == doctest::Approx(std::numbers::pi).epsilon(1e-12));

    const GridPtr g3 = RadialGrid::uniform(3, 2.0, 157);
    const double c = 0.37;
    CHECK(integral(Field(g3, c)) ==
          doctest::Approx(c * unit_ball_volume(3) * 8.0).epsilon(1e-12));
}

TEST_CASE("integral of f(r) = r converges at second order") {
    // exact value 2 pi int_0^1 r * r dr = 2 pi / 3
    const double exact = 2.0 * std::numbers::pi / 3.0;
    double errs[3];
    int M = 50;
    for (int k = 0; k < 3; ++k, M *= 2) {
        const GridPtr g = RadialGrid::uniform(2, 1.0, M);
        Field f(g, 0.0);
        for (int i = 0; i < M; ++i) f[i] = g->center(i);
        errs[k] = std::abs(integral(f) - exact);
    }
    const double order1 = std::log2(errs[0] / errs[1]);
    const double order2 = std::log2(errs[1] / errs[2]);
    CHECK(order1 > 1.7);
    CHECK(order2 > 1.7);
}

TEST_CASE("partition of unity") {
    for (const auto& g : {RadialGrid::uniform(2, 1.0, 313), RadialGrid::uniform(3, 0.7, 64),
                          RadialGrid::stretched(2, 1.0, 256, 1.02)}) {
        double sum = 0.0;
        for (double w : g->cell_measures()) sum += w;
        CHECK(sum == doctest::Approx(g->domain_volume()).epsilon(1e-13));
        CHECK(g->face_area(0) == 0.0);
    }
}

TEST_CASE("lp norms") {
    const GridPtr g = RadialGrid::uniform(2, 1.0, 128);
    const double c = 1.7;
    CHECK(lp_norm(Field(g, c), 2.0) ==
          doctest::Approx(c * std::sqrt(std::numbers::pi)).epsilon(1e-12));

    Field f = random_field(g, 11, -2.0, 2.0);
    double mx = 0.0;
    for (double v : f.values) mx = std::max(mx, std::abs(v));
    CHECK(lp_norm(f, std::numeric_limits<double>::infinity()) == mx);
    CHECK(lp_norm_inf(f) == mx);

    CHECK_THROWS_AS(lp_norm(f, 0.5), std::invalid_argument);

    // two code paths agree: ||f||_1 vs integral of |f|
    Field af = f;
    for (double& v : af.values) v = std::abs(v);
    CHECK(lp_norm(f, 1.0) == doctest::Approx(integral(af)).epsilon(1e-13));
}

TEST_CASE("Hoelder bound between norms") {
    const GridPtr g = RadialGrid::uniform(2, 1.0, 97);
    for (unsigned seed : {1u, 2u, 3u}) {
        const Field f = random_field(g, seed, -1.0, 3.0);
        for (double p : {1.5, 2.0, 3.0, 7.0}) {
            const double lhs = lp_norm(f, 1.0);
            const double rhs =
                std::pow(g->domain_volume(), 1.0 - 1.0 / p) * lp_norm(f, p);
            CHECK(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("ball mass") {
    const GridPtr g = RadialGrid::uniform(3, 1.0, 200);
    const Field one(g, 1.0);
    CHECK(ball_mass(one, 0.0) == 0.0);
    CHECK(ball_mass(one, 1.0) == integral(one));  // bit-identical accumulation
    CHECK(ball_mass(one, 0.5) ==
          doctest::Approx(unit_ball_volume(3) * 0.125).epsilon(1e-12));
    CHECK_THROWS_AS(ball_mass(one, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(ball_mass(one, -0.1), std::invalid_argument);
}

TEST_CASE("ball mass is nondecreasing in r for nonnegative fields") {
    const GridPtr g = RadialGrid::uniform(2, 1.0, 64);
    const Field f = random_field(g, 42, 0.0, 5.0);
    double prev = 0.0;
    for (int k = 0; k <= 100; ++k) {
        const double r = k / 100.0;
        const double m = ball_mass(f, r);
        CHECK(m >= prev - 1e-15);
        prev = m;
    }
}

TEST_CASE("stretched grid refines toward the origin") {
    const GridPtr g = RadialGrid::stretched(2, 1.0, 128, 1.03);
    const auto& faces = g->faces();
    CHECK(faces.front() == 0.0);
    CHECK(faces.back() == 1.0);
    for (int i = 0; i + 1 < g->cells(); ++i) {
        const double h0 = faces[i + 1] - faces[i];
        const double h1 = faces[i + 2] - faces[i + 1];
        CHECK(h1 > h0);
    }
}

TEST_CASE("conservative restriction preserves integrals") {
    const GridPtr coarse = RadialGrid::uniform(2, 1.0, 64);
    const GridPtr fine = RadialGrid::uniform(2, 1.0, 256);
    const Field f = random_field(fine, 7, 0.0, 2.0);
    const Field r = restrict_to(f, coarse);
    CHECK(integral(r) == doctest::Approx(integral(f)).epsilon(1e-13));
}

TEST_CASE("locate") {
    const GridPtr g = RadialGrid::uniform(2, 1.0, 10);
    CHECK(g->locate(0.0) == 0);
    CHECK(g->locate(0.05) == 0);
    CHECK(g->locate(0.15) == 1);
    CHECK(g->locate(1.0) == 9);
    CHECK_THROWS_AS(g->locate(1.1), std::invalid_argument);
}

}  // TEST_SUITE
