#include <doctest.h>

#include <cmath>
#include <string>

#include "cmn/config.hpp"
#include "cmn/driver.hpp"

using namespace cmn;

TEST_SUITE("config") {

TEST_CASE("committed default configuration parses and round-trips") {
    const RunConfig cfg = load_config(std::string(CMN_CONFIG_DIR) + "/default.cfg");
    CHECK(cfg.model.n == 2);
    CHECK(cfg.model.kappa == 0);
    CHECK(cfg.model.chi == 5.0);
    CHECK(cfg.model.diffusion.m == 0.5);
    CHECK(cfg.model.R == 1.0);
    CHECK(cfg.initial.mu == 1.0);
    CHECK(cfg.initial.alpha == 1.0);
    CHECK(cfg.initial.beta == 1.0);
    CHECK(cfg.grid.cells == 512);
    CHECK(cfg.model.phi_star == 0.0);
    REQUIRE(cfg.analysis.has_value());
    CHECK(cfg.analysis->eta == 0.2);

    const std::string text = serialize_config(cfg);
    const RunConfig again = parse_config_text(text);
    CHECK(serialize_config(again) == text);
}

TEST_CASE("round-trip identity on a fully populated document") {
    RunConfig cfg;
    cfg.model.n = 3;
    cfg.model.kappa = 1;
    cfg.model.chi = 7.25;
    cfg.model.diffusion = DiffusionLaw::prototype(2.125);
    cfg.model.R = 1.5;
    cfg.phi.kind = PhiSpec::Kind::Bump;
    cfg.phi.value = 0.3;
    cfg.phi.center = 0.4;
    cfg.phi.width = 0.2;
    cfg.phi.tau = 2.0;
    cfg.model.phi_star = cfg.phi.phi_star();
    cfg.initial.mu = 0.8;
    cfg.initial.alpha = 0.5;
    cfg.initial.beta = 1.5;
    cfg.initial.w0_value = 0.75;
    cfg.initial.v0_value = 0.25;
    cfg.initial.r_star = 0.3;
    cfg.initial.u0_kind = ProfileKind::Gaussian;
    cfg.initial.u0_width = 0.17;
    cfg.grid.cells = 96;
    cfg.grid.stretch = 1.01;
    cfg.t_end = 2.5;
    cfg.control.u_cap = 123.0;
    cfg.scheme.theta = 0.5;
    cfg.scheme.picard_iters = 4;
    cfg.scheme.advection = AdvectionScheme::Centered;
    cfg.scheme.face_average = FaceAverage::HarmonicD;
    cfg.analysis = AnalysisSpec{};
    cfg.analysis->eta = 0.15;
    cfg.analysis->mbar = 0.45;
    cfg.outputs.cadence = 0.05;
    cfg.outputs.snapshot_times = {0.5, 1.0, 2.0};

    const std::string text = serialize_config(cfg);
    const RunConfig again = parse_config_text(text);
    CHECK(serialize_config(again) == text);
    CHECK(again.initial.w0_value == 0.75);
    CHECK(again.outputs.snapshot_times.size() == 3);
    CHECK(again.scheme.advection == AdvectionScheme::Centered);
}

TEST_CASE("unknown keys and sections are rejected by name") {
    CHECK_THROWS_WITH_AS(parse_config_text("[model]\nnn = 2\n"),
                         doctest::Contains("model.nn"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("[modell]\nn = 2\n"),
                         doctest::Contains("modell"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("[model]\nn = 2\nn = 3\n"),
                         doctest::Contains("duplicate"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("n = 2\n"), ConfigError);          // outside section
    CHECK_THROWS_AS(parse_config_text("[model\nn = 2\n"), ConfigError);  // malformed header
    CHECK_THROWS_WITH_AS(parse_config_text("[model]\nchi = abc\n"),
                         doctest::Contains("model.chi"), ConfigError);
}

TEST_CASE("embedded invariants are re-validated at load") {
    // kappa = 1 without v0
    CHECK_THROWS_WITH_AS(parse_config_text("[model]\nkappa = 1\n"),
                         doctest::Contains("v0_value"), ConfigError);
    // nonpositive mu
    CHECK_THROWS_AS(parse_config_text("[initial]\nmu = -1\n"), ConfigError);
    // r_star outside the domain
    CHECK_THROWS_AS(parse_config_text("[initial]\nr_star = 2\n"), ConfigError);
    // bad theta
    CHECK_THROWS_AS(parse_config_text("[scheme]\ntheta = 0.2\n"), ConfigError);
}

TEST_CASE("pure-power law with m <= 0 is rejected with the re-bounding hint") {
    const std::string base = "[model]\ndiffusion = purepower\nm = -0.5\n";
    CHECK_THROWS_WITH_AS(parse_config_text(base), doctest::Contains("mbar"), ConfigError);
    // with mbar the law is still unusable (singular at the vacuum state)
    CHECK_THROWS_WITH_AS(parse_config_text(base + "\n[analysis]\nmbar = 0.5\n"),
                         doctest::Contains("unbounded"), ConfigError);
    // prototype with m <= 0 plus mbar is admissible
    CHECK_NOTHROW(parse_config_text("[model]\nm = -0.5\n\n[analysis]\nmbar = 0.5\n"));
    CHECK_THROWS_AS(parse_config_text("[model]\nm = -0.5\n\n[analysis]\nenabled = true\n"),
                    ConfigError);
}

TEST_CASE("phi specifications") {
    PhiSpec zero;
    CHECK(zero.phi_star() == 0.0);
    CHECK(zero.make()(0.3, 1.0) == 0.0);

    PhiSpec c;
    c.kind = PhiSpec::Kind::Constant;
    c.value = 0.4;
    CHECK(c.phi_star() == 0.4);
    CHECK(c.make()(0.9, 5.0) == 0.4);

    PhiSpec decay = c;
    decay.tau = 2.0;
    CHECK(decay.make()(0.0, 0.0) == 0.4);
    CHECK(decay.make()(0.0, 2.0) == doctest::Approx(0.4 / std::exp(1.0)));

    PhiSpec bump;
    bump.kind = PhiSpec::Kind::Bump;
    bump.value = 1.5;
    bump.center = 0.5;
    bump.width = 0.25;
    CHECK(bump.phi_star() == 1.5);
    CHECK(bump.make()(0.5, 0.0) == 1.5);   // peak
    CHECK(bump.make()(0.8, 0.0) == 0.0);   // outside support
    CHECK(bump.make()(0.3, 0.0) > 0.0);
}

TEST_CASE("exit code contract") {
    CHECK(exit_code(Verdict::Bounded) == 0);
    CHECK(exit_code(Verdict::BlowupSuspected) == 2);
    CHECK(exit_code(Verdict::Inconclusive) == 3);
}

TEST_CASE("sweep axis parsing") {
    const SweepAxis ax = parse_axis("m=0.2:3.0:0.2");
    CHECK(ax.name == "m");
    CHECK(ax.count() == 15);
    CHECK(ax.value(0) == 0.2);
    CHECK(ax.value(14) == doctest::Approx(3.0).epsilon(1e-12));

    const SweepAxis single = parse_axis("chi=5");
    CHECK(single.count() == 1);
    CHECK(single.value(0) == 5.0);

    CHECK_THROWS_AS(parse_axis("m"), ConfigError);
    CHECK_THROWS_AS(parse_axis("m=1:2"), ConfigError);
    CHECK_THROWS_AS(parse_axis("m=a:b:c"), ConfigError);
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 2e-13, 6.02e23, 20.0, -0.0, 3.141592653589793}) {
        const std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

}  // TEST_SUITE
