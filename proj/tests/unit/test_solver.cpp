#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cmn/ode45.hpp"
#include "cmn/solver.hpp"
#include "cmn/verify.hpp"

using namespace cmn;

namespace {

Field smooth_field(const GridPtr& g, double amp, double freq, double base) {
    Field f(g, 0.0);
    for (int i = 0; i < g->cells(); ++i) {
        const double r = g->center(i);
        f[i] = base + amp * std::cos(freq * r) * std::cos(freq * r);
    }
    return f;
}

State constant_state(const GridPtr& g, double u, double v, double w) {
    State s;
    s.t = 0.0;
    s.u = Field(g, u);
    s.v = Field(g, v);
    s.w = Field(g, w);
    return s;
}

ModelParams basic_params(int kappa, double m, double chi) {
    ModelParams p;
    p.n = 2;
    p.kappa = kappa;
    p.chi = chi;
    p.diffusion = DiffusionLaw::prototype(m);
    p.R = 1.0;
    return p;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("constant source solves the Helmholtz problem exactly") {
    const GridPtr g = RadialGrid::uniform(2, 1.0, 128);
    const Field u(g, 2.0), w(g, 1.5);
    const Field v = solve_elliptic_v(u, w, 2);
    for (double x : v.values) CHECK(x == doctest::Approx(3.0).epsilon(1e-11));
}

TEST_CASE("elliptic solve conserves the source integral") {
    const GridPtr g = RadialGrid::uniform(3, 1.0, 200);
    const Field u = smooth_field(g, 2.0, 5.0, 0.1);
    const Field w = smooth_field(g, 1.0, 3.0, 0.5);
    const Field v = solve_elliptic_v(u, w, 3);
    Field uw(g, 0.0);
    for (int i = 0; i < g->cells(); ++i) uw[i] = u[i] * w[i];
    CHECK(integral(v) == doctest::Approx(integral(uw)).epsilon(1e-10));
}

TEST_CASE("manufactured Helmholtz solution converges at second order") {
    for (int n : {2, 3}) {
        const auto orders = verify::helmholtz_orders(n, 1.0, {64, 128, 256});
        for (double o : orders) {
            CHECK(o > 1.7);
            CHECK(o < 2.3);
        }
    }
}

TEST_CASE("source-balanced equilibrium is a fixed point of the step") {
    const GridPtr g = RadialGrid::uniform(2, 1.0, 64);
    const double phi_star = 0.7;
    const ModelParams params = basic_params(0, 2.0, 5.0);
    const State s0 = constant_state(g, phi_star, 0.0, 0.0);
    SchemeOptions scheme;
    const StepResult res = step(s0, params, constant_source(phi_star), 1e-2, scheme);
    REQUIRE(res.status == StepStatus::Ok);
    for (int i = 0; i < g->cells(); ++i) {
        CHECK(res.state.u[i] == doctest::Approx(phi_star).epsilon(1e-13));
        CHECK(res.state.v[i] == 0.0);
        CHECK(res.state.w[i] == 0.0);
    }
}

TEST_CASE("one-step mass budget holds on random states") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> amp(0.1, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int kappa = trial % 2;
        const GridPtr g = RadialGrid::uniform(2, 1.0, 64);
        State s;
        s.t = 0.0;
        s.u = smooth_field(g, amp(rng), amp(rng) * 4.0, 0.05);
        s.w = smooth_field(g, amp(rng), amp(rng) * 2.0, 0.1);
        s.v = kappa == 0 ? solve_elliptic_v(s.u, s.w, 2)
                         : smooth_field(g, amp(rng), 2.0, 0.1);
        const double phi_level = 0.3 * amp(rng);
        const ModelParams params = basic_params(kappa, 1.5, 3.0);
        SchemeOptions scheme;
        const double dt = 1e-3 * amp(rng);
        const StepResult res = step(s, params, constant_source(phi_level), dt, scheme);
        REQUIRE(res.status == StepStatus::Ok);
        const double before = integral(s.u);
        const double after = integral(res.state.u);
        const double budget = before + dt * phi_level * g->domain_volume() + 1e-10;
        CHECK(after <= budget);
    }
}

TEST_CASE("chemotactic CFL violation reports NonPositive") {
    const GridPtr g = RadialGrid::uniform(2, 1.0, 32);
    State s;
    s.t = 0.0;
    s.u = smooth_field(g, 1.0, 3.0, 0.01);
    s.v = Field(g, 0.0);
    for (int i = 0; i < g->cells(); ++i) s.v[i] = 10.0 * g->center(i) * g->center(i);
    s.w = Field(g, 1.0);
    const ModelParams params = basic_params(1, 1.0, 50.0);
    SchemeOptions scheme;
    const StepResult res = step(s, params, zero_source(), 0.5, scheme);
    CHECK(res.status == StepStatus::NonPositive);
}

TEST_CASE("singular pure-power law cannot evaluate on vacuum regions") {
    const GridPtr g = RadialGrid::uniform(2, 1.0, 32);
    State s = constant_state(g, 0.0, 0.0, 1.0);
    s.u[0] = 1.0;  // vacuum everywhere else
    ModelParams params = basic_params(0, 0.5, 1.0);
    params.diffusion = DiffusionLaw::pure_power(0.5, 1.0);
    SchemeOptions scheme;
    const StepResult res = step(s, params, zero_source(), 1e-4, scheme);
    CHECK(res.status == StepStatus::LinearSolveFailure);

    // harmonic face averaging evaluates D cellwise and zeroes vacuum faces,
    // but the cell itself still hits the singularity
    scheme.face_average = FaceAverage::HarmonicD;
    const StepResult res2 = step(s, params, zero_source(), 1e-4, scheme);
    CHECK(res2.status == StepStatus::LinearSolveFailure);
}

TEST_CASE("degenerate pure-power law runs with harmonic face averaging") {
    const GridPtr g = RadialGrid::uniform(2, 1.0, 64);
    State s = constant_state(g, 0.0, 0.0, 1.0);
    for (int i = 0; i < 20; ++i) s.u[i] = 1.0 - i / 20.0;
    s.v = solve_elliptic_v(s.u, s.w, 2);
    ModelParams params = basic_params(0, 1.5, 1.0);
    params.diffusion = DiffusionLaw::pure_power(1.5, 1.0);
    SchemeOptions scheme;
    scheme.face_average = FaceAverage::HarmonicD;
    StepResult res = step(s, params, zero_source(), 1e-4, scheme);
    CHECK(res.status == StepStatus::Ok);
    CHECK(min_value(res.state.u) >= 0.0);
}

TEST_CASE("run with t_end = 0 completes immediately") {
    const GridPtr g = RadialGrid::uniform(2, 1.0, 32);
    const State s = constant_state(g, 1.0, 0.5, 0.5);
    const ModelParams params = basic_params(1, 1.5, 1.0);
    const RunReport rep = run(s, params, zero_source(), StepControl{}, SchemeOptions{}, 0.0,
                              ObserverConfig{});
    CHECK(rep.termination == Termination::Completed);
    CHECK(rep.samples.size() == 1);
    CHECK(rep.samples.front().t == 0.0);
}

TEST_CASE("run samples on the requested cadence") {
    const GridPtr g = RadialGrid::uniform(2, 1.0, 32);
    const State s = constant_state(g, 1.0, 0.5, 0.5);
    const ModelParams params = basic_params(1, 1.5, 1.0);
    ObserverConfig obs;
    obs.cadence = 0.1;
    obs.snapshot_times = {0.25, 0.5};
    StepControl ctl;
    ctl.dt_max = 1e-2;
    const RunReport rep = run(s, params, zero_source(), ctl, SchemeOptions{}, 1.0, obs);
    CHECK(rep.termination == Termination::Completed);
    CHECK(rep.samples.size() >= 10);
    CHECK(rep.samples.size() <= 14);
    REQUIRE(rep.snapshots.size() == 2);
    CHECK(rep.snapshots[0].first == doctest::Approx(0.25).epsilon(0.05));
    CHECK(rep.snapshots[1].first == doctest::Approx(0.5).epsilon(0.05));
    CHECK(rep.final_state.t == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cancellation token stops the run") {
    const GridPtr g = RadialGrid::uniform(2, 1.0, 32);
    const State s = constant_state(g, 1.0, 0.5, 0.5);
    const ModelParams params = basic_params(1, 1.5, 1.0);
    CancelToken token;
    token.cancel();
    const RunReport rep = run(s, params, zero_source(), StepControl{}, SchemeOptions{}, 5.0,
                              ObserverConfig{}, &token);
    CHECK(rep.termination == Termination::Cancelled);
}

TEST_CASE("mass monitors hold along full runs") {
    for (int kappa : {0, 1}) {
        const GridPtr g = RadialGrid::uniform(2, 1.0, 96);
        State s;
        s.t = 0.0;
        s.u = smooth_field(g, 2.0, 6.0, 0.1);
        s.w = Field(g, 1.0);
        s.v = kappa == 0 ? solve_elliptic_v(s.u, s.w, 2) : Field(g, 0.4);
        ModelParams params = basic_params(kappa, 1.5, 4.0);
        params.phi_star = 0.6;
        ObserverConfig obs;
        obs.cadence = 0.05;
        const RunReport rep =
            run(s, params, constant_source(0.6), StepControl{}, SchemeOptions{}, 8.0, obs);
        REQUIRE(rep.termination == Termination::Completed);
        const double vol = g->domain_volume();
        if (kappa == 0) {
            const double bound = std::max(rep.samples.front().u_l1, 0.6 * vol);
            for (const auto& smp : rep.samples) CHECK(smp.u_l1 <= bound * (1.0 + 1e-6));
        } else {
            const double bound =
                std::max(rep.samples.front().u_l1 + rep.samples.front().v_l1, 0.6 * vol);
            for (const auto& smp : rep.samples)
                CHECK(smp.u_l1 + smp.v_l1 <= bound * (1.0 + 1e-6));
        }
        CHECK(min_value(rep.final_state.u) >= 0.0);
        CHECK(min_value(rep.final_state.v) >= 0.0);
        CHECK(min_value(rep.final_state.w) >= 0.0);
    }
}

TEST_CASE("elliptic identity holds at every sample") {
    const GridPtr g = RadialGrid::uniform(2, 1.0, 96);
    State s;
    s.t = 0.0;
    s.u = smooth_field(g, 2.0, 6.0, 0.1);
    s.w = Field(g, 1.0);
    s.v = solve_elliptic_v(s.u, s.w, 2);
    const ModelParams params = basic_params(0, 1.5, 4.0);
    ObserverConfig obs;
    obs.cadence = 0.05;
    const RunReport rep =
        run(s, params, zero_source(), StepControl{}, SchemeOptions{}, 3.0, obs);
    for (const auto& smp : rep.samples)
        CHECK(std::abs(smp.v_l1 - smp.uw_l1) <= 1e-9 * std::max(smp.uw_l1, 1e-300));
}

TEST_CASE("temporal self-consistency: first order in dt at theta = 1") {
    auto sup_at_t1 = [](double dt) {
        const GridPtr g = RadialGrid::uniform(2, 1.0, 16);
        const State s = constant_state(g, 1.0, 0.5, 0.6);
        const ModelParams params = basic_params(1, 1.5, 1.0);
        StepControl ctl;
        ctl.dt_init = ctl.dt_min = ctl.dt_max = dt;
        ctl.safety = 1.0;
        ObserverConfig obs;
        obs.cadence = 2.0;  // only the final sample matters
        const RunReport rep =
            run(s, params, constant_source(0.3), ctl, SchemeOptions{}, 1.0, obs);
        return lp_norm_inf(rep.final_state.u);
    };
    const double s1 = sup_at_t1(4e-3);
    const double s2 = sup_at_t1(2e-3);
    const double s3 = sup_at_t1(1e-3);
    const double ratio = std::abs(s1 - s2) / std::abs(s2 - s3);
    CHECK(ratio > 1.7);   // at least first order
    CHECK(ratio < 4.5);   // and not spuriously superconvergent
}

TEST_CASE("theta = 1/2 with coupled fixed-point passes is second order in time") {
    const double e1 = verify::ode_oracle_rel_error(1.0, 4e-3, 16, 0.5, 4);
    const double e2 = verify::ode_oracle_rel_error(1.0, 2e-3, 16, 0.5, 4);
    const double order = std::log2(e1 / e2);
    CHECK(order > 1.7);
}

TEST_CASE("kappa = 0 ignores any supplied v0 and slaves v to u0 w0") {
    const GridPtr g = RadialGrid::uniform(2, 1.0, 64);
    ModelParams params = basic_params(0, 1.5, 1.0);
    InitialDataSpec spec;
    spec.mu = 1.0;
    spec.alpha = spec.beta = 1.0;
    spec.v0_value = 123.0;  // must be ignored for kappa = 0
    spec.u0_kind = ProfileKind::Uniform;
    const InitialData data = build_initial_data(params, g, spec);
    const State s = make_initial_state(data, params);
    Field uw(g, 0.0);
    for (int i = 0; i < g->cells(); ++i) uw[i] = s.u[i] * s.w[i];
    CHECK(integral(s.v) == doctest::Approx(integral(uw)).epsilon(1e-12));
    CHECK(lp_norm_inf(s.v) < 2.0);
}

}  // TEST_SUITE
