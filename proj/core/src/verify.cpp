#include "cmn/verify.hpp"

#include <cmath>
#include <iostream>
#include <numbers>

#include "cmn/ode45.hpp"
#include "cmn/transform.hpp"

namespace cmn {
namespace verify {

namespace {

Field manufactured_rhs(const GridPtr& grid, double R) {
    const int n = grid->dimension();
    const double k = std::numbers::pi / R;
    Field f(grid, 0.0);
    for (int i = 0; i < grid->cells(); ++i) {
        const double r = grid->center(i);
        // f = v - lap(v) with v = 1 + cos(k r)
        const double sinc = r > 1e-8 ? std::sin(k * r) / r : k * (1.0 - (k * r) * (k * r) / 6.0);
        f[i] = 1.0 + std::cos(k * r) + k * k * std::cos(k * r) + (n - 1) * k * sinc;
    }
    return f;
}

}  // namespace

double helmholtz_manufactured_error(int n, double R, int cells) {
    const GridPtr grid = RadialGrid::uniform(n, R, cells);
    const Field f = manufactured_rhs(grid, R);
    const Field v = solve_helmholtz(f, n);
    const double k = std::numbers::pi / R;
    double err = 0.0;
    for (int i = 0; i < cells; ++i) {
        const double exact = 1.0 + std::cos(k * grid->center(i));
        err = std::max(err, std::abs(v[i] - exact));
    }
    return err;
}

std::vector<double> helmholtz_orders(int n, double R, const std::vector<int>& meshes) {
    std::vector<double> errs;
    errs.reserve(meshes.size());
    for (int m : meshes) errs.push_back(helmholtz_manufactured_error(n, R, m));
    std::vector<double> orders;
    for (size_t i = 0; i + 1 < errs.size(); ++i) orders.push_back(std::log2(errs[i] / errs[i + 1]));
    return orders;
}

RunConfig convergence_config(int cells) {
    RunConfig cfg;
    cfg.model.n = 2;
    cfg.model.kappa = 0;
    cfg.model.chi = 1.0;
    cfg.model.diffusion = DiffusionLaw::prototype(2.0);
    cfg.model.R = 1.0;
    cfg.phi.kind = PhiSpec::Kind::Zero;
    cfg.model.phi_star = 0.0;
    cfg.initial.mu = 1.0;
    cfg.initial.alpha = 1.0;
    cfg.initial.beta = 1.0;
    cfg.initial.u0_kind = ProfileKind::Gaussian;
    cfg.initial.u0_width = 0.35;
    cfg.grid.cells = cells;
    cfg.t_end = 0.25;
    cfg.control.dt_init = 2e-4;
    cfg.control.dt_min = 2e-4;
    cfg.control.dt_max = 2e-4;
    cfg.control.safety = 1.0;
    cfg.control.u_cap = 1e12;
    cfg.scheme.theta = 0.5;
    cfg.scheme.picard_iters = 3;
    cfg.scheme.advection = AdvectionScheme::Centered;
    cfg.outputs.cadence = 0.25;
    return cfg;
}

double coupled_richardson_order(const RunConfig& base, int M0) {
    Field sol[3];
    for (int level = 0; level < 3; ++level) {
        RunConfig cfg = base;
        cfg.grid.cells = M0 << level;
        PreparedRun pr = prepare_run(cfg);
        RunReport rep =
            run(pr.state, cfg.model, pr.phi, cfg.control, cfg.scheme, cfg.t_end, pr.observers);
        if (rep.termination != Termination::Completed)
            throw std::runtime_error("coupled_richardson_order: run did not complete");
        sol[level] = rep.final_state.u;
    }
    const GridPtr coarse = sol[0].grid;
    const Field r1 = restrict_to(sol[1], coarse);
    const Field r2 = restrict_to(sol[2], coarse);
    Field d1(coarse, 0.0), d2(coarse, 0.0);
    for (int i = 0; i < coarse->cells(); ++i) {
        d1[i] = sol[0][i] - r1[i];
        d2[i] = r1[i] - r2[i];
    }
    return std::log2(lp_norm(d1, 2.0) / lp_norm(d2, 2.0));
}

double ode_oracle_rel_error(double t_end, double dt, int cells, double theta, int picard) {
    const double u0 = 1.0, v0 = 0.5, w0 = 0.6, phi0 = 0.3;

    RunConfig cfg;
    cfg.model.n = 2;
    cfg.model.kappa = 1;
    cfg.model.chi = 5.0;
    cfg.model.diffusion = DiffusionLaw::prototype(1.5);
    cfg.model.R = 1.0;
    cfg.phi.kind = PhiSpec::Kind::Constant;
    cfg.phi.value = phi0;
    cfg.model.phi_star = phi0;
    cfg.initial.mu = u0 * unit_ball_volume(2);  // uniform level u0
    cfg.initial.alpha = w0;
    cfg.initial.beta = w0;
    cfg.initial.v0_value = v0;
    cfg.initial.u0_kind = ProfileKind::Uniform;
    cfg.grid.cells = cells;
    cfg.t_end = t_end;
    cfg.control.dt_init = dt;
    cfg.control.dt_min = dt;
    cfg.control.dt_max = dt;
    cfg.control.safety = 1.0;
    cfg.control.u_cap = 1e12;
    cfg.scheme.theta = theta;
    cfg.scheme.picard_iters = picard;
    cfg.outputs.cadence = t_end;

    PreparedRun pr = prepare_run(cfg);
    RunReport rep =
        run(pr.state, cfg.model, pr.phi, cfg.control, cfg.scheme, cfg.t_end, pr.observers);
    if (rep.termination != Termination::Completed)
        throw std::runtime_error("ode_oracle_rel_error: run did not complete");

    auto rhs = [phi0](double, const std::vector<double>& y) {
        return std::vector<double>{-y[0] - y[0] * y[2] + phi0, -y[1] + y[0] * y[2],
                                   -y[2] + y[1]};
    };
    const std::vector<double> ref = integrate_ode45(rhs, 0.0, t_end, {u0, v0, w0}, 1e-12);

    const State& fs = rep.final_state;
    double err = 0.0;
    err = std::max(err, std::abs(fs.u[0] - ref[0]) / std::abs(ref[0]));
    err = std::max(err, std::abs(fs.v[0] - ref[1]) / std::abs(ref[1]));
    err = std::max(err, std::abs(fs.w[0] - ref[2]) / std::abs(ref[2]));
    return err;
}

double mass_monitor_margin(const RunReport& report, const RunConfig& cfg) {
    const RunSample& first = report.samples.front();
    const double vol = cfg.model.domain_volume();
    double worst = -1.0;
    if (cfg.model.kappa == 0) {
        const double bound = std::max(first.u_l1, cfg.model.phi_star * vol);
        for (const auto& s : report.samples) worst = std::max(worst, s.u_l1 / bound - 1.0);
    } else {
        const double bound = std::max(first.u_l1 + first.v_l1, cfg.model.phi_star * vol);
        for (const auto& s : report.samples)
            worst = std::max(worst, (s.u_l1 + s.v_l1) / bound - 1.0);
    }
    return worst;
}

double elliptic_identity_margin(const RunReport& report) {
    double worst = 0.0;
    for (const auto& s : report.samples) {
        const double scale = std::max(std::abs(s.uw_l1), 1e-300);
        worst = std::max(worst, std::abs(s.v_l1 - s.uw_l1) / scale);
    }
    return worst;
}

namespace {

RunConfig mass_config(int kappa) {
    RunConfig cfg;
    cfg.model.n = 2;
    cfg.model.kappa = kappa;
    cfg.model.chi = 3.0;
    cfg.model.diffusion = DiffusionLaw::prototype(1.5);
    cfg.model.R = 1.0;
    cfg.phi.kind = PhiSpec::Kind::Constant;
    cfg.phi.value = 0.5;
    cfg.model.phi_star = 0.5;
    cfg.initial.mu = 1.0;
    cfg.initial.alpha = 0.5;
    cfg.initial.beta = 1.5;
    cfg.initial.u0_kind = ProfileKind::Bump;
    cfg.initial.u0_width = 0.5;
    if (kappa == 1) cfg.initial.v0_value = 0.25;
    cfg.grid.cells = 128;
    cfg.t_end = 5.0;
    cfg.control.u_cap = 1e9;
    cfg.outputs.cadence = 0.05;
    return cfg;
}

CheckLine line(const std::string& name, double value, double bound, bool pass,
               std::string note = {}) {
    return {name, value, bound, pass, std::move(note)};
}

}  // namespace

Suite suite_mass() {
    Suite s;
    for (int kappa : {0, 1}) {
        RunConfig cfg = mass_config(kappa);
        PreparedRun pr = prepare_run(cfg);
        RunReport rep =
            run(pr.state, cfg.model, pr.phi, cfg.control, cfg.scheme, cfg.t_end, pr.observers);
        const double margin = mass_monitor_margin(rep, cfg);
        s.push_back(line("mass monitor kappa=" + std::to_string(kappa), margin, 1e-6,
                         margin <= 1e-6, "max over samples of mass/bound - 1"));
        if (kappa == 0) {
            const double em = elliptic_identity_margin(rep);
            s.push_back(line("elliptic identity along run", em, 1e-9, em <= 1e-9,
                             "max |int v - int uw| / int uw"));
        }
    }
    return s;
}

Suite suite_elliptic() {
    Suite s;
    for (int n : {2, 3}) {
        const auto orders = helmholtz_orders(n, 1.0, {64, 128, 256});
        for (size_t i = 0; i < orders.size(); ++i) {
            const bool ok = orders[i] >= 1.7 && orders[i] <= 2.3;
            s.push_back(line("helmholtz order n=" + std::to_string(n) + " step " +
                                 std::to_string(i),
                             orders[i], 2.0, ok, "target [1.7, 2.3]"));
        }
    }
    // conservation identity on an uneven field pair
    const GridPtr g = RadialGrid::uniform(2, 1.0, 128);
    Field u(g, 0.0), w(g, 0.0);
    for (int i = 0; i < g->cells(); ++i) {
        const double r = g->center(i);
        u[i] = 1.0 + std::sin(3.0 * r) * std::sin(3.0 * r);
        w[i] = 0.5 + r * r;
    }
    const Field v = solve_elliptic_v(u, w, 2);
    Field uw(g, 0.0);
    for (int i = 0; i < g->cells(); ++i) uw[i] = u[i] * w[i];
    const double rel = std::abs(integral(v) - integral(uw)) / integral(uw);
    s.push_back(line("int v == int uw", rel, 1e-10, rel <= 1e-10));
    return s;
}

Suite suite_ode_oracle() {
    const double err = ode_oracle_rel_error(1.0, 1e-3, 64, 0.5, 3);
    return {line("constant-data run vs adaptive reference", err, 1e-4, err <= 1e-4,
                 "max relative error over (u,v,w) at t=1")};
}

Suite suite_convergence() {
    const double order = coupled_richardson_order(convergence_config(64), 64);
    return {line("coupled stepper Richardson order", order, 2.0, order >= 1.7 && order <= 2.3,
                 "meshes 64/128/256, target [1.7, 2.3]")};
}

Suite suite_transform() {
    Suite s;
    const GridPtr g = RadialGrid::uniform(2, 1.0, 256);

    Field c(g, 0.75);
    const CumulativeMass zc = cumulative_mass(c);
    double worst = 0.0;
    for (size_t i = 0; i < zc.s_nodes.size(); ++i)
        worst = std::max(worst, std::abs(zc.z_nodes[i] - 0.75 * zc.s_nodes[i]));
    s.push_back(line("z(s) = c s for constant u", worst, 1e-12, worst <= 1e-12));

    Field b(g, 0.0);
    for (int i = 0; i < g->cells(); ++i) {
        const double r = g->center(i);
        b[i] = std::exp(-8.0 * r * r) + 0.1;
    }
    const CumulativeMass zb = cumulative_mass(b);
    const double total_rel =
        std::abs(zb.total() * unit_ball_volume(2) - integral(b)) / integral(b);
    s.push_back(line("z(R^n) |B1| == int u", total_rel, 1e-10, total_rel <= 1e-10));

    double slope_err = 0.0;
    for (int i = 0; i < g->cells(); ++i)
        slope_err = std::max(slope_err, std::abs(zb.slope(i) - b[i]));
    s.push_back(line("slope of z recovers u", slope_err, 1e-10 * lp_norm_inf(b),
                     slope_err <= 1e-10 * lp_norm_inf(b)));

    const double eta = 0.2, r = 0.8, cc = 0.75;
    const double y = radial_moment(c, r, eta);
    const double exact = cc * std::pow(r, 2.0 * (2.0 - eta)) / (2.0 - eta);
    const double yrel = std::abs(y - exact) / exact;
    s.push_back(line("y(r) analytic for constant u", yrel, 1e-8, yrel <= 1e-8));

    // eta -> 0 limit equals the plain integral of z
    const double y0 = radial_moment(b, r, 0.0);
    double plain = 0.0;
    const double s_top = r * r;
    for (size_t i = 0; i + 1 < zb.s_nodes.size(); ++i) {
        const double a = zb.s_nodes[i];
        if (a >= s_top) break;
        const double bb = std::min(zb.s_nodes[i + 1], s_top);
        plain += 0.5 * (zb.eval(a) + zb.eval(bb)) * (bb - a);
    }
    const double drel = std::abs(y0 - plain) / std::abs(plain);
    s.push_back(line("eta -> 0 limit vs plain quadrature", drel, 1e-8, drel <= 1e-8));

    const double T = riccati_blowup_time(1.0, 2.0);
    s.push_back(line("riccati horizon 1/(c y0)", std::abs(T - 0.5), 0.0, T == 0.5));

    std::vector<std::pair<double, double>> series;
    for (int i = 0; i <= 8; ++i) {
        const double t = 0.5 + 0.05 * i;
        series.emplace_back(t, 1.0 / (1.0 - t));
    }
    const auto est = extrapolate_supnorm(series);
    const double fit_err = est ? std::abs(*est - 1.0) : 1.0;
    s.push_back(line("reciprocal fit of (1-t)^-1", fit_err, 1e-6, fit_err <= 1e-6));
    return s;
}

Suite suite_odi() {
    Suite s;
    // term decomposition against independent evaluation
    const int n = 2;
    const double m = 0.5, chi = 7.0, K_D = 1.0;
    const MomentConfig cfg = MomentConfig::make(0.1, 0.2, 0.1, m, n);
    GammaConstants gam{0.9, 0.5, 3.0, 1.0};
    const double y_a = 0.23, y_b = 0.27, dt = 0.01, z_rn = 0.4, r = 0.3;
    const OdiTerms o = odi_terms(y_a, y_b, dt, z_rn, r, cfg, gam, n, m, chi, K_D);
    const double quad = cfg.eta * gam.gamma2 * chi * (2.0 - cfg.eta) /
                        (2.0 * std::pow(r, n * (2.0 - cfg.eta))) * y_a * y_a;
    const double lin = gam.gamma3 * y_a;
    const double drift = gam.gamma1 * chi * std::pow(r, n * (2.0 / n - cfg.eps - cfg.eta)) * z_rn;
    const double diff = n * n * K_D * (2.0 - 2.0 / n - cfg.eta) / m *
                        (std::pow(r, n * cfg.lam / m) * z_rn + std::pow(r, n * cfg.xi) / cfg.xi);
    const double recon = (y_b - y_a) / dt - (quad - lin - drift - diff);
    const double dec_err = std::abs(o.residual - recon);
    s.push_back(line("residual decomposition", dec_err, 1e-12, dec_err <= 1e-12));

    // gamma-free limit keeps only the finite difference and diffusion term
    GammaConstants zeroed{0.0, 0.0, 0.0, 0.0};
    const OdiTerms oz = odi_terms(y_a, y_b, dt, z_rn, r, cfg, zeroed, n, m, chi, K_D);
    const double lim_err = std::abs(oz.residual - ((y_b - y_a) / dt + diff));
    s.push_back(line("gamma-free limit", lim_err, 1e-12, lim_err <= 1e-12));

    // residual sign along a short concentrated run, inside the window
    RunConfig rc;
    rc.model.n = 2;
    rc.model.kappa = 0;
    rc.model.chi = 5.0;
    rc.model.diffusion = DiffusionLaw::prototype(0.5);
    rc.model.R = 1.0;
    rc.initial.mu = 1.0;
    rc.initial.alpha = 1.0;
    rc.initial.beta = 1.0;
    rc.initial.u0_kind = ProfileKind::Bump;
    rc.initial.r_star = 0.25;
    rc.grid.cells = 128;
    rc.t_end = 0.1;
    rc.outputs.cadence = 0.0025;
    rc.control.u_cap = 1e9;
    rc.analysis = AnalysisSpec{};
    RunOutcome out = execute_run(rc);
    if (!out.moments) throw std::runtime_error("suite_odi: analysis block missing");
    const MomentDiagnostics& md = *out.moments;
    const double frac =
        md.odi_points > 0
            ? 1.0 - static_cast<double>(md.odi_violations) / md.odi_points
            : 0.0;
    s.push_back(line("in-window residual >= -tol fraction", frac, 0.95, frac >= 0.95,
                     std::to_string(md.odi_points) + " window points, worst " +
                         format_double(md.odi_worst)));
    return s;
}

Suite suite_hypotheses() {
    Suite s;
    const int n = 2;
    const double m = 0.5, mu = 1.0, alpha = 1.0, beta = 1.0, chi = 10.0, K_D = 1.0,
                 T_star = 0.1;
    const MomentConfig cfg = MomentConfig::make(0.1, 0.2, 0.1, m, n);
    const GammaConstants gam =
        gamma_constants(mu, alpha, beta, cfg, 1.0, n, std::vector<double>{1.0});

    // margins are monotone improving down a geometric radius ladder
    bool monotone = true;
    double prev[4] = {-1e300, -1e300, -1e300, -1e300};
    double r = 0.2;
    for (int k = 0; k < 10; ++k) {
        const auto rep =
            check_blowup_hypotheses(r, mu, alpha, beta, cfg, gam, n, m, chi, K_D, T_star);
        const double cur[4] = {rep.mass_vs_drift.margin, rep.quad_vs_linear.margin,
                               rep.mass_vs_diffusion.margin, rep.horizon.margin};
        if (k > 0)
            for (int q = 0; q < 4; ++q) monotone = monotone && cur[q] >= prev[q];
        for (int q = 0; q < 4; ++q) prev[q] = cur[q];
        r *= 0.5;
    }
    bool eventually_pass = false;
    r = 1.0;
    for (int k = 0; k < 60 && !eventually_pass; ++k) {
        r *= 0.5;
        eventually_pass =
            check_blowup_hypotheses(r, mu, alpha, beta, cfg, gam, n, m, chi, K_D, T_star)
                .all_pass;
    }
    s.push_back(line("ladder monotonicity (10-point, factor 1/2)", monotone ? 1.0 : 0.0, 1.0,
                     monotone));
    s.push_back(line("all conditions eventually pass", eventually_pass ? 1.0 : 0.0, 1.0,
                     eventually_pass));

    const auto at_R =
        check_blowup_hypotheses(1.0, mu, alpha, beta, cfg, gam, n, m, chi, K_D, T_star);
    s.push_back(line("maximal radius fails at least one condition", at_R.all_pass ? 1.0 : 0.0,
                     0.0, !at_R.all_pass));

    const double rb =
        max_passing_rstar(mu, alpha, beta, cfg, gam, n, m, chi, K_D, T_star, 1.0);
    const bool rb_ok =
        rb > 0.0 &&
        check_blowup_hypotheses(rb, mu, alpha, beta, cfg, gam, n, m, chi, K_D, T_star)
            .all_pass;
    s.push_back(line("bisection radius passes", rb, 0.0, rb_ok, "largest passing r*"));
    return s;
}

Suite run_suite(const std::string& name) {
    if (name == "mass") return suite_mass();
    if (name == "elliptic") return suite_elliptic();
    if (name == "ode-oracle") return suite_ode_oracle();
    if (name == "convergence") return suite_convergence();
    if (name == "transform") return suite_transform();
    if (name == "odi") return suite_odi();
    if (name == "hypotheses") return suite_hypotheses();
    throw ConfigError("unknown verify suite '" + name +
                      "' (mass, elliptic, ode-oracle, convergence, transform, odi, hypotheses)");
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {
        "mass", "elliptic", "ode-oracle", "convergence", "transform", "odi", "hypotheses"};
    return names;
}

}  // namespace verify

int cmd_verify(const std::string& suite) {
    try {
        const verify::Suite checks = verify::run_suite(suite);
        bool all = true;
        for (const auto& c : checks) {
            std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << ": value "
                      << format_double(c.value) << " vs bound " << format_double(c.bound);
            if (!c.note.empty()) std::cout << "  [" << c.note << "]";
            std::cout << "\n";
            all = all && c.pass;
        }
        return all ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "verify: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "verify error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cmn
