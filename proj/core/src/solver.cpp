#include "cmn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cmn/transform.hpp"
#include "cmn/tridiag.hpp"

namespace cmn {

void StepControl::validate() const {
    if (!(dt_min > 0.0) || dt_init < dt_min || dt_max < dt_init)
        throw std::invalid_argument("StepControl: need 0 < dt_min <= dt_init <= dt_max");
    if (!(safety > 0.0 && safety <= 1.0))
        throw std::invalid_argument("StepControl: safety must lie in (0, 1]");
}

double StepControl::resolved_u_cap(double u0_inf) const {
    if (u_cap > 0.0) return u_cap;
    return 1e6 * std::max(u0_inf, std::numeric_limits<double>::min());
}

void SchemeOptions::validate() const {
    if (!(theta >= 0.5 && theta <= 1.0))
        throw std::invalid_argument("SchemeOptions: theta must lie in [1/2, 1]");
    if (picard_iters < 1)
        throw std::invalid_argument("SchemeOptions: picard_iters must be >= 1");
    if (!(picard_tol > 0.0))
        throw std::invalid_argument("SchemeOptions: picard_tol must be positive");
}

namespace {

constexpr double kNegativityTol = 1e-13;  // relative undershoot allowed before rejection

struct FaceGeometry {
    std::vector<double> conduct;  // face_area / center spacing, interior faces 1..M-1
};

FaceGeometry face_geometry(const RadialGrid& g) {
    FaceGeometry fg;
    const int m = g.cells();
    fg.conduct.assign(static_cast<size_t>(m) + 1, 0.0);
    for (int j = 1; j < m; ++j) {
        const double dr = g.center(j) - g.center(j - 1);
        fg.conduct[static_cast<size_t>(j)] = g.face_area(j) / dr;
    }
    return fg;
}

// flux divergence (1/w_i) * [A c (x_{i+1}-x_i)/dr]_{faces of i} with unit or
// per-face coefficients; boundary faces carry zero flux
std::vector<double> flux_divergence(const RadialGrid& g, const FaceGeometry& fg,
                                    const std::vector<double>& x,
                                    const std::vector<double>* face_coef) {
    const int m = g.cells();
    std::vector<double> out(static_cast<size_t>(m), 0.0);
    double flux_lo = 0.0;
    for (int i = 0; i < m; ++i) {
        double flux_hi = 0.0;
        if (i + 1 < m) {
            const size_t j = static_cast<size_t>(i) + 1;
            const double c = face_coef ? (*face_coef)[j] : 1.0;
            flux_hi = fg.conduct[j] * c * (x[j] - x[static_cast<size_t>(i)]);
        }
        out[static_cast<size_t>(i)] = (flux_hi - flux_lo) / g.measure(i);
        flux_lo = flux_hi;
    }
    return out;
}

struct Tridiag {
    std::vector<double> lo, di, up, rhs;
    explicit Tridiag(int m)
        : lo(static_cast<size_t>(m), 0.0),
          di(static_cast<size_t>(m), 0.0),
          up(static_cast<size_t>(m), 0.0),
          rhs(static_cast<size_t>(m), 0.0) {}
};

void add_diffusion(Tridiag& sys, const RadialGrid& g, const FaceGeometry& fg, double weight,
                   const std::vector<double>* face_coef) {
    const int m = g.cells();
    for (int j = 1; j < m; ++j) {
        const size_t sj = static_cast<size_t>(j);
        const double c = face_coef ? (*face_coef)[sj] : 1.0;
        const double k = weight * fg.conduct[sj] * c;
        sys.di[sj - 1] += k / g.measure(j - 1);
        sys.up[sj - 1] -= k / g.measure(j - 1);
        sys.di[sj] += k / g.measure(j);
        sys.lo[sj] -= k / g.measure(j);
    }
}

bool finite(const std::vector<double>& x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

// theta-weighted implicit step of x_t = Lx - x + src
bool parabolic_step(const RadialGrid& g, const FaceGeometry& fg, const std::vector<double>& x_old,
                    const std::vector<double>& src_new, const std::vector<double>& src_old,
                    double theta, double dt, std::vector<double>& out) {
    const int m = g.cells();
    Tridiag sys(m);
    for (int i = 0; i < m; ++i) sys.di[static_cast<size_t>(i)] = 1.0 / dt + theta;
    add_diffusion(sys, g, fg, theta, nullptr);
    std::vector<double> lap;
    if (theta < 1.0) lap = flux_divergence(g, fg, x_old, nullptr);
    for (int i = 0; i < m; ++i) {
        const size_t si = static_cast<size_t>(i);
        double r = x_old[si] / dt + theta * src_new[si] + (1.0 - theta) * src_old[si];
        if (theta < 1.0) r += (1.0 - theta) * (lap[si] - x_old[si]);
        sys.rhs[si] = r;
    }
    if (!solve_tridiagonal(sys.lo, sys.di, sys.up, sys.rhs)) return false;
    out = std::move(sys.rhs);
    return finite(out);
}

bool helmholtz_solve(const RadialGrid& g, const FaceGeometry& fg, const std::vector<double>& rhs,
                     std::vector<double>& out) {
    const int m = g.cells();
    Tridiag sys(m);
    for (int i = 0; i < m; ++i) sys.di[static_cast<size_t>(i)] = 1.0;
    add_diffusion(sys, g, fg, 1.0, nullptr);
    sys.rhs = rhs;
    if (!solve_tridiagonal(sys.lo, sys.di, sys.up, sys.rhs)) return false;
    out = std::move(sys.rhs);
    return finite(out);
}

// D at the faces, frozen at the given iterate
bool diffusion_face_coef(const RadialGrid& g, const DiffusionLaw& law, FaceAverage avg,
                         const std::vector<double>& u, std::vector<double>& coef,
                         std::string& detail) {
    const int m = g.cells();
    coef.assign(static_cast<size_t>(m) + 1, 0.0);
    try {
        for (int j = 1; j < m; ++j) {
            const size_t sj = static_cast<size_t>(j);
            if (avg == FaceAverage::ArithmeticU) {
                coef[sj] = eval_diffusion(law, 0.5 * (u[sj - 1] + u[sj]));
            } else {
                const double da = eval_diffusion(law, u[sj - 1]);
                const double db = eval_diffusion(law, u[sj]);
                coef[sj] = (da > 0.0 && db > 0.0) ? 2.0 * da * db / (da + db) : 0.0;
            }
        }
    } catch (const std::domain_error& e) {
        detail = e.what();
        return false;
    }
    return true;
}

// chi * A * u_upwind * dv/dr at the faces; dv is theta-blended between the
// new-guess and old drift gradients, u_upwind is picked by the sign of each
double chemotactic_flux(const FaceGeometry& fg, int j, double chi, double theta,
                        AdvectionScheme adv, const std::vector<double>& u_new_ref,
                        const std::vector<double>& u_old, const std::vector<double>& v_guess,
                        const std::vector<double>& v_old) {
    const size_t sj = static_cast<size_t>(j);
    const double dv_new = fg.conduct[sj] * (v_guess[sj] - v_guess[sj - 1]);  // A * dv/dr
    const double dv_old = fg.conduct[sj] * (v_old[sj] - v_old[sj - 1]);
    auto face_u = [&](const std::vector<double>& u, double dv) {
        if (adv == AdvectionScheme::Centered) return 0.5 * (u[sj - 1] + u[sj]);
        return dv > 0.0 ? u[sj - 1] : u[sj];
    };
    return chi * (theta * face_u(u_new_ref, dv_new) * dv_new +
                  (1.0 - theta) * face_u(u_old, dv_old) * dv_old);
}

struct FieldCheck {
    bool reject = false;
    int clipped = 0;
};

FieldCheck enforce_nonnegative(std::vector<double>& x) {
    FieldCheck fc;
    double mx = 0.0;
    for (double v : x) mx = std::max(mx, std::abs(v));
    const double tol = kNegativityTol * mx;
    for (double& v : x) {
        if (v < -tol) {
            fc.reject = true;
            return fc;
        }
        if (v < 0.0) {
            v = 0.0;
            ++fc.clipped;
        }
    }
    return fc;
}

}  // namespace

Field solve_helmholtz(const Field& rhs, int n) {
    (void)n;
    const auto& g = *rhs.grid;
    const FaceGeometry fg = face_geometry(g);
    std::vector<double> out;
    if (!helmholtz_solve(g, fg, rhs.values, out))
        throw std::runtime_error("solve_helmholtz: tridiagonal solve failed");
    return Field(rhs.grid, std::move(out));
}

Field solve_elliptic_v(const Field& u, const Field& w, int n) {
    if (u.grid != w.grid && u.grid->cells() != w.grid->cells())
        throw std::invalid_argument("solve_elliptic_v: fields must share a grid");
    Field rhs(u.grid, 0.0);
    for (int i = 0; i < u.size(); ++i) rhs[i] = u[i] * w[i];
    return solve_helmholtz(rhs, n);
}

StepResult step(const State& state, const ModelParams& params, const SourceFn& phi, double dt,
                const SchemeOptions& scheme, int* clip_events) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    scheme.validate();
    const auto& g = *state.u.grid;
    const FaceGeometry fg = face_geometry(g);
    const int m = g.cells();
    const double theta = scheme.theta;
    const double t_old = state.t;
    const double t_new = state.t + dt;

    const std::vector<double>& u_old = state.u.values;
    const std::vector<double>& v_old = state.v.values;
    const std::vector<double>& w_old = state.w.values;

    std::vector<double> phi_new(static_cast<size_t>(m)), phi_old(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        phi_new[static_cast<size_t>(i)] = phi(g.center(i), t_new);
        phi_old[static_cast<size_t>(i)] = phi(g.center(i), t_old);
    }

    // explicit half of the quasilinear diffusion, frozen at the old state
    std::vector<double> coef_old, lap_u_old;
    std::string detail;
    if (theta < 1.0) {
        if (!diffusion_face_coef(g, params.diffusion, scheme.face_average, u_old, coef_old,
                                 detail))
            return {StepStatus::LinearSolveFailure, {}, detail};
        lap_u_old = flux_divergence(g, fg, u_old, &coef_old);
    }

    std::vector<double> u_ref = u_old;  // fixed-point iterates
    std::vector<double> v_ref = v_old;
    std::vector<double> u_new, v_new, w_new;
    std::vector<double> coef_ref, v_drift, uw(static_cast<size_t>(m));

    for (int pass = 0; pass < scheme.picard_iters; ++pass) {
        // w step: sources are the v iterate (new) and v_old (old)
        if (!parabolic_step(g, fg, w_old, v_ref, v_old, theta, dt, w_new))
            return {StepStatus::LinearSolveFailure, {}, "w step"};

        // drift field seen by the chemotactic flux
        if (params.kappa == 0) {
            for (int i = 0; i < m; ++i) {
                const size_t si = static_cast<size_t>(i);
                uw[si] = u_ref[si] * w_new[si];
            }
            if (!helmholtz_solve(g, fg, uw, v_drift))
                return {StepStatus::LinearSolveFailure, {}, "elliptic v"};
        } else {
            v_drift = v_ref;
        }

        if (!diffusion_face_coef(g, params.diffusion, scheme.face_average, u_ref, coef_ref,
                                 detail))
            return {StepStatus::LinearSolveFailure, {}, detail};

        // u step: implicit diffusion + implicit sinks, explicit chemotaxis
        Tridiag sys(m);
        for (int i = 0; i < m; ++i) {
            const size_t si = static_cast<size_t>(i);
            sys.di[si] = 1.0 / dt + theta * (1.0 + w_new[si]);
        }
        add_diffusion(sys, g, fg, theta, &coef_ref);
        double chemo_lo = 0.0;
        for (int i = 0; i < m; ++i) {
            const size_t si = static_cast<size_t>(i);
            double chemo_hi = 0.0;
            if (i + 1 < m)
                chemo_hi = chemotactic_flux(fg, i + 1, params.chi, theta, scheme.advection,
                                            u_ref, u_old, v_drift, v_old);
            double r = u_old[si] / dt - (1.0 - theta) * (1.0 + w_old[si]) * u_old[si] +
                       theta * phi_new[si] + (1.0 - theta) * phi_old[si] -
                       (chemo_hi - chemo_lo) / g.measure(i);
            if (theta < 1.0) r += (1.0 - theta) * lap_u_old[si];
            sys.rhs[si] = r;
            chemo_lo = chemo_hi;
        }
        if (!solve_tridiagonal(sys.lo, sys.di, sys.up, sys.rhs) || !finite(sys.rhs))
            return {StepStatus::LinearSolveFailure, {}, "u step"};
        u_new = std::move(sys.rhs);

        // v step: kappa = 0 re-slaves v to the produced (u, w) so the
        // elliptic identity holds on every state; kappa = 1 uses the exact
        // discrete u*w sink of the u equation as its source
        if (params.kappa == 0) {
            for (int i = 0; i < m; ++i) {
                const size_t si = static_cast<size_t>(i);
                uw[si] = u_new[si] * w_new[si];
            }
            if (!helmholtz_solve(g, fg, uw, v_new))
                return {StepStatus::LinearSolveFailure, {}, "elliptic v"};
        } else {
            std::vector<double> src_new(static_cast<size_t>(m)), src_old(static_cast<size_t>(m));
            for (int i = 0; i < m; ++i) {
                const size_t si = static_cast<size_t>(i);
                src_new[si] = u_new[si] * w_new[si];
                src_old[si] = u_old[si] * w_old[si];
            }
            if (!parabolic_step(g, fg, v_old, src_new, src_old, theta, dt, v_new))
                return {StepStatus::LinearSolveFailure, {}, "v step"};
        }

        double du = 0.0, scale = 0.0;
        for (int i = 0; i < m; ++i) {
            const size_t si = static_cast<size_t>(i);
            du = std::max(du, std::abs(u_new[si] - u_ref[si]));
            scale = std::max(scale, std::abs(u_new[si]));
        }
        u_ref = u_new;
        v_ref = v_new;
        if (du <= scheme.picard_tol * std::max(scale, 1e-300)) break;
    }

    auto cu = enforce_nonnegative(u_new);
    auto cv = enforce_nonnegative(v_new);
    auto cw = enforce_nonnegative(w_new);
    if (cu.reject) return {StepStatus::NonPositive, {}, "u"};
    if (cv.reject) return {StepStatus::NonPositive, {}, "v"};
    if (cw.reject) return {StepStatus::NonPositive, {}, "w"};
    if (clip_events) *clip_events += cu.clipped + cv.clipped + cw.clipped;

    State out;
    out.t = t_new;
    out.u = Field(state.u.grid, std::move(u_new));
    out.v = Field(state.u.grid, std::move(v_new));
    out.w = Field(state.u.grid, std::move(w_new));
    return {StepStatus::Ok, std::move(out), {}};
}

State make_initial_state(const InitialData& data, const ModelParams& params) {
    State s;
    s.t = 0.0;
    s.u = data.u0;
    s.w = data.w0;
    if (params.kappa == 1) {
        if (!data.v0) throw std::invalid_argument("make_initial_state: kappa = 1 requires v0");
        s.v = *data.v0;
    } else {
        // kappa = 0 has no v initial condition; v is slaved to u0 * w0
        s.v = solve_elliptic_v(s.u, s.w, params.n);
    }
    return s;
}

namespace {

RunSample take_sample(const State& s, double dt, const ObserverConfig& obs) {
    RunSample r;
    r.t = s.t;
    r.dt = dt;
    r.u_l1 = lp_norm(s.u, 1.0);
    r.u_linf = lp_norm_inf(s.u);
    r.v_l1 = lp_norm(s.v, 1.0);
    r.v_linf = lp_norm_inf(s.v);
    r.w_linf = lp_norm_inf(s.w);
    r.w_min = min_value(s.w);
    Field uw(s.u.grid, 0.0);
    for (int i = 0; i < s.u.size(); ++i) uw[i] = s.u[i] * s.w[i];
    r.uw_l1 = integral(uw);
    if (obs.v_norm_p > 0.0) r.v_lp = lp_norm(s.v, obs.v_norm_p);
    if (!obs.probe_radii.empty()) {
        const CumulativeMass z = cumulative_mass(s.u);
        const int n = s.u.grid->dimension();
        for (double rp : obs.probe_radii) {
            double sp = 1.0;
            for (int k = 0; k < n; ++k) sp *= rp;
            r.z_probe.push_back(z.eval(sp));
            r.y_probe.push_back(radial_moment(z, rp, obs.moment_eta, n));
        }
    }
    return r;
}

}  // namespace

RunReport run(const State& initial, const ModelParams& params, const SourceFn& phi,
              const StepControl& control, const SchemeOptions& scheme, double t_end,
              const ObserverConfig& observers, const CancelToken* cancel) {
    params.validate();
    control.validate();
    scheme.validate();
    if (t_end < 0.0) throw std::invalid_argument("run: t_end must be nonnegative");

    RunReport report;
    report.t_end = t_end;
    report.u_cap_used = control.resolved_u_cap(lp_norm_inf(initial.u));

    State state = initial;
    double dt = std::clamp(control.dt_init, control.dt_min, control.dt_max);
    report.min_dt_seen = dt;
    report.samples.push_back(take_sample(state, 0.0, observers));

    std::vector<double> snaps = observers.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    size_t snap_idx = 0;
    while (snap_idx < snaps.size() && snaps[snap_idx] <= state.t) {
        report.snapshots.emplace_back(state.t, state);
        ++snap_idx;
    }

    double next_sample = observers.cadence > 0.0 ? observers.cadence : 0.0;
    const double t_eps = 1e-14 * std::max(1.0, t_end);

    while (state.t < t_end - t_eps) {
        if (cancel && cancel->cancelled()) {
            report.termination = Termination::Cancelled;
            break;
        }
        const double dt_try = std::min(dt, t_end - state.t);
        StepResult res = step(state, params, phi, dt_try, scheme, &report.clip_events);
        if (res.status == StepStatus::Ok) {
            state = std::move(res.state);
            ++report.steps_accepted;
            report.min_dt_seen = std::min(report.min_dt_seen, dt_try);
            report.dt_at_end = dt_try;

            while (snap_idx < snaps.size() && state.t >= snaps[snap_idx] - t_eps) {
                report.snapshots.emplace_back(state.t, state);
                ++snap_idx;
            }
            const bool sample_due =
                observers.cadence <= 0.0 || state.t >= next_sample - t_eps;
            if (sample_due) {
                report.samples.push_back(take_sample(state, dt_try, observers));
                if (observers.cadence > 0.0)
                    while (next_sample <= state.t + t_eps) next_sample += observers.cadence;
            }

            if (lp_norm_inf(state.u) + lp_norm_inf(state.w) > report.u_cap_used) {
                if (!sample_due) report.samples.push_back(take_sample(state, dt_try, observers));
                report.termination = Termination::UCapExceeded;
                break;
            }
            dt = std::min(dt_try / control.safety, control.dt_max);
            if (control.max_steps > 0 &&
                report.steps_accepted + report.steps_rejected >= control.max_steps) {
                report.termination = Termination::SolverFailure;
                break;
            }
        } else {
            ++report.steps_rejected;
            dt = 0.5 * dt_try;
            if (dt < control.dt_min) {
                report.termination = Termination::DtStalled;
                break;
            }
        }
    }

    if (report.samples.back().t < state.t - t_eps)
        report.samples.push_back(take_sample(state, report.dt_at_end, observers));
    report.final_state = std::move(state);
    return report;
}

}  // namespace cmn
