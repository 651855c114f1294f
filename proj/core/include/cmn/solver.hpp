#ifndef CMN_SOLVER_HPP
#define CMN_SOLVER_HPP

#include <atomic>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmn/grid.hpp"
#include "cmn/model.hpp"

namespace cmn {

/// Solver state: the time and the three radial fields.
struct State {
    double t = 0.0;
    Field u, v, w;
};

/// Source term phi(r, t).
using SourceFn = std::function<double(double, double)>;

inline SourceFn zero_source() {
    return [](double, double) { return 0.0; };
}
inline SourceFn constant_source(double value) {
    return [value](double, double) { return value; };
}

/// Time-step adaptation bounds and the blow-up declaration cap.
struct StepControl {
    double dt_init = 1e-4;
    double dt_min = 1e-12;
    double dt_max = 1e-2;
    double safety = 0.9;   // growth factor on success is 1/safety
    double u_cap = 0.0;    // threshold on ||u||_inf + ||w||_inf; <= 0 means 1e6 * ||u0||_inf
    long max_steps = 0;    // deterministic step budget; 0 = unlimited

    void validate() const;
    double resolved_u_cap(double u0_inf) const;
};

enum class AdvectionScheme { Upwind, Centered };
enum class FaceAverage { ArithmeticU, HarmonicD };

/// Discretization choices. theta = 1 is backward Euler (the robust default);
/// theta = 1/2 with a couple of fixed-point passes recovers second order in
/// time on smooth problems. The fixed-point loop also re-freezes the
/// quasilinear flux coefficient each pass.
struct SchemeOptions {
    double theta = 1.0;          // in [1/2, 1]
    int picard_iters = 1;        // >= 1
    double picard_tol = 1e-8;
    AdvectionScheme advection = AdvectionScheme::Upwind;
    FaceAverage face_average = FaceAverage::ArithmeticU;

    void validate() const;
};

/// Solves the discrete radial Helmholtz problem
///   -(r^(n-1) v_r)_r / r^(n-1) + v = u * w,  zero-flux ends,
/// in conservative face-area form via one tridiagonal solve. The discrete
/// identity  integral(v) == integral(u*w)  holds to solver roundoff because
/// the flux terms telescope.
Field solve_elliptic_v(const Field& u, const Field& w, int n);

/// Same operator applied to an arbitrary right-hand side field.
Field solve_helmholtz(const Field& rhs, int n);

enum class StepStatus { Ok, NonPositive, LinearSolveFailure };

struct StepResult {
    StepStatus status = StepStatus::Ok;
    State state;                 // valid when status == Ok
    std::string detail;          // which field failed, for diagnostics
};

/// Advances the state by dt:
///   w:  implicit (theta-weighted) radial heat step with reaction -w + v;
///   u:  finite-volume step; quasilinear diffusive flux implicit with the
///       coefficient frozen at the current fixed-point iterate, chemotactic
///       face flux chi * u_upwind * dv/dr explicit (first-order upwind in the
///       sign of v_r), sinks -u(1+w) implicit in denominator form;
///   v:  kappa = 0: elliptic solve slaved to (u, w) -- refreshed after the
///       u update so every produced state satisfies integral(v) ==
///       integral(u*w); kappa = 1: theta-weighted parabolic step whose
///       discrete u*w source matches the u-equation sink exactly, so the
///       combined (u + v) mass recursion stays below max{||u0+v0||_1,
///       phi_star * |Omega|}.
///
/// NonPositive is returned when a field undershoots beyond -1e-13 relative
/// tolerance; the caller halves dt. Undershoots within tolerance are clipped
/// to zero and counted.
StepResult step(const State& state, const ModelParams& params, const SourceFn& phi, double dt,
                const SchemeOptions& scheme, int* clip_events = nullptr);

/// Cooperative cancellation for run loops; checked once per step.
struct CancelToken {
    std::atomic<bool> flag{false};
    void cancel() { flag.store(true, std::memory_order_relaxed); }
    bool cancelled() const { return flag.load(std::memory_order_relaxed); }
};

/// One observer sample of the diagnostic time series.
struct RunSample {
    double t = 0.0;
    double dt = 0.0;          // last accepted dt when the sample was taken
    double u_l1 = 0.0;
    double u_linf = 0.0;
    double v_l1 = 0.0;
    double v_linf = 0.0;
    double w_linf = 0.0;
    double w_min = 0.0;
    double uw_l1 = 0.0;       // integral(u*w)
    double v_lp = 0.0;        // ||v||_p when requested, else 0
    std::vector<double> z_probe;  // z(r^n) at the probe radii
    std::vector<double> y_probe;  // moment y(r) at the probe radii
};

struct ObserverConfig {
    double cadence = 0.1;                 // sample spacing in t; <= 0 samples every step
    std::vector<double> snapshot_times;   // full-field snapshots
    std::vector<double> probe_radii;      // z/y probes for the moment diagnostics
    double moment_eta = 0.0;              // eta used for y_probe
    double v_norm_p = 0.0;                // record ||v||_p when > 0
};

enum class Termination { Completed, UCapExceeded, DtStalled, Cancelled, SolverFailure };

struct RunReport {
    std::vector<RunSample> samples;
    Termination termination = Termination::Completed;
    State final_state;
    std::vector<std::pair<double, State>> snapshots;
    double u_cap_used = 0.0;
    double t_end = 0.0;
    double min_dt_seen = 0.0;
    double dt_at_end = 0.0;
    long steps_accepted = 0;
    long steps_rejected = 0;
    int clip_events = 0;
};

/// Time-marches from `initial` to t_end with dt adaptation: halve on
/// NonPositive or linear-solve failure, grow by 1/safety on success up to
/// dt_max. Terminates at t_end (Completed), when ||u||_inf + ||w||_inf
/// exceeds the cap (UCapExceeded), or when dt underflows dt_min (DtStalled).
RunReport run(const State& initial, const ModelParams& params, const SourceFn& phi,
              const StepControl& control, const SchemeOptions& scheme, double t_end,
              const ObserverConfig& observers, const CancelToken* cancel = nullptr);

State make_initial_state(const InitialData& data, const ModelParams& params);

}  // namespace cmn

#endif
