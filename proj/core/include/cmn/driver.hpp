#ifndef CMN_DRIVER_HPP
#define CMN_DRIVER_HPP

#include <optional>
#include <string>
#include <vector>

#include "cmn/analysis.hpp"
#include "cmn/config.hpp"
#include "cmn/solver.hpp"

namespace cmn {

/// Everything needed to launch a configured run.
struct PreparedRun {
    GridPtr grid;
    InitialData initial;
    State state;
    SourceFn phi;
    ObserverConfig observers;
    double p_norm = 0.0;        // resolved ||v||_p exponent
    double probe_radius = 0.0;  // resolved moment probe
};

PreparedRun prepare_run(const RunConfig& cfg);

/// Moment-diagnostic summary attached to a run when the analysis block is
/// enabled and the diffusion exponent admits it (m_eff in (0,1)).
struct MomentDiagnostics {
    MomentConfig cfg;
    GammaConstants gammas;
    double m_eff = 0.0;
    double K_D = 0.0;
    double t_star_empirical = 0.0;
    double probe_radius = 0.0;
    HypothesisReport hypotheses;   // at the probe radius
    double max_rstar = 0.0;        // bisection result
    double riccati_c = 0.0;        // at the probe radius
    double riccati_bound = 0.0;    // 1 / (c * y0) from the initial moment
    int odi_points = 0;            // consecutive-sample pairs inside the window
    int odi_violations = 0;        // residual < -tol * scale among those
    double odi_worst = 0.0;        // most negative residual / scale seen
    std::vector<OdiTerms> odi_series;
    std::vector<double> odi_times;
    std::vector<bool> odi_in_window;
};

struct RunOutcome {
    RunConfig config;
    RunReport report;
    Classification classification;
    std::optional<MomentDiagnostics> moments;
};

RunOutcome execute_run(const RunConfig& cfg, const CancelToken* cancel = nullptr);

/// Exit-code contract: Bounded -> 0, BlowupSuspected -> 2, Inconclusive -> 3.
int exit_code(Verdict v);

void write_timeseries_csv(const std::string& path, const RunReport& report, double probe_radius);
void write_snapshot_csv(const std::string& path, const State& state);
/// Single field as (r_center, value) rows.
void write_field_csv(const std::string& path, const Field& field);
void write_odi_csv(const std::string& path, const MomentDiagnostics& md);
void write_summary_json(const std::string& path, const RunOutcome& outcome);

/// simulate: run one configuration, emitting timeseries.csv, snapshots and
/// summary.json under out_dir. Returns the exit code (1 on error).
int cmd_simulate(const std::string& config_path, const std::string& out_dir);

struct SweepAxis {
    std::string name;  // one of: m, chi, mu, alpha, beta, phi_value, u0_width, r_star
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;

    int count() const;
    double value(int i) const;
};

/// "name=start:stop:step"
SweepAxis parse_axis(const std::string& text);

struct SweepSpec {
    std::vector<SweepAxis> axes;
    int replicates = 1;
    int parallelism = 0;  // 0 = hardware width
};

struct SweepRow {
    long cell = 0;
    int replicate = 0;
    std::vector<double> values;  // one per axis
    std::string verdict;
    std::string termination;
    double t_final = 0.0;
    double sup_u_inf = 0.0;
    std::optional<double> t_detect;
    std::optional<double> t_estimate;
    double growth = 0.0;  // sup ||u||inf over ||u0||inf
    std::string regime_label;
    std::string error;
};

/// Runs the Cartesian product of the axes over copies of the base
/// configuration. Cells execute in parallel but rows come back in
/// deterministic lexicographic order; per-cell failures are recorded in the
/// row and do not stop the sweep.
std::vector<SweepRow> run_sweep(const RunConfig& base, const SweepSpec& spec,
                                const CancelToken* cancel = nullptr);

void write_phase_csv(const std::string& path, const SweepSpec& spec,
                     const std::vector<SweepRow>& rows);

int cmd_sweep(const std::string& config_path, const SweepSpec& spec,
              const std::string& out_dir);

/// Regime label from the boundedness threshold and the blow-up band.
std::string regime_label(double m, int n, int kappa);

/// verify: named invariant suites (mass, elliptic, ode-oracle, convergence,
/// transform, odi, hypotheses); prints one margin line per check.
int cmd_verify(const std::string& suite);

}  // namespace cmn

#endif
