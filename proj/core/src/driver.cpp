#include "cmn/driver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace fs = std::filesystem;

namespace cmn {

PreparedRun prepare_run(const RunConfig& cfg) {
    cfg.validate();
    PreparedRun pr;
    pr.grid = cfg.grid.stretch > 1.0
                  ? RadialGrid::stretched(cfg.model.n, cfg.model.R, cfg.grid.cells,
                                          cfg.grid.stretch)
                  : RadialGrid::uniform(cfg.model.n, cfg.model.R, cfg.grid.cells);
    pr.initial = build_initial_data(cfg.model, pr.grid, cfg.initial);
    pr.state = make_initial_state(pr.initial, cfg.model);
    pr.phi = cfg.phi.make();

    const double eps = cfg.analysis ? cfg.analysis->eps : 0.1;
    const double eta = cfg.analysis ? cfg.analysis->eta : 0.2;
    pr.p_norm = (cfg.analysis && cfg.analysis->p > 0.0)
                    ? cfg.analysis->p
                    : 1.0 / (1.0 - 2.0 / cfg.model.n + eps);
    pr.probe_radius = (cfg.analysis && cfg.analysis->probe_radius > 0.0)
                          ? cfg.analysis->probe_radius
                          : (cfg.initial.r_star ? *cfg.initial.r_star : 0.25 * cfg.model.R);

    pr.observers.cadence = cfg.outputs.cadence;
    pr.observers.snapshot_times = cfg.outputs.snapshot_times;
    if (cfg.analysis && cfg.analysis->enabled) {
        pr.observers.probe_radii = {pr.probe_radius};
        pr.observers.moment_eta = eta;
        pr.observers.v_norm_p = pr.p_norm;
    }
    return pr;
}

namespace {

MomentDiagnostics moment_diagnostics(const RunConfig& cfg, const PreparedRun& pr,
                                     const RunReport& report) {
    const AnalysisSpec& a = *cfg.analysis;
    const auto eb = blowup_exponent_bound(cfg.model.diffusion, a.mbar);
    MomentDiagnostics md;
    md.m_eff = eb.m_eff;
    md.K_D = eb.K_eff;
    md.probe_radius = pr.probe_radius;
    md.cfg = MomentConfig::make(a.eps, a.eta, a.lam, eb.m_eff, cfg.model.n,
                                a.p > 0.0 ? std::optional<double>(a.p) : std::nullopt);

    // window exit is decided by the mass / w-band conditions; the v-norm
    // condition is calibrated afterwards from the samples it admits
    const double cap = 1.0 / (4.0 * (2.0 * cfg.initial.beta + 1.0));
    double t_exit = std::min(report.samples.back().t, cap);
    for (const auto& s : report.samples) {
        const bool mass_ok = s.u_l1 >= 0.5 * cfg.initial.mu && s.u_l1 <= 2.0 * cfg.initial.mu;
        const bool w_ok = s.w_min >= 0.5 * cfg.initial.alpha &&
                          s.w_linf <= 2.0 * cfg.initial.beta;
        if (!(mass_ok && w_ok)) {
            t_exit = std::min(s.t, cap);
            break;
        }
    }
    md.t_star_empirical = t_exit;

    std::vector<double> vp;
    for (const auto& s : report.samples)
        if (s.t <= t_exit) vp.push_back(s.v_lp);
    if (vp.empty()) vp.push_back(report.samples.front().v_lp);
    md.gammas = gamma_constants(cfg.initial.mu, cfg.initial.alpha, cfg.initial.beta, md.cfg,
                                cfg.model.R, cfg.model.n, vp);

    md.hypotheses = check_blowup_hypotheses(md.probe_radius, cfg.initial.mu, cfg.initial.alpha,
                                            cfg.initial.beta, md.cfg, md.gammas, cfg.model.n,
                                            md.m_eff, cfg.model.chi, md.K_D,
                                            md.t_star_empirical);
    md.max_rstar = max_passing_rstar(cfg.initial.mu, cfg.initial.alpha, cfg.initial.beta,
                                     md.cfg, md.gammas, cfg.model.n, md.m_eff, cfg.model.chi,
                                     md.K_D, md.t_star_empirical, cfg.model.R);
    md.riccati_c = riccati_coefficient(md.cfg, md.gammas.gamma2, cfg.model.chi, cfg.model.n,
                                       md.probe_radius);
    const double y0 = report.samples.front().y_probe.empty()
                          ? 0.0
                          : report.samples.front().y_probe.front();
    md.riccati_bound = y0 > 0.0 ? riccati_blowup_time(y0, md.riccati_c) : 0.0;

    for (size_t i = 0; i + 1 < report.samples.size(); ++i) {
        const RunSample& sa = report.samples[i];
        const RunSample& sb = report.samples[i + 1];
        if (sa.y_probe.empty() || sb.y_probe.empty()) continue;
        const double dt = sb.t - sa.t;
        if (!(dt > 0.0)) continue;
        OdiTerms terms =
            odi_terms(sa.y_probe.front(), sb.y_probe.front(), dt, sa.z_probe.front(),
                      md.probe_radius, md.cfg, md.gammas, cfg.model.n, md.m_eff, cfg.model.chi,
                      md.K_D);
        const bool in_window =
            sa.t <= t_exit &&
            check_window(sa, cfg.initial.mu, cfg.initial.alpha, cfg.initial.beta,
                         md.gammas.K_empirical)
                .all();
        md.odi_series.push_back(terms);
        md.odi_times.push_back(sa.t);
        md.odi_in_window.push_back(in_window);
        if (in_window) {
            ++md.odi_points;
            if (terms.residual < -a.odi_tol * terms.scale) ++md.odi_violations;
            if (terms.scale > 0.0)
                md.odi_worst = std::min(md.odi_worst, terms.residual / terms.scale);
        }
    }
    return md;
}

}  // namespace

RunOutcome execute_run(const RunConfig& cfg, const CancelToken* cancel) {
    PreparedRun pr = prepare_run(cfg);
    RunOutcome out;
    out.config = cfg;
    out.report = run(pr.state, cfg.model, pr.phi, cfg.control, cfg.scheme, cfg.t_end,
                     pr.observers, cancel);
    out.classification = classify(out.report, cfg.model);
    if (cfg.analysis && cfg.analysis->enabled && cfg.model.diffusion.m < 1.0)
        out.moments = moment_diagnostics(cfg, pr, out.report);
    return out;
}

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::Bounded: return 0;
        case Verdict::BlowupSuspected: return 2;
        case Verdict::Inconclusive: return 3;
    }
    return 1;
}

namespace {

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::Completed: return "completed";
        case Termination::UCapExceeded: return "ucap_exceeded";
        case Termination::DtStalled: return "dt_stalled";
        case Termination::Cancelled: return "cancelled";
        case Termination::SolverFailure: return "solver_failure";
    }
    return "?";
}

std::string opt_str(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

}  // namespace

void write_timeseries_csv(const std::string& path, const RunReport& report,
                          double probe_radius) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const bool probes = !report.samples.empty() && !report.samples.front().z_probe.empty();
    out << "t,dt,u_l1,u_linf,v_l1,v_linf,w_linf,w_min,uw_l1,v_lp";
    if (probes) out << ",z_probe,y_probe";
    out << "\n";
    if (probes) out << "# probe radius r = " << format_double(probe_radius) << "\n";
    for (const auto& s : report.samples) {
        out << format_double(s.t) << ',' << format_double(s.dt) << ',' << format_double(s.u_l1)
            << ',' << format_double(s.u_linf) << ',' << format_double(s.v_l1) << ','
            << format_double(s.v_linf) << ',' << format_double(s.w_linf) << ','
            << format_double(s.w_min) << ',' << format_double(s.uw_l1) << ','
            << format_double(s.v_lp);
        if (probes)
            out << ',' << format_double(s.z_probe.front()) << ','
                << format_double(s.y_probe.front());
        out << "\n";
    }
}

void write_snapshot_csv(const std::string& path, const State& state) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "r,u,v,w\n";
    const auto& g = *state.u.grid;
    for (int i = 0; i < g.cells(); ++i)
        out << format_double(g.center(i)) << ',' << format_double(state.u[i]) << ','
            << format_double(state.v[i]) << ',' << format_double(state.w[i]) << "\n";
}

void write_field_csv(const std::string& path, const Field& field) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "r,value\n";
    for (int i = 0; i < field.size(); ++i)
        out << format_double(field.grid->center(i)) << ',' << format_double(field[i]) << "\n";
}

void write_odi_csv(const std::string& path, const MomentDiagnostics& md) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "t,in_window,y,z_rn,y_t,quad,linear,drift,diffusion,rhs,residual,scale\n";
    for (size_t i = 0; i < md.odi_series.size(); ++i) {
        const OdiTerms& o = md.odi_series[i];
        out << format_double(md.odi_times[i]) << ',' << (md.odi_in_window[i] ? 1 : 0) << ','
            << format_double(o.y) << ',' << format_double(o.z_rn) << ','
            << format_double(o.y_t) << ',' << format_double(o.quad) << ','
            << format_double(o.linear) << ',' << format_double(o.drift) << ','
            << format_double(o.diffusion) << ',' << format_double(o.rhs) << ','
            << format_double(o.residual) << ',' << format_double(o.scale) << "\n";
    }
}

namespace {

nlohmann::json field_json(const Field& f) {
    nlohmann::json j;
    j["r"] = f.grid->centers();
    j["values"] = f.values;
    return j;
}

nlohmann::json hypothesis_json(const HypothesisReport& h) {
    auto line = [](const HypothesisLine& l) {
        return nlohmann::json{
            {"lhs", l.lhs}, {"rhs", l.rhs}, {"margin", l.margin}, {"pass", l.pass}};
    };
    return nlohmann::json{{"r_star", h.r_star},
                          {"c1", h.c1},
                          {"mass_vs_drift", line(h.mass_vs_drift)},
                          {"quad_vs_linear", line(h.quad_vs_linear)},
                          {"mass_vs_diffusion", line(h.mass_vs_diffusion)},
                          {"horizon", line(h.horizon)},
                          {"all_pass", h.all_pass}};
}

}  // namespace

void write_summary_json(const std::string& path, const RunOutcome& outcome) {
    nlohmann::json j;
    j["schema"] = "cmnlab-summary/1";
    j["verdict"] = to_string(outcome.classification.verdict);
    j["sup_u_inf"] = outcome.classification.sup_u_inf;
    if (outcome.classification.t_detect) j["t_detect"] = *outcome.classification.t_detect;
    if (outcome.classification.t_estimate) j["t_estimate"] = *outcome.classification.t_estimate;
    j["evidence"] = outcome.classification.evidence;
    if (!outcome.classification.reason.empty()) j["reason"] = outcome.classification.reason;

    const RunReport& rep = outcome.report;
    j["termination"] = termination_name(rep.termination);
    j["t_final"] = rep.final_state.t;
    j["steps_accepted"] = rep.steps_accepted;
    j["steps_rejected"] = rep.steps_rejected;
    j["clip_events"] = rep.clip_events;
    j["min_dt"] = rep.min_dt_seen;
    j["u_cap_used"] = rep.u_cap_used;
    j["final"] = {{"u_l1", lp_norm(rep.final_state.u, 1.0)},
                  {"u_linf", lp_norm_inf(rep.final_state.u)},
                  {"v_linf", lp_norm_inf(rep.final_state.v)},
                  {"w_linf", lp_norm_inf(rep.final_state.w)}};
    j["final_state"] = {{"u", field_json(rep.final_state.u)},
                        {"v", field_json(rep.final_state.v)},
                        {"w", field_json(rep.final_state.w)}};

    if (outcome.moments) {
        const MomentDiagnostics& md = *outcome.moments;
        j["analysis"] = {
            {"m_eff", md.m_eff},
            {"K_D", md.K_D},
            {"eps", md.cfg.eps},
            {"eta", md.cfg.eta},
            {"lambda", md.cfg.lam},
            {"p", md.cfg.p},
            {"xi", md.cfg.xi},
            {"gamma1", md.gammas.gamma1},
            {"gamma2", md.gammas.gamma2},
            {"gamma3", md.gammas.gamma3},
            {"K_empirical", md.gammas.K_empirical},
            {"t_star_empirical", md.t_star_empirical},
            {"probe_radius", md.probe_radius},
            {"hypotheses", hypothesis_json(md.hypotheses)},
            {"max_passing_rstar", md.max_rstar},
            {"riccati_coefficient", md.riccati_c},
            {"riccati_bound", md.riccati_bound},
            {"odi_points", md.odi_points},
            {"odi_violations", md.odi_violations},
            {"odi_worst_residual_over_scale", md.odi_worst},
        };
    }

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    try {
        const RunConfig cfg = load_config(config_path);
        RunOutcome outcome = execute_run(cfg);

        fs::create_directories(out_dir);
        const PreparedRun pr = prepare_run(cfg);  // for the probe radius in the header
        write_timeseries_csv(out_dir + "/timeseries.csv", outcome.report, pr.probe_radius);
        if (!outcome.report.snapshots.empty()) {
            fs::create_directories(out_dir + "/snapshots");
            for (const auto& [t, st] : outcome.report.snapshots) {
                std::ostringstream name;
                name << out_dir << "/snapshots/state_t" << format_double(t) << ".csv";
                write_snapshot_csv(name.str(), st);
            }
        }
        write_snapshot_csv(out_dir + "/final_state.csv", outcome.report.final_state);
        if (outcome.moments) write_odi_csv(out_dir + "/odi.csv", *outcome.moments);
        write_summary_json(out_dir + "/summary.json", outcome);

        std::cout << "verdict: " << to_string(outcome.classification.verdict)
                  << "  (t_final = " << outcome.report.final_state.t
                  << ", sup ||u||_inf = " << outcome.classification.sup_u_inf << ")\n";
        return exit_code(outcome.classification.verdict);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int SweepAxis::count() const {
    if (!(step > 0.0)) return 1;
    return static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
}

double SweepAxis::value(int i) const { return start + i * step; }

SweepAxis parse_axis(const std::string& text) {
    const size_t eq = text.find('=');
    if (eq == std::string::npos)
        throw ConfigError("axis '" + text + "': expected name=start:stop:step");
    SweepAxis ax;
    ax.name = text.substr(0, eq);
    const std::string rest = text.substr(eq + 1);
    const size_t c1 = rest.find(':');
    const size_t c2 = rest.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    try {
        if (c1 == std::string::npos) {  // single value
            ax.start = ax.stop = std::stod(rest);
            ax.step = 0.0;
        } else if (c2 == std::string::npos) {
            throw std::invalid_argument("missing step");
        } else {
            ax.start = std::stod(rest.substr(0, c1));
            ax.stop = std::stod(rest.substr(c1 + 1, c2 - c1 - 1));
            ax.step = std::stod(rest.substr(c2 + 1));
        }
    } catch (const std::exception&) {
        throw ConfigError("axis '" + text + "': expected name=start:stop:step");
    }
    if (ax.count() < 1 || (ax.step <= 0.0 && ax.stop != ax.start))
        throw ConfigError("axis '" + text + "': empty range");
    return ax;
}

namespace {

void apply_axis(RunConfig& cfg, const std::string& name, double value) {
    if (name == "m")
        cfg.model.diffusion.m = value;
    else if (name == "chi")
        cfg.model.chi = value;
    else if (name == "mu")
        cfg.initial.mu = value;
    else if (name == "alpha")
        cfg.initial.alpha = value;
    else if (name == "beta")
        cfg.initial.beta = value;
    else if (name == "phi_value") {
        cfg.phi.value = value;
        cfg.model.phi_star = cfg.phi.phi_star();
    } else if (name == "u0_width")
        cfg.initial.u0_width = value;
    else if (name == "r_star")
        cfg.initial.r_star = value;
    else if (name == "cells")
        cfg.grid.cells = static_cast<int>(value);
    else
        throw ConfigError("unknown sweep axis '" + name +
                          "' (use m, chi, mu, alpha, beta, phi_value, u0_width, r_star, cells)");
}

}  // namespace

std::string regime_label(double m, int n, int kappa) {
    const double thr = boundedness_threshold(n, kappa);
    const double tol = 1e-9;
    if (kappa == 0) {
        if (m < 1.0 - tol) return "blowup region";
        if (m <= 1.0 + tol) return "critical m=1";
        if (m <= thr + tol) return "open regime";
        return "bounded region";
    }
    if (m > thr + tol) return "bounded region";
    return "open regime";
}

std::vector<SweepRow> run_sweep(const RunConfig& base, const SweepSpec& spec,
                                const CancelToken* cancel) {
    if (spec.axes.empty()) throw ConfigError("sweep needs at least one axis");
    if (spec.replicates < 1) throw ConfigError("sweep replicates must be >= 1");

    long cells = 1;
    for (const auto& ax : spec.axes) cells *= ax.count();
    const long total = cells * spec.replicates;
    std::vector<SweepRow> rows(static_cast<size_t>(total));

    auto run_one = [&](long job) {
        const long cell = job / spec.replicates;
        const int rep = static_cast<int>(job % spec.replicates);
        SweepRow row;
        row.cell = cell;
        row.replicate = rep;

        RunConfig cfg = base;
        long rem = cell;
        for (size_t a = spec.axes.size(); a-- > 0;) {
            const auto& ax = spec.axes[a];
            const int idx = static_cast<int>(rem % ax.count());
            rem /= ax.count();
            row.values.insert(row.values.begin(), ax.value(idx));
        }
        for (size_t a = 0; a < spec.axes.size(); ++a)
            apply_axis(cfg, spec.axes[a].name, row.values[a]);

        row.regime_label =
            regime_label(cfg.model.diffusion.m, cfg.model.n, cfg.model.kappa);
        try {
            cfg.validate();
            RunOutcome outcome = execute_run(cfg, cancel);
            row.verdict = to_string(outcome.classification.verdict);
            row.termination = termination_name(outcome.report.termination);
            row.t_final = outcome.report.final_state.t;
            row.sup_u_inf = outcome.classification.sup_u_inf;
            row.t_detect = outcome.classification.t_detect;
            row.t_estimate = outcome.classification.t_estimate;
            const double u0 = outcome.report.samples.front().u_linf;
            row.growth = u0 > 0.0 ? row.sup_u_inf / u0 : 0.0;
        } catch (const std::exception& e) {
            row.verdict = "Error";
            row.error = e.what();
        }
        rows[static_cast<size_t>(job)] = std::move(row);
    };

    unsigned width = spec.parallelism > 0 ? static_cast<unsigned>(spec.parallelism)
                                          : std::max(1u, std::thread::hardware_concurrency());
    width = std::min<unsigned>(width, static_cast<unsigned>(total));
    if (width <= 1) {
        for (long j = 0; j < total; ++j) run_one(j);
    } else {
        std::atomic<long> next{0};
        std::vector<std::thread> pool;
        pool.reserve(width);
        for (unsigned t = 0; t < width; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    const long j = next.fetch_add(1);
                    if (j >= total) return;
                    run_one(j);
                }
            });
        for (auto& th : pool) th.join();
    }
    return rows;
}

void write_phase_csv(const std::string& path, const SweepSpec& spec,
                     const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "cell,replicate";
    for (const auto& ax : spec.axes) out << ',' << ax.name;
    out << ",verdict,termination,t_final,sup_u_inf,t_detect,t_estimate,growth,regime_label,"
           "error\n";
    for (const auto& r : rows) {
        out << r.cell << ',' << r.replicate;
        for (double v : r.values) out << ',' << format_double(v);
        out << ',' << r.verdict << ',' << r.termination << ',' << format_double(r.t_final)
            << ',' << format_double(r.sup_u_inf) << ',' << opt_str(r.t_detect) << ','
            << opt_str(r.t_estimate) << ',' << format_double(r.growth) << ',' << r.regime_label
            << ',' << r.error << "\n";
    }
}

int cmd_sweep(const std::string& config_path, const SweepSpec& spec,
              const std::string& out_dir) {
    try {
        const RunConfig base = load_config(config_path);
        const std::vector<SweepRow> rows = run_sweep(base, spec);
        fs::create_directories(out_dir);
        write_phase_csv(out_dir + "/phase.csv", spec, rows);
        long failures = 0;
        for (const auto& r : rows)
            if (!r.error.empty()) ++failures;
        std::cout << rows.size() << " cells -> " << out_dir << "/phase.csv";
        if (failures) std::cout << "  (" << failures << " failed cells recorded)";
        std::cout << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cmn
