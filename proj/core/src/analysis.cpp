#include "cmn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cmn {

MomentConfig MomentConfig::make(double eps, double eta, double lam, double m, int n,
                                std::optional<double> p) {
    MomentConfig cfg;
    cfg.eps = eps;
    cfg.eta = eta;
    cfg.lam = lam;
    cfg.p = p.value_or(1.0 / (1.0 - 2.0 / n + eps));
    cfg.xi = (1.0 - 2.0 / n - eta - lam) / (1.0 - m) + 1.0;
    cfg.validate(m, n);
    return cfg;
}

void MomentConfig::validate(double m, int n) const {
    if (n != 2 && n != 3) throw std::invalid_argument("MomentConfig: n must be 2 or 3");
    if (!(m > 0.0 && m < 1.0))
        throw std::invalid_argument("MomentConfig: requires exponent m in (0,1)");
    if (!(eps > 0.0 && eps < 2.0 / n))
        throw std::invalid_argument("MomentConfig: eps must lie in (0, 2/n)");
    const double eta_max = std::min(2.0 - 2.0 / n - m, 2.0 / n - eps);
    if (!(eta > 0.0 && eta < eta_max && eta < 1.0))
        throw std::invalid_argument("MomentConfig: eta must lie in (0, min{2-2/n-m, 2/n-eps})");
    if (!(lam > 0.0 && lam < 2.0 - m - 2.0 / n - eta))
        throw std::invalid_argument("MomentConfig: lam must lie in (0, 2-m-2/n-eta)");
    const double xi_check = (1.0 - 2.0 / n - eta - lam) / (1.0 - m) + 1.0;
    if (!(xi_check > 0.0) || std::abs(xi - xi_check) > 1e-12 * std::max(1.0, std::abs(xi)))
        throw std::invalid_argument("MomentConfig: xi inconsistent or nonpositive");
    if (!(p > 0.5 * n)) throw std::invalid_argument("MomentConfig: p must exceed n/2");
    if (n > 2 && !(p < static_cast<double>(n) / (n - 2)))
        throw std::invalid_argument("MomentConfig: p must be below n/(n-2)");
    if ((p - 1.0) / p < 2.0 / n - eps - 1e-12)
        throw std::invalid_argument("MomentConfig: need (p-1)/p >= 2/n - eps");
}

GammaConstants gamma_constants(double mu, double alpha, double beta, const MomentConfig& cfg,
                               double R, int n, std::span<const double> v_pnorm_history) {
    if (!(mu > 0.0) || !(alpha > 0.0) || beta < alpha)
        throw std::invalid_argument("gamma_constants: need mu > 0 and beta >= alpha > 0");
    if (v_pnorm_history.empty())
        throw std::invalid_argument("gamma_constants: empty ||v||_p history");
    GammaConstants g;
    g.gamma2 = alpha / 2.0;
    g.gamma3 = 2.0 * beta + 1.0;
    g.K_empirical = *std::max_element(v_pnorm_history.begin(), v_pnorm_history.end());
    const double B = unit_ball_volume(n);
    const double Rn = std::pow(R, n);
    g.gamma1 = g.K_empirical * std::pow(Rn, (cfg.p - 1.0) / cfg.p - (2.0 / n - cfg.eps)) /
               std::pow(B, 1.0 / cfg.p);
    return g;
}

WindowReport check_window(const State& state, double mu, double alpha, double beta, double p,
                          double K) {
    WindowReport w;
    w.u_mass = integral(state.u);
    w.w_min = min_value(state.w);
    w.w_max = lp_norm_inf(state.w);
    w.v_pnorm = lp_norm(state.v, p);
    w.mass_ok = w.u_mass >= 0.5 * mu && w.u_mass <= 2.0 * mu;
    w.w_lower_ok = w.w_min >= 0.5 * alpha;
    w.w_upper_ok = w.w_max <= 2.0 * beta;
    w.v_norm_ok = w.v_pnorm <= K;
    return w;
}

WindowReport check_window(const RunSample& sample, double mu, double alpha, double beta,
                          double K) {
    WindowReport w;
    w.u_mass = sample.u_l1;
    w.w_min = sample.w_min;
    w.w_max = sample.w_linf;
    w.v_pnorm = sample.v_lp;
    w.mass_ok = w.u_mass >= 0.5 * mu && w.u_mass <= 2.0 * mu;
    w.w_lower_ok = w.w_min >= 0.5 * alpha;
    w.w_upper_ok = w.w_max <= 2.0 * beta;
    w.v_norm_ok = w.v_pnorm <= K;
    return w;
}

double empirical_t_star(const std::vector<RunSample>& samples, double mu, double alpha,
                        double beta, double K) {
    const double cap = 1.0 / (4.0 * (2.0 * beta + 1.0));
    if (samples.empty()) return cap;
    for (const auto& s : samples) {
        if (!check_window(s, mu, alpha, beta, K).all()) return std::min(s.t, cap);
    }
    return std::min(samples.back().t, cap);
}

OdiTerms odi_terms(double y_a, double y_b, double dt, double z_rn, double r,
                   const MomentConfig& cfg, const GammaConstants& gam, int n, double m,
                   double chi, double K_D) {
    if (!(dt > 0.0)) throw std::invalid_argument("odi_terms: dt must be positive");
    if (!(r > 0.0)) throw std::invalid_argument("odi_terms: r must be positive");
    OdiTerms o;
    o.y = y_a;
    o.z_rn = z_rn;
    o.y_t = (y_b - y_a) / dt;
    const double eta = cfg.eta;
    o.quad = eta * gam.gamma2 * chi * (2.0 - eta) / (2.0 * std::pow(r, n * (2.0 - eta))) * y_a *
             y_a;
    o.linear = gam.gamma3 * y_a;
    o.drift = gam.gamma1 * chi * std::pow(r, n * (2.0 / n - cfg.eps - eta)) * z_rn;
    o.diffusion = n * n * K_D * (2.0 - 2.0 / n - eta) / m *
                  (std::pow(r, n * cfg.lam / m) * z_rn + std::pow(r, n * cfg.xi) / cfg.xi);
    o.rhs = o.quad - o.linear - o.drift - o.diffusion;
    o.residual = o.y_t - o.rhs;
    o.scale = std::max({std::abs(o.quad), std::abs(o.linear), std::abs(o.drift),
                        std::abs(o.diffusion)});
    return o;
}

OdiTerms odi_residual(const State& a, const State& b, double r, const MomentConfig& cfg,
                      const GammaConstants& gam, const ModelParams& params, double m_eff,
                      double K_D) {
    const int n = params.n;
    const CumulativeMass za = cumulative_mass(a.u);
    const double y_a = radial_moment(za, r, cfg.eta, n);
    const double y_b = radial_moment(b.u, r, cfg.eta);
    double rn = 1.0;
    for (int k = 0; k < n; ++k) rn *= r;
    return odi_terms(y_a, y_b, b.t - a.t, za.eval(rn), r, cfg, gam, n, m_eff, params.chi, K_D);
}

double hypothesis_c1(double mu, double eta, int n) {
    const double B = unit_ball_volume(n);
    return mu * (1.0 - std::pow(0.5, n * (1.0 - eta))) / (2.0 * (1.0 - eta) * B);
}

namespace {

HypothesisLine make_line(double lhs, double rhs, bool strict) {
    HypothesisLine l;
    l.lhs = lhs;
    l.rhs = rhs;
    l.margin = lhs / rhs - 1.0;
    l.pass = strict ? (l.margin > 0.0) : (l.margin >= 0.0);
    return l;
}

}  // namespace

HypothesisReport check_blowup_hypotheses(double r_star, double mu, double alpha, double beta,
                                         const MomentConfig& cfg, const GammaConstants& gam,
                                         int n, double m, double chi, double K_D,
                                         double T_star) {
    if (!(r_star > 0.0))
        throw std::invalid_argument("check_blowup_hypotheses: r_star must be positive");
    (void)alpha;
    (void)beta;
    const double eta = cfg.eta;
    const double B = unit_ball_volume(n);
    HypothesisReport rep;
    rep.r_star = r_star;
    rep.c1 = hypothesis_c1(mu, eta, n);
    const double c1 = rep.c1;
    const double r = r_star;

    const double lhs_small = eta * gam.gamma2 * (2.0 - eta) * c1 * c1 /
                             (32.0 * std::pow(r, n * eta));
    const double rhs_drift = 2.0 * mu * gam.gamma1 *
                             std::pow(r, n * (2.0 / n - cfg.eps - eta)) / B;
    rep.mass_vs_drift = make_line(lhs_small, rhs_drift, false);

    const double lhs_lin = eta * gam.gamma2 * chi * (2.0 - eta) * c1 /
                           (16.0 * std::pow(r, static_cast<double>(n)));
    rep.quad_vs_linear = make_line(lhs_lin, gam.gamma3, false);

    const double rhs_diff = n * n * K_D * (2.0 - 2.0 / n - eta) / m *
                            (2.0 * mu * std::pow(r, n * cfg.lam / m) / B +
                             std::pow(r, n * cfg.xi) / cfg.xi);
    rep.mass_vs_diffusion = make_line(lhs_small, rhs_diff, false);

    const double lhs_hor = eta * gam.gamma2 * chi * (2.0 - eta) /
                           (8.0 * std::pow(r, n * (2.0 - eta))) * T_star;
    const double rhs_hor = 2.0 / (c1 * std::pow(r, n * (1.0 - eta)));
    rep.horizon = make_line(lhs_hor, rhs_hor, true);

    rep.all_pass = rep.mass_vs_drift.pass && rep.quad_vs_linear.pass &&
                   rep.mass_vs_diffusion.pass && rep.horizon.pass;
    return rep;
}

double max_passing_rstar(double mu, double alpha, double beta, const MomentConfig& cfg,
                         const GammaConstants& gam, int n, double m, double chi, double K_D,
                         double T_star, double R) {
    auto pass = [&](double r) {
        return check_blowup_hypotheses(r, mu, alpha, beta, cfg, gam, n, m, chi, K_D, T_star)
            .all_pass;
    };
    if (pass(R)) return R;
    double hi = R, lo = 0.0;
    double r = R;
    for (int k = 0; k < 60; ++k) {
        r *= 0.5;
        if (pass(r)) {
            lo = r;
            break;
        }
        hi = r;
    }
    if (lo == 0.0) return 0.0;
    for (int k = 0; k < 40; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (pass(mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;  // conservative endpoint
}

double riccati_coefficient(const MomentConfig& cfg, double gamma2, double chi, int n, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("riccati_coefficient: r must be positive");
    const double eta = cfg.eta;
    return eta * gamma2 * chi * (2.0 - eta) / (8.0 * std::pow(r, n * (2.0 - eta)));
}

double riccati_blowup_time(double y0, double c) {
    if (!(y0 > 0.0) || !(c > 0.0))
        throw std::invalid_argument("riccati_blowup_time: need y0 > 0 and c > 0");
    return 1.0 / (c * y0);
}

std::optional<double> extrapolate_supnorm(std::span<const std::pair<double, double>> series,
                                          int tail) {
    if (tail < 2) tail = 2;
    if (static_cast<int>(series.size()) < 3) return std::nullopt;
    const size_t k = std::min<size_t>(static_cast<size_t>(tail), series.size());
    const auto window = series.subspan(series.size() - k, k);

    double prev = window.front().second;
    double lo = prev, hi = prev;
    for (const auto& [t, s] : window) {
        if (!(s > 0.0)) return std::nullopt;
        if (s < prev * (1.0 - 1e-12)) return std::nullopt;  // non-monotone
        prev = s;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    if (hi <= lo * (1.0 + 1e-9)) return std::nullopt;  // flat

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [t, s] : window) {
        const double y = 1.0 / s;
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
    }
    const double np = static_cast<double>(k);
    const double denom = np * sxx - sx * sx;
    if (denom == 0.0) return std::nullopt;
    const double slope = (np * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / np;
    if (!(slope < 0.0)) return std::nullopt;  // reciprocal must decay toward zero
    const double root = -intercept / slope;
    if (!(root > window.back().first)) return std::nullopt;
    return root;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Bounded: return "Bounded";
        case Verdict::BlowupSuspected: return "BlowupSuspected";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

Classification classify(const RunReport& report, const ModelParams& params) {
    (void)params;
    Classification c;
    for (const auto& s : report.samples) c.sup_u_inf = std::max(c.sup_u_inf, s.u_linf);

    std::vector<std::pair<double, double>> series;
    series.reserve(report.samples.size());
    for (const auto& s : report.samples) series.emplace_back(s.t, s.u_linf);

    auto fmt = [](double v) {
        std::ostringstream os;
        os.precision(6);
        os << v;
        return os.str();
    };

    switch (report.termination) {
        case Termination::Completed: {
            const double t_split = 0.75 * report.t_end;
            double before = 0.0, after = 0.0;
            bool have_after = false;
            for (const auto& s : report.samples) {
                if (s.t <= t_split)
                    before = std::max(before, s.u_linf);
                else {
                    after = std::max(after, s.u_linf);
                    have_after = true;
                }
            }
            if (!have_after || after <= 2.0 * before) {
                c.verdict = Verdict::Bounded;
            } else {
                c.verdict = Verdict::Inconclusive;
                c.reason = "reached t_end with sup norm still growing (last-quarter max " +
                           fmt(after) + " > 2 x " + fmt(before) + ")";
            }
            break;
        }
        case Termination::UCapExceeded: {
            c.verdict = Verdict::BlowupSuspected;
            c.t_detect = report.samples.back().t;
            const double u0 = report.samples.front().u_linf;
            c.evidence.push_back("sup-norm cap exceeded: ||u||inf + ||w||inf > " +
                                 fmt(report.u_cap_used));
            if (u0 > 0.0)
                c.evidence.push_back("||u||inf growth factor " + fmt(c.sup_u_inf / u0));
            c.evidence.push_back("dt at detection " + fmt(report.dt_at_end) + ", min dt " +
                                 fmt(report.min_dt_seen));
            c.t_estimate = extrapolate_supnorm(series);
            break;
        }
        case Termination::DtStalled: {
            c.t_estimate = extrapolate_supnorm(series);
            if (c.t_estimate) {
                c.verdict = Verdict::BlowupSuspected;
                c.t_detect = report.samples.back().t;
                c.evidence.push_back("dt collapsed below dt_min");
                c.evidence.push_back("reciprocal sup-norm fit diverges at t ~ " +
                                     fmt(*c.t_estimate));
            } else {
                c.verdict = Verdict::Inconclusive;
                c.reason = "dt stalled without a diverging sup-norm trend";
            }
            break;
        }
        case Termination::Cancelled:
            c.verdict = Verdict::Inconclusive;
            c.reason = "run cancelled";
            break;
        case Termination::SolverFailure:
            c.verdict = Verdict::Inconclusive;
            c.reason = "step budget exhausted or unrecoverable solver failure";
            break;
    }
    return c;
}

}  // namespace cmn
