#ifndef CMN_ANALYSIS_HPP
#define CMN_ANALYSIS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmn/model.hpp"
#include "cmn/solver.hpp"
#include "cmn/transform.hpp"

namespace cmn {

/// Free exponents of the moment diagnostics and their admissibility box:
///   eps in (0, 2/n),
///   0 < eta < min{2 - 2/n - m, 2/n - eps}  and  eta < 1,
///   0 < lam < 2 - m - 2/n - eta,
///   p in (n/2, n/(n-2)) with (p-1)/p >= 2/n - eps
/// (for n = 2 the upper bound on p is +infinity), and the derived
///   xi = (1 - 2/n - eta - lam) / (1 - m) + 1 > 0.
/// The exponent m here must lie in (0, 1); laws with m <= 0 go through
/// blowup_exponent_bound first.
struct MomentConfig {
    double eps;
    double eta;
    double lam;
    double p;
    double xi;

    /// Validates the box for the given (m, n) and derives xi. If p is not
    /// given, the smallest admissible value 1 / (1 - 2/n + eps) is used.
    static MomentConfig make(double eps, double eta, double lam, double m, int n,
                             std::optional<double> p = std::nullopt);
    void validate(double m, int n) const;
};

/// Constants of the transformed drift inequality. gamma2 and gamma3 are
/// exact rational functions of the w0 bounds; gamma1 carries the empirical
/// sup of ||v||_p over the trusted window (the analysis has no a-priori
/// value for it).
struct GammaConstants {
    double gamma1;
    double gamma2;      // alpha / 2
    double gamma3;      // 2 * beta + 1
    double K_empirical; // max sampled ||v||_p
};

GammaConstants gamma_constants(double mu, double alpha, double beta, const MomentConfig& cfg,
                               double R, int n, std::span<const double> v_pnorm_history);

/// Window inside which the moment inequality is trusted:
///   mass:    mu/2 <= integral(u) <= 2 mu,
///   w band:  min w >= alpha/2 and ||w||_inf <= 2 beta,
///   v norm:  ||v||_p <= K.
struct WindowReport {
    bool mass_ok = false;
    bool w_lower_ok = false;
    bool w_upper_ok = false;
    bool v_norm_ok = false;
    double u_mass = 0.0;
    double w_min = 0.0;
    double w_max = 0.0;
    double v_pnorm = 0.0;
    bool all() const { return mass_ok && w_lower_ok && w_upper_ok && v_norm_ok; }
};

WindowReport check_window(const State& state, double mu, double alpha, double beta, double p,
                          double K);
WindowReport check_window(const RunSample& sample, double mu, double alpha, double beta,
                          double K);

/// First sample time at which the window fails, capped by the analytic piece
/// 1 / (4 (2 beta + 1)). Returns the cap if the window never fails within
/// the sampled horizon.
double empirical_t_star(const std::vector<RunSample>& samples, double mu, double alpha,
                        double beta, double K);

/// Term-by-term evaluation of the moment inequality at radius r:
///   y_t >= quad - linear - drift - diffusion
/// with
///   quad      = eta gamma2 chi (2-eta) / (2 r^(n(2-eta))) * y^2,
///   linear    = gamma3 * y,
///   drift     = gamma1 chi r^(n(2/n - eps - eta)) * z(r^n),
///   diffusion = n^2 K_D (2 - 2/n - eta)/m * (r^(n lam / m) z(r^n) + r^(n xi)/xi).
/// residual = y_t - rhs; scale = max magnitude of the rhs terms (for
/// relative tolerances). y_t is the forward difference of y between the two
/// states and the right-hand side is evaluated at the earlier one.
struct OdiTerms {
    double y = 0.0;
    double z_rn = 0.0;
    double y_t = 0.0;
    double quad = 0.0;
    double linear = 0.0;
    double drift = 0.0;
    double diffusion = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    double scale = 0.0;
};

OdiTerms odi_terms(double y_a, double y_b, double dt, double z_rn, double r,
                   const MomentConfig& cfg, const GammaConstants& gam, int n, double m,
                   double chi, double K_D);

OdiTerms odi_residual(const State& a, const State& b, double r, const MomentConfig& cfg,
                      const GammaConstants& gam, const ModelParams& params, double m_eff,
                      double K_D);

/// C1 constant of the hypothesis system:
///   mu (1 - (1/2)^(n(1-eta))) / (2 (1-eta) |B1|).
double hypothesis_c1(double mu, double eta, int n);

/// The four smallness conditions on the concentration radius. Margins are
/// ratio-based (lhs/rhs - 1), which makes them scale-free and monotone
/// improving as r decreases.
struct HypothesisLine {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // lhs/rhs - 1
    bool pass = false;
};

struct HypothesisReport {
    double r_star = 0.0;
    double c1 = 0.0;
    HypothesisLine mass_vs_drift;      // moment quadratic term beats the drift term
    HypothesisLine quad_vs_linear;     // quadratic term beats the linear decay
    HypothesisLine mass_vs_diffusion;  // quadratic term beats the diffusion loss
    HypothesisLine horizon;            // Riccati horizon fits inside the window (strict)
    bool all_pass = false;
};

HypothesisReport check_blowup_hypotheses(double r_star, double mu, double alpha, double beta,
                                         const MomentConfig& cfg, const GammaConstants& gam,
                                         int n, double m, double chi, double K_D, double T_star);

/// Largest radius passing all four conditions, by bisection (40 iterations,
/// conservative lower endpoint). Returns 0 if none found down to R * 2^-60.
double max_passing_rstar(double mu, double alpha, double beta, const MomentConfig& cfg,
                         const GammaConstants& gam, int n, double m, double chi, double K_D,
                         double T_star, double R);

/// Coefficient of the Riccati bound y' >= c y^2 at radius r:
///   c = eta gamma2 chi (2 - eta) / (8 r^(n(2-eta))).
double riccati_coefficient(const MomentConfig& cfg, double gamma2, double chi, int n, double r);

/// Blow-up horizon of y' >= c y^2 from level y0: T <= 1 / (c y0).
double riccati_blowup_time(double y0, double c);

/// Least-squares fit of 1/||u||_inf against t on the last `tail` samples;
/// the root of the fitted line is the empirical blow-up time. No estimate
/// when the series is too short, flat or not growing.
std::optional<double> extrapolate_supnorm(std::span<const std::pair<double, double>> series,
                                          int tail = 10);

enum class Verdict { Bounded, BlowupSuspected, Inconclusive };

struct Classification {
    Verdict verdict = Verdict::Inconclusive;
    double sup_u_inf = 0.0;
    std::optional<double> t_detect;
    std::optional<double> t_estimate;
    std::vector<std::string> evidence;  // nonempty for BlowupSuspected
    std::string reason;                 // for Inconclusive
};

/// Bounded: the run reached t_end and the sup-norm series is non-divergent
/// (last-quarter max <= 2x the max before it). BlowupSuspected: the cap was
/// hit, or dt stalled while the reciprocal sup-norm fit diverges. Otherwise
/// Inconclusive.
Classification classify(const RunReport& report, const ModelParams& params);

const char* to_string(Verdict v);

}  // namespace cmn

#endif
