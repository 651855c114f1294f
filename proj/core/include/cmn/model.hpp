#ifndef CMN_MODEL_HPP
#define CMN_MODEL_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cmn/grid.hpp"

namespace cmn {

enum class DiffusionKind { Prototype, PurePower };

/// Density-dependent diffusion coefficient.
///
/// Prototype: D(u) = (1 + u)^(m-1), positive and C^2 on [0, inf) for any m.
/// PurePower: D(u) = coeff * u^(m-1); degenerate at u = 0 when m > 1 and
/// singular there when m < 1 (evaluation at u = 0 is then an error).
struct DiffusionLaw {
    DiffusionKind kind = DiffusionKind::Prototype;
    double m = 1.0;
    double coeff = 1.0;  // PurePower only

    static DiffusionLaw prototype(double m) { return {DiffusionKind::Prototype, m, 1.0}; }
    static DiffusionLaw pure_power(double m, double coeff) {
        return {DiffusionKind::PurePower, m, coeff};
    }

    bool degenerate_at_zero() const { return kind == DiffusionKind::PurePower && m > 1.0; }
    bool singular_at_zero() const { return kind == DiffusionKind::PurePower && m < 1.0; }
    void validate() const;
};

/// D(u) for u >= 0. Throws on the PurePower singular case at u = 0.
double eval_diffusion(const DiffusionLaw& law, double u);

/// Smallest constant K such that D(h) <= K * h^(m-1) for all h >= 0, valid
/// for laws with exponent m < 1 (Prototype gives K = 1, PurePower gives
/// coeff). Exponents outside (0, 1) need the re-bounding in
/// blowup_exponent_bound below.
double power_upper_bound(const DiffusionLaw& law);

/// (m_eff, K_eff) such that D(h) <= K_eff * h^(m_eff - 1) with m_eff in
/// (0,1), as required by the blow-up diagnostics. For m in (0,1) this is
/// (m, power bound). For m <= 0 a user-chosen mbar in (0,1) is required and
/// K_eff = max{sup_{[0,1]} D, K}; that sup is finite only for bounded laws,
/// so singular PurePower laws are rejected.
struct ExponentBound {
    double m_eff;
    double K_eff;
};
ExponentBound blowup_exponent_bound(const DiffusionLaw& law, std::optional<double> mbar);

/// Model constants of the radial system: dimension, coupling mode, the
/// chemotactic sensitivity, the diffusion law, the source sup bound and the
/// ball radius.
struct ModelParams {
    int n = 2;          // spatial dimension, 2 or 3
    int kappa = 0;      // 0: elliptic v; 1: parabolic v
    double chi = 1.0;   // chemosensitivity, > 0
    DiffusionLaw diffusion;
    double phi_star = 0.0;  // sup bound of the source, >= 0
    double R = 1.0;         // ball radius, > 0

    void validate() const;
    double domain_volume() const { return unit_ball_volume(n) * std::pow(R, n); }
};

/// Sufficient exponent threshold above which all solutions are bounded:
/// kappa = 0: 2 + n/2 - 2/n for n >= 3, 3/2 for n = 2;
/// kappa = 1: 1 + n/2 - 2/n.
double boundedness_threshold(int n, int kappa);

enum class ProfileKind { Uniform, Bump, Gaussian, Csv };

/// Radial profile with an analytic derivative, used to build and to
/// re-validate initial data (the zero-slope end conditions are checked on
/// the formula, not on grid differences).
struct RadialProfile {
    std::function<double(double)> value;
    std::function<double(double)> slope;
};

RadialProfile uniform_profile(double c);
/// C^2 compactly supported bump (1 - (r/r_b)^2)^3 on [0, r_b], amplitude 1.
RadialProfile bump_profile(double support_radius);
/// exp(-(r/sigma)^2) times a C^2 cutoff vanishing at R with zero slope.
RadialProfile gaussian_profile(double sigma, double R);
/// Piecewise-linear interpolant of (r, value) samples with flattened ends.
RadialProfile csv_profile(const std::vector<std::pair<double, double>>& samples, double R);

/// What build_initial_data should produce.
struct InitialDataSpec {
    double mu = 1.0;        // total u mass, > 0
    double alpha = 1.0;     // lower w0 bound, > 0
    double beta = 1.0;      // upper w0 bound, >= alpha
    std::optional<double> r_star;  // concentration radius in (0, R)
    ProfileKind u0_kind = ProfileKind::Uniform;
    std::optional<double> u0_width;   // bump support / gaussian sigma; default from r_star or R
    std::optional<double> w0_value;   // default (alpha+beta)/2
    std::optional<double> v0_value;   // required when kappa = 1
    std::optional<std::string> u0_csv_path;
};

/// Discretized admissible initial data.
struct InitialData {
    Field u0;
    Field w0;
    std::optional<Field> v0;  // present iff kappa = 1
    double mu;
    double alpha;
    double beta;
    std::optional<double> r_star;

    /// Re-checks mass (1e-10 relative), w0 bounds, nonnegativity and, when
    /// r_star is set, the half-mass concentration condition. Throws on
    /// violation.
    void validate() const;
};

/// Builds profiles satisfying the admissibility conditions and renormalizes
/// u0 so its *discrete* integral equals mu exactly.
InitialData build_initial_data(const ModelParams& params, const GridPtr& grid,
                               const InitialDataSpec& spec);

}  // namespace cmn

#endif
