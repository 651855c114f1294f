#include "cmn/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cmn {

void DiffusionLaw::validate() const {
    if (kind == DiffusionKind::PurePower && coeff <= 0.0)
        throw std::invalid_argument("DiffusionLaw: pure-power coefficient must be positive");
}

double eval_diffusion(const DiffusionLaw& law, double u) {
    if (u < 0.0) throw std::invalid_argument("eval_diffusion: u must be nonnegative");
    switch (law.kind) {
        case DiffusionKind::Prototype:
            return std::pow(1.0 + u, law.m - 1.0);
        case DiffusionKind::PurePower:
            if (u == 0.0) {
                if (law.m < 1.0)
                    throw std::domain_error(
                        "eval_diffusion: pure-power law with m < 1 is singular at u = 0");
                if (law.m == 1.0) return law.coeff;
                return 0.0;
            }
            return law.coeff * std::pow(u, law.m - 1.0);
    }
    throw std::logic_error("eval_diffusion: unknown law kind");
}

double power_upper_bound(const DiffusionLaw& law) {
    if (law.m >= 1.0)
        throw std::invalid_argument("power_upper_bound: requires exponent m < 1");
    switch (law.kind) {
        case DiffusionKind::Prototype:
            // (1+u)^(m-1) <= u^(m-1) for m < 1
            return 1.0;
        case DiffusionKind::PurePower:
            return law.coeff;
    }
    throw std::logic_error("power_upper_bound: unknown law kind");
}

ExponentBound blowup_exponent_bound(const DiffusionLaw& law, std::optional<double> mbar) {
    if (law.m >= 1.0)
        throw std::invalid_argument(
            "blowup_exponent_bound: diagnostics require an exponent m < 1");
    if (law.m > 0.0) return {law.m, power_upper_bound(law)};
    // m <= 0: re-bound D(h) <= K_eff h^(mbar-1) with a user-chosen mbar in (0,1)
    if (law.singular_at_zero())
        throw std::invalid_argument(
            "blowup_exponent_bound: pure-power law with m <= 0 is unbounded near u = 0 and "
            "cannot be re-bounded; use a prototype law or m in (0,1)");
    if (!mbar)
        throw std::invalid_argument(
            "blowup_exponent_bound: m <= 0 requires an explicit mbar in (0,1) "
            "(re-bounding exponent for the blow-up diagnostics)");
    if (!(*mbar > 0.0 && *mbar < 1.0))
        throw std::invalid_argument("blowup_exponent_bound: mbar must lie in (0,1)");
    // sup over [0,1] of the prototype law is D(0) = 1 for m <= 1
    const double sup01 = eval_diffusion(law, 0.0);
    const double k_raw = 1.0;  // prototype tail bound, see power_upper_bound
    return {*mbar, std::max(sup01, k_raw)};
}

void ModelParams::validate() const {
    if (n != 2 && n != 3) throw std::invalid_argument("ModelParams: n must be 2 or 3");
    if (kappa != 0 && kappa != 1) throw std::invalid_argument("ModelParams: kappa must be 0 or 1");
    if (!(chi > 0.0)) throw std::invalid_argument("ModelParams: chi must be positive");
    if (phi_star < 0.0) throw std::invalid_argument("ModelParams: phi_star must be nonnegative");
    if (!(R > 0.0)) throw std::invalid_argument("ModelParams: R must be positive");
    diffusion.validate();
}

double boundedness_threshold(int n, int kappa) {
    if (n != 2 && n != 3) throw std::invalid_argument("boundedness_threshold: n must be 2 or 3");
    if (kappa == 0) {
        if (n == 2) return 1.5;
        return 2.0 + 0.5 * n - 2.0 / n;
    }
    if (kappa == 1) return 1.0 + 0.5 * n - 2.0 / n;
    throw std::invalid_argument("boundedness_threshold: kappa must be 0 or 1");
}

RadialProfile uniform_profile(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }};
}

RadialProfile bump_profile(double rb) {
    if (!(rb > 0.0)) throw std::invalid_argument("bump_profile: support radius must be positive");
    auto value = [rb](double r) {
        if (r >= rb) return 0.0;
        const double x = r / rb;
        const double q = 1.0 - x * x;
        return q * q * q;
    };
    auto slope = [rb](double r) {
        if (r >= rb) return 0.0;
        const double x = r / rb;
        const double q = 1.0 - x * x;
        return -6.0 * x * q * q / rb;
    };
    return {value, slope};
}

RadialProfile gaussian_profile(double sigma, double R) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_profile: sigma must be positive");
    if (!(R > 0.0)) throw std::invalid_argument("gaussian_profile: R must be positive");
    // cutoff (1 - (r/R)^2)^3 kills the value and slope at r = R
    auto cut = [R](double r) {
        const double x = r / R;
        const double q = 1.0 - x * x;
        return q * q * q;
    };
    auto cut_slope = [R](double r) {
        const double x = r / R;
        const double q = 1.0 - x * x;
        return -6.0 * x * q * q / R;
    };
    auto value = [sigma, cut](double r) { return std::exp(-(r / sigma) * (r / sigma)) * cut(r); };
    auto slope = [sigma, cut, cut_slope](double r) {
        const double g = std::exp(-(r / sigma) * (r / sigma));
        return g * (cut_slope(r) - 2.0 * r / (sigma * sigma) * cut(r));
    };
    return {value, slope};
}

RadialProfile csv_profile(const std::vector<std::pair<double, double>>& samples, double R) {
    if (samples.size() < 2)
        throw std::invalid_argument("csv_profile: need at least two (r, value) samples");
    auto pts = samples;
    std::sort(pts.begin(), pts.end());
    for (size_t i = 1; i < pts.size(); ++i)
        if (!(pts[i].first > pts[i - 1].first))
            throw std::invalid_argument("csv_profile: radii must be strictly increasing");
    auto value = [pts, R](double r) {
        r = std::clamp(r, 0.0, R);
        if (r <= pts.front().first) return pts.front().second;  // flat extension
        if (r >= pts.back().first) return pts.back().second;
        auto it = std::upper_bound(pts.begin(), pts.end(), std::make_pair(r, 0.0),
                                   [](const auto& a, const auto& b) { return a.first < b.first; });
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double t = (r - lo.first) / (hi.first - lo.first);
        return lo.second + t * (hi.second - lo.second);
    };
    // ends are flattened, so the admissibility slope check sees zero there
    auto slope = [pts, value](double r) {
        if (r <= pts.front().first || r >= pts.back().first) return 0.0;
        const double h = 1e-7 * (pts.back().first - pts.front().first);
        return (value(r + h) - value(r - h)) / (2.0 * h);
    };
    return {value, slope};
}

namespace {

std::vector<std::pair<double, double>> load_csv_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profile CSV: " + path);
    std::vector<std::pair<double, double>> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double r, v;
        if (ls >> r >> v) pts.emplace_back(r, v);
    }
    if (pts.size() < 2) throw std::runtime_error("profile CSV has fewer than two rows: " + path);
    return pts;
}

Field discretize(const RadialProfile& p, const GridPtr& grid) {
    Field f(grid, 0.0);
    for (int i = 0; i < grid->cells(); ++i) f[i] = p.value(grid->center(i));
    return f;
}

void check_end_slopes(const RadialProfile& p, double R, const char* what) {
    const double scale = std::max({std::abs(p.value(0.0)), std::abs(p.value(R)), 1e-300});
    if (std::abs(p.slope(0.0)) > 1e-9 * scale / R * std::max(R, 1.0) + 1e-12 ||
        std::abs(p.slope(R)) > 1e-9 * scale / R * std::max(R, 1.0) + 1e-12) {
        throw std::invalid_argument(std::string(what) +
                                    ": profile must have zero slope at r = 0 and r = R");
    }
}

}  // namespace

void InitialData::validate() const {
    const double mass = integral(u0);
    if (std::abs(mass - mu) > 1e-10 * std::max(mu, 1.0))
        throw std::runtime_error("InitialData: discrete u0 mass deviates from mu");
    if (min_value(u0) < 0.0) throw std::runtime_error("InitialData: u0 must be nonnegative");
    for (double v : w0.values)
        if (v < alpha - 1e-12 * beta || v > beta + 1e-12 * beta)
            throw std::runtime_error("InitialData: w0 must lie in [alpha, beta]");
    if (v0 && min_value(*v0) < 0.0)
        throw std::runtime_error("InitialData: v0 must be nonnegative");
    if (r_star) {
        const double inner = ball_mass(u0, *r_star);
        if (inner < 0.5 * mu * (1.0 - 1e-10))
            throw std::runtime_error(
                "InitialData: ball of radius r_star must hold at least half the mass");
    }
}

InitialData build_initial_data(const ModelParams& params, const GridPtr& grid,
                               const InitialDataSpec& spec) {
    params.validate();
    if (!(spec.mu > 0.0)) throw std::invalid_argument("build_initial_data: mu must be positive");
    if (!(spec.alpha > 0.0) || spec.beta < spec.alpha)
        throw std::invalid_argument("build_initial_data: need beta >= alpha > 0");
    if (spec.r_star && !(*spec.r_star > 0.0 && *spec.r_star < params.R))
        throw std::invalid_argument("build_initial_data: r_star must lie in (0, R)");

    const double R = params.R;
    RadialProfile u0p;
    switch (spec.u0_kind) {
        case ProfileKind::Uniform:
            u0p = uniform_profile(1.0);
            break;
        case ProfileKind::Bump: {
            // default support: half the concentration radius, so the full
            // mass sits strictly inside the r_star ball
            double rb = spec.u0_width.value_or(spec.r_star ? 0.5 * *spec.r_star : 0.5 * R);
            if (!(rb > 0.0) || rb > R)
                throw std::invalid_argument(
                    "build_initial_data: bump support must lie in (0, R]");
            u0p = bump_profile(rb);
            break;
        }
        case ProfileKind::Gaussian: {
            double sigma = spec.u0_width.value_or(spec.r_star ? 0.25 * *spec.r_star : 0.25 * R);
            if (!(sigma > 0.0))
                throw std::invalid_argument("build_initial_data: gaussian width must be positive");
            u0p = gaussian_profile(sigma, R);
            break;
        }
        case ProfileKind::Csv: {
            if (!spec.u0_csv_path)
                throw std::invalid_argument("build_initial_data: csv profile needs a path");
            u0p = csv_profile(load_csv_samples(*spec.u0_csv_path), R);
            break;
        }
    }
    check_end_slopes(u0p, R, "build_initial_data(u0)");

    Field u0 = discretize(u0p, grid);
    for (double v : u0.values)
        if (v < 0.0) throw std::invalid_argument("build_initial_data: u0 profile must be >= 0");
    const double raw_mass = integral(u0);
    if (!(raw_mass > 0.0))
        throw std::invalid_argument("build_initial_data: u0 profile has zero discrete mass");
    const double scale = spec.mu / raw_mass;
    for (double& v : u0.values) v *= scale;

    const double w0v = spec.w0_value.value_or(0.5 * (spec.alpha + spec.beta));
    if (w0v < spec.alpha || w0v > spec.beta)
        throw std::invalid_argument("build_initial_data: w0 value must lie in [alpha, beta]");
    Field w0(grid, w0v);

    InitialData data{std::move(u0), std::move(w0), std::nullopt,
                     spec.mu,       spec.alpha,    spec.beta,
                     spec.r_star};
    if (params.kappa == 1) {
        if (!spec.v0_value)
            throw std::invalid_argument("build_initial_data: kappa = 1 requires v0");
        if (*spec.v0_value < 0.0)
            throw std::invalid_argument("build_initial_data: v0 must be nonnegative");
        data.v0 = Field(grid, *spec.v0_value);
    }
    data.validate();
    return data;
}

}  // namespace cmn
