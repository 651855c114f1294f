#ifndef CMN_VERIFY_HPP
#define CMN_VERIFY_HPP

#include <string>
#include <vector>

#include "cmn/config.hpp"
#include "cmn/driver.hpp"

namespace cmn {
namespace verify {

struct CheckLine {
    std::string name;
    double value = 0.0;   // measured quantity (margin, order, error, fraction)
    double bound = 0.0;   // the limit it is compared against
    bool pass = false;
    std::string note;
};

using Suite = std::vector<CheckLine>;

/// L-inf error of the radial Helmholtz solve against the manufactured
/// solution v(r) = 1 + cos(pi r / R).
double helmholtz_manufactured_error(int n, double R, int cells);

/// Observed orders log2(e_M / e_2M) across the given mesh ladder.
std::vector<double> helmholtz_orders(int n, double R, const std::vector<int>& meshes);

/// Base configuration of the smooth bounded-regime problem used for the
/// coupled-stepper convergence study.
RunConfig convergence_config(int cells);

/// Richardson order estimate of the coupled stepper from meshes
/// (M0, 2 M0, 4 M0); fine solutions are conservatively restricted onto the
/// coarse mesh and compared in L2.
double coupled_richardson_order(const RunConfig& base, int M0);

/// Spatially constant fully parabolic run against the adaptive
/// reference integration of the reaction system; returns the max relative
/// error over (u, v, w) at t_end.
double ode_oracle_rel_error(double t_end, double dt, int cells, double theta, int picard);

/// Worst relative slack of the L1 mass monitor over all samples:
///   kappa = 0: integral(u)  vs  max{integral(u0), phi_star |Omega|},
///   kappa = 1: integral(u) + integral(v)  vs  max{||u0 + v0||_1, phi_star |Omega|}.
/// Returns max over samples of (observed / bound - 1); the monitor passes
/// when this is <= 1e-6.
double mass_monitor_margin(const RunReport& report, const RunConfig& cfg);

/// Worst relative violation of integral(v) == integral(u w) over the samples
/// of a kappa = 0 run.
double elliptic_identity_margin(const RunReport& report);

Suite suite_mass();
Suite suite_elliptic();
Suite suite_ode_oracle();
Suite suite_convergence();
Suite suite_transform();
Suite suite_odi();
Suite suite_hypotheses();

/// Runs one named suite; throws ConfigError on an unknown name.
Suite run_suite(const std::string& name);

const std::vector<std::string>& suite_names();

}  // namespace verify
}  // namespace cmn

#endif
