#ifndef CMN_CONFIG_HPP
#define CMN_CONFIG_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmn/analysis.hpp"
#include "cmn/model.hpp"
#include "cmn/solver.hpp"

namespace cmn {

/// Configuration / validation failure; the message names the offending
/// section.key.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Radial source term phi(r, t) = amplitude * g(r) * h(t) with g a bump (or
/// 1) and h = 1 or exp(-t/tau). ||phi||_inf == amplitude, reported as
/// phi_star.
struct PhiSpec {
    enum class Kind { Zero, Constant, Bump };
    Kind kind = Kind::Zero;
    double value = 0.0;    // amplitude
    double center = 0.0;   // bump center radius
    double width = 0.0;    // bump radial width
    double tau = 0.0;      // temporal decay scale; 0 = constant in time

    double phi_star() const;
    SourceFn make() const;
};

struct GridSpec {
    int cells = 512;
    double stretch = 1.0;  // face-width growth factor away from the origin
};

struct AnalysisSpec {
    bool enabled = true;
    double eps = 0.1;
    double eta = 0.2;
    double lam = 0.1;
    double p = 0.0;            // 0 = smallest admissible
    double probe_radius = 0.0; // 0 = r_star when set, else R/4
    double odi_tol = 1e-2;     // residual tolerance relative to max RHS term
    std::optional<double> mbar;
};

struct OutputSpec {
    std::string directory = "out";
    double cadence = 0.1;
    std::vector<double> snapshot_times;
};

/// A full run description: model constants, source, initial data, grid,
/// time-step control, discretization options, the optional analysis block
/// and output policy. All embedded invariants are re-validated on load;
/// unknown sections or keys are rejected.
struct RunConfig {
    ModelParams model;
    PhiSpec phi;
    InitialDataSpec initial;
    GridSpec grid;
    StepControl control;
    SchemeOptions scheme;
    double t_end = 10.0;
    std::optional<AnalysisSpec> analysis;
    OutputSpec outputs;

    void validate() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical serialization: fixed section and key order, shortest
/// round-tripping number format. parse(serialize(cfg)) reproduces cfg.
std::string serialize_config(const RunConfig& cfg);

/// Round-trippable number formatting (%.17g trimmed).
std::string format_double(double v);

}  // namespace cmn

#endif
