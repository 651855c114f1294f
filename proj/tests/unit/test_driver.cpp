#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cmn/driver.hpp"
#include "cmn/verify.hpp"

using namespace cmn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string write_temp_config(const std::string& name, const std::string& body) {
    const fs::path dir = fs::temp_directory_path() / "cmn_driver_tests";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << body;
    return p.string();
}

const char* kEquilibrium = R"(
[model]
n = 2
kappa = 0
chi = 1
m = 2

[phi]
kind = constant
value = 0.7

[initial]
mu = 2.199114857512855
alpha = 1e-6
beta = 1e-6
u0_kind = uniform

[grid]
cells = 48

[control]
t_end = 1
)";

const char* kCollapse = R"(
[model]
n = 2
kappa = 0
chi = 20
m = 0.5

[initial]
mu = 1
alpha = 1
beta = 1
r_star = 0.5
u0_kind = bump

[grid]
cells = 128

[control]
t_end = 20
u_cap = 1000

[outputs]
cadence = 0.01
)";

}  // namespace

TEST_SUITE("driver") {

TEST_CASE("simulate writes artifacts and reports the exit code") {
    const std::string cfg = write_temp_config("eq.cfg", kEquilibrium);
    const fs::path out = fs::temp_directory_path() / "cmn_driver_tests" / "eq_out";
    fs::remove_all(out);
    CHECK(cmd_simulate(cfg, out.string()) == 0);
    CHECK(fs::exists(out / "timeseries.csv"));
    CHECK(fs::exists(out / "final_state.csv"));
    const nlohmann::json summary = nlohmann::json::parse(slurp((out / "summary.json").string()));
    CHECK(summary["schema"] == "cmnlab-summary/1");
    CHECK(summary["verdict"] == "Bounded");
    CHECK(summary["termination"] == "completed");
}

TEST_CASE("simulate flags the collapsing cell with exit code 2") {
    const std::string cfg = write_temp_config("collapse.cfg", kCollapse);
    const fs::path out = fs::temp_directory_path() / "cmn_driver_tests" / "collapse_out";
    fs::remove_all(out);
    CHECK(cmd_simulate(cfg, out.string()) == 2);
    const nlohmann::json summary = nlohmann::json::parse(slurp((out / "summary.json").string()));
    CHECK(summary["verdict"] == "BlowupSuspected");
    CHECK(summary.contains("t_detect"));
    CHECK(summary["evidence"].size() >= 1);
}

TEST_CASE("exhausted step budget is inconclusive (exit code 3)") {
    const std::string cfg =
        write_temp_config("budget.cfg", std::string(kEquilibrium) + "\nmax_steps = 5\n");
    const fs::path out = fs::temp_directory_path() / "cmn_driver_tests" / "budget_out";
    fs::remove_all(out);
    CHECK(cmd_simulate(cfg, out.string()) == 3);
}

TEST_CASE("simulate on a malformed config returns 1") {
    const std::string cfg = write_temp_config("bad.cfg", "[model]\nwhat = 1\n");
    CHECK(cmd_simulate(cfg, "/tmp/cmn_never") == 1);
    CHECK(cmd_simulate("/nonexistent/path.cfg", "/tmp/cmn_never") == 1);
}

TEST_CASE("single-cell sweep reproduces the simulate verdict") {
    const RunConfig base = parse_config_text(kCollapse);
    SweepSpec spec;
    spec.axes.push_back(parse_axis("m=0.5"));
    const auto rows = run_sweep(base, spec);
    REQUIRE(rows.size() == 1);
    const RunOutcome direct = execute_run(base);
    CHECK(rows[0].verdict == to_string(direct.classification.verdict));
    CHECK(rows[0].sup_u_inf == direct.classification.sup_u_inf);
}

TEST_CASE("sweep output is deterministic and independent of parallelism") {
    RunConfig base = parse_config_text(kCollapse);
    base.grid.cells = 64;
    base.t_end = 2.0;
    SweepSpec spec;
    spec.axes.push_back(parse_axis("m=0.5:2.5:0.5"));
    spec.axes.push_back(parse_axis("chi=5:20:15"));

    spec.parallelism = 1;
    const auto rows1 = run_sweep(base, spec);
    spec.parallelism = 3;
    const auto rows2 = run_sweep(base, spec);
    spec.parallelism = 1;
    const auto rows3 = run_sweep(base, spec);

    const fs::path dir = fs::temp_directory_path() / "cmn_driver_tests";
    fs::create_directories(dir);
    write_phase_csv((dir / "p1.csv").string(), spec, rows1);
    write_phase_csv((dir / "p2.csv").string(), spec, rows2);
    write_phase_csv((dir / "p3.csv").string(), spec, rows3);
    const std::string b1 = slurp((dir / "p1.csv").string());
    CHECK(b1 == slurp((dir / "p2.csv").string()));
    CHECK(b1 == slurp((dir / "p3.csv").string()));
    CHECK(rows1.size() == 10);
}

TEST_CASE("per-cell failures are recorded and the sweep continues") {
    RunConfig base = parse_config_text(kCollapse);
    base.grid.cells = 32;
    base.t_end = 0.5;
    SweepSpec spec;
    spec.axes.push_back(parse_axis("mu=-1:1:2"));  // mu = -1 invalid, mu = 1 fine
    const auto rows = run_sweep(base, spec);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].verdict == "Error");
    CHECK(!rows[0].error.empty());
    CHECK(rows[1].verdict != "Error");
}

TEST_CASE("replicated cells rerun deterministically") {
    RunConfig base = parse_config_text(kCollapse);
    base.grid.cells = 32;
    base.t_end = 0.5;
    SweepSpec spec;
    spec.axes.push_back(parse_axis("chi=20"));
    spec.replicates = 3;
    const auto rows = run_sweep(base, spec);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].sup_u_inf == rows[1].sup_u_inf);
    CHECK(rows[1].sup_u_inf == rows[2].sup_u_inf);
    CHECK(rows[2].replicate == 2);
}

TEST_CASE("cmd_sweep writes phase.csv") {
    std::string body = kCollapse;
    body.replace(body.find("cells = 128"), 11, "cells = 48");
    const std::string cfg = write_temp_config("sweepcli.cfg", body);
    const fs::path out = fs::temp_directory_path() / "cmn_driver_tests" / "sweep_out";
    fs::remove_all(out);
    SweepSpec spec;
    spec.axes.push_back(parse_axis("m=0.5:2.0:1.5"));
    CHECK(cmd_sweep(cfg, spec, out.string()) == 0);
    const std::string text = slurp((out / "phase.csv").string());
    CHECK(text.find("cell,replicate,m,verdict") == 0);
    CHECK(text.find("blowup region") != std::string::npos);
    CHECK(cmd_sweep("/nonexistent.cfg", spec, out.string()) == 1);
}

TEST_CASE("field CSV serialization") {
    const GridPtr g = RadialGrid::uniform(2, 1.0, 8);
    Field f(g, 0.0);
    for (int i = 0; i < 8; ++i) f[i] = 0.5 * i;
    const fs::path p = fs::temp_directory_path() / "cmn_driver_tests" / "field.csv";
    fs::create_directories(p.parent_path());
    write_field_csv(p.string(), f);
    const std::string text = slurp(p.string());
    CHECK(text.rfind("r,value\n", 0) == 0);
    CHECK(text.find("0.0625,0") != std::string::npos);
    CHECK(text.find("0.9375,3.5") != std::string::npos);
}

TEST_CASE("regime labels") {
    CHECK(regime_label(0.5, 2, 0) == "blowup region");
    CHECK(regime_label(1.0, 2, 0) == "critical m=1");
    CHECK(regime_label(1.0 + 4e-16, 2, 0) == "critical m=1");  // sweep arithmetic jitter
    CHECK(regime_label(1.2, 2, 0) == "open regime");
    CHECK(regime_label(1.5, 2, 0) == "open regime");
    CHECK(regime_label(1.6, 2, 0) == "bounded region");
    CHECK(regime_label(2.5, 3, 0) == "open regime");
    CHECK(regime_label(3.0, 3, 0) == "bounded region");
    CHECK(regime_label(1.0, 2, 1) == "open regime");
    CHECK(regime_label(1.1, 2, 1) == "bounded region");
}

TEST_CASE("verify suites all pass") {
    for (const auto& name : verify::suite_names()) {
        INFO(name);
        CHECK(cmd_verify(name) == 0);
    }
    CHECK(cmd_verify("no-such-suite") == 1);
}

}  // TEST_SUITE
