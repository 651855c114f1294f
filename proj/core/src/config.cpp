#include "cmn/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cmn {

double PhiSpec::phi_star() const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Constant: return value;
        case Kind::Bump: return value;
    }
    return 0.0;
}

SourceFn PhiSpec::make() const {
    switch (kind) {
        case Kind::Zero:
            return zero_source();
        case Kind::Constant: {
            const double v = value;
            const double tau_ = tau;
            if (tau_ > 0.0)
                return [v, tau_](double, double t) { return v * std::exp(-t / tau_); };
            return constant_source(v);
        }
        case Kind::Bump: {
            const double a = value, c = center, w = width, tau_ = tau;
            return [a, c, w, tau_](double r, double t) {
                const double x = (r - c) / w;
                if (std::abs(x) >= 1.0) return 0.0;
                const double q = 1.0 - x * x;
                const double g = q * q * q;  // C^2, peak value 1 at r = c
                const double h = tau_ > 0.0 ? std::exp(-t / tau_) : 1.0;
                return a * g * h;
            };
        }
    }
    return zero_source();
}

void RunConfig::validate() const {
    try {
        model.validate();
        control.validate();
        scheme.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (grid.cells < 4) throw ConfigError("grid.cells: need at least 4 cells");
    if (grid.stretch < 1.0) throw ConfigError("grid.stretch: must be >= 1");
    if (t_end < 0.0) throw ConfigError("control.t_end: must be nonnegative");
    if (!(initial.mu > 0.0)) throw ConfigError("initial.mu: must be positive");
    if (!(initial.alpha > 0.0) || initial.beta < initial.alpha)
        throw ConfigError("initial.alpha/beta: need beta >= alpha > 0");
    if (initial.r_star && !(*initial.r_star > 0.0 && *initial.r_star < model.R))
        throw ConfigError("initial.r_star: must lie in (0, R)");
    if (model.kappa == 1 && !initial.v0_value)
        throw ConfigError("initial.v0_value: required when kappa = 1");
    if (phi.kind == PhiSpec::Kind::Bump && !(phi.width > 0.0))
        throw ConfigError("phi.width: bump source needs a positive width");
    if (phi.value < 0.0) throw ConfigError("phi.value: source amplitude must be nonnegative");
    if (outputs.cadence < 0.0) throw ConfigError("outputs.cadence: must be nonnegative");

    if (model.diffusion.kind == DiffusionKind::PurePower && model.diffusion.m <= 0.0) {
        const bool has_mbar = analysis && analysis->mbar;
        if (!has_mbar)
            throw ConfigError(
                "model.m: pure-power law with m <= 0 needs analysis.mbar in (0,1), the "
                "re-bounding exponent required by the blow-up diagnostics");
        throw ConfigError(
            "model.m: pure-power law with m <= 0 is unbounded near u = 0; no re-bounding "
            "exponent applies. Use a prototype law for m <= 0.");
    }
    if (analysis && analysis->enabled) {
        const AnalysisSpec& a = *analysis;
        const double m = model.diffusion.m;
        if (m < 1.0) {
            try {
                const auto eb = blowup_exponent_bound(model.diffusion,
                                                      a.mbar ? a.mbar : std::nullopt);
                MomentConfig::make(a.eps, a.eta, a.lam, eb.m_eff, model.n,
                                   a.p > 0.0 ? std::optional<double>(a.p) : std::nullopt);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("analysis: ") + e.what());
            }
        }
        if (a.probe_radius < 0.0 || a.probe_radius > model.R)
            throw ConfigError("analysis.probe_radius: must lie in [0, R]");
        if (!(a.odi_tol > 0.0)) throw ConfigError("analysis.odi_tol: must be positive");
    }
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

using SectionMap = std::map<std::string, std::map<std::string, std::string>>;

SectionMap parse_ini(const std::string& text) {
    SectionMap out;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = lower(trim(line.substr(1, line.size() - 2)));
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            out.try_emplace(section);
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        auto [it, inserted] = out[section].try_emplace(key, value);
        if (!inserted) throw ConfigError("duplicate key '" + section + "." + key + "'");
    }
    return out;
}

class SectionReader {
public:
    SectionReader(const SectionMap& map, std::string name) : name_(std::move(name)) {
        auto it = map.find(name_);
        if (it != map.end()) entries_ = &it->second;
    }

    bool present() const { return entries_ != nullptr; }

    std::optional<std::string> raw(const std::string& key) {
        used_.insert(key);
        if (!entries_) return std::nullopt;
        auto it = entries_->find(key);
        if (it == entries_->end() || it->second.empty()) return std::nullopt;
        return it->second;
    }

    double number(const std::string& key, double fallback) {
        auto v = raw(key);
        return v ? parse_number(key, *v) : fallback;
    }

    std::optional<double> opt_number(const std::string& key) {
        auto v = raw(key);
        if (!v) return std::nullopt;
        return parse_number(key, *v);
    }

    long integer(const std::string& key, long fallback) {
        auto v = raw(key);
        if (!v) return fallback;
        const double d = parse_number(key, *v);
        if (d != std::floor(d))
            throw ConfigError("'" + name_ + "." + key + "': expected an integer");
        return static_cast<long>(d);
    }

    std::string text(const std::string& key, const std::string& fallback) {
        auto v = raw(key);
        return v ? *v : fallback;
    }

    bool boolean(const std::string& key, bool fallback) {
        auto v = raw(key);
        if (!v) return fallback;
        const std::string s = lower(*v);
        if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "0" || s == "no" || s == "off") return false;
        throw ConfigError("'" + name_ + "." + key + "': expected a boolean");
    }

    std::vector<double> number_list(const std::string& key) {
        auto v = raw(key);
        std::vector<double> out;
        if (!v) return out;
        std::string item;
        std::istringstream ss(*v);
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(parse_number(key, item));
        }
        return out;
    }

    void reject_unknown() const {
        if (!entries_) return;
        for (const auto& [k, v] : *entries_)
            if (!used_.count(k)) throw ConfigError("unknown key '" + name_ + "." + k + "'");
    }

private:
    double parse_number(const std::string& key, const std::string& s) const {
        try {
            size_t pos = 0;
            const double d = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("trailing characters");
            return d;
        } catch (const std::exception&) {
            throw ConfigError("'" + name_ + "." + key + "': cannot parse number from '" + s +
                              "'");
        }
    }

    std::string name_;
    const std::map<std::string, std::string>* entries_ = nullptr;
    std::set<std::string> used_;
};

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    const SectionMap map = parse_ini(text);
    static const std::set<std::string> known = {"model",  "phi",    "initial", "grid",
                                                "control", "scheme", "analysis", "outputs"};
    for (const auto& [sec, kv] : map)
        if (!known.count(sec)) throw ConfigError("unknown section '[" + sec + "]'");

    RunConfig cfg;

    SectionReader model(map, "model");
    cfg.model.n = static_cast<int>(model.integer("n", 2));
    cfg.model.kappa = static_cast<int>(model.integer("kappa", 0));
    cfg.model.chi = model.number("chi", 5.0);
    const std::string law = lower(model.text("diffusion", "prototype"));
    if (law == "prototype")
        cfg.model.diffusion.kind = DiffusionKind::Prototype;
    else if (law == "purepower")
        cfg.model.diffusion.kind = DiffusionKind::PurePower;
    else
        throw ConfigError("'model.diffusion': expected prototype or purepower");
    cfg.model.diffusion.m = model.number("m", 0.5);
    cfg.model.diffusion.coeff = model.number("diffusion_coeff", 1.0);
    cfg.model.R = model.number("r", 1.0);
    model.reject_unknown();

    SectionReader phi(map, "phi");
    const std::string phik = lower(phi.text("kind", "zero"));
    if (phik == "zero")
        cfg.phi.kind = PhiSpec::Kind::Zero;
    else if (phik == "constant")
        cfg.phi.kind = PhiSpec::Kind::Constant;
    else if (phik == "bump")
        cfg.phi.kind = PhiSpec::Kind::Bump;
    else
        throw ConfigError("'phi.kind': expected zero, constant or bump");
    cfg.phi.value = phi.number("value", 0.0);
    cfg.phi.center = phi.number("center", 0.0);
    cfg.phi.width = phi.number("width", 0.0);
    cfg.phi.tau = phi.number("tau", 0.0);
    phi.reject_unknown();
    cfg.model.phi_star = cfg.phi.phi_star();

    SectionReader init(map, "initial");
    cfg.initial.mu = init.number("mu", 1.0);
    cfg.initial.alpha = init.number("alpha", 1.0);
    cfg.initial.beta = init.number("beta", 1.0);
    cfg.initial.w0_value = init.opt_number("w0_value");
    cfg.initial.v0_value = init.opt_number("v0_value");
    cfg.initial.r_star = init.opt_number("r_star");
    const std::string kind = lower(init.text("u0_kind", "uniform"));
    if (kind == "uniform")
        cfg.initial.u0_kind = ProfileKind::Uniform;
    else if (kind == "bump")
        cfg.initial.u0_kind = ProfileKind::Bump;
    else if (kind == "gaussian")
        cfg.initial.u0_kind = ProfileKind::Gaussian;
    else if (kind == "csv")
        cfg.initial.u0_kind = ProfileKind::Csv;
    else
        throw ConfigError("'initial.u0_kind': expected uniform, bump, gaussian or csv");
    cfg.initial.u0_width = init.opt_number("u0_width");
    if (auto path = init.raw("u0_csv")) cfg.initial.u0_csv_path = *path;
    if (cfg.initial.u0_kind == ProfileKind::Csv && !cfg.initial.u0_csv_path)
        throw ConfigError("'initial.u0_csv': required for u0_kind = csv");
    init.reject_unknown();

    SectionReader grid(map, "grid");
    cfg.grid.cells = static_cast<int>(grid.integer("cells", 512));
    cfg.grid.stretch = grid.number("stretch", 1.0);
    grid.reject_unknown();

    SectionReader control(map, "control");
    cfg.t_end = control.number("t_end", 10.0);
    cfg.control.dt_init = control.number("dt_init", 1e-4);
    cfg.control.dt_min = control.number("dt_min", 1e-12);
    cfg.control.dt_max = control.number("dt_max", 1e-2);
    cfg.control.safety = control.number("safety", 0.9);
    cfg.control.u_cap = control.number("u_cap", 0.0);
    cfg.control.max_steps = control.integer("max_steps", 0);
    control.reject_unknown();

    SectionReader scheme(map, "scheme");
    cfg.scheme.theta = scheme.number("theta", 1.0);
    cfg.scheme.picard_iters = static_cast<int>(scheme.integer("picard_iters", 1));
    cfg.scheme.picard_tol = scheme.number("picard_tol", 1e-8);
    const std::string adv = lower(scheme.text("advection", "upwind"));
    if (adv == "upwind")
        cfg.scheme.advection = AdvectionScheme::Upwind;
    else if (adv == "centered")
        cfg.scheme.advection = AdvectionScheme::Centered;
    else
        throw ConfigError("'scheme.advection': expected upwind or centered");
    const std::string fav = lower(scheme.text("face_average", "arithmetic"));
    if (fav == "arithmetic")
        cfg.scheme.face_average = FaceAverage::ArithmeticU;
    else if (fav == "harmonic")
        cfg.scheme.face_average = FaceAverage::HarmonicD;
    else
        throw ConfigError("'scheme.face_average': expected arithmetic or harmonic");
    scheme.reject_unknown();

    SectionReader analysis(map, "analysis");
    if (analysis.present()) {
        AnalysisSpec a;
        a.enabled = analysis.boolean("enabled", true);
        a.eps = analysis.number("eps", 0.1);
        a.eta = analysis.number("eta", 0.2);
        a.lam = analysis.number("lambda", 0.1);
        a.p = analysis.number("p", 0.0);
        a.probe_radius = analysis.number("probe_radius", 0.0);
        a.odi_tol = analysis.number("odi_tol", 1e-2);
        a.mbar = analysis.opt_number("mbar");
        cfg.analysis = a;
    }
    analysis.reject_unknown();

    SectionReader outputs(map, "outputs");
    cfg.outputs.directory = outputs.text("directory", "out");
    cfg.outputs.cadence = outputs.number("cadence", 0.1);
    cfg.outputs.snapshot_times = outputs.number_list("snapshot_times");
    outputs.reject_unknown();

    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec <= 17; ++prec) {
        char trial[32];
        std::snprintf(trial, sizeof trial, "%.*g", prec, v);
        if (std::strtod(trial, nullptr) == v) return trial;
    }
    return buf;
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    auto put = [&os](const std::string& key, const std::string& val) {
        os << key << " = " << val << "\n";
    };
    auto putd = [&](const std::string& key, double v) { put(key, format_double(v)); };
    auto putopt = [&](const std::string& key, const std::optional<double>& v) {
        if (v) putd(key, *v);
    };

    os << "[model]\n";
    put("n", std::to_string(cfg.model.n));
    put("kappa", std::to_string(cfg.model.kappa));
    putd("chi", cfg.model.chi);
    put("diffusion",
        cfg.model.diffusion.kind == DiffusionKind::Prototype ? "prototype" : "purepower");
    putd("m", cfg.model.diffusion.m);
    putd("diffusion_coeff", cfg.model.diffusion.coeff);
    putd("r", cfg.model.R);

    os << "\n[phi]\n";
    switch (cfg.phi.kind) {
        case PhiSpec::Kind::Zero: put("kind", "zero"); break;
        case PhiSpec::Kind::Constant: put("kind", "constant"); break;
        case PhiSpec::Kind::Bump: put("kind", "bump"); break;
    }
    putd("value", cfg.phi.value);
    putd("center", cfg.phi.center);
    putd("width", cfg.phi.width);
    putd("tau", cfg.phi.tau);

    os << "\n[initial]\n";
    putd("mu", cfg.initial.mu);
    putd("alpha", cfg.initial.alpha);
    putd("beta", cfg.initial.beta);
    putopt("w0_value", cfg.initial.w0_value);
    putopt("v0_value", cfg.initial.v0_value);
    putopt("r_star", cfg.initial.r_star);
    switch (cfg.initial.u0_kind) {
        case ProfileKind::Uniform: put("u0_kind", "uniform"); break;
        case ProfileKind::Bump: put("u0_kind", "bump"); break;
        case ProfileKind::Gaussian: put("u0_kind", "gaussian"); break;
        case ProfileKind::Csv: put("u0_kind", "csv"); break;
    }
    putopt("u0_width", cfg.initial.u0_width);
    if (cfg.initial.u0_csv_path) put("u0_csv", *cfg.initial.u0_csv_path);

    os << "\n[grid]\n";
    put("cells", std::to_string(cfg.grid.cells));
    putd("stretch", cfg.grid.stretch);

    os << "\n[control]\n";
    putd("t_end", cfg.t_end);
    putd("dt_init", cfg.control.dt_init);
    putd("dt_min", cfg.control.dt_min);
    putd("dt_max", cfg.control.dt_max);
    putd("safety", cfg.control.safety);
    putd("u_cap", cfg.control.u_cap);
    put("max_steps", std::to_string(cfg.control.max_steps));

    os << "\n[scheme]\n";
    putd("theta", cfg.scheme.theta);
    put("picard_iters", std::to_string(cfg.scheme.picard_iters));
    putd("picard_tol", cfg.scheme.picard_tol);
    put("advection",
        cfg.scheme.advection == AdvectionScheme::Upwind ? "upwind" : "centered");
    put("face_average",
        cfg.scheme.face_average == FaceAverage::ArithmeticU ? "arithmetic" : "harmonic");

    if (cfg.analysis) {
        os << "\n[analysis]\n";
        put("enabled", cfg.analysis->enabled ? "true" : "false");
        putd("eps", cfg.analysis->eps);
        putd("eta", cfg.analysis->eta);
        putd("lambda", cfg.analysis->lam);
        putd("p", cfg.analysis->p);
        putd("probe_radius", cfg.analysis->probe_radius);
        putd("odi_tol", cfg.analysis->odi_tol);
        putopt("mbar", cfg.analysis->mbar);
    }

    os << "\n[outputs]\n";
    put("directory", cfg.outputs.directory);
    putd("cadence", cfg.outputs.cadence);
    if (!cfg.outputs.snapshot_times.empty()) {
        std::string list;
        for (size_t i = 0; i < cfg.outputs.snapshot_times.size(); ++i) {
            if (i) list += ", ";
            list += format_double(cfg.outputs.snapshot_times[i]);
        }
        put("snapshot_times", list);
    }
    return os.str();
}

}  // namespace cmn
