#include "thickspray/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace thickspray {

namespace {

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

bool to_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size() && std::isfinite(out);
    } catch (const std::exception&) {
        return false;
    }
}

bool to_int(const std::string& s, int& out) {
    try {
        std::size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size() || v < -(1L << 30) || v > (1L << 30)) return false;
        out = static_cast<int>(v);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

bool to_bool(const std::string& s, bool& out) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return out = true, true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return out = false, true;
    return false;
}

std::string fmt(double x) {
    std::ostringstream o;
    o.precision(17);
    o << x;
    return o.str();
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

using Setter = std::function<bool(const std::string&)>;

struct Schema {
    std::map<std::string, std::map<std::string, Setter>> sections;

    void number(const std::string& sec, const std::string& key, double& target) {
        sections[sec][key] = [&target](const std::string& v) { return to_double(v, target); };
    }
    void integer(const std::string& sec, const std::string& key, int& target) {
        sections[sec][key] = [&target](const std::string& v) { return to_int(v, target); };
    }
    void flag(const std::string& sec, const std::string& key, bool& target) {
        sections[sec][key] = [&target](const std::string& v) { return to_bool(v, target); };
    }
    void custom(const std::string& sec, const std::string& key, Setter s) { sections[sec][key] = std::move(s); }
};

/// "A,width,cx[,cy]; ..." with at most four bumps.
bool parse_bumps(const std::string& text, std::vector<Bump>& out) {
    std::vector<Bump> bumps;
    for (const auto& item : split(text, ';')) {
        if (item.empty()) continue;
        auto parts = split(item, ',');
        if (parts.size() < 3 || parts.size() > 4) return false;
        Bump b;
        if (!to_double(parts[0], b.amplitude) || !to_double(parts[1], b.width) || !to_double(parts[2], b.center[0]))
            return false;
        if (parts.size() == 4 && !to_double(parts[3], b.center[1])) return false;
        bumps.push_back(b);
    }
    out = bumps;
    return true;
}

bool parse_pair(const std::string& text, std::array<double, 2>& out) {
    auto parts = split(text, ',');
    if (parts.empty() || parts.size() > 2) return false;
    std::array<double, 2> v{0.0, 0.0};
    for (std::size_t i = 0; i < parts.size(); ++i)
        if (!to_double(parts[i], v[i])) return false;
    out = v;
    return true;
}

bool parse_ladder(const std::string& text, std::vector<int>& out) {
    std::vector<int> v;
    for (const auto& p : split(text, ',')) {
        int n;
        if (!to_int(p, n)) return false;
        v.push_back(n);
    }
    out = v;
    return !v.empty();
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void validate(const RunConfig& c, std::vector<std::string>& bad) {
    auto need = [&bad](bool ok, const std::string& what) {
        if (!ok) bad.push_back(what);
    };
    const auto& g = c.grid;
    const auto& s = c.solver;
    need(g.d == 1 || g.d == 2, "grid.d: must be 1 or 2");
    need(is_pow2(g.Nx) && g.Nx >= 8, "grid.Nx: must be a power of two >= 8");
    need(g.Nv >= 8 && g.Nv % 2 == 0, "grid.Nv: must be even and >= 8");
    need(g.Vmax > 0.0, "grid.Vmax: must be > 0");

    need(s.eps >= 0.0, "physics.epsilon: must be >= 0");
    need(c.pressure_gamma > 1.0, "physics.pressure_gamma: must be > 1");
    need(s.bounds.Theta > 0.0 && s.bounds.Theta < 1.0, "physics.Theta: must lie in (0, 1)");
    need(s.bounds.mu > 0.0, "physics.mu: must be > 0");
    need(s.bounds.theta_lower > 0.0, "physics.theta_lower: must be > 0");
    need(s.bounds.theta_upper >= s.bounds.theta_lower, "physics.theta_upper: must be >= theta_lower");

    need(s.dt > 0.0, "time.dt: must be > 0");
    need(s.T_end > 0.0, "time.T_end: must be > 0");
    need(s.safety > 0.0 && s.safety <= 1.0, "time.safety: must lie in (0, 1]");

    need(!c.kinetic.bumps.empty(), "initial.bumps: at least one bump is required");
    need(c.kinetic.bumps.size() <= 4, "initial.bumps: at most 4 bumps");
    for (const auto& b : c.kinetic.bumps) {
        need(b.amplitude >= 0.0, "initial.bumps: amplitudes must be >= 0");
        need(b.width > 0.0, "initial.bumps: widths must be > 0");
    }
    need(std::abs(c.kinetic.mod_amp) < 1.0, "initial.mod_amp: must satisfy |mod_amp| < 1");
    need(c.kinetic.mod_mode >= 0, "initial.mod_mode: must be >= 0");
    need(c.fluid.rho0 > 0.0, "initial.rho0: must be > 0");
    need(std::abs(c.fluid.rho_amp) < 1.0, "initial.rho_amp: must satisfy |rho_amp| < 1");
    need(c.fluid.rho_mode >= 0, "initial.rho_mode: must be >= 0");

    need(s.c_required >= 0.0 && s.c_required <= 1.0, "penrose.c_required: must lie in [0, 1]");
    for (const auto& [name, smp] : {std::pair{"samples", s.full_sampling}, std::pair{"monitor", s.monitor_sampling}}) {
        std::string n = name;
        need(smp.n_phi >= 1, "penrose." + n + "_phi: must be >= 1");
        need(smp.n_beta >= 1, "penrose." + n + "_beta: must be >= 1");
        need(smp.n_dir >= 1, "penrose." + n + "_dir: must be >= 1");
        need(smp.x_stride >= 1, "penrose." + n + "_stride: must be >= 1");
    }
    need(s.penrose_cadence >= 1, "penrose.cadence: must be >= 1");

    need(c.snapshot_every >= 0, "output.snapshot_every: must be >= 0");
    need(!c.out_dir.empty(), "output.dir: must not be empty");

    need(s.norm_m >= 1, "diagnostics.norm_m: must be >= 1");
    need(s.norm_r >= 0.0, "diagnostics.norm_r: must be >= 0");
    need(s.tail_tol >= 0.0, "diagnostics.tail_tol: must be >= 0");

    const auto& a = c.avgops;
    need(a.sigma > 0.0, "avgops.sigma: must be > 0");
    need(a.T > 0.0, "avgops.T: must be > 0");
    need(a.ladder.size() >= 2, "avgops.ladder: needs at least two resolutions");
    for (int n : a.ladder) need(is_pow2(n) && n >= 8, "avgops.ladder: entries must be powers of two >= 8");
    need(a.diff_modes >= 4, "avgops.diff_modes: must be >= 4");
    need(a.probes >= 8, "avgops.probes: must be >= 8");
    need(a.l0 >= 1, "avgops.l0: must be >= 1");

    const auto& f = c.flow;
    need(f.amplitude >= 0.0, "flow.amplitude: must be >= 0");
    need(f.horizon > 0.0, "flow.horizon: must be > 0");
    need(f.points >= 1, "flow.points: must be >= 1");
}

Schema make_schema(RunConfig& c) {
    Schema s;
    auto& sv = c.solver;
    s.integer("grid", "d", c.grid.d);
    s.integer("grid", "Nx", c.grid.Nx);
    s.integer("grid", "Nv", c.grid.Nv);
    s.number("grid", "Vmax", c.grid.Vmax);

    s.number("physics", "epsilon", sv.eps);
    s.number("physics", "pressure_gamma", c.pressure_gamma);
    s.number("physics", "pressure_offset", c.pressure_offset);
    s.number("physics", "Theta", sv.bounds.Theta);
    s.number("physics", "mu", sv.bounds.mu);
    s.number("physics", "theta_lower", sv.bounds.theta_lower);
    s.number("physics", "theta_upper", sv.bounds.theta_upper);

    s.number("time", "dt", sv.dt);
    s.number("time", "T_end", sv.T_end);
    s.number("time", "safety", sv.safety);
    s.custom("time", "splitting", [&sv](const std::string& v) {
        if (v == "lie") return sv.splitting = Splitting::Lie, true;
        if (v == "strang") return sv.splitting = Splitting::Strang, true;
        return false;
    });
    s.custom("time", "momentum_mode", [&sv](const std::string& v) {
        if (v == "explicit") return sv.momentum = MomentumMode::Explicit, true;
        if (v == "semi-implicit") return sv.momentum = MomentumMode::SemiImplicit, true;
        return false;
    });

    s.custom("initial", "bumps", [&c](const std::string& v) { return parse_bumps(v, c.kinetic.bumps); });
    s.integer("initial", "mod_mode", c.kinetic.mod_mode);
    s.number("initial", "mod_amp", c.kinetic.mod_amp);
    s.number("initial", "rho0", c.fluid.rho0);
    s.integer("initial", "rho_mode", c.fluid.rho_mode);
    s.number("initial", "rho_amp", c.fluid.rho_amp);
    s.custom("initial", "u0", [&c](const std::string& v) { return parse_pair(v, c.fluid.u0); });

    s.custom("penrose", "variant", [&sv](const std::string& v) {
        if (v == "standard") return sv.variant = PenroseVariant::Standard, true;
        if (v == "optimal") return sv.variant = PenroseVariant::Optimal, true;
        return false;
    });
    s.number("penrose", "c_required", sv.c_required);
    s.flag("penrose", "require", c.penrose_require);
    s.flag("penrose", "monitor", sv.penrose_monitor);
    s.integer("penrose", "cadence", sv.penrose_cadence);
    s.integer("penrose", "samples_phi", sv.full_sampling.n_phi);
    s.integer("penrose", "samples_beta", sv.full_sampling.n_beta);
    s.integer("penrose", "samples_dir", sv.full_sampling.n_dir);
    s.integer("penrose", "samples_stride", sv.full_sampling.x_stride);
    s.integer("penrose", "monitor_phi", sv.monitor_sampling.n_phi);
    s.integer("penrose", "monitor_beta", sv.monitor_sampling.n_beta);
    s.integer("penrose", "monitor_dir", sv.monitor_sampling.n_dir);
    s.integer("penrose", "monitor_stride", sv.monitor_sampling.x_stride);

    s.custom("output", "dir", [&c](const std::string& v) { return c.out_dir = v, true; });
    s.integer("output", "snapshot_every", c.snapshot_every);

    s.flag("diagnostics", "track_norms", sv.track_norms);
    s.integer("diagnostics", "norm_m", sv.norm_m);
    s.number("diagnostics", "norm_r", sv.norm_r);
    s.number("diagnostics", "tail_tol", sv.tail_tol);

    s.number("avgops", "sigma", c.avgops.sigma);
    s.number("avgops", "delta", c.avgops.delta);
    s.integer("avgops", "l0", c.avgops.l0);
    s.number("avgops", "T", c.avgops.T);
    s.custom("avgops", "ladder", [&c](const std::string& v) { return parse_ladder(v, c.avgops.ladder); });
    s.integer("avgops", "diff_modes", c.avgops.diff_modes);
    s.integer("avgops", "probes", c.avgops.probes);

    s.number("flow", "amplitude", c.flow.amplitude);
    s.number("flow", "horizon", c.flow.horizon);
    s.number("flow", "omega", c.flow.omega);
    s.integer("flow", "points", c.flow.points);
    return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid configuration: " + join(problems, "; ")), problems_(std::move(problems)) {}

RunConfig::RunConfig() {
    kinetic.bumps = {{0.1 / std::sqrt(std::numbers::pi), 1.0, {0.0, 0.0}}};
    kinetic.mod_amp = 0.1;
    solver.dt = 2e-3;
    solver.T_end = 0.5;
}

PressureLaw RunConfig::pressure_law() const {
    auto law = PressureLaw::power(pressure_gamma);
    if (pressure_offset == 0.0) return law;
    double g = pressure_gamma, off = pressure_offset;
    std::ostringstream name;
    name << law.name << (off > 0 ? " + " : " - ") << std::abs(off);
    return PressureLaw::custom(name.str(), [g, off](double r) { return std::pow(r, g) + off; }, law.dp);
}

RunConfig parse_config_text(const std::string& text) {
    boost::property_tree::ptree pt;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError({std::string("syntax: ") + e.message() + " at line " + std::to_string(e.line())});
    }
    RunConfig c;
    auto schema = make_schema(c);
    std::vector<std::string> bad;
    for (const auto& [sec, body] : pt) {
        auto it = schema.sections.find(sec);
        if (it == schema.sections.end()) {
            bad.push_back(sec + ": unknown section");
            continue;
        }
        if (!body.data().empty()) bad.push_back(sec + ": key outside of a section");
        for (const auto& [key, node] : body) {
            auto kt = it->second.find(key);
            if (kt == it->second.end()) {
                bad.push_back(sec + "." + key + ": unknown key");
                continue;
            }
            std::string value = trim(node.data());
            if (!kt->second(value)) bad.push_back(sec + "." + key + ": cannot parse '" + value + "'");
        }
    }
    validate(c, bad);
    if (!bad.empty()) throw ConfigError(bad);
    return c;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"file: cannot read '" + path + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string RunConfig::echo() const {
    const auto& s = solver;
    std::ostringstream o;
    o << "[grid]\nd = " << grid.d << "\nNx = " << grid.Nx << "\nNv = " << grid.Nv << "\nVmax = " << fmt(grid.Vmax)
      << "\n\n[physics]\nepsilon = " << fmt(s.eps) << "\npressure_gamma = " << fmt(pressure_gamma)
      << "\npressure_offset = " << fmt(pressure_offset) << "\nTheta = " << fmt(s.bounds.Theta) << "\nmu = " << fmt(s.bounds.mu)
      << "\ntheta_lower = " << fmt(s.bounds.theta_lower) << "\ntheta_upper = " << fmt(s.bounds.theta_upper)
      << "\n\n[time]\ndt = " << fmt(s.dt) << "\nT_end = " << fmt(s.T_end) << "\nsplitting = " << to_string(s.splitting)
      << "\nmomentum_mode = " << to_string(s.momentum) << "\nsafety = " << fmt(s.safety) << "\n\n[initial]\nbumps = ";
    for (std::size_t i = 0; i < kinetic.bumps.size(); ++i) {
        const auto& b = kinetic.bumps[i];
        o << (i ? "; " : "") << fmt(b.amplitude) << "," << fmt(b.width) << "," << fmt(b.center[0]);
        if (grid.d == 2) o << "," << fmt(b.center[1]);
    }
    o << "\nmod_mode = " << kinetic.mod_mode << "\nmod_amp = " << fmt(kinetic.mod_amp) << "\nrho0 = " << fmt(fluid.rho0)
      << "\nrho_mode = " << fluid.rho_mode << "\nrho_amp = " << fmt(fluid.rho_amp) << "\nu0 = " << fmt(fluid.u0[0]);
    if (grid.d == 2) o << "," << fmt(fluid.u0[1]);
    o << "\n\n[penrose]\nvariant = " << to_string(s.variant) << "\nc_required = " << fmt(s.c_required)
      << "\nrequire = " << fmt_bool(penrose_require) << "\nmonitor = " << fmt_bool(s.penrose_monitor)
      << "\ncadence = " << s.penrose_cadence << "\nsamples_phi = " << s.full_sampling.n_phi
      << "\nsamples_beta = " << s.full_sampling.n_beta << "\nsamples_dir = " << s.full_sampling.n_dir
      << "\nsamples_stride = " << s.full_sampling.x_stride << "\nmonitor_phi = " << s.monitor_sampling.n_phi
      << "\nmonitor_beta = " << s.monitor_sampling.n_beta << "\nmonitor_dir = " << s.monitor_sampling.n_dir
      << "\nmonitor_stride = " << s.monitor_sampling.x_stride << "\n\n[output]\ndir = " << out_dir
      << "\nsnapshot_every = " << snapshot_every << "\n\n[diagnostics]\ntrack_norms = " << fmt_bool(s.track_norms)
      << "\nnorm_m = " << s.norm_m << "\nnorm_r = " << fmt(s.norm_r) << "\ntail_tol = " << fmt(s.tail_tol)
      << "\n\n[avgops]\nsigma = " << fmt(avgops.sigma) << "\ndelta = " << fmt(avgops.delta) << "\nl0 = " << avgops.l0
      << "\nT = " << fmt(avgops.T) << "\nladder = ";
    for (std::size_t i = 0; i < avgops.ladder.size(); ++i) o << (i ? "," : "") << avgops.ladder[i];
    o << "\ndiff_modes = " << avgops.diff_modes << "\nprobes = " << avgops.probes << "\n\n[flow]\namplitude = "
      << fmt(flow.amplitude) << "\nhorizon = " << fmt(flow.horizon) << "\nomega = " << fmt(flow.omega)
      << "\npoints = " << flow.points << "\n";
    return o.str();
}

}  // namespace thickspray
