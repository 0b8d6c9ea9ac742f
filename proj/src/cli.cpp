#include "thickspray/cli.hpp"

#include "thickspray/avgops.hpp"
#include "thickspray/characteristics.hpp"
#include "thickspray/config.hpp"
#include "thickspray/field_io.hpp"
#include "thickspray/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>

namespace thickspray {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Globals {
    std::string config_path;
    std::string out_dir;
    int threads = 1;
    std::uint64_t seed = 1;
};

/// Raised to leave a subcommand with a given exit code.
struct Exit {
    int code;
};

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::Config: return kExitUsage;
    case ErrorKind::Bound:
    case ErrorKind::Vacuum: return kExitRefused;
    default: return kExitNumerical;
    }
}

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string brief(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

/// JSON has no NaN; such values are written as null.
Json jnum(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

class Context {
public:
    Context(const Globals& g, std::ostream& out, std::ostream& err) : g_(g), out_(out), err_(err) {}

    const RunConfig& load() {
        if (g_.config_path.empty()) {
            out_ << "no --config given; using defaults\n";
        } else {
            cfg_ = parse_config(g_.config_path);
        }
        set_thread_count(g_.threads);
        std::string dir = cfg_.out_dir;
        if (const char* env = std::getenv("THICKSPRAY_OUT"); env && *env) dir = env;
        if (!g_.out_dir.empty()) dir = g_.out_dir;
        dir_ = dir;
        fs::create_directories(dir_);
        return cfg_;
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void write_json(const std::string& name, const Json& j) {
        std::ofstream o(path(name));
        o << j.dump(2) << "\n";
        if (!o) throw Error(ErrorKind::Config, "cannot write " + path(name));
        files_.push_back(name);
    }

    void add_file(const std::string& name) { files_.push_back(name); }

    /// summary.json lists every file written by the subcommand.
    void write_summary(const std::string& command, int code, Json body) {
        Json s;
        s["command"] = command;
        s["exit_code"] = code;
        s["seed"] = g_.seed;
        s["threads"] = g_.threads;
        for (auto& [k, v] : body.items()) s[k] = v;
        s["files"] = files_;
        std::ofstream o(path("summary.json"));
        o << s.dump(2) << "\n";
    }

    const Globals& globals() const { return g_; }
    std::ostream& out() { return out_; }
    std::ostream& err() { return err_; }

private:
    Globals g_;
    std::ostream& out_;
    std::ostream& err_;
    RunConfig cfg_;
    fs::path dir_;
    std::vector<std::string> files_;
};

PressureLaw admissible_law(Context& ctx, const RunConfig& cfg) {
    auto law = cfg.pressure_law();
    auto adm = check_pressure_admissible(law);
    if (!adm.ok) {
        ctx.err() << "pressure law " << law.name << " is not admissible: " << adm.reason << "\n";
        throw Exit{kExitUsage};
    }
    return law;
}

Json failure_record(ErrorKind kind, const std::string& message) {
    return Json{{"kind", to_string(kind)}, {"message", message}};
}

Json report_json(const PenroseReport& r, const PhaseGrid& g) {
    double x[2] = {0.0, 0.0};
    g.x_coords(r.argmin_x, x);
    Json j;
    j["margin"] = jnum(r.margin);
    j["pass"] = r.pass;
    j["c_required"] = r.c_required;
    j["variant"] = to_string(r.variant);
    j["argmin"] = {{"x_index", r.argmin_x},
                   {"x", std::vector<double>(x, x + g.d)},
                   {"gamma", r.argmin_point.gamma},
                   {"tau", r.argmin_point.tau},
                   {"k", r.argmin_point.k},
                   {"lambda", r.argmin_lambda}};
    j["samples"] = {{"phi", r.sampling.n_phi},
                    {"beta", r.sampling.n_beta},
                    {"dir", r.sampling.n_dir},
                    {"x_stride", r.sampling.x_stride}};
    j["n_x"] = r.n_x;
    j["n_evaluations"] = r.n_evaluations;
    j["n_unconverged"] = r.n_unconverged;
    return j;
}

int cmd_penrose(Context& ctx) {
    const auto& cfg = ctx.load();
    auto law = admissible_law(ctx, cfg);
    auto f = make_distribution(cfg.grid, cfg.kinetic);
    auto fluid = make_fluid(cfg.grid, cfg.fluid, f);
    const auto& s = cfg.solver;
    auto rep = check_condition(f, fluid, law, s.full_sampling, s.variant, s.c_required);
    auto tags = classify_sufficient(f, fluid.rho, law);

    Json j = report_json(rep, cfg.grid);
    j["sufficient"] = std::vector<std::string>(tags.begin(), tags.end());
    ctx.write_json("penrose_report.json", j);

    ctx.out() << "penrose margin " << brief(rep.margin) << " (variant " << to_string(rep.variant) << ", required "
              << brief(rep.c_required) << "): " << (rep.pass ? "pass" : "FAIL") << "\n";
    int code = rep.pass ? kExitOk : kExitRefused;
    ctx.write_summary("penrose-check", code, {{"status", rep.pass ? "pass" : "fail"}});
    return code;
}

void write_diagnostics(const std::string& path, const std::vector<DiagnosticRow>& rows) {
    std::ofstream o(path);
    o << "t,fluid_mass,particle_mass,clipped_mass,min_f,min_rho,max_rhof,penrose_margin,N_mr,div_defect\n";
    for (const auto& r : rows)
        o << num(r.t) << ',' << num(r.fluid_mass) << ',' << num(r.particle_mass) << ',' << num(r.clipped_mass) << ','
          << num(r.min_f) << ',' << num(r.min_rho) << ',' << num(r.max_rhof) << ',' << num(r.penrose_margin) << ','
          << num(r.N_mr) << ',' << num(r.div_defect) << '\n';
}

std::string step_stem(const char* field, std::size_t step) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s_%06zu", field, step);
    return buf;
}

int cmd_simulate(Context& ctx) {
    const auto& cfg = ctx.load();
    ctx.out() << cfg.echo();
    auto law = admissible_law(ctx, cfg);
    const auto& g = cfg.grid;
    auto f = make_distribution(g, cfg.kinetic);
    auto fluid = make_fluid(g, cfg.fluid, f);
    auto state = SimState::initial(f, fluid.rho, fluid.u);
    const auto& s = cfg.solver;

    Json summary;
    auto refuse = [&](ErrorKind kind, const std::string& why) {
        ctx.err() << "refusing to start: " << why << "\n";
        summary["status"] = "refused";
        summary["failure"] = failure_record(kind, why);
        ctx.write_summary("simulate", kExitRefused, summary);
        return kExitRefused;
    };
    auto hyp = check_initial_hypotheses(state.fluid, state.f, s.bounds);
    if (!hyp.ok) return refuse(ErrorKind::Bound, "initial data violate " + hyp.failed);
    if (double tail = tail_fraction(state.f); tail > s.tail_tol)
        return refuse(ErrorKind::Tail, "tail fraction " + num(tail) + " exceeds " + num(s.tail_tol));
    if (cfg.penrose_require) {
        auto rep = check_condition(state.f, state.fluid, law, s.full_sampling, s.variant, s.c_required);
        if (!rep.pass)
            return refuse(ErrorKind::Bound, "Penrose margin " + num(rep.margin) + " below " + num(s.c_required));
    }

    std::string snap_dir = ctx.path("snapshots");
    std::vector<std::string> snaps;
    auto observer = [&](const SimState& st, const DiagnosticRow&) {
        if (cfg.snapshot_every <= 0 || st.steps % static_cast<std::size_t>(cfg.snapshot_every) != 0) return;
        fs::create_directories(snap_dir);
        std::vector<std::size_t> xshape(g.d, g.Nx);
        std::vector<std::size_t> fshape = xshape;
        fshape.insert(fshape.end(), g.d, g.Nv);
        auto dump = [&](const char* name, const std::vector<double>& values, const std::vector<std::size_t>& shape) {
            auto stem = step_stem(name, st.steps);
            write_field_dump(snap_dir, stem, name, values, shape, g, st.t);
            snaps.push_back("snapshots/" + stem + ".json");
        };
        dump("f", st.f.values, fshape);
        dump("rho", st.fluid.rho.values, xshape);
        dump("m", st.fluid.m.values, xshape);
        for (int a = 0; a < g.d; ++a) dump(a == 0 ? "u0" : "u1", st.fluid.u.comp[a].values, xshape);
    };

    auto res = run(state, law, s, observer);
    write_diagnostics(ctx.path("diagnostics.csv"), res.rows);
    ctx.add_file("diagnostics.csv");
    for (const auto& p : snaps) ctx.add_file(p);

    int code = res.ok ? kExitOk : exit_code(*res.error);
    summary["status"] = res.ok ? "ok" : "failed";
    if (!res.ok) {
        Json fr = failure_record(*res.error, res.message);
        fr["t"] = res.final_state.t;
        fr["steps"] = res.final_state.steps;
        summary["failure"] = fr;
    }
    summary["t_final"] = res.final_state.t;
    summary["steps"] = res.final_state.steps;
    summary["penrose"] = {{"initial_margin", jnum(res.initial_margin)},
                          {"final_margin", jnum(res.final_margin)},
                          {"min_margin", jnum(res.min_margin)}};
    summary["defects"] = {{"max_fluid_mass", res.max_fluid_mass_defect},
                          {"max_particle_mass", res.max_particle_mass_defect},
                          {"max_div", res.max_div_defect},
                          {"max_clipped_mass", res.max_clipped_mass}};
    summary["N_mr_final"] = jnum(res.rows.empty() ? NAN : res.rows.back().N_mr);
    ctx.write_summary("simulate", code, summary);

    ctx.out() << "simulate: " << (res.ok ? "reached t = " : "stopped at t = ") << brief(res.final_state.t) << " after "
              << res.final_state.steps << " steps\n";
    if (!res.ok) ctx.err() << to_string(*res.error) << ": " << res.message << "\n";
    return code;
}

int cmd_avgops(Context& ctx) {
    const auto& cfg = ctx.load();
    const auto& a = cfg.avgops;
    AnalyticGaussianKernel::Params base;
    base.d = cfg.grid.d;
    base.sigma = a.sigma;
    base.delta = a.delta;
    base.l0 = a.l0;
    SuiteOptions opt;
    opt.ladder = a.ladder;
    opt.T = a.T;
    opt.diff_modes = a.diff_modes;
    opt.norm.probes = a.probes;
    opt.norm.seed = ctx.globals().seed;
    auto rep = smoothing_suite(base, opt);

    std::ofstream o(ctx.path("avgop_bench.csv"));
    o << "test,Nx,k,value,verdict\n";
    for (const auto& r : rep.rows) o << r.test << ',' << r.Nx << ',' << r.k << ',' << num(r.value) << ',' << r.verdict << '\n';
    o.close();
    ctx.add_file("avgop_bench.csv");

    auto pf = [](bool b) { return b ? "pass" : "fail"; };
    ctx.out() << "l2 " << pf(rep.l2_pass) << ", graded " << pf(rep.graded_pass) << ", difference " << pf(rep.diff_pass)
              << "\n";
    ctx.write_summary("avgop-bench", kExitOk,
                      {{"verdicts", {{"l2", pf(rep.l2_pass)}, {"graded", pf(rep.graded_pass)}, {"difference", pf(rep.diff_pass)}}}});
    return kExitOk;
}

int cmd_flow(Context& ctx) {
    const auto& cfg = ctx.load();
    const auto& fc = cfg.flow;
    const int d = cfg.grid.d;
    const double A = fc.amplitude, h = fc.horizon, w = fc.omega, dt_sub = 1e-3;
    Json checks = Json::array();
    bool all = true;
    auto record = [&](const std::string& name, double value, double tol, bool upper = true) {
        bool ok = std::isfinite(value) && (upper ? value < tol : value > tol);
        all = all && ok;
        checks.push_back({{"name", name}, {"value", jnum(value)}, {"tol", tol}, {"pass", ok}});
        ctx.out() << name << " " << brief(value) << (ok ? " ok" : " FAIL") << "\n";
    };

    std::vector<double> vs, xs;
    for (int i = 0; i < fc.points; ++i) {
        vs.push_back(fc.points == 1 ? 0.0 : -2.0 + 4.0 * i / (fc.points - 1));
        xs.push_back(2.0 * std::numbers::pi * i / fc.points);
    }
    auto zero = AnalyticForce::zero(d);
    auto cst = AnalyticForce::constant(d, std::vector<double>(d, A));
    AnalyticForce smooth(d, [A, w, d](double tau, const double* x, double* out) {
        for (int a = 0; a < d; ++a) out[a] = A * std::sin(x[a]) * std::cos(w * tau);
    });

    double e = std::exp(-h);  // e^{t-s} with t = 0, s = h
    double err_zero = 0.0, err_cst = 0.0, err_jac = 0.0, err_group = 0.0;
    for (double x0 : xs)
        for (double v0 : vs) {
            double x[2] = {x0, x0}, v[2] = {v0, -v0};
            auto r0 = flow(zero, x, v, 0.0, h, dt_sub);
            auto r1 = flow(cst, x, v, 0.0, h, dt_sub);
            for (int a = 0; a < d; ++a) {
                err_zero = std::max({err_zero, std::abs(r0.X[a] - (x[a] + (1 - e) * v[a])), std::abs(r0.V[a] - e * v[a])});
                double X = x[a] + (1 - e) * v[a] + A * (h - 1 + e), V = e * v[a] + A * (1 - e);
                err_cst = std::max({err_cst, std::abs(r1.X[a] - X), std::abs(r1.V[a] - V)});
            }
            err_jac = std::max(err_jac, std::abs(r1.jacobian_phase - std::exp(d * h)));
            auto mid = flow(smooth, x, v, 0.0, 0.5 * h, dt_sub);
            auto two = flow(smooth, mid.X, mid.V, 0.5 * h, h, dt_sub);
            auto one = flow(smooth, x, v, 0.0, h, dt_sub);
            for (int a = 0; a < d; ++a)
                err_group = std::max({err_group, std::abs(two.X[a] - one.X[a]), std::abs(two.V[a] - one.V[a])});
        }
    record("flow_zero_force_error", err_zero, 1e-8);
    record("flow_constant_force_error", err_cst, 1e-8);
    record("jacobian_error", err_jac, 1e-12);
    record("group_property_error", err_group, 1e-8);

    // straightening with t = 0, s = h
    double err_psi = 0.0;
    double shift = A * (h - 1 + e) / (1 - e);
    auto cmap = straighten_map(cst, d, xs, vs, h, 0.0);
    for (std::size_t i = 0; i < cmap.nodes.size(); ++i) {
        std::size_t nv_sub = d == 1 ? vs.size() : vs.size() * vs.size();
        std::size_t jv = i % nv_sub;
        double v[2] = {vs[d == 1 ? jv : jv / vs.size()], vs[jv % vs.size()]};
        for (int a = 0; a < d; ++a) err_psi = std::max(err_psi, std::abs(cmap.nodes[i].psi[a] - (v[a] - shift)));
    }
    record("straighten_constant_error", err_psi, 1e-8);
    auto smap = straighten_map(smooth, d, xs, vs, h, 0.0);
    record("straighten_residual", smap.residual_max, 1e-10);
    record("straighten_det_min", smap.det_min, 0.5, false);
    record("straighten_det_max", smap.det_max, 2.0);

    ctx.write_json("flow_test.json", {{"amplitude", A}, {"horizon", h}, {"omega", w}, {"points", fc.points},
                                      {"checks", checks}, {"pass", all}});
    int code = all ? kExitOk : kExitNumerical;
    ctx.write_summary("flow-test", code, {{"status", all ? "pass" : "fail"}});
    return code;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"thickspray: Penrose stability checks and thick-spray simulation", "thickspray"};
    Globals g;
    app.add_option("--config", g.config_path, "INI configuration file");
    app.add_option("--out", g.out_dir, "output directory (overrides THICKSPRAY_OUT and [output] dir)");
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "seed for randomized probes");
    app.require_subcommand(1);
    app.fallthrough();
    auto* sim = app.add_subcommand("simulate", "run the regularized system to T_end");
    auto* pen = app.add_subcommand("penrose-check", "sampled Penrose condition on the initial data");
    auto* avg = app.add_subcommand("avgop-bench", "averaging operator boundedness suite");
    auto* flw = app.add_subcommand("flow-test", "closed-form checks of characteristics and straightening");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    Context ctx(g, out, err);
    try {
        if (sim->parsed()) return cmd_simulate(ctx);
        if (pen->parsed()) return cmd_penrose(ctx);
        if (avg->parsed()) return cmd_avgops(ctx);
        if (flw->parsed()) return cmd_flow(ctx);
    } catch (const Exit& e) {
        return e.code;
    } catch (const ConfigError& e) {
        for (const auto& p : e.problems()) err << "config: " << p << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << to_string(e.kind()) << ": " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}

}  // namespace thickspray
