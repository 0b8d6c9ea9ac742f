#include <doctest.h>

#include "thickspray/cli.hpp"
#include "thickspray/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace thickspray;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> problems_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.problems();
    }
    return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
    return std::any_of(problems.begin(), problems.end(),
                       [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("thickspray_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p.string();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Outcome {
    int code;
    std::string out, err;
};

Outcome call(std::vector<std::string> args) {
    args.insert(args.begin(), "thickspray");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

// Small grid, a few steps.
const char* kShortRun = R"([grid]
Nx = 16
Nv = 64
[time]
dt = 0.002
T_end = 0.02
[penrose]
samples_phi = 16
samples_beta = 12
samples_dir = 8
)";

}  // namespace

TEST_CASE("minimal config takes defaults and echo round-trips") {
    auto c = parse_config_text("");
    RunConfig d;
    CHECK(c.grid.Nx == d.grid.Nx);
    CHECK(c.solver.dt == d.solver.dt);
    CHECK(c.kinetic.bumps.size() == 1);

    auto text = c.echo();
    CHECK(text.find("[grid]") != std::string::npos);
    CHECK(parse_config_text(text).echo() == text);

    auto e = parse_config_text("[grid]\nd = 2\nNx = 16\n[initial]\nbumps = 0.1,1,0.5,-0.5; 0.2,0.5,0\nu0 = 0.1,0.2\n"
                               "[time]\nsplitting = lie\nmomentum_mode = semi-implicit\n");
    CHECK(e.grid.d == 2);
    REQUIRE(e.kinetic.bumps.size() == 2);
    CHECK(e.kinetic.bumps[0].center[1] == -0.5);
    CHECK(e.fluid.u0[1] == 0.2);
    CHECK(e.solver.splitting == Splitting::Lie);
    CHECK(e.solver.momentum == MomentumMode::SemiImplicit);
    CHECK(parse_config_text(e.echo()).echo() == e.echo());
}

TEST_CASE("invalid values are reported with their field path") {
    CHECK(mentions(problems_of("[grid]\nNx = 0\n"), "grid.Nx"));
    CHECK(mentions(problems_of("[physics]\nTheta = 1.5\n"), "physics.Theta"));
    CHECK(mentions(problems_of("[grid]\nNx = sixteen\n"), "grid.Nx: cannot parse"));
    CHECK(mentions(problems_of("[grid]\nspeed = 3\n"), "grid.speed: unknown key"));
    CHECK(mentions(problems_of("[plotting]\ncolor = red\n"), "plotting: unknown section"));
    CHECK(mentions(problems_of("[time]\nsplitting = yoshida\n"), "time.splitting"));
    CHECK(mentions(problems_of("[initial]\nbumps = 1,2\n"), "initial.bumps"));

    // every violation is collected, not just the first
    auto all = problems_of("[grid]\nNx = 0\nVmax = -1\n[physics]\nTheta = 1.5\n[time]\ndt = 0\n");
    CHECK(all.size() >= 4);
    CHECK(mentions(all, "grid.Vmax"));
    CHECK(mentions(all, "time.dt"));

    CHECK_THROWS_AS(parse_config("/nonexistent/thickspray.ini"), ConfigError);
}

TEST_CASE("usage errors exit 1") {
    auto r = call({"frobnicate"});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("Usage") != std::string::npos);
    CHECK(call({}).code == kExitUsage);
    CHECK(call({"--config", "/nonexistent/x.ini", "penrose-check"}).code == kExitUsage);

    auto dir = scratch("usage");
    auto bad = write_file(dir / "bad.ini", "[grid]\nNx = 0\n");
    r = call({"penrose-check", "--config", bad, "--out", (dir / "out").string()});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("grid.Nx") != std::string::npos);
    CHECK(call({"--help"}).code == kExitOk);
}

TEST_CASE("penrose-check on a Maxwellian passes and writes a report") {
    auto dir = scratch("penrose");
    auto cfg = write_file(dir / "ok.ini", "[grid]\nNx = 16\n");
    auto r = call({"penrose-check", "--config", cfg, "--out", (dir / "out").string()});
    CHECK(r.code == kExitOk);
    auto rep = nlohmann::json::parse(slurp(dir / "out" / "penrose_report.json"));
    CHECK(rep["pass"].get<bool>());
    CHECK(rep["margin"].get<double>() > 0.1);
    CHECK(rep["variant"] == "standard");

    // a well separated two-stream profile fails and is refused
    auto cold = write_file(dir / "cold.ini",
                           "[grid]\nNx = 8\nVmax = 10\n[initial]\nbumps = 0.25,1,3; 0.25,1,-3\nmod_amp = 0\n"
                           "[penrose]\nsamples_phi = 32\nsamples_beta = 24\n");
    r = call({"penrose-check", "--config", cold, "--out", (dir / "cold").string()});
    CHECK(r.code == kExitRefused);
    rep = nlohmann::json::parse(slurp(dir / "cold" / "penrose_report.json"));
    CHECK_FALSE(rep["pass"].get<bool>());
}

TEST_CASE("simulate refuses bad initial data") {
    auto dir = scratch("refuse");
    // rho_f = 0.11 at the density peak, above Theta
    auto viol = write_file(dir / "b.ini", std::string(kShortRun) + "[physics]\nTheta = 0.05\n");
    auto r = call({"simulate", "--config", viol, "--out", (dir / "b").string()});
    CHECK(r.code == kExitRefused);
    auto s = nlohmann::json::parse(slurp(dir / "b" / "summary.json"));
    CHECK(s["status"] == "refused");
    CHECK(s["failure"]["kind"] == "bound");

    auto press = write_file(dir / "p.ini", std::string(kShortRun) + "[physics]\npressure_offset = 1\n");
    r = call({"simulate", "--config", press, "--out", (dir / "p").string()});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("not admissible") != std::string::npos);

    auto cfl = write_file(dir / "c.ini", "[grid]\nNx = 16\nNv = 64\n[time]\ndt = 0.5\nT_end = 1\n");
    CHECK(call({"simulate", "--config", cfl, "--out", (dir / "c").string()}).code == kExitUsage);
}

TEST_CASE("simulate output is deterministic and the summary is complete") {
    auto dir = scratch("determinism");
    auto cfg = write_file(dir / "run.ini", std::string(kShortRun) + "[output]\nsnapshot_every = 5\n");
    auto a = call({"simulate", "--config", cfg, "--out", (dir / "a").string(), "--threads", "2"});
    auto b = call({"simulate", "--config", cfg, "--out", (dir / "b").string(), "--threads", "2"});
    REQUIRE(a.code == kExitOk);
    REQUIRE(b.code == kExitOk);
    auto csv = slurp(dir / "a" / "diagnostics.csv");
    CHECK(csv == slurp(dir / "b" / "diagnostics.csv"));
    CHECK(csv.rfind("t,fluid_mass,particle_mass,clipped_mass,min_f,min_rho,max_rhof,penrose_margin,N_mr,div_defect\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);  // header + steps 0..10
    CHECK(a.out.find("[grid]") != std::string::npos);  // echo

    auto s = nlohmann::json::parse(slurp(dir / "a" / "summary.json"));
    CHECK(s["status"] == "ok");
    CHECK(s["steps"] == 10);
    auto files = s["files"].get<std::vector<std::string>>();
    CHECK(files.size() == 1 + 3 * 4);  // csv + (f, rho, m, u0) at steps 0, 5, 10
    for (const auto& f : files) {
        auto p = dir / "a" / f;
        REQUIRE(fs::exists(p));
        if (p.extension() == ".json") CHECK(nlohmann::json::accept(slurp(p)));
    }
}

TEST_CASE("output directory precedence") {
    auto dir = scratch("precedence");
    auto cfg = write_file(dir / "c.ini", "[grid]\nNx = 16\n[output]\ndir = " + (dir / "from_config").string() + "\n");
    ::setenv("THICKSPRAY_OUT", (dir / "from_env").string().c_str(), 1);
    CHECK(call({"penrose-check", "--config", cfg}).code == kExitOk);
    CHECK(fs::exists(dir / "from_env" / "penrose_report.json"));
    CHECK(call({"penrose-check", "--config", cfg, "--out", (dir / "from_flag").string()}).code == kExitOk);
    CHECK(fs::exists(dir / "from_flag" / "penrose_report.json"));
    ::unsetenv("THICKSPRAY_OUT");
    CHECK(call({"penrose-check", "--config", cfg}).code == kExitOk);
    CHECK(fs::exists(dir / "from_config" / "penrose_report.json"));
}

TEST_CASE("flow-test and avgop-bench") {
    auto dir = scratch("flow");
    auto r = call({"flow-test", "--out", (dir / "f").string()});
    CHECK(r.code == kExitOk);
    auto j = nlohmann::json::parse(slurp(dir / "f" / "flow_test.json"));
    CHECK(j["pass"].get<bool>());
    CHECK(j["checks"].size() == 8);

    auto cfg = write_file(dir / "a.ini", "[avgops]\nladder = 16,32\ndiff_modes = 4\n");
    r = call({"avgop-bench", "--config", cfg, "--out", (dir / "a").string(), "--seed", "7"});
    CHECK(r.code == kExitOk);
    auto csv = slurp(dir / "a" / "avgop_bench.csv");
    CHECK(csv.rfind("test,Nx,k,value,verdict\n", 0) == 0);
    CHECK(csv.find("diff_mode,") != std::string::npos);
}
