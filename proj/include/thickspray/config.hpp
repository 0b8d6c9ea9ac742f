#pragma once

#include "thickspray/avgops.hpp"
#include "thickspray/grid.hpp"
#include "thickspray/model.hpp"
#include "thickspray/penrose.hpp"
#include "thickspray/solver.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace thickspray {

/// Parse or validation failure carrying one message per offending field.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct AvgopBenchConfig {
    double sigma = 1.0;
    double delta = 0.0;
    int l0 = 1;
    double T = 1.0;
    std::vector<int> ladder{32, 64, 128};
    int diff_modes = 32;
    int probes = 8;
};

struct FlowTestConfig {
    double amplitude = 0.5;
    double horizon = 0.5;
    double omega = 1.0;
    int points = 8;
};

struct RunConfig {
    PhaseGrid grid{1, 32, 128, 8.0};
    double pressure_gamma = 2.0;
    double pressure_offset = 0.0;  // p(rho) = rho^gamma + offset
    KineticInit kinetic;
    FluidInit fluid;
    SolverConfig solver;  // physics, time, penrose and diagnostics fields
    bool penrose_require = true;
    std::string out_dir = "out";
    int snapshot_every = 0;
    AvgopBenchConfig avgops;
    FlowTestConfig flow;

    RunConfig();
    PressureLaw pressure_law() const;
    /// The configuration as INI text, defaults included.
    std::string echo() const;
};

/// Reads an INI file. Unknown sections or keys and out-of-range values are
/// all collected before a ConfigError is thrown.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

}  // namespace thickspray
