#pragma once

// Run configuration: an INI file with sections [run], [params], [grid],
// [solver], [initial], [output], [portrait], [converge]. Command-line
// overrides are applied as `section.key=value` on top of the file.

#include "gpsim/model.hpp"
#include "gpsim/solver.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gpsim {

enum class Experiment { Simulate, Ode, Portrait, Equilibria, Adiabatic, ConvergeEps, ConvergeDt };

std::string_view to_string(Experiment e) noexcept;
/// Throws ConfigError on an unknown name.
Experiment parse_experiment(std::string_view text);

enum class InitialKind { Stationary, Perturbed, Homogeneous, File };

std::string_view to_string(InitialKind k) noexcept;
InitialKind parse_initial_kind(std::string_view text);

struct InitialCondition {
    InitialKind kind = InitialKind::Stationary;
    /// Field that `perturbed` starts from: stationary or homogeneous.
    InitialKind base = InitialKind::Stationary;
    int mode = 1;
    double amplitude = 0.1;
    PerturbTarget which = PerturbTarget::Psi;
    double rho0 = 1.0;
    double n0 = 1.0;
    double phi0 = 0.0;
    std::string path;
    /// Replace n by P/(beta + R|psi|^2) after construction.
    bool closure = false;

    bool operator==(const InitialCondition&) const = default;
};

struct PortraitConfig {
    std::size_t count = 12;
    /// Relative radius of the circle of initial points around the centre equilibrium.
    double radius = 0.5;
    /// "ode" (homogeneous system) or "pde" (perturbed homogeneous fields).
    std::string model = "ode";

    bool operator==(const PortraitConfig&) const = default;
};

struct ConvergeConfig {
    std::vector<double> taus{1e-2, 5e-3, 2.5e-3};
    double ref_factor = 16.0;
    std::vector<double> eps{0.2, 0.1, 0.05};
    /// Solvers studied by converge-dt: any of full, adiabatic, ode.
    std::vector<std::string> solvers{"full", "adiabatic", "ode"};

    bool operator==(const ConvergeConfig&) const = default;
};

struct RunConfig {
    Experiment experiment = Experiment::Simulate;
    std::string output_dir = "out";
    Params params;
    std::size_t m = 256;
    SolverConfig solver;
    InitialCondition initial;
    /// Number of evenly spaced field snapshots written by simulate/adiabatic.
    std::size_t snapshots = 6;
    PortraitConfig portrait;
    ConvergeConfig converge;

    bool operator==(const RunConfig&) const = default;
};

/// Flat `section.key -> values` view of a configuration file.
using RawConfig = std::map<std::string, std::vector<std::string>>;

/// Throws ConfigError on malformed input.
RawConfig read_raw_config(std::istream& in);
RawConfig read_raw_config_file(const std::string& path);

/// Applies "section.key=value"; throws ConfigError when there is no '='.
void apply_override(RawConfig& raw, std::string_view assignment);

/// Builds and validates a RunConfig. Missing required fields, unknown keys and
/// malformed values throw ConfigError naming the field.
RunConfig build_run_config(const RawConfig& raw);

RunConfig parse_run_config(std::istream& in);

/// INI text that parses back to an identical RunConfig.
std::string serialize_run_config(const RunConfig& cfg);

} // namespace gpsim
