#pragma once

// Experiment drivers behind the gpsim command line. Each driver writes its
// outputs, the resolved config.ini and a manifest.json into the output
// directory. Outputs depend only on the configuration and seed.

#include "gpsim/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace gpsim {

struct ManifestEntry {
    std::string file;    ///< path relative to the output directory
    std::string content; ///< what the file holds
};

/// Initial field described by cfg.initial on the given grid.
FieldState build_initial_state(const RunConfig& cfg, const Grid& grid);

/// Initial points of the portrait experiment: a circle of relative radius
/// cfg.portrait.radius around xi1 (delta > 0) or around (n*, n*) for xi2.
std::vector<HomState> portrait_initial_points(const RunConfig& cfg);

/// Runs cfg.experiment, returning the files written (manifest included).
std::vector<ManifestEntry> run_experiment(const RunConfig& cfg, std::ostream& log);

/// `gpsim <experiment> --config <path> [--seed N] [--out DIR] [--set section.key=value]...`
/// Returns 0 on success, 2 on BoundViolation, 1 otherwise.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace gpsim
