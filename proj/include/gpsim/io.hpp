#pragma once

// Deterministic CSV/JSON emission. Floating values use 17 significant
// digits, lines end in LF, and no locale formatting is applied.

#include "gpsim/diagnostics.hpp"
#include "gpsim/equilibria.hpp"
#include "gpsim/model.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gpsim {

/// printf("%.17g") in the C locale.
std::string format_double(double v);

inline constexpr const char* kTimeseriesHeader =
    "t,mass_c,mass_r,mass_total,l2_psi,l1_n,linf_n,min_n,energy_E,functional_F,lyapunov_L,current";

/// Throws InvalidArgument (empty), NonMonotoneTime, IoError.
void write_timeseries(std::span<const DiagnosticRecord> records, const std::filesystem::path& path);
/// Inverse of write_timeseries (bound flags are not stored and read back as passing).
std::vector<DiagnosticRecord> read_timeseries(const std::filesystem::path& path);

/// 16 hex digits of FNV-1a over the bit patterns of every Params field.
std::string params_hash(const Params& p);

/// CSV `x,re_psi,im_psi,abs2_psi,n` plus `<stem>.json` with t, params hash and grid.
void write_field_snapshot(const FieldState& state, const Grid& grid, const Params& p,
                          const std::filesystem::path& csv_path);
/// Reads a snapshot CSV (t from the sidecar when present). Throws IoError, LengthMismatch.
FieldState read_field_snapshot(const std::filesystem::path& csv_path, const Grid& grid);

struct PhaseTrajectory {
    std::size_t id = 0;
    std::vector<double> t;
    std::vector<double> l2_psi;
    std::vector<double> l1_n;
};

struct PhaseMarker {
    std::string name;
    double l2_psi = 0.0;
    double l1_n = 0.0;
    std::string classification;
};

PhaseTrajectory phase_trajectory(std::size_t id, std::span<const DiagnosticRecord> records);
PhaseTrajectory phase_trajectory(std::size_t id, std::span<const HomState> trajectory, const Params& p);

/// Norm images (sqrt(rho* L), n* L) of the equilibria with rho* >= 0.
std::vector<PhaseMarker> equilibrium_markers(const Params& p);

/// Long-format CSV `trajectory_id,t,l2_psi,l1_n` and a `<stem>.json` sidecar with the markers.
void phase_plot_data(std::span<const PhaseTrajectory> trajectories, std::span<const PhaseMarker> markers,
                     const std::filesystem::path& csv_path);

/// Writes text with LF endings; throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace gpsim
