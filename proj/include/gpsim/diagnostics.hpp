#pragma once

// Integral functionals, norms and a-priori envelopes evaluated on nodal
// states. All integrals use h * sum, which is spectrally accurate for
// smooth periodic fields.

#include "gpsim/model.hpp"
#include "gpsim/spectral.hpp"

#include <span>
#include <string>
#include <vector>

namespace gpsim {

enum class SolverKind { Full, Adiabatic };

struct BoundFlags {
    bool mass = true;         ///< total-mass envelope
    bool reservoir = true;    ///< pointwise reservoir envelope
    bool positivity = true;   ///< min n > 0
    bool adiabatic_l2 = true; ///< L2 envelope of the adiabatic equation

    bool all() const noexcept { return mass && reservoir && positivity && adiabatic_l2; }
    /// Comma-separated names of the failing envelopes ("" when all pass).
    std::string failures() const;
};

struct DiagnosticRecord {
    double t = 0.0;
    double mass_c = 0.0;     ///< int |psi|^2
    double mass_r = 0.0;     ///< int n
    double mass_total = 0.0; ///< mass_c + epsilon * mass_r
    double l2_psi = 0.0;
    double l1_n = 0.0;
    double linf_n = 0.0;
    double min_n = 0.0;
    double energy_E = 0.0;
    double functional_F = 0.0; ///< NaN when min_n <= 0
    double lyapunov_L = 0.0;
    double current = 0.0;      ///< int Im(conj(psi) psi_x)
    BoundFlags bound_flags;
};

struct Masses {
    double mass_c;
    double mass_r;
    double mass_total;
};

Masses masses(const FieldState& state, const Params& p, const Grid& grid);

struct EnergyDensity {
    std::vector<double> e; ///< |psi_x|^2/2 + g|psi|^4/2 + lambda n |psi|^2
    double E;
};

EnergyDensity energy_density_and_E(const FieldState& state, const Params& p, const Grid& grid,
                                   SpectralWorkspace& ws);

/// E + (eps/2) int (sqrt(n)_x)^2 - (lambda P / R) int ln n + (beta lambda / R) int n.
/// Throws NonpositiveReservoir when min n <= 0.
double functional_F(const FieldState& state, const Params& p, const Grid& grid, SpectralWorkspace& ws);

/// (P/beta) int |psi|^2 + (1/2) int (n - P/beta)^2.
double lyapunov_L(const FieldState& state, const Params& p, const Grid& grid);

double current(const FieldState& state, const Grid& grid, SpectralWorkspace& ws);

/// All functionals of one state; bound flags are left at their defaults.
DiagnosticRecord make_record(const FieldState& state, const Params& p, SpectralWorkspace& ws);

// Envelopes; t is measured from the reference (initial) time.
double mass_envelope(double mass0, const Params& p, double t) noexcept;
double reservoir_envelope_sq(double n0, const Params& p, double t) noexcept;
double adiabatic_l2_envelope_sq(double l2sq0, const Params& p, double t) noexcept;

/// Pointwise envelope checks against a fixed initial state.
class BoundMonitor {
public:
    BoundMonitor(const FieldState& initial, const Params& p, const Grid& grid, SolverKind kind);

    BoundFlags check(const FieldState& state) const;

    double mass_tolerance() const noexcept { return mass_tol_; }
    double reservoir_tolerance() const noexcept { return reservoir_tol_; }

private:
    Params p_;
    Grid grid_;
    SolverKind kind_;
    double t0_;
    double mass0_;
    double l2sq0_;
    std::vector<double> n0_;
    double mass_tol_;
    double reservoir_tol_;
    double l2_tol_;
};

struct BoundVerdict {
    double t = 0.0;
    BoundFlags flags;
    bool passed() const noexcept { return flags.all(); }
};

/// Record-level envelope verdicts, the first record serving as initial data.
/// Reservoir flags already set pointwise on a record are carried over.
std::vector<BoundVerdict> check_bounds(std::span<const DiagnosticRecord> records, const Params& p, SolverKind kind);
bool all_passed(std::span<const BoundVerdict> verdicts) noexcept;

struct EnergyEnvelopeFit {
    double C1 = 0.0;
    double C2 = 0.0;
    std::size_t prefix = 0;      ///< records used for the fit
    bool holds_on_remainder = false;
    double max_excess = 0.0;     ///< max over the remainder of F - envelope
};

/// Fits nonnegative C1, C2 of F(t) <= exp(C1 t)(F0 + C2/C1) - C2/C1 on a
/// prefix of the run and checks the remainder. C1 is taken as 2 R max n over
/// the prefix; C2 is the smallest value, at least -C1 F0, that makes the
/// prefix consistent.
EnergyEnvelopeFit fit_energy_envelope(std::span<const DiagnosticRecord> records, const Params& p,
                                      double prefix_fraction = 0.25);

/// max n <= (1 + relative) P / beta on all records with t - t0 >= 10 eps / beta.
bool reservoir_limsup_ok(std::span<const DiagnosticRecord> records, const Params& p, double relative = 0.01);

} // namespace gpsim
