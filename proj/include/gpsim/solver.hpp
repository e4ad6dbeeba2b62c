#pragma once

// Strang-splitting time steppers for the coupled condensate/reservoir system
// and for its adiabatic reduction, plus the initial-data constructors and the
// step-size and epsilon studies built on them.
//
// One step is: nonlinear half-step (pointwise ODE, configured substepper),
// exact kinetic step, nonlinear half-step. The kinetic step leaves n intact.

#include "gpsim/diagnostics.hpp"
#include "gpsim/model.hpp"
#include "gpsim/ode.hpp"
#include "gpsim/spectral.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace gpsim {

struct SolverConfig {
    double tau = 1e-3;
    double t_end = 20.0;
    OdeStepperKind substepper = OdeStepperKind::RK4;
    std::size_t save_every = 100;
    bool assert_bounds = true;
    std::uint64_t seed = 0;
    /// Reservoir stiffness cap: tau <= epsilon * tau_safety / (R max|psi|^2 + beta).
    double tau_safety = 0.5;
    bool dealias = false;

    bool operator==(const SolverConfig&) const = default;
};

/// Throws InvalidArgument unless tau > 0, t_end >= 0, save_every >= 1, tau_safety > 0.
void validate_config(const SolverConfig& cfg);

/// Largest step admitted by the reservoir stiffness cap for this state.
double reservoir_step_cap(const FieldState& state, const Params& p, double tau_safety);

/// One Strang step of size cfg.tau. Throws StepTooLarge, PositivityLost,
/// NonFiniteState, LengthMismatch.
FieldState strang_step(const FieldState& state, const Params& p, const SolverConfig& cfg, SpectralWorkspace& ws);

/// Called with every saved state (step 0, every save_every steps, final step).
using StateObserver = std::function<void(const FieldState&)>;

struct EvolveResult {
    FieldState final_state;
    std::vector<DiagnosticRecord> records;
};

/// Runs strang_step up to initial.t + cfg.t_end (the last step is shortened
/// if t_end is not a multiple of tau). With assert_bounds set, a violated
/// envelope on a saved step aborts with BoundViolation.
EvolveResult evolve(const FieldState& initial, const Params& p, const SolverConfig& cfg, SpectralWorkspace& ws,
                    const StateObserver& observer = {});

struct StationarySpec {
    double mu;       ///< chemical potential g rho* + lambda n*
    double rho_star; ///< (PR - alpha beta) / (alpha R)
    double n_star;   ///< P / (R rho* + beta) = alpha / R
};

/// Throws DeltaNonpositive unless PR - alpha beta > 0.
StationarySpec stationary_spec(const Params& p);
/// Constant fields psi = sqrt(rho*), n = n* at t = 0.
FieldState make_stationary(const Params& p, const Grid& grid);

enum class PerturbTarget { Psi, N, Both };

std::string_view to_string(PerturbTarget target) noexcept;
PerturbTarget parse_perturb_target(std::string_view text);

/// Adds amplitude * cos(2 pi mode x / L) to the selected fields; mode < 0
/// adds seeded noise band-limited to wavenumbers 1..|mode| scaled to sup-norm
/// `amplitude`. Throws PerturbationBreaksPositivity if n is no longer > 0.
FieldState perturb(const FieldState& state, const Grid& grid, int mode, double amplitude, PerturbTarget which,
                   std::uint64_t seed);

/// n = P / (beta + R |psi|^2) at every node.
std::vector<double> reservoir_closure(std::span<const Complex> psi, const Params& p);

/// One Strang step of the adiabatic equation (epsilon plays no role).
std::vector<Complex> adiabatic_step(std::span<const Complex> psi, const Params& p, const SolverConfig& cfg,
                                    SpectralWorkspace& ws);

/// Evolves initial.psi under the adiabatic equation; initial.n is ignored and
/// every reported state carries the closure reservoir.
EvolveResult adiabatic_evolve(const FieldState& initial, const Params& p, const SolverConfig& cfg,
                              SpectralWorkspace& ws, const StateObserver& observer = {});

struct EpsilonSweepRow {
    double epsilon = 0.0;
    double sup_psi_error = 0.0;    ///< max over saved steps and nodes of |psi_eps - psi_adiabatic|
    double closure_mismatch = 0.0; ///< sup_x |n_eps - P/(beta + R|psi_eps|^2)| at t_end
    bool closure_consistent = true; ///< initial n matched the closure
};

/// True when max |n0 - P/(beta + R|psi0|^2)| <= 1e-12 * max n0.
bool is_closure_consistent(const FieldState& state, const Params& p);

/// Runs the full solver for each epsilon and compares against one adiabatic run.
/// Non-closure initial data still runs; the rows are tagged.
std::vector<EpsilonSweepRow> epsilon_sweep(const FieldState& initial, const Params& p,
                                           std::span<const double> eps_ladder, const SolverConfig& cfg,
                                           const Grid& grid, std::size_t threads = 1);

struct ConvergenceStudy {
    std::vector<double> taus;
    std::vector<double> errors; ///< sup-norm endpoint error against the reference run
    double reference_tau = 0.0;
    double slope = 0.0;         ///< least-squares slope of log(error) vs log(tau)
};

/// Endpoint errors for each tau against a run with min(taus) / ref_factor.
ConvergenceStudy strang_convergence(const FieldState& initial, const Params& p, const SolverConfig& cfg,
                                    std::span<const double> taus, double ref_factor, SolverKind kind,
                                    const Grid& grid, std::size_t threads = 1);

double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

} // namespace gpsim
