#pragma once

// Closed-form homogeneous equilibria, their linearisation and stability
// classification, and the Lyapunov functional of the condensate-free state.

#include "gpsim/model.hpp"

#include <array>
#include <span>
#include <string_view>

namespace gpsim {

enum class Classification { StableSpiral, StableNode, Saddle, NonHyperbolic };

/// snake_case name used in JSON output, e.g. "stable_spiral".
std::string_view to_string(Classification c) noexcept;

using Matrix2 = std::array<std::array<double, 2>, 2>;

struct EquilibriumReport {
    std::array<double, 2> point{};        ///< (rho*, n*)
    Matrix2 jacobian{};
    std::array<Complex, 2> eigenvalues{};
    Classification classification = Classification::NonHyperbolic;
    double delta = 0.0;                   ///< P R - alpha beta
    double spiral_threshold = 0.0;        ///< P^2 R^2 / (4 alpha^2)
};

/// |delta| <= 1e-12 * max(PR, alpha beta).
bool is_non_hyperbolic(const Params& p) noexcept;

/// Equilibrium with condensate: ((PR - alpha beta)/(alpha R), alpha/R).
EquilibriumReport xi1(const Params& p);
/// Condensate-free equilibrium: (0, P/beta).
EquilibriumReport xi2(const Params& p);

struct BetaDominanceReport {
    Classification classification;
    double discriminant; ///< (PR)^2 - 4 alpha^2 PR + 4 alpha^3 beta
};

/// Node/spiral discriminant for xi1 when delta > 0. Throws PreconditionDeltaNonpositive.
BetaDominanceReport classify_beta_gg_alpha(const Params& p);

/// l = (P/beta) rho + (n - P/beta)^2 / 2.
double lyapunov_ell(const std::array<double, 2>& s, const Params& p) noexcept;
/// dl/dt along the homogeneous flow; nonpositive for delta < 0 and rho >= 0.
double lyapunov_ell_rate(const std::array<double, 2>& s, const Params& p) noexcept;

/// Least-squares slope c of log(values) = a - c t (the measured decay rate).
/// Nonpositive entries are rejected with InvalidArgument.
double fit_exponential_rate(std::span<const double> times, std::span<const double> values);

} // namespace gpsim
