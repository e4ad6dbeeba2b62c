#pragma once

// Pointwise and homogeneous right-hand sides together with the explicit
// one-step integrators shared by the homogeneous driver and the splitting
// substep of the field solvers.

#include "gpsim/errors.hpp"
#include "gpsim/model.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gpsim {

enum class OdeStepperKind { RK4, Midpoint };

std::string_view to_string(OdeStepperKind kind) noexcept;
OdeStepperKind parse_stepper_kind(std::string_view text);
/// Classical order of the scheme: 4 for RK4, 2 for Midpoint.
int stepper_order(OdeStepperKind kind) noexcept;

template <std::size_t N>
using OdeVector = std::array<double, N>;

namespace detail {

template <std::size_t N>
OdeVector<N> axpy(const OdeVector<N>& y, double a, const OdeVector<N>& k) noexcept
{
    OdeVector<N> out;
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = y[i] + a * k[i];
    }
    return out;
}

} // namespace detail

/// One explicit step of the chosen scheme for y' = rhs(y) (autonomous).
/// Throws InvalidArgument for tau <= 0 and NonFiniteState on a non-finite result.
template <std::size_t N, class Rhs>
OdeVector<N> step(const OdeVector<N>& y, Rhs&& rhs, double tau, OdeStepperKind kind)
{
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw Error(ErrorCode::InvalidArgument, "ODE step size must be finite and > 0");
    }
    OdeVector<N> out;
    if (kind == OdeStepperKind::RK4) {
        const OdeVector<N> k1 = rhs(y);
        const OdeVector<N> k2 = rhs(detail::axpy(y, 0.5 * tau, k1));
        const OdeVector<N> k3 = rhs(detail::axpy(y, 0.5 * tau, k2));
        const OdeVector<N> k4 = rhs(detail::axpy(y, tau, k3));
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = y[i] + tau / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    } else {
        const OdeVector<N> k1 = rhs(y);
        const OdeVector<N> k2 = rhs(detail::axpy(y, 0.5 * tau, k1));
        out = detail::axpy(y, tau, k2);
    }
    for (double v : out) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFiniteState, "ODE step produced a non-finite component");
        }
    }
    return out;
}

/// Homogeneous system with epsilon = 1: ((R n - alpha) rho, P - (R rho + beta) n).
std::array<double, 2> rhs_homogeneous(const std::array<double, 2>& s, const Params& p) noexcept;

struct SplitRate {
    Complex dpsi;
    double dn;
};

/// Nonlinear/dissipative part of the field system at one node:
/// psi' = -i (g|psi|^2 + lambda n) psi + (R n - alpha) psi / 2,
/// epsilon n' = P - (R|psi|^2 + beta) n.
SplitRate rhs_split_nonlinear(Complex psi, double n, const Params& p) noexcept;

/// Same right-hand side acting on (Re psi, Im psi, n).
std::array<double, 3> rhs_split_nonlinear(const std::array<double, 3>& y, const Params& p) noexcept;

/// Reduced homogeneous adiabatic equation with the factor 1/2:
/// (P R / (beta + R rho) - alpha) rho / 2.
double rhs_adiabatic_hom(double rho, const Params& p) noexcept;

/// Rate of |psi|^2 for spatially constant solutions of the adiabatic field
/// equation: (P R / (beta + R rho) - alpha) rho, i.e. 2 * rhs_adiabatic_hom.
double rhs_adiabatic_density(double rho, const Params& p) noexcept;

/// Nonlinear part of the adiabatic field equation at one node, on (Re psi, Im psi),
/// with n closed by n = P / (beta + R|psi|^2).
std::array<double, 2> rhs_adiabatic_nonlinear(const std::array<double, 2>& y, const Params& p) noexcept;

/// Assertions switched on during integrate_homogeneous.
struct HomogeneousChecks {
    bool positivity = true;
    bool growth_bound = true;
};

/// Integrates the homogeneous system from init over [init.t, init.t + t_end]
/// with step tau (the last step is shortened to land on t_end). The phase is
/// accumulated by a quadrature of the same order as the stepper: Simpson
/// weights on the RK4 stages, trapezoid for Midpoint.
/// Throws PositivityLost, NonFiniteState, BoundViolation (growth bound).
std::vector<HomState> integrate_homogeneous(const HomState& init, const Params& p, double tau, double t_end,
                                            OdeStepperKind kind, HomogeneousChecks checks = {});

/// Upper bound rho0 * exp(R P t^2 / 2 + t (R n0 - alpha)) on homogeneous densities.
double homogeneous_growth_bound(const HomState& init, const Params& p, double t) noexcept;

/// Orbit equation dn/drho = (P - (R rho + beta) n) / ((R n - alpha) rho).
/// Throws OrbitSingularity when the denominator vanishes.
double abel_orbit_rhs(double rho, double n, const Params& p);

struct OrbitCheck {
    std::size_t first = 0;   ///< index of the first trajectory sample used
    std::size_t last = 0;    ///< index of the last sample used
    std::size_t samples = 0;
    double max_deviation = 0.0;
};

/// Picks the longest arc of the trajectory on which rho is strictly monotone,
/// trims the ends where |drho/dt| drops below `trim` times its arc maximum,
/// integrates the orbit equation in rho (RK4, `substeps` per sample interval)
/// from the first sample and reports the largest |n_orbit - n_trajectory|.
OrbitCheck orbit_cross_check(const std::vector<HomState>& trajectory, const Params& p, double trim = 0.2,
                             int substeps = 8);

} // namespace gpsim
