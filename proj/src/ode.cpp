#include "gpsim/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gpsim {

std::string_view to_string(OdeStepperKind kind) noexcept
{
    return kind == OdeStepperKind::RK4 ? "rk4" : "midpoint";
}

OdeStepperKind parse_stepper_kind(std::string_view text)
{
    if (text == "rk4" || text == "RK4") {
        return OdeStepperKind::RK4;
    }
    if (text == "midpoint" || text == "Midpoint") {
        return OdeStepperKind::Midpoint;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown substepper '" + std::string(text) + "' (rk4|midpoint)");
}

int stepper_order(OdeStepperKind kind) noexcept
{
    return kind == OdeStepperKind::RK4 ? 4 : 2;
}

std::array<double, 2> rhs_homogeneous(const std::array<double, 2>& s, const Params& p) noexcept
{
    const double rho = s[0];
    const double n = s[1];
    return {(p.R * n - p.alpha) * rho, p.P - (p.R * rho + p.beta) * n};
}

SplitRate rhs_split_nonlinear(Complex psi, double n, const Params& p) noexcept
{
    const double rho = std::norm(psi);
    const Complex rate(0.5 * (p.R * n - p.alpha), -(p.g * rho + p.lambda * n));
    return {rate * psi, (p.P - (p.R * rho + p.beta) * n) / p.epsilon};
}

std::array<double, 3> rhs_split_nonlinear(const std::array<double, 3>& y, const Params& p) noexcept
{
    const SplitRate r = rhs_split_nonlinear(Complex(y[0], y[1]), y[2], p);
    return {r.dpsi.real(), r.dpsi.imag(), r.dn};
}

double rhs_adiabatic_hom(double rho, const Params& p) noexcept
{
    return 0.5 * (p.P * p.R / (p.beta + p.R * rho) - p.alpha) * rho;
}

double rhs_adiabatic_density(double rho, const Params& p) noexcept
{
    return (p.P * p.R / (p.beta + p.R * rho) - p.alpha) * rho;
}

std::array<double, 2> rhs_adiabatic_nonlinear(const std::array<double, 2>& y, const Params& p) noexcept
{
    const Complex psi(y[0], y[1]);
    const double rho = std::norm(psi);
    const double n = p.P / (p.beta + p.R * rho);
    const Complex rate(0.5 * (p.R * n - p.alpha), -(p.g * rho + p.lambda * n));
    const Complex d = rate * psi;
    return {d.real(), d.imag()};
}

double homogeneous_growth_bound(const HomState& init, const Params& p, double t) noexcept
{
    return init.rho * std::exp(0.5 * p.R * p.P * t * t + t * (p.R * init.n - p.alpha));
}

std::vector<HomState> integrate_homogeneous(const HomState& init, const Params& p, double tau, double t_end,
                                            OdeStepperKind kind, HomogeneousChecks checks)
{
    if (!(init.rho > 0.0) || !(init.n > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "homogeneous initial data needs rho > 0 and n > 0");
    }
    if (!(tau > 0.0) || !(t_end >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "need tau > 0 and t_end >= 0");
    }

    const auto rhs3 = [&p](const std::array<double, 3>& y) -> std::array<double, 3> {
        const auto d = rhs_homogeneous({y[0], y[1]}, p);
        return {d[0], d[1], -(p.g * y[0] + p.lambda * y[1])};
    };
    const auto rhs2 = [&p](const std::array<double, 2>& y) { return rhs_homogeneous(y, p); };

    const auto steps = static_cast<std::size_t>(std::ceil(t_end / tau - 1e-9));
    std::vector<HomState> out;
    out.reserve(steps + 1);
    out.push_back(init);

    HomState cur = init;
    for (std::size_t k = 0; k < steps; ++k) {
        const double t_next = (k + 1 == steps) ? init.t + t_end : init.t + static_cast<double>(k + 1) * tau;
        const double h = t_next - cur.t;
        HomState next;
        if (kind == OdeStepperKind::RK4) {
            const auto y = step<3>({cur.rho, cur.n, cur.phi}, rhs3, h, kind);
            next = {t_next, y[0], y[1], y[2]};
        } else {
            const auto y = step<2>({cur.rho, cur.n}, rhs2, h, kind);
            const double f0 = p.g * cur.rho + p.lambda * cur.n;
            const double f1 = p.g * y[0] + p.lambda * y[1];
            next = {t_next, y[0], y[1], cur.phi - 0.5 * h * (f0 + f1)};
        }
        if (checks.positivity && (!(next.rho > 0.0) || !(next.n > 0.0))) {
            throw Error(ErrorCode::PositivityLost,
                        "homogeneous densities left the positive quadrant at t=" + std::to_string(t_next) +
                            "; reduce the step size");
        }
        if (checks.growth_bound) {
            const double bound = homogeneous_growth_bound(init, p, t_next - init.t);
            if (next.rho > bound * (1.0 + 1e-9) + 1e-300) {
                throw Error(ErrorCode::BoundViolation,
                            "homogeneous growth bound exceeded at t=" + std::to_string(t_next));
            }
        }
        out.push_back(next);
        cur = next;
    }
    return out;
}

double abel_orbit_rhs(double rho, double n, const Params& p)
{
    const double denom = (p.R * n - p.alpha) * rho;
    if (denom == 0.0 || std::abs(p.R * n - p.alpha) <= 1e-15 * p.alpha) {
        throw Error(ErrorCode::OrbitSingularity,
                    "orbit equation is singular at rho=" + std::to_string(rho) + ", n=" + std::to_string(n));
    }
    return (p.P - (p.R * rho + p.beta) * n) / denom;
}

OrbitCheck orbit_cross_check(const std::vector<HomState>& trajectory, const Params& p, double trim, int substeps)
{
    if (trajectory.size() < 3) {
        throw Error(ErrorCode::InvalidArgument, "orbit check needs at least three samples");
    }

    // Longest run of strictly monotone rho.
    std::size_t best_first = 0;
    std::size_t best_last = 0;
    std::size_t run_first = 0;
    int run_sign = 0;
    for (std::size_t k = 1; k < trajectory.size(); ++k) {
        const double d = trajectory[k].rho - trajectory[k - 1].rho;
        const int sign = (d > 0.0) - (d < 0.0);
        if (sign == 0 || sign != run_sign) {
            run_first = k - 1;
            run_sign = sign;
        }
        if (sign != 0 && k - run_first > best_last - best_first) {
            best_first = run_first;
            best_last = k;
        }
    }
    if (best_last - best_first < 2) {
        throw Error(ErrorCode::InvalidArgument, "trajectory has no monotone arc in rho");
    }

    double peak = 0.0;
    for (std::size_t k = best_first; k <= best_last; ++k) {
        peak = std::max(peak, std::abs(rhs_homogeneous({trajectory[k].rho, trajectory[k].n}, p)[0]));
    }
    std::size_t first = best_first;
    std::size_t last = best_last;
    const auto speed = [&](std::size_t k) {
        return std::abs(rhs_homogeneous({trajectory[k].rho, trajectory[k].n}, p)[0]);
    };
    while (first < last && speed(first) < trim * peak) {
        ++first;
    }
    while (last > first && speed(last) < trim * peak) {
        --last;
    }
    if (last - first < 2) {
        throw Error(ErrorCode::InvalidArgument, "monotone arc too short after trimming");
    }

    OrbitCheck result{first, last, last - first + 1, 0.0};
    double n = trajectory[first].n;
    const auto orbit = [&p](double rho, double nv) { return abel_orbit_rhs(rho, nv, p); };
    for (std::size_t k = first; k < last; ++k) {
        const double r0 = trajectory[k].rho;
        const double h = (trajectory[k + 1].rho - r0) / substeps;
        for (int s = 0; s < substeps; ++s) {
            const double r = r0 + s * h;
            const double k1 = orbit(r, n);
            const double k2 = orbit(r + 0.5 * h, n + 0.5 * h * k1);
            const double k3 = orbit(r + 0.5 * h, n + 0.5 * h * k2);
            const double k4 = orbit(r + h, n + h * k3);
            n += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        result.max_deviation = std::max(result.max_deviation, std::abs(n - trajectory[k + 1].n));
    }
    return result;
}

} // namespace gpsim
