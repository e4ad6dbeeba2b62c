#include "gpsim/diagnostics.hpp"

#include "gpsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gpsim {

std::string BoundFlags::failures() const
{
    std::string out;
    const auto add = [&out](bool ok, const char* name) {
        if (!ok) {
            if (!out.empty()) {
                out += ", ";
            }
            out += name;
        }
    };
    add(mass, "mass envelope");
    add(reservoir, "reservoir envelope");
    add(positivity, "reservoir positivity");
    add(adiabatic_l2, "adiabatic L2 envelope");
    return out;
}

Masses masses(const FieldState& state, const Params& p, const Grid& grid)
{
    double mc = 0.0;
    double mr = 0.0;
    for (std::size_t j = 0; j < state.size(); ++j) {
        mc += std::norm(state.psi[j]);
        mr += state.n[j];
    }
    mc *= grid.h();
    mr *= grid.h();
    return {mc, mr, mc + p.epsilon * mr};
}

EnergyDensity energy_density_and_E(const FieldState& state, const Params& p, const Grid& grid,
                                   SpectralWorkspace& ws)
{
    const auto dpsi = spectral_derivative(std::span<const Complex>(state.psi), 1, ws);
    EnergyDensity out{std::vector<double>(state.size()), 0.0};
    for (std::size_t j = 0; j < state.size(); ++j) {
        const double rho = std::norm(state.psi[j]);
        out.e[j] = 0.5 * std::norm(dpsi[j]) + 0.5 * p.g * rho * rho + p.lambda * state.n[j] * rho;
        out.E += out.e[j];
    }
    out.E *= grid.h();
    return out;
}

double functional_F(const FieldState& state, const Params& p, const Grid& grid, SpectralWorkspace& ws)
{
    const double min_n = *std::min_element(state.n.begin(), state.n.end());
    if (!(min_n > 0.0)) {
        throw Error(ErrorCode::NonpositiveReservoir, "ln n is undefined for min n = " + std::to_string(min_n));
    }
    std::vector<double> root(state.size());
    for (std::size_t j = 0; j < state.size(); ++j) {
        root[j] = std::sqrt(state.n[j]);
    }
    const auto droot = spectral_derivative(std::span<const double>(root), 1, ws);

    double grad = 0.0;
    double log_sum = 0.0;
    double n_sum = 0.0;
    for (std::size_t j = 0; j < state.size(); ++j) {
        grad += droot[j] * droot[j];
        log_sum += std::log(state.n[j]);
        n_sum += state.n[j];
    }
    const double h = grid.h();
    const double E = energy_density_and_E(state, p, grid, ws).E;
    return E + 0.5 * p.epsilon * grad * h - p.lambda * p.P / p.R * log_sum * h + p.beta * p.lambda / p.R * n_sum * h;
}

double lyapunov_L(const FieldState& state, const Params& p, const Grid& grid)
{
    const double n_bar = p.P / p.beta;
    double mass = 0.0;
    double dev = 0.0;
    for (std::size_t j = 0; j < state.size(); ++j) {
        mass += std::norm(state.psi[j]);
        const double d = state.n[j] - n_bar;
        dev += d * d;
    }
    return grid.h() * (n_bar * mass + 0.5 * dev);
}

double current(const FieldState& state, const Grid& grid, SpectralWorkspace& ws)
{
    const auto dpsi = spectral_derivative(std::span<const Complex>(state.psi), 1, ws);
    double j_sum = 0.0;
    for (std::size_t j = 0; j < state.size(); ++j) {
        j_sum += (std::conj(state.psi[j]) * dpsi[j]).imag();
    }
    return grid.h() * j_sum;
}

DiagnosticRecord make_record(const FieldState& state, const Params& p, SpectralWorkspace& ws)
{
    const Grid& grid = ws.grid();
    check_state(state, grid);

    DiagnosticRecord r;
    r.t = state.t;
    const Masses m = masses(state, p, grid);
    r.mass_c = m.mass_c;
    r.mass_r = m.mass_r;
    r.mass_total = m.mass_total;
    r.l2_psi = std::sqrt(m.mass_c);

    double l1 = 0.0;
    r.linf_n = -std::numeric_limits<double>::infinity();
    r.min_n = std::numeric_limits<double>::infinity();
    for (double v : state.n) {
        l1 += std::abs(v);
        r.linf_n = std::max(r.linf_n, v);
        r.min_n = std::min(r.min_n, v);
    }
    r.l1_n = grid.h() * l1;

    r.energy_E = energy_density_and_E(state, p, grid, ws).E;
    r.functional_F = r.min_n > 0.0 ? functional_F(state, p, grid, ws) : std::numeric_limits<double>::quiet_NaN();
    r.lyapunov_L = lyapunov_L(state, p, grid);
    r.current = current(state, grid, ws);
    return r;
}

double mass_envelope(double mass0, const Params& p, double t) noexcept
{
    const double gamma = std::min(p.alpha, p.beta);
    const double limit = p.P * p.domain_length / gamma;
    return std::exp(-gamma * t) * (mass0 - limit) + limit;
}

double reservoir_envelope_sq(double n0, const Params& p, double t) noexcept
{
    const double limit = p.P * p.P / (p.beta * p.beta);
    return std::exp(-t * p.beta / p.epsilon) * (n0 * n0 - limit) + limit;
}

double adiabatic_l2_envelope_sq(double l2sq0, const Params& p, double t) noexcept
{
    const double limit = p.P * p.domain_length / p.alpha;
    return (l2sq0 - limit) * std::exp(-p.alpha * t) + limit;
}

namespace {

constexpr double kTolerance = 1e-8;

} // namespace

BoundMonitor::BoundMonitor(const FieldState& initial, const Params& p, const Grid& grid, SolverKind kind)
    : p_(p)
    , grid_(grid)
    , kind_(kind)
    , t0_(initial.t)
    , n0_(initial.n)
{
    const Masses m = masses(initial, p, grid);
    mass0_ = m.mass_total;
    l2sq0_ = m.mass_c;
    const double n0_max = n0_.empty() ? 0.0 : *std::max_element(n0_.begin(), n0_.end());
    mass_tol_ = kTolerance * std::max(mass0_, p.P * p.domain_length / std::min(p.alpha, p.beta));
    reservoir_tol_ = kTolerance * std::max(n0_max * n0_max, p.P * p.P / (p.beta * p.beta));
    l2_tol_ = kTolerance * std::max(l2sq0_, p.P * p.domain_length / p.alpha);
}

BoundFlags BoundMonitor::check(const FieldState& state) const
{
    BoundFlags f;
    const double t = state.t - t0_;
    const Masses m = masses(state, p_, grid_);
    const double min_n = *std::min_element(state.n.begin(), state.n.end());
    f.positivity = min_n > 0.0;
    if (kind_ == SolverKind::Full) {
        f.mass = m.mass_total <= mass_envelope(mass0_, p_, t) + mass_tol_;
        for (std::size_t j = 0; j < state.size(); ++j) {
            if (state.n[j] * state.n[j] > reservoir_envelope_sq(n0_[j], p_, t) + reservoir_tol_) {
                f.reservoir = false;
                break;
            }
        }
    } else {
        f.adiabatic_l2 = m.mass_c <= adiabatic_l2_envelope_sq(l2sq0_, p_, t) + l2_tol_;
    }
    return f;
}

std::vector<BoundVerdict> check_bounds(std::span<const DiagnosticRecord> records, const Params& p, SolverKind kind)
{
    std::vector<BoundVerdict> out;
    if (records.empty()) {
        return out;
    }
    const DiagnosticRecord& first = records.front();
    const double n_limit_sq = p.P * p.P / (p.beta * p.beta);
    const double mass_tol = kTolerance * std::max(first.mass_total, p.P * p.domain_length / std::min(p.alpha, p.beta));
    const double res_tol = kTolerance * std::max(first.linf_n * first.linf_n, n_limit_sq);
    const double l2sq0 = first.l2_psi * first.l2_psi;
    const double l2_tol = kTolerance * std::max(l2sq0, p.P * p.domain_length / p.alpha);

    out.reserve(records.size());
    for (const DiagnosticRecord& r : records) {
        BoundVerdict v;
        v.t = r.t;
        const double t = r.t - first.t;
        v.flags.positivity = r.min_n > 0.0 && r.bound_flags.positivity;
        if (kind == SolverKind::Full) {
            v.flags.mass = r.mass_total <= mass_envelope(first.mass_total, p, t) + mass_tol;
            v.flags.reservoir = r.bound_flags.reservoir &&
                                r.linf_n * r.linf_n <= reservoir_envelope_sq(first.linf_n, p, t) + res_tol;
        } else {
            v.flags.adiabatic_l2 = r.l2_psi * r.l2_psi <= adiabatic_l2_envelope_sq(l2sq0, p, t) + l2_tol;
        }
        out.push_back(v);
    }
    return out;
}

bool all_passed(std::span<const BoundVerdict> verdicts) noexcept
{
    return std::all_of(verdicts.begin(), verdicts.end(), [](const BoundVerdict& v) { return v.passed(); });
}

EnergyEnvelopeFit fit_energy_envelope(std::span<const DiagnosticRecord> records, const Params& p,
                                      double prefix_fraction)
{
    EnergyEnvelopeFit fit;
    if (records.size() < 2) {
        fit.holds_on_remainder = true;
        return fit;
    }
    const double t0 = records.front().t;
    const double F0 = records.front().functional_F;
    fit.prefix = std::clamp<std::size_t>(
        static_cast<std::size_t>(prefix_fraction * static_cast<double>(records.size())), 2, records.size());

    double n_max = 0.0;
    for (std::size_t i = 0; i < fit.prefix; ++i) {
        n_max = std::max(n_max, records[i].linf_n);
    }
    fit.C1 = 2.0 * p.R * n_max;

    const auto growth = [&](double t) { return std::expm1(fit.C1 * t); };
    // Keeps F0 + C2/C1 >= 0: the envelope of F' <= C1 F + C2 may not decrease.
    fit.C2 = std::max(0.0, -fit.C1 * F0);
    for (std::size_t i = 1; i < fit.prefix; ++i) {
        const double t = records[i].t - t0;
        const double needed = (records[i].functional_F - std::exp(fit.C1 * t) * F0) * fit.C1 / growth(t);
        if (std::isfinite(needed)) {
            fit.C2 = std::max(fit.C2, needed);
        }
    }

    fit.holds_on_remainder = true;
    fit.max_excess = -std::numeric_limits<double>::infinity();
    const double slack = 1e-9 * std::max(1.0, std::abs(F0));
    for (std::size_t i = fit.prefix; i < records.size(); ++i) {
        const double t = records[i].t - t0;
        const double envelope = std::exp(fit.C1 * t) * (F0 + fit.C2 / fit.C1) - fit.C2 / fit.C1;
        const double excess = records[i].functional_F - envelope;
        fit.max_excess = std::max(fit.max_excess, excess);
        if (!(excess <= slack)) {
            fit.holds_on_remainder = false;
        }
    }
    return fit;
}

bool reservoir_limsup_ok(std::span<const DiagnosticRecord> records, const Params& p, double relative)
{
    if (records.empty()) {
        return true;
    }
    const double t_relax = 10.0 * p.epsilon / p.beta;
    const double limit = (1.0 + relative) * p.P / p.beta;
    const double t0 = records.front().t;
    return std::all_of(records.begin(), records.end(), [&](const DiagnosticRecord& r) {
        return r.t - t0 < t_relax || r.linf_n <= limit;
    });
}

} // namespace gpsim
