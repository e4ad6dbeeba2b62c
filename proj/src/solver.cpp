#include "gpsim/solver.hpp"

#include "gpsim/errors.hpp"
#include "gpsim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace gpsim {

namespace {

bool is_finite(Complex z) noexcept { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

std::size_t step_count(const SolverConfig& cfg)
{
    return static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.tau - 1e-9));
}

double step_time(double t0, const SolverConfig& cfg, std::size_t k, std::size_t steps)
{
    return k == steps ? t0 + cfg.t_end : t0 + static_cast<double>(k) * cfg.tau;
}

// Rescales psi to density rho and advances its phase by dphi.
Complex polar_update(Complex psi, double rho_old, double rho, double dphi)
{
    if (!(rho >= 0.0)) {
        throw Error(ErrorCode::PositivityLost, "condensate density became negative; reduce tau");
    }
    if (rho_old == 0.0) {
        return psi;
    }
    return psi * std::sqrt(rho / rho_old) * std::polar(1.0, dphi);
}

// Half-step of the full nonlinear subsystem at every node. The pointwise flow
// is integrated in (|psi|^2, n, phase) form, which is the homogeneous system
// with reservoir relaxation 1/eps.
void full_nonlinear_substep(FieldState& s, const Params& p, double h, OdeStepperKind kind)
{
    const auto rhs = [&p](const std::array<double, 3>& y) {
        return std::array<double, 3>{(p.R * y[1] - p.alpha) * y[0], (p.P - (p.R * y[0] + p.beta) * y[1]) / p.epsilon,
                                     -(p.g * y[0] + p.lambda * y[1])};
    };
    for (std::size_t j = 0; j < s.size(); ++j) {
        const double rho = std::norm(s.psi[j]);
        const auto y = step<3>({rho, s.n[j], 0.0}, rhs, h, kind);
        if (!(y[1] > 0.0)) {
            throw Error(ErrorCode::PositivityLost,
                        "reservoir became nonpositive at node " + std::to_string(j) + "; reduce tau");
        }
        s.psi[j] = polar_update(s.psi[j], rho, y[0], y[2]);
        s.n[j] = y[1];
    }
}

void adiabatic_nonlinear_substep(std::vector<Complex>& psi, const Params& p, double h, OdeStepperKind kind)
{
    const auto rhs = [&p](const std::array<double, 2>& y) {
        const double n = p.P / (p.beta + p.R * y[0]);
        return std::array<double, 2>{(p.R * n - p.alpha) * y[0], -(p.g * y[0] + p.lambda * n)};
    };
    for (auto& z : psi) {
        const double rho = std::norm(z);
        const auto y = step<2>({rho, 0.0}, rhs, h, kind);
        z = polar_update(z, rho, y[0], y[1]);
    }
}

void require_finite(std::span<const Complex> psi)
{
    for (Complex z : psi) {
        if (!is_finite(z)) {
            throw Error(ErrorCode::NonFiniteState, "condensate field became non-finite");
        }
    }
}

void strang_step_inplace(FieldState& s, const Params& p, double tau, const SolverConfig& cfg, SpectralWorkspace& ws)
{
    const double cap = reservoir_step_cap(s, p, cfg.tau_safety);
    if (tau > cap * (1.0 + 1e-12)) {
        throw Error(ErrorCode::StepTooLarge,
                    "tau=" + std::to_string(tau) + " exceeds the reservoir stiffness cap " + std::to_string(cap));
    }
    full_nonlinear_substep(s, p, 0.5 * tau, cfg.substepper);
    ws.apply_kinetic(s.psi, tau);
    full_nonlinear_substep(s, p, 0.5 * tau, cfg.substepper);
    require_finite(s.psi);
}

void adiabatic_step_inplace(std::vector<Complex>& psi, const Params& p, double tau, const SolverConfig& cfg,
                            SpectralWorkspace& ws)
{
    adiabatic_nonlinear_substep(psi, p, 0.5 * tau, cfg.substepper);
    ws.apply_kinetic(psi, tau);
    adiabatic_nonlinear_substep(psi, p, 0.5 * tau, cfg.substepper);
    require_finite(psi);
}

// Portable uniform [0, 1) from the 53 high bits of a 64-bit Mersenne twister.
double unit_uniform(std::mt19937_64& gen)
{
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

} // namespace

void validate_config(const SolverConfig& cfg)
{
    if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau)) {
        throw Error(ErrorCode::InvalidArgument, "solver.tau must be finite and > 0");
    }
    if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) {
        throw Error(ErrorCode::InvalidArgument, "solver.t_end must be finite and >= 0");
    }
    if (cfg.save_every < 1) {
        throw Error(ErrorCode::InvalidArgument, "solver.save_every must be >= 1");
    }
    if (!(cfg.tau_safety > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "solver.tau_safety must be > 0");
    }
}

double reservoir_step_cap(const FieldState& state, const Params& p, double tau_safety)
{
    double rho_max = 0.0;
    for (Complex z : state.psi) {
        rho_max = std::max(rho_max, std::norm(z));
    }
    return p.epsilon * tau_safety / (p.R * rho_max + p.beta);
}

FieldState strang_step(const FieldState& state, const Params& p, const SolverConfig& cfg, SpectralWorkspace& ws)
{
    check_state(state, ws.grid());
    FieldState out = state;
    ws.set_dealias(cfg.dealias);
    strang_step_inplace(out, p, cfg.tau, cfg, ws);
    out.t = state.t + cfg.tau;
    return out;
}

EvolveResult evolve(const FieldState& initial, const Params& p, const SolverConfig& cfg, SpectralWorkspace& ws,
                    const StateObserver& observer)
{
    validate_config(cfg);
    check_state(initial, ws.grid());
    if (!(*std::min_element(initial.n.begin(), initial.n.end()) > 0.0)) {
        throw Error(ErrorCode::PositivityLost, "initial reservoir must be strictly positive");
    }
    ws.set_dealias(cfg.dealias);

    const BoundMonitor monitor(initial, p, ws.grid(), SolverKind::Full);
    EvolveResult result;
    FieldState s = initial;

    const auto save = [&](const FieldState& state) {
        DiagnosticRecord r = make_record(state, p, ws);
        r.bound_flags = monitor.check(state);
        if (cfg.assert_bounds && !r.bound_flags.all()) {
            throw Error(ErrorCode::BoundViolation,
                        r.bound_flags.failures() + " violated at t=" + std::to_string(state.t));
        }
        result.records.push_back(r);
        if (observer) {
            observer(state);
        }
    };

    const std::size_t steps = step_count(cfg);
    const double t0 = initial.t;
    save(s);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t_next = step_time(t0, cfg, k, steps);
        strang_step_inplace(s, p, t_next - s.t, cfg, ws);
        s.t = t_next;
        if (k % cfg.save_every == 0 || k == steps) {
            save(s);
        }
    }
    result.final_state = std::move(s);
    return result;
}

StationarySpec stationary_spec(const Params& p)
{
    if (!(p.delta() > 0.0)) {
        throw Error(ErrorCode::DeltaNonpositive,
                    "stationary condensate needs P*R - alpha*beta > 0, got " + std::to_string(p.delta()));
    }
    const double rho = p.delta() / (p.alpha * p.R);
    const double n = p.alpha / p.R;
    return {p.g * rho + p.lambda * n, rho, n};
}

FieldState make_stationary(const Params& p, const Grid& grid)
{
    const StationarySpec s = stationary_spec(p);
    return homogeneous_embed({0.0, s.rho_star, s.n_star, 0.0}, grid);
}

std::string_view to_string(PerturbTarget target) noexcept
{
    switch (target) {
    case PerturbTarget::Psi: return "psi";
    case PerturbTarget::N: return "n";
    case PerturbTarget::Both: return "both";
    }
    return "psi";
}

PerturbTarget parse_perturb_target(std::string_view text)
{
    if (text == "psi") {
        return PerturbTarget::Psi;
    }
    if (text == "n") {
        return PerturbTarget::N;
    }
    if (text == "both") {
        return PerturbTarget::Both;
    }
    throw Error(ErrorCode::InvalidArgument, "perturbation target must be psi|n|both, got '" + std::string(text) + "'");
}

FieldState perturb(const FieldState& state, const Grid& grid, int mode, double amplitude, PerturbTarget which,
                   std::uint64_t seed)
{
    check_state(state, grid);
    if (!std::isfinite(amplitude)) {
        throw Error(ErrorCode::InvalidArgument, "perturbation amplitude must be finite");
    }
    if (static_cast<std::size_t>(std::abs(mode)) >= grid.size() / 2) {
        throw Error(ErrorCode::InvalidArgument,
                    "|mode| must be < m/2 = " + std::to_string(grid.size() / 2) + ", got " + std::to_string(mode));
    }

    const double base = 2.0 * std::numbers::pi / grid.length();
    std::vector<double> shape(grid.size());
    if (mode >= 0) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            shape[j] = amplitude * std::cos(base * mode * grid.x(j));
        }
    } else {
        std::mt19937_64 gen(seed);
        const int bands = -mode;
        std::vector<double> amp(bands);
        std::vector<double> phase(bands);
        for (int b = 0; b < bands; ++b) {
            amp[b] = 2.0 * unit_uniform(gen) - 1.0;
            phase[b] = 2.0 * std::numbers::pi * unit_uniform(gen);
        }
        double peak = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            double v = 0.0;
            for (int b = 0; b < bands; ++b) {
                v += amp[b] * std::cos(base * (b + 1) * grid.x(j) + phase[b]);
            }
            shape[j] = v;
            peak = std::max(peak, std::abs(v));
        }
        const double scale = peak > 0.0 ? amplitude / peak : 0.0;
        for (double& v : shape) {
            v *= scale;
        }
    }

    FieldState out = state;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (which != PerturbTarget::N) {
            out.psi[j] += shape[j];
        }
        if (which != PerturbTarget::Psi) {
            out.n[j] += shape[j];
        }
    }
    const double min_n = *std::min_element(out.n.begin(), out.n.end());
    if (!(min_n > 0.0)) {
        throw Error(ErrorCode::PerturbationBreaksPositivity,
                    "perturbed reservoir has min n = " + std::to_string(min_n));
    }
    return out;
}

std::vector<double> reservoir_closure(std::span<const Complex> psi, const Params& p)
{
    std::vector<double> n(psi.size());
    for (std::size_t j = 0; j < psi.size(); ++j) {
        n[j] = p.P / (p.beta + p.R * std::norm(psi[j]));
    }
    return n;
}

std::vector<Complex> adiabatic_step(std::span<const Complex> psi, const Params& p, const SolverConfig& cfg,
                                    SpectralWorkspace& ws)
{
    if (psi.size() != ws.grid().size()) {
        throw Error(ErrorCode::LengthMismatch, "condensate length does not match the grid");
    }
    std::vector<Complex> out(psi.begin(), psi.end());
    ws.set_dealias(cfg.dealias);
    adiabatic_step_inplace(out, p, cfg.tau, cfg, ws);
    return out;
}

EvolveResult adiabatic_evolve(const FieldState& initial, const Params& p, const SolverConfig& cfg,
                              SpectralWorkspace& ws, const StateObserver& observer)
{
    validate_config(cfg);
    if (initial.psi.size() != ws.grid().size()) {
        throw Error(ErrorCode::LengthMismatch, "condensate length does not match the grid");
    }
    ws.set_dealias(cfg.dealias);

    FieldState s;
    s.t = initial.t;
    s.psi = initial.psi;
    s.n = reservoir_closure(s.psi, p);
    check_state(s, ws.grid());

    const BoundMonitor monitor(s, p, ws.grid(), SolverKind::Adiabatic);
    EvolveResult result;
    const auto save = [&](const FieldState& state) {
        DiagnosticRecord r = make_record(state, p, ws);
        r.bound_flags = monitor.check(state);
        if (cfg.assert_bounds && !r.bound_flags.all()) {
            throw Error(ErrorCode::BoundViolation,
                        r.bound_flags.failures() + " violated at t=" + std::to_string(state.t));
        }
        result.records.push_back(r);
        if (observer) {
            observer(state);
        }
    };

    const std::size_t steps = step_count(cfg);
    const double t0 = initial.t;
    save(s);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t_next = step_time(t0, cfg, k, steps);
        adiabatic_step_inplace(s.psi, p, t_next - s.t, cfg, ws);
        s.t = t_next;
        if (k % cfg.save_every == 0 || k == steps) {
            s.n = reservoir_closure(s.psi, p);
            save(s);
        }
    }
    s.n = reservoir_closure(s.psi, p);
    result.final_state = std::move(s);
    return result;
}

bool is_closure_consistent(const FieldState& state, const Params& p)
{
    const auto closure = reservoir_closure(state.psi, p);
    double scale = 0.0;
    double gap = 0.0;
    for (std::size_t j = 0; j < closure.size(); ++j) {
        scale = std::max(scale, std::abs(state.n[j]));
        gap = std::max(gap, std::abs(state.n[j] - closure[j]));
    }
    return gap <= 1e-12 * scale;
}

std::vector<EpsilonSweepRow> epsilon_sweep(const FieldState& initial, const Params& p,
                                           std::span<const double> eps_ladder, const SolverConfig& cfg,
                                           const Grid& grid, std::size_t threads)
{
    const bool consistent = is_closure_consistent(initial, p);

    std::vector<std::vector<Complex>> reference;
    {
        SpectralWorkspace ws(grid);
        adiabatic_evolve(initial, p, cfg, ws, [&](const FieldState& s) { reference.push_back(s.psi); });
    }

    std::vector<EpsilonSweepRow> rows(eps_ladder.size());
    parallel_for(eps_ladder.size(), threads, [&](std::size_t i) {
        Params pe = p;
        pe.epsilon = eps_ladder[i];
        pe = validate_params(pe);

        EpsilonSweepRow row;
        row.epsilon = pe.epsilon;
        row.closure_consistent = consistent;
        std::size_t frame = 0;
        SpectralWorkspace ws(grid);
        const EvolveResult run = evolve(initial, pe, cfg, ws, [&](const FieldState& s) {
            const auto& ref = reference.at(frame++);
            for (std::size_t j = 0; j < s.size(); ++j) {
                row.sup_psi_error = std::max(row.sup_psi_error, std::abs(s.psi[j] - ref[j]));
            }
        });
        const auto closure = reservoir_closure(run.final_state.psi, pe);
        for (std::size_t j = 0; j < closure.size(); ++j) {
            row.closure_mismatch = std::max(row.closure_mismatch, std::abs(run.final_state.n[j] - closure[j]));
        }
        rows[i] = row;
    });
    return rows;
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "slope fit needs >= 2 paired samples");
    }
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += std::log(x[i]);
        sy += std::log(y[i]);
    }
    const auto n = static_cast<double>(x.size());
    const double mx = sx / n;
    const double my = sy / n;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        num += dx * (std::log(y[i]) - my);
        den += dx * dx;
    }
    return num / den;
}

ConvergenceStudy strang_convergence(const FieldState& initial, const Params& p, const SolverConfig& cfg,
                                    std::span<const double> taus, double ref_factor, SolverKind kind,
                                    const Grid& grid, std::size_t threads)
{
    if (taus.empty() || !(ref_factor > 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "convergence study needs taus and ref_factor > 1");
    }
    ConvergenceStudy study;
    study.taus.assign(taus.begin(), taus.end());
    study.reference_tau = *std::min_element(taus.begin(), taus.end()) / ref_factor;

    std::vector<double> all_taus = study.taus;
    all_taus.push_back(study.reference_tau);
    std::vector<FieldState> finals(all_taus.size());
    parallel_for(all_taus.size(), threads, [&](std::size_t i) {
        SolverConfig c = cfg;
        c.tau = all_taus[i];
        c.save_every = static_cast<std::size_t>(-1);
        c.assert_bounds = false;
        SpectralWorkspace ws(grid);
        finals[i] = kind == SolverKind::Full ? evolve(initial, p, c, ws).final_state
                                             : adiabatic_evolve(initial, p, c, ws).final_state;
    });

    const FieldState& ref = finals.back();
    for (std::size_t i = 0; i < study.taus.size(); ++i) {
        double err = 0.0;
        for (std::size_t j = 0; j < ref.size(); ++j) {
            err = std::max(err, std::abs(finals[i].psi[j] - ref.psi[j]));
            if (kind == SolverKind::Full) {
                err = std::max(err, std::abs(finals[i].n[j] - ref.n[j]));
            }
        }
        study.errors.push_back(err);
    }
    study.slope = fit_loglog_slope(study.taus, study.errors);
    return study;
}

} // namespace gpsim
