#include "gpsim/experiments.hpp"

#include "gpsim/equilibria.hpp"
#include "gpsim/errors.hpp"
#include "gpsim/io.hpp"
#include "gpsim/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>

namespace gpsim {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json complex_json(Complex z)
{
    return {{"re", z.real()}, {"im", z.imag()}};
}

json report_json(const EquilibriumReport& r)
{
    return {{"point", {{"rho", r.point[0]}, {"n", r.point[1]}}},
            {"jacobian", {{r.jacobian[0][0], r.jacobian[0][1]}, {r.jacobian[1][0], r.jacobian[1][1]}}},
            {"eigenvalues", {complex_json(r.eigenvalues[0]), complex_json(r.eigenvalues[1])}},
            {"classification", std::string(to_string(r.classification))}};
}

json equilibria_json(const Params& p)
{
    const EquilibriumReport e1 = xi1(p);
    const EquilibriumReport e2 = xi2(p);
    json j;
    j["delta"] = e1.delta;
    j["spiral_threshold"] = e1.spiral_threshold;
    j["non_hyperbolic"] = is_non_hyperbolic(p);
    j["xi1"] = report_json(e1);
    j["xi2"] = report_json(e2);
    if (e1.delta > 0.0) {
        const BetaDominanceReport bd = classify_beta_gg_alpha(p);
        j["beta_dominance"] = {{"classification", std::string(to_string(bd.classification))},
                               {"discriminant", bd.discriminant}};
    }
    return j;
}

json study_json(const ConvergenceStudy& s, int expected_order)
{
    return {{"taus", s.taus},
            {"errors", s.errors},
            {"reference_tau", s.reference_tau},
            {"slope", s.slope},
            {"expected_order", expected_order}};
}

std::vector<HomState> decimate(const std::vector<HomState>& traj, std::size_t every)
{
    std::vector<HomState> out;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (i % every == 0 || i + 1 == traj.size()) {
            out.push_back(traj[i]);
        }
    }
    return out;
}

void write_hom_trajectory(const std::vector<HomState>& traj, const Params& p, const fs::path& path)
{
    std::string text = "t,rho,n,phi,ell\n";
    for (const HomState& s : traj) {
        text += format_double(s.t) + ',' + format_double(s.rho) + ',' + format_double(s.n) + ',' +
                format_double(s.phi) + ',' + format_double(lyapunov_ell({s.rho, s.n}, p)) + '\n';
    }
    write_text_file(path, text);
}

std::string indexed(const char* stem, std::size_t i, const char* ext)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%03zu%s", stem, i, ext);
    return buf;
}

class Outputs {
public:
    Outputs(const RunConfig& cfg, std::ostream& log) : dir_(cfg.output_dir), log_(log) {}

    fs::path path(const std::string& rel) const { return dir_ / rel; }

    void add(const std::string& rel, const std::string& content)
    {
        files_.push_back({rel, content});
        log_ << "wrote " << (dir_ / rel).string() << '\n';
    }

    void json_file(const std::string& rel, const json& j, const std::string& content)
    {
        write_text_file(path(rel), j.dump(2) + "\n");
        add(rel, content);
    }

    std::vector<ManifestEntry>& files() { return files_; }

private:
    fs::path dir_;
    std::ostream& log_;
    std::vector<ManifestEntry> files_;
};

// Snapshot frames at evenly spaced target times, taken from the first saved
// state at or after each target.
class SnapshotWriter {
public:
    SnapshotWriter(const RunConfig& cfg, const Grid& grid, double t0, Outputs& out)
        : cfg_(cfg), grid_(grid), t0_(t0), out_(out)
    {
    }

    void operator()(const FieldState& s)
    {
        const std::size_t frames = cfg_.snapshots;
        while (next_ < frames) {
            const double target =
                frames == 1 ? t0_ : t0_ + cfg_.solver.t_end * static_cast<double>(next_) / static_cast<double>(frames - 1);
            if (s.t < target - 1e-9 * std::max(1.0, cfg_.solver.t_end)) {
                return;
            }
            const std::string rel = "snapshots/" + indexed("snapshot", next_, ".csv");
            write_field_snapshot(s, grid_, cfg_.params, out_.path(rel));
            out_.add(rel, "field snapshot at t=" + format_double(s.t) + " (sidecar .json alongside)");
            ++next_;
            break;
        }
    }

private:
    const RunConfig& cfg_;
    const Grid& grid_;
    double t0_;
    Outputs& out_;
    std::size_t next_ = 0;
};

json bounds_json(std::span<const DiagnosticRecord> records)
{
    std::size_t failed = 0;
    json first = nullptr;
    for (const DiagnosticRecord& r : records) {
        if (!r.bound_flags.all()) {
            if (failed == 0) {
                first = {{"t", r.t}, {"failures", r.bound_flags.failures()}};
            }
            ++failed;
        }
    }
    return {{"saved_steps", records.size()}, {"violations", failed}, {"first_violation", first}};
}

void run_field(const RunConfig& cfg, Outputs& out, SolverKind kind)
{
    const Grid grid = make_grid(cfg.m, cfg.params.domain_length);
    SpectralWorkspace ws(grid);
    ws.set_dealias(cfg.solver.dealias);
    const FieldState initial = build_initial_state(cfg, grid);

    SnapshotWriter snaps(cfg, grid, initial.t, out);
    const StateObserver observer = [&](const FieldState& s) { snaps(s); };
    const EvolveResult res = kind == SolverKind::Full ? evolve(initial, cfg.params, cfg.solver, ws, observer)
                                                     : adiabatic_evolve(initial, cfg.params, cfg.solver, ws, observer);

    write_timeseries(res.records, out.path("timeseries.csv"));
    out.add("timeseries.csv", "norms, masses and functionals at every saved step (plot data: L2 norm of psi and L1 "
                              "norm of n over time)");

    json summary;
    summary["solver"] = kind == SolverKind::Full ? "full" : "adiabatic";
    summary["t_final"] = res.final_state.t;
    summary["bounds"] = bounds_json(res.records);
    const DiagnosticRecord& last = res.records.back();
    summary["final"] = {{"l2_psi", last.l2_psi}, {"mass_total", last.mass_total}, {"min_n", last.min_n},
                        {"lyapunov_L", last.lyapunov_L}};
    const Params& p = cfg.params;
    if (p.delta() > 0.0) {
        const double rho_star = stationary_spec(p).rho_star;
        const auto deviation = [&](const FieldState& s) {
            double d = 0.0;
            for (const Complex& z : s.psi) {
                d = std::max(d, std::abs(std::norm(z) - rho_star));
            }
            return d;
        };
        summary["relaxation"] = {{"rho_star", rho_star},
                                 {"initial_deviation", deviation(initial)},
                                 {"final_deviation", deviation(res.final_state)}};
    } else if (kind == SolverKind::Adiabatic && res.records.size() >= 2) {
        std::vector<double> t;
        std::vector<double> v;
        for (const DiagnosticRecord& r : res.records) {
            if (r.l2_psi > 0.0 && std::isfinite(r.l2_psi) && r.l2_psi > 1e-250) {
                t.push_back(r.t);
                v.push_back(r.l2_psi);
            }
        }
        if (t.size() >= 2) {
            summary["decay"] = {{"fitted_rate", fit_exponential_rate(t, v)},
                                {"bound_rate", (p.alpha - p.P * p.R / p.beta) / 2.0},
                                {"alt_kappa", (p.alpha - p.P * p.R) / (2.0 * p.beta)}};
        }
    }
    out.json_file("summary.json", summary, "bound verdicts and end-state summary");
}

void run_ode(const RunConfig& cfg, Outputs& out)
{
    const Params& p = cfg.params;
    HomState init{0.0, cfg.initial.rho0, cfg.initial.n0, cfg.initial.phi0};
    if (cfg.initial.kind == InitialKind::Stationary) {
        const StationarySpec s = stationary_spec(p);
        init = {0.0, s.rho_star, s.n_star, cfg.initial.phi0};
    }
    const auto traj = integrate_homogeneous(init, p, cfg.solver.tau, cfg.solver.t_end, cfg.solver.substepper);
    write_hom_trajectory(decimate(traj, cfg.solver.save_every), p, out.path("trajectory.csv"));
    out.add("trajectory.csv", "homogeneous trajectory (rho, n, phase, ell)");

    json summary;
    summary["equilibria"] = equilibria_json(p);
    summary["final"] = {{"t", traj.back().t}, {"rho", traj.back().rho}, {"n", traj.back().n}};
    try {
        const OrbitCheck oc = orbit_cross_check(traj, p);
        summary["orbit_check"] = {{"first", oc.first}, {"last", oc.last}, {"max_deviation", oc.max_deviation}};
    } catch (const Error& e) {
        summary["orbit_check"] = {{"skipped", e.what()}};
    }
    out.json_file("summary.json", summary, "equilibria and orbit-equation cross-check for the trajectory");
}

void run_portrait(const RunConfig& cfg, Outputs& out)
{
    const Params& p = cfg.params;
    const auto points = portrait_initial_points(cfg);
    std::vector<PhaseTrajectory> phase(points.size());
    std::vector<std::string> names(points.size());

    if (cfg.portrait.model == "ode") {
        parallel_for(points.size(), thread_count_from_env(), [&](std::size_t i) {
            const auto traj =
                decimate(integrate_homogeneous(points[i], p, cfg.solver.tau, cfg.solver.t_end, cfg.solver.substepper),
                         cfg.solver.save_every);
            names[i] = indexed("trajectory", i, ".csv");
            write_hom_trajectory(traj, p, out.path(names[i]));
            phase[i] = phase_trajectory(i, traj, p);
        });
    } else {
        const Grid grid = make_grid(cfg.m, p.domain_length);
        parallel_for(points.size(), thread_count_from_env(), [&](std::size_t i) {
            SpectralWorkspace ws(grid);
            ws.set_dealias(cfg.solver.dealias);
            FieldState s = homogeneous_embed(points[i], grid);
            if (cfg.initial.amplitude != 0.0) {
                s = perturb(s, grid, cfg.initial.mode, cfg.initial.amplitude * points[i].rho, PerturbTarget::Psi,
                            cfg.solver.seed + i);
            }
            const EvolveResult res = evolve(s, p, cfg.solver, ws);
            names[i] = indexed("trajectory", i, ".csv");
            write_timeseries(res.records, out.path(names[i]));
            phase[i] = phase_trajectory(i, res.records);
        });
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        out.add(names[i], "trajectory " + std::to_string(i) + " from rho=" + format_double(points[i].rho) +
                              ", n=" + format_double(points[i].n));
    }
    phase_plot_data(phase, equilibrium_markers(p), out.path("phase_plot.csv"));
    out.add("phase_plot.csv", "plot data: L2 norm of psi against L1 norm of n for every trajectory");
    out.add("phase_plot.json", "equilibrium markers in the norm plane");
    out.json_file("equilibria.json", equilibria_json(p), "equilibria, Jacobians, eigenvalues and classifications");
}

ConvergenceStudy ode_convergence(const RunConfig& cfg)
{
    const HomState init{0.0, cfg.initial.rho0, cfg.initial.n0, cfg.initial.phi0};
    const auto& taus = cfg.converge.taus;
    ConvergenceStudy s;
    s.taus = taus;
    s.reference_tau = *std::min_element(taus.begin(), taus.end()) / cfg.converge.ref_factor;
    const auto end_of = [&](double tau) {
        return integrate_homogeneous(init, cfg.params, tau, cfg.solver.t_end, cfg.solver.substepper).back();
    };
    const HomState ref = end_of(s.reference_tau);
    for (double tau : taus) {
        const HomState e = end_of(tau);
        s.errors.push_back(std::max(std::abs(e.rho - ref.rho), std::abs(e.n - ref.n)));
    }
    s.slope = fit_loglog_slope(s.taus, s.errors);
    return s;
}

void run_converge_dt(const RunConfig& cfg, Outputs& out)
{
    const Grid grid = make_grid(cfg.m, cfg.params.domain_length);
    const FieldState initial = build_initial_state(cfg, grid);
    const std::size_t threads = thread_count_from_env();
    json j;
    std::string csv = "solver,tau,error\n";
    for (const std::string& name : cfg.converge.solvers) {
        ConvergenceStudy s;
        int order = 2;
        if (name == "ode") {
            s = ode_convergence(cfg);
            order = stepper_order(cfg.solver.substepper);
        } else {
            const SolverKind kind = name == "full" ? SolverKind::Full : SolverKind::Adiabatic;
            s = strang_convergence(initial, cfg.params, cfg.solver, cfg.converge.taus, cfg.converge.ref_factor, kind,
                                   grid, threads);
        }
        j[name] = study_json(s, order);
        for (std::size_t i = 0; i < s.taus.size(); ++i) {
            csv += name + ',' + format_double(s.taus[i]) + ',' + format_double(s.errors[i]) + '\n';
        }
    }
    write_text_file(out.path("converge_dt.csv"), csv);
    out.add("converge_dt.csv", "endpoint error against the reference run per step size");
    out.json_file("converge_dt.json", j, "step-size study with fitted log-log slopes");
}

void run_converge_eps(const RunConfig& cfg, Outputs& out)
{
    const Grid grid = make_grid(cfg.m, cfg.params.domain_length);
    const FieldState initial = build_initial_state(cfg, grid);
    const auto rows =
        epsilon_sweep(initial, cfg.params, cfg.converge.eps, cfg.solver, grid, thread_count_from_env());
    std::string csv = "epsilon,sup_psi_error,closure_mismatch,closure_consistent\n";
    json list = json::array();
    bool decreasing = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const EpsilonSweepRow& r = rows[i];
        csv += format_double(r.epsilon) + ',' + format_double(r.sup_psi_error) + ',' +
               format_double(r.closure_mismatch) + ',' + (r.closure_consistent ? "true" : "false") + '\n';
        list.push_back({{"epsilon", r.epsilon},
                        {"sup_psi_error", r.sup_psi_error},
                        {"closure_mismatch", r.closure_mismatch},
                        {"closure_consistent", r.closure_consistent}});
        if (i > 0 && rows[i].epsilon < rows[i - 1].epsilon && !(r.sup_psi_error < rows[i - 1].sup_psi_error)) {
            decreasing = false;
        }
    }
    write_text_file(out.path("converge_eps.csv"), csv);
    out.add("converge_eps.csv", "distance of the full solution to the adiabatic solution per epsilon");
    out.json_file("converge_eps.json", {{"rows", list}, {"strictly_decreasing", decreasing}},
                  "epsilon ladder summary");
}

} // namespace

FieldState build_initial_state(const RunConfig& cfg, const Grid& grid)
{
    const Params& p = cfg.params;
    const InitialCondition& ic = cfg.initial;
    const auto base = [&](InitialKind k) {
        if (k == InitialKind::Stationary) {
            return make_stationary(p, grid);
        }
        return homogeneous_embed({0.0, ic.rho0, ic.n0, ic.phi0}, grid);
    };
    FieldState s;
    switch (ic.kind) {
    case InitialKind::Stationary:
    case InitialKind::Homogeneous:
        s = base(ic.kind);
        break;
    case InitialKind::Perturbed:
        s = perturb(base(ic.base), grid, ic.mode, ic.amplitude, ic.which, cfg.solver.seed);
        break;
    case InitialKind::File:
        s = read_field_snapshot(ic.path, grid);
        break;
    }
    if (ic.closure) {
        s.n = reservoir_closure(s.psi, p);
    }
    return s;
}

std::vector<HomState> portrait_initial_points(const RunConfig& cfg)
{
    const Params& p = cfg.params;
    double rho_c = 0.0;
    double n_c = 0.0;
    if (p.delta() > 0.0) {
        const StationarySpec s = stationary_spec(p);
        rho_c = s.rho_star;
        n_c = s.n_star;
    } else {
        n_c = p.P / p.beta;
        rho_c = n_c;
    }
    std::vector<HomState> out;
    const std::size_t count = cfg.portrait.count;
    for (std::size_t k = 0; k < count; ++k) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
        out.push_back({0.0, rho_c * (1.0 + cfg.portrait.radius * std::cos(theta)),
                       n_c * (1.0 + cfg.portrait.radius * std::sin(theta)), 0.0});
    }
    return out;
}

std::vector<ManifestEntry> run_experiment(const RunConfig& cfg, std::ostream& log)
{
    Outputs out(cfg, log);
    fs::create_directories(cfg.output_dir);
    write_text_file(out.path("config.ini"), serialize_run_config(cfg));
    out.add("config.ini", "resolved configuration");

    switch (cfg.experiment) {
    case Experiment::Simulate:
        run_field(cfg, out, SolverKind::Full);
        break;
    case Experiment::Adiabatic:
        run_field(cfg, out, SolverKind::Adiabatic);
        break;
    case Experiment::Ode:
        run_ode(cfg, out);
        break;
    case Experiment::Portrait:
        run_portrait(cfg, out);
        break;
    case Experiment::Equilibria:
        out.json_file("equilibria.json", equilibria_json(cfg.params),
                      "equilibria, Jacobians, eigenvalues and classifications");
        break;
    case Experiment::ConvergeEps:
        run_converge_eps(cfg, out);
        break;
    case Experiment::ConvergeDt:
        run_converge_dt(cfg, out);
        break;
    }

    json manifest;
    manifest["experiment"] = std::string(to_string(cfg.experiment));
    manifest["params_hash"] = params_hash(cfg.params);
    manifest["seed"] = cfg.solver.seed;
    json files = json::array();
    for (const ManifestEntry& e : out.files()) {
        files.push_back({{"file", e.file}, {"content", e.content}});
    }
    manifest["files"] = files;
    write_text_file(out.path("manifest.json"), manifest.dump(2) + "\n");
    out.add("manifest.json", "this listing");
    return out.files();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Condensate/reservoir simulator"};
    app.name("gpsim");
    std::string experiment;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::vector<std::string> sets;
    app.add_option("experiment", experiment,
                   "simulate | ode | portrait | equilibria | adiabatic | converge-eps | converge-dt")
        ->required();
    app.add_option("--config", config_path, "INI configuration file")->required();
    app.add_option("--seed", seed, "seed for noise perturbations");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--set", sets, "override, section.key=value (repeatable)");

    std::vector<const char*> argv;
    argv.push_back("gpsim");
    for (const std::string& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    try {
        RawConfig raw = read_raw_config_file(config_path);
        raw["run.experiment"] = {experiment};
        for (const std::string& s : sets) {
            apply_override(raw, s);
        }
        if (seed) {
            raw["solver.seed"] = {std::to_string(*seed)};
        }
        if (out_dir) {
            raw["run.output_dir"] = {*out_dir};
        }
        const RunConfig cfg = build_run_config(raw);
        run_experiment(cfg, out);
        return 0;
    } catch (const Error& e) {
        err << "gpsim: " << e.what() << '\n';
        return e.code() == ErrorCode::BoundViolation ? 2 : 1;
    } catch (const std::exception& e) {
        err << "gpsim: " << e.what() << '\n';
        return 1;
    }
}

} // namespace gpsim
