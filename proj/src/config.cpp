#include "gpsim/config.hpp"

#include "gpsim/errors.hpp"

#include <CLI11.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace gpsim {

namespace {

constexpr std::array<std::pair<Experiment, std::string_view>, 7> kExperiments{{
    {Experiment::Simulate, "simulate"},
    {Experiment::Ode, "ode"},
    {Experiment::Portrait, "portrait"},
    {Experiment::Equilibria, "equilibria"},
    {Experiment::Adiabatic, "adiabatic"},
    {Experiment::ConvergeEps, "converge-eps"},
    {Experiment::ConvergeDt, "converge-dt"},
}};

constexpr std::array<std::pair<InitialKind, std::string_view>, 4> kInitialKinds{{
    {InitialKind::Stationary, "stationary"},
    {InitialKind::Perturbed, "perturbed"},
    {InitialKind::Homogeneous, "homogeneous"},
    {InitialKind::File, "file"},
}};

[[noreturn]] void config_error(const std::string& msg)
{
    throw Error(ErrorCode::ConfigError, msg);
}

std::vector<std::string> split_list(const std::vector<std::string>& inputs)
{
    std::vector<std::string> out;
    for (const std::string& in : inputs) {
        std::string cur;
        for (char c : in) {
            if (c == ',' || c == ' ' || c == '\t' || c == '[' || c == ']') {
                if (!cur.empty()) {
                    out.push_back(cur);
                }
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) {
            out.push_back(cur);
        }
    }
    return out;
}

double to_double(const std::string& text, const std::string& key)
{
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        config_error("field " + key + ": '" + text + "' is not a number");
    }
    return v;
}

template <class Int>
Int to_integer(const std::string& text, const std::string& key)
{
    if (std::is_unsigned_v<Int> && !text.empty() && text.front() == '-') {
        config_error("field " + key + " must be nonnegative");
    }
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        config_error("field " + key + ": '" + text + "' is not an integer");
    }
    return v;
}

std::string fmt(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ec == std::errc() ? ptr : buf);
}

std::string fmt_list(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? " " : "") + fmt(v[i]);
    }
    return out;
}

// Typed access that records which keys were consumed.
class Reader {
public:
    explicit Reader(const RawConfig& raw) : raw_(raw) {}

    bool has(const std::string& key) const { return raw_.count(key) != 0; }

    bool text(const std::string& key, std::string& out)
    {
        const auto* v = find(key);
        if (!v) {
            return false;
        }
        if (v->size() != 1) {
            config_error("field " + key + " expects a single value");
        }
        out = v->front();
        return true;
    }

    void required_number(const std::string& key, double& out)
    {
        if (!has(key)) {
            config_error("missing required field " + key);
        }
        number(key, out);
    }

    void number(const std::string& key, double& out)
    {
        std::string s;
        if (text(key, s)) {
            out = to_double(s, key);
        }
    }

    template <class Int>
    void integer(const std::string& key, Int& out)
    {
        std::string s;
        if (text(key, s)) {
            out = to_integer<Int>(s, key);
        }
    }

    void boolean(const std::string& key, bool& out)
    {
        std::string s;
        if (text(key, s)) {
            if (s == "true" || s == "1" || s == "on" || s == "yes") {
                out = true;
            } else if (s == "false" || s == "0" || s == "off" || s == "no") {
                out = false;
            } else {
                config_error("field " + key + ": '" + s + "' is not a boolean");
            }
        }
    }

    void numbers(const std::string& key, std::vector<double>& out)
    {
        if (const auto* v = find(key)) {
            out.clear();
            for (const std::string& s : split_list(*v)) {
                out.push_back(to_double(s, key));
            }
        }
    }

    void words(const std::string& key, std::vector<std::string>& out)
    {
        if (const auto* v = find(key)) {
            out = split_list(*v);
        }
    }

    template <class Parse, class T>
    void parsed(const std::string& key, T& out, Parse&& parse)
    {
        std::string s;
        if (text(key, s)) {
            try {
                out = parse(s);
            } catch (const Error& e) {
                config_error("field " + key + ": " + e.detail());
            }
        }
    }

    void reject_unused() const
    {
        for (const auto& [key, _] : raw_) {
            if (!used_.count(key)) {
                config_error("unknown field " + key);
            }
        }
    }

private:
    const std::vector<std::string>* find(const std::string& key)
    {
        used_.insert(key);
        const auto it = raw_.find(key);
        return it == raw_.end() ? nullptr : &it->second;
    }

    const RawConfig& raw_;
    std::set<std::string> used_;
};

} // namespace

std::string_view to_string(Experiment e) noexcept
{
    for (const auto& [k, name] : kExperiments) {
        if (k == e) {
            return name;
        }
    }
    return "unknown";
}

Experiment parse_experiment(std::string_view text)
{
    for (const auto& [k, name] : kExperiments) {
        if (name == text) {
            return k;
        }
    }
    config_error("unknown experiment '" + std::string(text) + "'");
}

std::string_view to_string(InitialKind k) noexcept
{
    for (const auto& [v, name] : kInitialKinds) {
        if (v == k) {
            return name;
        }
    }
    return "unknown";
}

InitialKind parse_initial_kind(std::string_view text)
{
    for (const auto& [v, name] : kInitialKinds) {
        if (name == text) {
            return v;
        }
    }
    config_error("unknown initial condition '" + std::string(text) + "'");
}

RawConfig read_raw_config(std::istream& in)
{
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_config(in);
    } catch (const CLI::Error& e) {
        config_error(std::string("malformed config: ") + e.what());
    }
    RawConfig raw;
    for (const CLI::ConfigItem& item : items) {
        if (item.name == "++" || item.name == "--") {
            continue;
        }
        std::string key;
        for (const std::string& p : item.parents) {
            key += p + ".";
        }
        if (item.parents.empty()) {
            key = "run.";
        }
        key += item.name;
        raw[key] = item.inputs;
    }
    return raw;
}

RawConfig read_raw_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        config_error("cannot read config file '" + path + "'");
    }
    return read_raw_config(in);
}

void apply_override(RawConfig& raw, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        config_error("override '" + std::string(assignment) + "' is not of the form section.key=value");
    }
    std::string key(assignment.substr(0, eq));
    if (key.find('.') == std::string::npos) {
        key = "run." + key;
    }
    raw[key] = {std::string(assignment.substr(eq + 1))};
}

RunConfig build_run_config(const RawConfig& raw)
{
    RunConfig c;
    Reader r(raw);

    if (!r.has("run.experiment")) {
        config_error("missing required field run.experiment");
    }
    r.parsed("run.experiment", c.experiment, parse_experiment);
    r.text("run.output_dir", c.output_dir);

    Params& p = c.params;
    r.number("params.g", p.g);
    r.number("params.lambda", p.lambda);
    r.required_number("params.R", p.R);
    r.required_number("params.P", p.P);
    r.required_number("params.alpha", p.alpha);
    r.required_number("params.beta", p.beta);
    r.number("params.epsilon", p.epsilon);

    r.integer("grid.m", c.m);
    r.number("grid.domain_length", p.domain_length);

    SolverConfig& s = c.solver;
    r.number("solver.tau", s.tau);
    r.number("solver.t_end", s.t_end);
    r.parsed("solver.substepper", s.substepper, parse_stepper_kind);
    r.integer("solver.save_every", s.save_every);
    r.boolean("solver.assert_bounds", s.assert_bounds);
    r.integer("solver.seed", s.seed);
    r.number("solver.tau_safety", s.tau_safety);
    r.boolean("solver.dealias", s.dealias);

    InitialCondition& ic = c.initial;
    r.parsed("initial.kind", ic.kind, parse_initial_kind);
    r.parsed("initial.base", ic.base, parse_initial_kind);
    r.integer("initial.mode", ic.mode);
    r.number("initial.amplitude", ic.amplitude);
    r.parsed("initial.which", ic.which, parse_perturb_target);
    r.number("initial.rho0", ic.rho0);
    r.number("initial.n0", ic.n0);
    r.number("initial.phi0", ic.phi0);
    r.text("initial.path", ic.path);
    r.boolean("initial.closure", ic.closure);

    r.integer("output.snapshots", c.snapshots);

    r.integer("portrait.count", c.portrait.count);
    r.number("portrait.radius", c.portrait.radius);
    r.text("portrait.model", c.portrait.model);

    r.numbers("converge.taus", c.converge.taus);
    r.number("converge.ref_factor", c.converge.ref_factor);
    r.numbers("converge.eps", c.converge.eps);
    r.words("converge.solvers", c.converge.solvers);

    r.reject_unused();

    const bool homogeneous_data =
        ic.kind == InitialKind::Homogeneous || (ic.kind == InitialKind::Perturbed && ic.base == InitialKind::Homogeneous);
    if (homogeneous_data) {
        for (const char* key : {"initial.rho0", "initial.n0"}) {
            if (!r.has(key)) {
                config_error(std::string("missing required field ") + key);
            }
        }
    }
    if (ic.kind == InitialKind::File && ic.path.empty()) {
        config_error("missing required field initial.path");
    }
    if (ic.base != InitialKind::Stationary && ic.base != InitialKind::Homogeneous) {
        config_error("field initial.base must be stationary or homogeneous");
    }
    if (c.experiment == Experiment::Ode && ic.kind != InitialKind::Homogeneous && ic.kind != InitialKind::Stationary) {
        config_error("field initial.kind must be homogeneous or stationary for the ode experiment");
    }
    if (c.portrait.model != "ode" && c.portrait.model != "pde") {
        config_error("field portrait.model must be ode or pde");
    }
    if (c.portrait.count == 0) {
        config_error("field portrait.count must be positive");
    }
    if (!(c.portrait.radius > 0.0 && c.portrait.radius < 1.0)) {
        config_error("field portrait.radius must lie in (0, 1)");
    }
    if (c.converge.taus.size() < 2) {
        config_error("field converge.taus needs at least two step sizes");
    }
    for (double t : c.converge.taus) {
        if (!(t > 0.0)) {
            config_error("field converge.taus must be positive");
        }
    }
    if (!(c.converge.ref_factor > 1.0)) {
        config_error("field converge.ref_factor must exceed 1");
    }
    if (c.converge.eps.empty()) {
        config_error("field converge.eps needs at least one value");
    }
    for (const std::string& name : c.converge.solvers) {
        if (name != "full" && name != "adiabatic" && name != "ode") {
            config_error("field converge.solvers: unknown solver '" + name + "'");
        }
    }

    try {
        validate_params(p);
        validate_config(s);
        make_grid(c.m, p.domain_length);
        for (double e : c.converge.eps) {
            Params q = p;
            q.epsilon = e;
            validate_params(q);
        }
    } catch (const Error& e) {
        config_error(std::string(e.what()));
    }
    return c;
}

RunConfig parse_run_config(std::istream& in)
{
    return build_run_config(read_raw_config(in));
}

std::string serialize_run_config(const RunConfig& c)
{
    std::ostringstream o;
    const Params& p = c.params;
    const SolverConfig& s = c.solver;
    const InitialCondition& ic = c.initial;
    const auto b = [](bool v) { return v ? "true" : "false"; };

    o << "[run]\n"
      << "experiment = " << to_string(c.experiment) << '\n'
      << "output_dir = \"" << c.output_dir << "\"\n\n";
    o << "[params]\n"
      << "g = " << fmt(p.g) << '\n'
      << "lambda = " << fmt(p.lambda) << '\n'
      << "R = " << fmt(p.R) << '\n'
      << "P = " << fmt(p.P) << '\n'
      << "alpha = " << fmt(p.alpha) << '\n'
      << "beta = " << fmt(p.beta) << '\n'
      << "epsilon = " << fmt(p.epsilon) << "\n\n";
    o << "[grid]\n"
      << "m = " << c.m << '\n'
      << "domain_length = " << fmt(p.domain_length) << "\n\n";
    o << "[solver]\n"
      << "tau = " << fmt(s.tau) << '\n'
      << "t_end = " << fmt(s.t_end) << '\n'
      << "substepper = " << to_string(s.substepper) << '\n'
      << "save_every = " << s.save_every << '\n'
      << "assert_bounds = " << b(s.assert_bounds) << '\n'
      << "seed = " << s.seed << '\n'
      << "tau_safety = " << fmt(s.tau_safety) << '\n'
      << "dealias = " << b(s.dealias) << "\n\n";
    o << "[initial]\n"
      << "kind = " << to_string(ic.kind) << '\n'
      << "base = " << to_string(ic.base) << '\n'
      << "mode = " << ic.mode << '\n'
      << "amplitude = " << fmt(ic.amplitude) << '\n'
      << "which = " << to_string(ic.which) << '\n'
      << "rho0 = " << fmt(ic.rho0) << '\n'
      << "n0 = " << fmt(ic.n0) << '\n'
      << "phi0 = " << fmt(ic.phi0) << '\n';
    if (!ic.path.empty()) {
        o << "path = \"" << ic.path << "\"\n";
    }
    o << "closure = " << b(ic.closure) << "\n\n";
    o << "[output]\n"
      << "snapshots = " << c.snapshots << "\n\n";
    o << "[portrait]\n"
      << "count = " << c.portrait.count << '\n'
      << "radius = " << fmt(c.portrait.radius) << '\n'
      << "model = " << c.portrait.model << "\n\n";
    o << "[converge]\n"
      << "taus = " << fmt_list(c.converge.taus) << '\n'
      << "ref_factor = " << fmt(c.converge.ref_factor) << '\n'
      << "eps = " << fmt_list(c.converge.eps) << '\n'
      << "solvers =";
    for (const std::string& name : c.converge.solvers) {
        o << ' ' << name;
    }
    o << '\n';
    return o.str();
}

} // namespace gpsim
