#include "gpsim/io.hpp"

#include "gpsim/errors.hpp"

#include <json.hpp>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gpsim {

namespace {

std::ofstream open_out(const std::filesystem::path& path)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    }
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out) {
        throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
    }
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        out.push_back(cell);
    }
    return out;
}

double parse_cell(const std::string& cell, const std::filesystem::path& path)
{
    if (cell == "nan" || cell == "-nan") {
        return std::nan("");
    }
    if (cell == "inf") {
        return HUGE_VAL;
    }
    if (cell == "-inf") {
        return -HUGE_VAL;
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(ErrorCode::IoError, "malformed number '" + cell + "' in '" + path.string() + "'");
    }
    return v;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path)
{
    std::filesystem::path p = csv_path;
    p.replace_extension(".json");
    return p;
}

} // namespace

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_timeseries(std::span<const DiagnosticRecord> records, const std::filesystem::path& path)
{
    if (records.empty()) {
        throw Error(ErrorCode::InvalidArgument, "timeseries needs at least one record");
    }
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (!(records[i].t > records[i - 1].t)) {
            throw Error(ErrorCode::NonMonotoneTime,
                        "record " + std::to_string(i) + " has t=" + format_double(records[i].t) +
                            " not after " + format_double(records[i - 1].t));
        }
    }
    auto out = open_out(path);
    out << kTimeseriesHeader << '\n';
    for (const DiagnosticRecord& r : records) {
        const double row[] = {r.t,      r.mass_c, r.mass_r,   r.mass_total,   r.l2_psi,     r.l1_n,
                              r.linf_n, r.min_n,  r.energy_E, r.functional_F, r.lyapunov_L, r.current};
        for (std::size_t c = 0; c < std::size(row); ++c) {
            out << (c ? "," : "") << format_double(row[c]);
        }
        out << '\n';
    }
    finish(out, path);
}

std::vector<DiagnosticRecord> read_timeseries(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line) || line != kTimeseriesHeader) {
        throw Error(ErrorCode::IoError, "'" + path.string() + "' is not a timeseries file");
    }
    std::vector<DiagnosticRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 12) {
            throw Error(ErrorCode::IoError, "timeseries row with " + std::to_string(cells.size()) + " columns");
        }
        DiagnosticRecord r;
        double* fields[] = {&r.t,      &r.mass_c, &r.mass_r,   &r.mass_total,   &r.l2_psi,     &r.l1_n,
                            &r.linf_n, &r.min_n,  &r.energy_E, &r.functional_F, &r.lyapunov_L, &r.current};
        for (std::size_t c = 0; c < 12; ++c) {
            *fields[c] = parse_cell(cells[c], path);
        }
        out.push_back(r);
    }
    return out;
}

std::string params_hash(const Params& p)
{
    std::uint64_t h = 14695981039346656037ull;
    const double fields[] = {p.g, p.lambda, p.R, p.P, p.alpha, p.beta, p.epsilon, p.domain_length};
    for (double f : fields) {
        auto bits = std::bit_cast<std::uint64_t>(f);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffu;
            h *= 1099511628211ull;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_field_snapshot(const FieldState& state, const Grid& grid, const Params& p,
                          const std::filesystem::path& csv_path)
{
    check_state(state, grid);
    auto out = open_out(csv_path);
    out << "x,re_psi,im_psi,abs2_psi,n\n";
    for (std::size_t j = 0; j < grid.size(); ++j) {
        out << format_double(grid.x(j)) << ',' << format_double(state.psi[j].real()) << ','
            << format_double(state.psi[j].imag()) << ',' << format_double(std::norm(state.psi[j])) << ','
            << format_double(state.n[j]) << '\n';
    }
    finish(out, csv_path);

    nlohmann::ordered_json side;
    side["t"] = state.t;
    side["params_hash"] = params_hash(p);
    side["grid"] = {{"m", grid.size()}, {"domain_length", grid.length()}};
    write_text_file(sidecar_path(csv_path), side.dump(2) + "\n");
}

FieldState read_field_snapshot(const std::filesystem::path& csv_path, const Grid& grid)
{
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open '" + csv_path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line) || line != "x,re_psi,im_psi,abs2_psi,n") {
        throw Error(ErrorCode::IoError, "'" + csv_path.string() + "' is not a field snapshot");
    }
    FieldState s;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 5) {
            throw Error(ErrorCode::IoError, "snapshot row with " + std::to_string(cells.size()) + " columns");
        }
        s.psi.emplace_back(parse_cell(cells[1], csv_path), parse_cell(cells[2], csv_path));
        s.n.push_back(parse_cell(cells[4], csv_path));
    }
    const auto side = sidecar_path(csv_path);
    if (std::filesystem::exists(side)) {
        std::ifstream sin(side);
        try {
            s.t = nlohmann::json::parse(sin).value("t", 0.0);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::IoError, "bad sidecar '" + side.string() + "': " + e.what());
        }
    }
    check_state(s, grid);
    return s;
}

PhaseTrajectory phase_trajectory(std::size_t id, std::span<const DiagnosticRecord> records)
{
    PhaseTrajectory tr;
    tr.id = id;
    for (const DiagnosticRecord& r : records) {
        tr.t.push_back(r.t);
        tr.l2_psi.push_back(r.l2_psi);
        tr.l1_n.push_back(r.l1_n);
    }
    return tr;
}

PhaseTrajectory phase_trajectory(std::size_t id, std::span<const HomState> trajectory, const Params& p)
{
    PhaseTrajectory tr;
    tr.id = id;
    for (const HomState& s : trajectory) {
        tr.t.push_back(s.t);
        tr.l2_psi.push_back(std::sqrt(s.rho * p.domain_length));
        tr.l1_n.push_back(std::abs(s.n) * p.domain_length);
    }
    return tr;
}

std::vector<PhaseMarker> equilibrium_markers(const Params& p)
{
    std::vector<PhaseMarker> out;
    const double L = p.domain_length;
    const EquilibriumReport e1 = xi1(p);
    if (e1.point[0] > 0.0) {
        out.push_back({"xi1", std::sqrt(e1.point[0] * L), e1.point[1] * L, std::string(to_string(e1.classification))});
    }
    const EquilibriumReport e2 = xi2(p);
    out.push_back({"xi2", 0.0, e2.point[1] * L, std::string(to_string(e2.classification))});
    return out;
}

void phase_plot_data(std::span<const PhaseTrajectory> trajectories, std::span<const PhaseMarker> markers,
                     const std::filesystem::path& csv_path)
{
    if (trajectories.empty()) {
        throw Error(ErrorCode::InvalidArgument, "phase plot needs at least one trajectory");
    }
    auto out = open_out(csv_path);
    out << "trajectory_id,t,l2_psi,l1_n\n";
    for (const PhaseTrajectory& tr : trajectories) {
        for (std::size_t i = 0; i < tr.t.size(); ++i) {
            out << tr.id << ',' << format_double(tr.t[i]) << ',' << format_double(tr.l2_psi[i]) << ','
                << format_double(tr.l1_n[i]) << '\n';
        }
    }
    finish(out, csv_path);

    nlohmann::ordered_json side;
    side["trajectories"] = trajectories.size();
    auto& list = side["markers"] = nlohmann::ordered_json::array();
    for (const PhaseMarker& m : markers) {
        list.push_back({{"name", m.name},
                        {"l2_psi", m.l2_psi},
                        {"l1_n", m.l1_n},
                        {"classification", m.classification}});
    }
    write_text_file(sidecar_path(csv_path), side.dump(2) + "\n");
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    auto out = open_out(path);
    out << text;
    finish(out, path);
}

} // namespace gpsim
