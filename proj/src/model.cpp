#include "gpsim/model.hpp"

#include "gpsim/errors.hpp"

#include <cmath>
#include <string>

namespace gpsim {

namespace {

void require_positive(double value, const char* name)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw Error(ErrorCode::NonPositiveParameter,
                    std::string(name) + " must be finite and > 0, got " + std::to_string(value));
    }
}

} // namespace

Params validate_params(const Params& raw)
{
    require_positive(raw.g, "g");
    require_positive(raw.lambda, "lambda");
    require_positive(raw.R, "R");
    require_positive(raw.P, "P");
    require_positive(raw.alpha, "alpha");
    require_positive(raw.beta, "beta");
    require_positive(raw.domain_length, "domain_length");
    if (!(raw.epsilon > 0.0 && raw.epsilon <= 1.0)) {
        throw Error(ErrorCode::EpsilonOutOfRange,
                    "epsilon must lie in (0, 1], got " + std::to_string(raw.epsilon));
    }
    if (!std::isfinite(raw.delta())) {
        throw Error(ErrorCode::InvalidArgument, "P*R - alpha*beta is not finite");
    }
    return raw;
}

Grid::Grid(std::size_t m, double domain_length)
    : m_(m)
    , length_(domain_length)
    , h_(domain_length / static_cast<double>(m))
    , k_(m)
{
    if (m < 4 || m % 2 != 0) {
        throw Error(ErrorCode::OddOrTooSmallM, "m must be even and >= 4, got " + std::to_string(m));
    }
    if (!(domain_length > 0.0) || !std::isfinite(domain_length)) {
        throw Error(ErrorCode::NonPositiveParameter, "domain_length must be finite and > 0");
    }
    const double base = 2.0 * std::numbers::pi / domain_length;
    const auto half = static_cast<std::ptrdiff_t>(m / 2);
    for (std::size_t j = 0; j < m; ++j) {
        auto signed_index = static_cast<std::ptrdiff_t>(j);
        if (signed_index > half) {
            signed_index -= static_cast<std::ptrdiff_t>(m);
        }
        k_[j] = base * static_cast<double>(signed_index);
    }
}

Grid make_grid(std::size_t m, double domain_length)
{
    return Grid(m, domain_length);
}

FieldState homogeneous_embed(const HomState& h, const Grid& grid)
{
    if (!(h.rho >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "homogeneous density rho must be >= 0");
    }
    FieldState out;
    out.t = h.t;
    out.psi.assign(grid.size(), std::polar(std::sqrt(h.rho), h.phi));
    out.n.assign(grid.size(), h.n);
    return out;
}

void check_state(const FieldState& state, const Grid& grid)
{
    if (state.psi.size() != grid.size() || state.n.size() != grid.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    "state has " + std::to_string(state.psi.size()) + "/" + std::to_string(state.n.size()) +
                        " samples, grid has " + std::to_string(grid.size()));
    }
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (!std::isfinite(state.psi[j].real()) || !std::isfinite(state.psi[j].imag()) ||
            !std::isfinite(state.n[j])) {
            throw Error(ErrorCode::NonFiniteState, "non-finite sample at node " + std::to_string(j));
        }
    }
}

} // namespace gpsim
