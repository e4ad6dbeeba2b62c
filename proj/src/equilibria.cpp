#include "gpsim/equilibria.hpp"

#include "gpsim/errors.hpp"
#include "gpsim/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gpsim {

std::string_view to_string(Classification c) noexcept
{
    switch (c) {
    case Classification::StableSpiral: return "stable_spiral";
    case Classification::StableNode: return "stable_node";
    case Classification::Saddle: return "saddle";
    case Classification::NonHyperbolic: return "non_hyperbolic";
    }
    return "unknown";
}

bool is_non_hyperbolic(const Params& p) noexcept
{
    return std::abs(p.delta()) <= 1e-12 * std::max(p.P * p.R, p.alpha * p.beta);
}

EquilibriumReport xi1(const Params& p)
{
    const double PR = p.P * p.R;
    const double delta = p.delta();

    EquilibriumReport r;
    r.delta = delta;
    r.spiral_threshold = PR * PR / (4.0 * p.alpha * p.alpha);
    r.point = {delta / (p.alpha * p.R), p.alpha / p.R};
    r.jacobian = {{{0.0, delta / p.alpha}, {-p.alpha, -PR / p.alpha}}};

    // Roots of z^2 + (PR/alpha) z + delta. The second root goes through the
    // product delta = z1 z2 so that it keeps full relative accuracy.
    const double disc = PR * PR - 4.0 * p.alpha * p.alpha * delta;
    if (disc >= 0.0) {
        const double z1 = (-PR - std::sqrt(disc)) / (2.0 * p.alpha);
        r.eigenvalues = {Complex(z1, 0.0), Complex(delta / z1, 0.0)};
    } else {
        const double re = -PR / (2.0 * p.alpha);
        const double im = std::sqrt(-disc) / (2.0 * p.alpha);
        r.eigenvalues = {Complex(re, -im), Complex(re, im)};
    }

    if (is_non_hyperbolic(p)) {
        r.classification = Classification::NonHyperbolic;
    } else if (delta < 0.0) {
        r.classification = Classification::Saddle;
    } else if (r.spiral_threshold < delta) {
        r.classification = Classification::StableSpiral;
    } else {
        r.classification = Classification::StableNode;
    }
    return r;
}

EquilibriumReport xi2(const Params& p)
{
    const double PR = p.P * p.R;
    const double delta = p.delta();

    EquilibriumReport r;
    r.delta = delta;
    r.spiral_threshold = PR * PR / (4.0 * p.alpha * p.alpha);
    r.point = {0.0, p.P / p.beta};
    r.jacobian = {{{PR / p.beta - p.alpha, 0.0}, {-PR / p.beta, -p.beta}}};
    r.eigenvalues = {Complex(-p.beta, 0.0), Complex(delta / p.beta, 0.0)};

    if (is_non_hyperbolic(p)) {
        r.classification = Classification::NonHyperbolic;
    } else if (delta > 0.0) {
        r.classification = Classification::Saddle;
    } else {
        r.classification = Classification::StableNode;
    }
    return r;
}

BetaDominanceReport classify_beta_gg_alpha(const Params& p)
{
    if (!(p.delta() > 0.0)) {
        throw Error(ErrorCode::PreconditionDeltaNonpositive,
                    "P*R - alpha*beta must be > 0, got " + std::to_string(p.delta()));
    }
    const double PR = p.P * p.R;
    const double a = p.alpha;
    const double discriminant = PR * PR - 4.0 * a * a * PR + 4.0 * a * a * a * p.beta;
    const Classification c = xi1(p).classification;
    if (p.beta > a && discriminant > 0.0 && c != Classification::StableNode) {
        throw Error(ErrorCode::InvalidArgument, "positive discriminant with beta > alpha must give a stable node");
    }
    return {c, discriminant};
}

double lyapunov_ell(const std::array<double, 2>& s, const Params& p) noexcept
{
    const double n_bar = p.P / p.beta;
    const double dn = s[1] - n_bar;
    return n_bar * s[0] + 0.5 * dn * dn;
}

double lyapunov_ell_rate(const std::array<double, 2>& s, const Params& p) noexcept
{
    const auto d = rhs_homogeneous(s, p);
    return p.P / p.beta * d[0] + (s[1] - p.P / p.beta) * d[1];
}

double fit_exponential_rate(std::span<const double> times, std::span<const double> values)
{
    if (times.size() != values.size() || times.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "exponential fit needs >= 2 paired samples");
    }
    double st = 0.0;
    double sy = 0.0;
    const auto n = static_cast<double>(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(values[i] > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "exponential fit needs strictly positive values");
        }
        st += times[i];
        sy += std::log(values[i]);
    }
    const double t_mean = st / n;
    const double y_mean = sy / n;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double dt = times[i] - t_mean;
        num += dt * (std::log(values[i]) - y_mean);
        den += dt * dt;
    }
    return -num / den;
}

} // namespace gpsim
