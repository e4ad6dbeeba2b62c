#pragma once

// Model constants, the periodic 1D grid and the two state representations
// (nodal fields and the spatially homogeneous reduction).

#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace gpsim {

using Complex = std::complex<double>;

/// Model constants of the condensate/reservoir system plus the torus length.
/// Obtain validated instances through validate_params().
struct Params {
    double g = 1.0;       ///< condensate self-interaction
    double lambda = 1.0;  ///< condensate-reservoir coupling
    double R = 1.0;       ///< stimulated scattering rate
    double P = 1.0;       ///< exciton creation rate (spatially constant)
    double alpha = 1.0;   ///< polariton loss rate
    double beta = 1.0;    ///< exciton loss rate
    double epsilon = 1.0; ///< adiabaticity parameter, in (0, 1]
    double domain_length = 2.0 * std::numbers::pi;

    /// Condensation threshold P*R - alpha*beta.
    double delta() const noexcept { return P * R - alpha * beta; }
    /// -1, 0 or +1; zero only when delta() is exactly zero.
    int delta_sign() const noexcept { return (delta() > 0.0) - (delta() < 0.0); }

    bool operator==(const Params&) const = default;
};

/// Throws NonPositiveParameter (naming the field) or EpsilonOutOfRange.
Params validate_params(const Params& raw);

/// Uniform periodic mesh x_j = j*h with signed DFT wavenumbers.
class Grid {
public:
    Grid(std::size_t m, double domain_length);

    std::size_t size() const noexcept { return m_; }
    double length() const noexcept { return length_; }
    double h() const noexcept { return h_; }
    double x(std::size_t j) const noexcept { return static_cast<double>(j) * h_; }

    /// k_j = 2*pi*j'/L where j' runs 0..m/2 then -(m/2-1)..-1.
    /// The Nyquist entry (j = m/2) carries +pi*m/L.
    std::span<const double> wavenumbers() const noexcept { return k_; }
    std::size_t nyquist_index() const noexcept { return m_ / 2; }

    bool operator==(const Grid& other) const noexcept
    {
        return m_ == other.m_ && length_ == other.length_;
    }

private:
    std::size_t m_;
    double length_;
    double h_;
    std::vector<double> k_;
};

/// Throws OddOrTooSmallM unless m is even and >= 4; NonPositiveParameter for L <= 0.
Grid make_grid(std::size_t m, double domain_length);

/// Nodal samples of the condensate and the reservoir at time t.
struct FieldState {
    double t = 0.0;
    std::vector<Complex> psi;
    std::vector<double> n;

    std::size_t size() const noexcept { return psi.size(); }
};

/// Spatially homogeneous reduction: densities plus the accumulated phase.
struct HomState {
    double t = 0.0;
    double rho = 0.0;
    double n = 0.0;
    double phi = 0.0;
};

/// psi = sqrt(rho)*exp(i*phi) and n = h.n at every node.
FieldState homogeneous_embed(const HomState& h, const Grid& grid);

/// Throws LengthMismatch / NonFiniteState when the state does not fit the grid.
void check_state(const FieldState& state, const Grid& grid);

} // namespace gpsim
