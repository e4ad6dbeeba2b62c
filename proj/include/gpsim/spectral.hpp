#pragma once

// Fourier facilities on the periodic grid.
//
// Convention: psi(x_l) = sum_j c_j exp(i k_j x_l), with the forward transform
// using exp(-i k_j x_l) and a 1/m normalisation. Under this convention the
// free Schrodinger flow i psi_t = -psi_xx / 2 maps c_j -> exp(-i tau k_j^2 / 2) c_j.

#include "gpsim/model.hpp"

#include <memory>
#include <span>
#include <vector>

namespace gpsim {

/// FFTW plans, a transform buffer and the cached kinetic phase for one grid.
/// Single owner; use one workspace per thread.
class SpectralWorkspace {
public:
    explicit SpectralWorkspace(const Grid& grid);
    ~SpectralWorkspace();

    SpectralWorkspace(SpectralWorkspace&&) noexcept;
    SpectralWorkspace& operator=(SpectralWorkspace&&) noexcept;
    SpectralWorkspace(const SpectralWorkspace&) = delete;
    SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

    const Grid& grid() const noexcept;

    /// Zero modes with |j'| > m/3 after every kinetic step. Off by default.
    void set_dealias(bool enabled) noexcept;
    bool dealias() const noexcept;

    /// Normalised coefficients c_j of the nodal samples.
    void forward(std::span<const Complex> values, std::span<Complex> coeffs);
    /// Nodal samples from coefficients.
    void backward(std::span<const Complex> coeffs, std::span<Complex> values);

    /// In-place exact free propagation over tau (any sign).
    void apply_kinetic(std::span<Complex> psi, double tau);

    /// exp(-i tau k_j^2 / 2) for the most recent tau passed to apply_kinetic.
    std::span<const Complex> phase_cache() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Exact solution at time tau of i psi_t = -psi_xx / 2 on the torus.
std::vector<Complex> kinetic_step(std::span<const Complex> psi, double tau, SpectralWorkspace& ws);

/// (d/dx)^order applied spectrally; order 1 zeroes the Nyquist mode.
std::vector<Complex> spectral_derivative(std::span<const Complex> f, int order, SpectralWorkspace& ws);
std::vector<double> spectral_derivative(std::span<const double> f, int order, SpectralWorkspace& ws);

} // namespace gpsim
