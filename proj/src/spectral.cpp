#include "gpsim/spectral.hpp"

#include "gpsim/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <algorithm>
#include <mutex>
#include <string>

namespace gpsim {

namespace {

// The FFTW planner is not re-entrant; execution on distinct plans is.
std::mutex& planner_mutex()
{
    static std::mutex mutex;
    return mutex;
}

void require_length(std::size_t got, std::size_t want)
{
    if (got != want) {
        throw Error(ErrorCode::LengthMismatch,
                    "field has " + std::to_string(got) + " samples, grid has " + std::to_string(want));
    }
}

} // namespace

struct SpectralWorkspace::Impl {
    Grid grid;
    fftw_complex* buffer = nullptr;
    fftw_plan forward_plan = nullptr;
    fftw_plan backward_plan = nullptr;
    std::vector<Complex> phase;
    double phase_tau = std::nan("");
    bool dealias = false;

    explicit Impl(const Grid& g)
        : grid(g)
        , phase(g.size(), Complex(1.0, 0.0))
    {
        const int m = static_cast<int>(g.size());
        std::lock_guard lock(planner_mutex());
        buffer = fftw_alloc_complex(g.size());
        forward_plan = fftw_plan_dft_1d(m, buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_plan = fftw_plan_dft_1d(m, buffer, buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    ~Impl()
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(forward_plan);
        fftw_destroy_plan(backward_plan);
        fftw_free(buffer);
    }

    Complex* data() noexcept { return reinterpret_cast<Complex*>(buffer); }

    void load(std::span<const Complex> values)
    {
        std::copy(values.begin(), values.end(), data());
    }

    void store(std::span<Complex> values) const
    {
        const Complex* src = reinterpret_cast<const Complex*>(buffer);
        std::copy(src, src + values.size(), values.begin());
    }

    void update_phase(double tau)
    {
        if (tau == phase_tau) {
            return;
        }
        const auto k = grid.wavenumbers();
        for (std::size_t j = 0; j < k.size(); ++j) {
            phase[j] = std::polar(1.0, -0.5 * tau * k[j] * k[j]);
        }
        phase_tau = tau;
    }
};

SpectralWorkspace::SpectralWorkspace(const Grid& grid)
    : impl_(std::make_unique<Impl>(grid))
{
}

SpectralWorkspace::~SpectralWorkspace() = default;
SpectralWorkspace::SpectralWorkspace(SpectralWorkspace&&) noexcept = default;
SpectralWorkspace& SpectralWorkspace::operator=(SpectralWorkspace&&) noexcept = default;

const Grid& SpectralWorkspace::grid() const noexcept { return impl_->grid; }

void SpectralWorkspace::set_dealias(bool enabled) noexcept { impl_->dealias = enabled; }
bool SpectralWorkspace::dealias() const noexcept { return impl_->dealias; }

std::span<const Complex> SpectralWorkspace::phase_cache() const noexcept { return impl_->phase; }

void SpectralWorkspace::forward(std::span<const Complex> values, std::span<Complex> coeffs)
{
    const std::size_t m = impl_->grid.size();
    require_length(values.size(), m);
    require_length(coeffs.size(), m);
    impl_->load(values);
    fftw_execute(impl_->forward_plan);
    const double scale = 1.0 / static_cast<double>(m);
    Complex* c = impl_->data();
    for (std::size_t j = 0; j < m; ++j) {
        coeffs[j] = c[j] * scale;
    }
}

void SpectralWorkspace::backward(std::span<const Complex> coeffs, std::span<Complex> values)
{
    const std::size_t m = impl_->grid.size();
    require_length(coeffs.size(), m);
    require_length(values.size(), m);
    impl_->load(coeffs);
    fftw_execute(impl_->backward_plan);
    impl_->store(values);
}

void SpectralWorkspace::apply_kinetic(std::span<Complex> psi, double tau)
{
    const std::size_t m = impl_->grid.size();
    require_length(psi.size(), m);
    if (!std::isfinite(tau)) {
        throw Error(ErrorCode::InvalidArgument, "kinetic step size must be finite");
    }
    impl_->update_phase(tau);
    impl_->load(psi);
    fftw_execute(impl_->forward_plan);

    const double scale = 1.0 / static_cast<double>(m);
    Complex* c = impl_->data();
    const auto half = static_cast<std::ptrdiff_t>(m / 2);
    for (std::size_t j = 0; j < m; ++j) {
        c[j] *= impl_->phase[j] * scale;
        if (impl_->dealias) {
            auto signed_index = static_cast<std::ptrdiff_t>(j);
            if (signed_index > half) {
                signed_index -= static_cast<std::ptrdiff_t>(m);
            }
            if (3 * std::abs(signed_index) > static_cast<std::ptrdiff_t>(m)) {
                c[j] = 0.0;
            }
        }
    }
    fftw_execute(impl_->backward_plan);
    impl_->store(psi);
}

std::vector<Complex> kinetic_step(std::span<const Complex> psi, double tau, SpectralWorkspace& ws)
{
    require_length(psi.size(), ws.grid().size());
    std::vector<Complex> out(psi.begin(), psi.end());
    ws.apply_kinetic(out, tau);
    return out;
}

std::vector<Complex> spectral_derivative(std::span<const Complex> f, int order, SpectralWorkspace& ws)
{
    if (order != 1 && order != 2) {
        throw Error(ErrorCode::UnsupportedOrder, "derivative order must be 1 or 2, got " + std::to_string(order));
    }
    const Grid& grid = ws.grid();
    require_length(f.size(), grid.size());

    std::vector<Complex> coeffs(grid.size());
    ws.forward(f, coeffs);
    const auto k = grid.wavenumbers();
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
        if (order == 1) {
            coeffs[j] *= Complex(0.0, k[j]);
        } else {
            coeffs[j] *= -k[j] * k[j];
        }
    }
    if (order == 1) {
        coeffs[grid.nyquist_index()] = 0.0;
    }
    std::vector<Complex> out(grid.size());
    ws.backward(coeffs, out);
    return out;
}

std::vector<double> spectral_derivative(std::span<const double> f, int order, SpectralWorkspace& ws)
{
    std::vector<Complex> tmp(f.begin(), f.end());
    const auto d = spectral_derivative(std::span<const Complex>(tmp), order, ws);
    std::vector<double> out(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) {
        out[j] = d[j].real();
    }
    return out;
}

} // namespace gpsim
