#include "gpsim/equilibria.hpp"
#include "gpsim/ode.hpp"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace gpsim;
using namespace gpsim::test;

namespace {

std::array<Complex, 2> eigen_oracle(const Matrix2& j)
{
    Eigen::Matrix2d m;
    m << j[0][0], j[0][1], j[1][0], j[1][1];
    const Eigen::Vector2cd ev = Eigen::EigenSolver<Eigen::Matrix2d>(m, false).eigenvalues();
    return {ev[0], ev[1]};
}

bool close_pair(std::array<Complex, 2> a, std::array<Complex, 2> b, double rel)
{
    const auto key = [](Complex z) { return std::make_pair(z.real(), z.imag()); };
    std::sort(a.begin(), a.end(), [&](Complex x, Complex y) { return key(x) < key(y); });
    std::sort(b.begin(), b.end(), [&](Complex x, Complex y) { return key(x) < key(y); });
    const double scale = std::max(std::abs(a[0]), std::abs(a[1]));
    return std::abs(a[0] - b[0]) <= rel * scale && std::abs(a[1] - b[1]) <= rel * scale;
}

// Classification read off the eigenvalues alone.
Classification from_eigenvalues(const std::array<Complex, 2>& ev)
{
    if (ev[0].imag() != 0.0 || ev[1].imag() != 0.0) {
        return ev[0].real() < 0.0 ? Classification::StableSpiral : Classification::NonHyperbolic;
    }
    const double a = ev[0].real();
    const double b = ev[1].real();
    if (a < 0.0 && b < 0.0) {
        return Classification::StableNode;
    }
    if (a * b < 0.0) {
        return Classification::Saddle;
    }
    return Classification::NonHyperbolic;
}

// Classification of xi1 from the defining inequalities on (P, R, alpha, beta).
Classification xi1_predicate(const Params& p)
{
    const double delta = p.P * p.R - p.alpha * p.beta;
    if (delta < 0.0) {
        return Classification::Saddle;
    }
    return p.P * p.P * p.R * p.R / (4.0 * p.alpha * p.alpha) < delta ? Classification::StableSpiral
                                                                      : Classification::StableNode;
}

std::array<double, 2> rk4_flow(std::array<double, 2> y, const Params& p, double tau, std::size_t steps)
{
    const auto f = [&](const std::array<double, 2>& s) { return rhs_homogeneous(s, p); };
    for (std::size_t i = 0; i < steps; ++i) {
        y = step(y, f, tau, OdeStepperKind::RK4);
    }
    return y;
}

std::array<double, 2> rk4_linear(std::array<double, 2> d, const Matrix2& j, double tau, std::size_t steps)
{
    const auto f = [&](const std::array<double, 2>& s) {
        return std::array<double, 2>{j[0][0] * s[0] + j[0][1] * s[1], j[1][0] * s[0] + j[1][1] * s[1]};
    };
    for (std::size_t i = 0; i < steps; ++i) {
        d = step(d, f, tau, OdeStepperKind::RK4);
    }
    return d;
}

} // namespace

TEST(Xi1, SpiralSet)
{
    const EquilibriumReport r = xi1(spiral_set());
    EXPECT_NEAR(r.point[0], 9.9, 1e-12 * 9.9);
    EXPECT_NEAR(r.point[1], 10.0, 1e-12 * 10.0);
    EXPECT_DOUBLE_EQ(r.delta, 99.0);
    EXPECT_DOUBLE_EQ(r.spiral_threshold, 25.0);
    EXPECT_EQ(r.classification, Classification::StableSpiral);
}

TEST(Xi1, NodeSet)
{
    const EquilibriumReport r = xi1(node_set());
    EXPECT_NEAR(r.delta, 9.95, 1e-13);
    EXPECT_NEAR(r.spiral_threshold, 100.0, 1e-12);
    EXPECT_EQ(r.classification, Classification::StableNode);
    EXPECT_NEAR(r.point[0], 9.95 / 0.5, 1e-12 * 19.9);
    EXPECT_NEAR(r.point[1], 0.5, 1e-15);
}

TEST(Xi1, SubthresholdIsSaddle)
{
    const EquilibriumReport r = xi1(subthreshold_set());
    EXPECT_DOUBLE_EQ(r.delta, -99.0);
    EXPECT_EQ(r.classification, Classification::Saddle);
}

TEST(Xi2, SubthresholdStableNode)
{
    const EquilibriumReport r = xi2(subthreshold_set());
    EXPECT_EQ(r.point[0], 0.0);
    EXPECT_NEAR(r.point[1], 0.1, 1e-16);
    EXPECT_TRUE(close_pair(r.eigenvalues, {Complex(-10, 0), Complex(-9.9, 0)}, 1e-13));
    EXPECT_EQ(r.classification, Classification::StableNode);
}

TEST(Xi2, SpiralSetSaddle)
{
    const EquilibriumReport r = xi2(spiral_set());
    EXPECT_NEAR(r.point[1], 1000.0, 1e-12);
    EXPECT_TRUE(close_pair(r.eigenvalues, {Complex(-0.1, 0), Complex(990, 0)}, 1e-13));
    EXPECT_EQ(r.classification, Classification::Saddle);
}

TEST(Equilibria, ThresholdIsNonHyperbolic)
{
    const Params p = make_params(1, 1, 1, 1);
    EXPECT_TRUE(is_non_hyperbolic(p));
    const EquilibriumReport a = xi1(p);
    const EquilibriumReport b = xi2(p);
    EXPECT_EQ(a.classification, Classification::NonHyperbolic);
    EXPECT_EQ(b.classification, Classification::NonHyperbolic);
    EXPECT_EQ(a.point[0], 0.0);
    EXPECT_EQ(a.point[1], 1.0);
    EXPECT_EQ(b.point[0], 0.0);
    EXPECT_EQ(b.point[1], 1.0);
    EXPECT_FALSE(is_non_hyperbolic(node_set()));
}

TEST(Equilibria, ReferenceSetsTable)
{
    EXPECT_EQ(xi1(spiral_set()).classification, Classification::StableSpiral);
    EXPECT_EQ(xi1(node_set()).classification, Classification::StableNode);
    EXPECT_EQ(xi1(beta_dominant_set()).classification, Classification::StableNode);
    EXPECT_EQ(xi1(subthreshold_set()).classification, Classification::Saddle);
    EXPECT_EQ(xi2(subthreshold_set()).classification, Classification::StableNode);
}

TEST(Equilibria, NamesAreSnakeCase)
{
    EXPECT_EQ(to_string(Classification::StableSpiral), "stable_spiral");
    EXPECT_EQ(to_string(Classification::StableNode), "stable_node");
    EXPECT_EQ(to_string(Classification::Saddle), "saddle");
    EXPECT_EQ(to_string(Classification::NonHyperbolic), "non_hyperbolic");
}

TEST(Equilibria, EigenvaluesMatchOracleRandom)
{
    std::mt19937_64 gen(31);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        const Params p = random_params(gen);
        if (is_non_hyperbolic(p)) {
            continue;
        }
        for (const EquilibriumReport& r : {xi1(p), xi2(p)}) {
            const auto oracle = eigen_oracle(r.jacobian);
            EXPECT_TRUE(close_pair(r.eigenvalues, oracle, 1e-12)) << i;
            const double tr = r.jacobian[0][0] + r.jacobian[1][1];
            const double det = r.jacobian[0][0] * r.jacobian[1][1] - r.jacobian[0][1] * r.jacobian[1][0];
            for (const Complex& lam : r.eigenvalues) {
                const double scale = std::norm(lam) + std::abs(tr) * std::abs(lam) + std::abs(det);
                EXPECT_LE(std::abs(lam * lam - tr * lam + det), 1e-12 * scale) << i;
            }
            EXPECT_EQ(r.classification, from_eigenvalues(oracle)) << i;
            ++checked;
        }
    }
    EXPECT_GT(checked, 500);
}

TEST(Equilibria, ClassificationMatchesPredicatesUnderRescaling)
{
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> c_dist(0.1, 10.0);
    for (int i = 0; i < 200; ++i) {
        const Params p = random_params(gen);
        const double c = c_dist(gen);
        Params q = p;
        q.P *= c;
        q.alpha *= c;
        q.beta *= c;
        for (const Params& s : {p, q}) {
            if (!is_non_hyperbolic(s)) {
                EXPECT_EQ(xi1(s).classification, xi1_predicate(s)) << i;
                EXPECT_EQ(xi2(s).classification,
                          s.delta() > 0 ? Classification::Saddle : Classification::StableNode);
            }
        }
    }
}

TEST(Equilibria, HartmanGrobmanConsistency)
{
    std::mt19937_64 gen(4242);
    int checked = 0;
    while (checked < 200) {
        const Params p = random_params(gen, 0.2, 5.0);
        const double d = p.delta();
        if (std::abs(d) < 0.1 * std::max(p.P * p.R, p.alpha * p.beta)) {
            continue;
        }
        for (const EquilibriumReport& r : {xi1(p), xi2(p)}) {
            const bool stable =
                r.classification == Classification::StableSpiral || r.classification == Classification::StableNode;
            double slowest = HUGE_VAL;
            double unstable = 0.0;
            double hi = 0.0;
            for (const Complex& lam : r.eigenvalues) {
                slowest = std::min(slowest, std::abs(lam.real()));
                unstable = std::max(unstable, lam.real());
                hi = std::max(hi, std::abs(lam));
            }
            // Long enough to leave the transient, short enough that a saddle stays near-linear.
            const double horizon = stable ? 8.0 / slowest : 8.0 / unstable;
            const double tau = 0.02 / hi;
            const auto steps = static_cast<std::size_t>(std::ceil(horizon / tau));
            if (steps > 400000) {
                continue;
            }
            // Displacement into rho > 0 so the condensate-free equilibrium stays in the physical quadrant.
            const std::array<double, 2> delta{1e-6 * std::max(1.0, r.point[0]), 0.7e-6 * r.point[1]};
            const auto full = rk4_flow({r.point[0] + delta[0], r.point[1] + delta[1]}, p, tau, steps);
            const auto lin = rk4_linear(delta, r.jacobian, tau, steps);
            const double d0 = std::hypot(delta[0], delta[1]);
            const double d_full = std::hypot(full[0] - r.point[0], full[1] - r.point[1]);
            const double d_lin = std::hypot(lin[0], lin[1]);
            EXPECT_EQ(d_full < d0, stable) << checked;
            EXPECT_EQ(d_lin < d0, stable) << checked;
        }
        ++checked;
    }
}

TEST(BetaDominance, Examples)
{
    const BetaDominanceReport a = classify_beta_gg_alpha(beta_dominant_set());
    EXPECT_NEAR(a.discriminant, 143.92, 1e-10);
    EXPECT_EQ(a.classification, Classification::StableNode);
    const BetaDominanceReport b = classify_beta_gg_alpha(spiral_set());
    // 100^2 - 4 * 10^2 * 100 + 4 * 10^3 * 0.1
    EXPECT_NEAR(b.discriminant, -29600.0, 1e-8);
    EXPECT_EQ(b.classification, Classification::StableSpiral);
    EXPECT_EQ(code_of([] { classify_beta_gg_alpha(subthreshold_set()); }), ErrorCode::PreconditionDeltaNonpositive);
    EXPECT_EQ(code_of([] { classify_beta_gg_alpha(make_params(1, 1, 1, 1)); }),
              ErrorCode::PreconditionDeltaNonpositive);
}

TEST(BetaDominance, AgreesWithXi1)
{
    std::mt19937_64 gen(12);
    for (int i = 0; i < 200; ++i) {
        const Params p = random_params(gen);
        if (p.delta() > 1e-9 * p.P * p.R) {
            EXPECT_EQ(classify_beta_gg_alpha(p).classification, xi1(p).classification) << i;
        }
    }
}

TEST(LyapunovEll, Examples)
{
    const Params p = subthreshold_set();
    EXPECT_EQ(lyapunov_ell({0.0, p.P / p.beta}, p), 0.0);
    EXPECT_NEAR(lyapunov_ell({1.0, 1.0}, p), 0.505, 1e-15);
}

TEST(LyapunovEll, DecreasesAlongSubthresholdTrajectories)
{
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    int runs = 0;
    while (runs < 30) {
        const Params p = random_params(gen, 0.2, 5.0);
        if (!(p.delta() < 0.0)) {
            continue;
        }
        const HomState init{0.0, u(gen), u(gen), 0.0};
        const double tau = 0.02 / (p.alpha + p.beta + p.R * (init.rho + init.n + p.P / p.beta));
        const auto traj = integrate_homogeneous(init, p, tau, 5.0, OdeStepperKind::RK4);
        double prev = HUGE_VAL;
        for (const HomState& s : traj) {
            const double ell = lyapunov_ell({s.rho, s.n}, p);
            if (ell < 1e-14) {
                break;
            }
            ASSERT_LT(ell, prev) << runs << " t=" << s.t;
            ASSERT_LE(lyapunov_ell_rate({s.rho, s.n}, p), 0.0);
            prev = ell;
        }
        ++runs;
    }
}

TEST(LyapunovEll, FittedDecayRatePositive)
{
    const Params p = subthreshold_set();
    const auto traj = integrate_homogeneous({0.0, 1.0, 1.0, 0.0}, p, 1e-3, 2.0, OdeStepperKind::RK4);
    std::vector<double> t, ell;
    for (const HomState& s : traj) {
        if (s.t >= 0.5) {
            t.push_back(s.t);
            ell.push_back(lyapunov_ell({s.rho, s.n}, p));
        }
    }
    EXPECT_GT(fit_exponential_rate(t, ell), 0.0);
}

TEST(FitExponentialRate, RecoversRate)
{
    std::vector<double> t, v;
    for (int i = 0; i <= 50; ++i) {
        t.push_back(0.1 * i);
        v.push_back(3.0 * std::exp(-1.7 * 0.1 * i));
    }
    EXPECT_NEAR(fit_exponential_rate(t, v), 1.7, 1e-12);
    v[3] = 0.0;
    EXPECT_EQ(code_of([&] { fit_exponential_rate(t, v); }), ErrorCode::InvalidArgument);
}
