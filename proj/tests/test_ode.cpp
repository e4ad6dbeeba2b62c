#include "gpsim/equilibria.hpp"
#include "gpsim/ode.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace gpsim;
using namespace gpsim::test;

TEST(RhsHomogeneous, VanishesAtXi1)
{
    const Params p = spiral_set();
    const auto r = rhs_homogeneous({9.9, 10.0}, p);
    EXPECT_NEAR(r[0], 0.0, 1e-12);
    EXPECT_NEAR(r[1], 0.0, 1e-12);
}

TEST(RhsHomogeneous, CondensateFreeAxisInvariant)
{
    const Params p = node_set();
    for (double n : {0.0, 0.5, 3.0, 100.0}) {
        const auto r = rhs_homogeneous({0.0, n}, p);
        EXPECT_EQ(r[0], 0.0);
        EXPECT_DOUBLE_EQ(r[1], p.P - p.beta * n);
    }
}

TEST(RhsHomogeneous, SpiralSetAtUnitState)
{
    const auto r = rhs_homogeneous({1.0, 1.0}, spiral_set());
    EXPECT_DOUBLE_EQ(r[0], -9.0);
    EXPECT_DOUBLE_EQ(r[1], 98.9);
}

TEST(RhsHomogeneous, EquilibriumResidualRandom)
{
    std::mt19937_64 gen(2024);
    for (int i = 0; i < 100; ++i) {
        const Params p = random_params(gen);
        const double scale = std::max(p.P, p.alpha * p.beta / p.R);
        const double rho1 = (p.P * p.R - p.alpha * p.beta) / (p.alpha * p.R);
        const auto r1 = rhs_homogeneous({rho1, p.alpha / p.R}, p);
        const auto r2 = rhs_homogeneous({0.0, p.P / p.beta}, p);
        EXPECT_LE(std::hypot(r1[0], r1[1]), 1e-12 * scale) << i;
        EXPECT_LE(std::hypot(r2[0], r2[1]), 1e-12 * scale) << i;
    }
}

TEST(RhsSplit, Examples)
{
    Params p = make_params(10, 0.1, 1, 100, 0.25);
    auto r = rhs_split_nonlinear(Complex(0.0, 0.0), 3.0, p);
    EXPECT_EQ(r.dpsi, Complex(0.0, 0.0));
    EXPECT_DOUBLE_EQ(r.dn, (p.P - p.beta * 3.0) / 0.25);

    p.epsilon = 1.0;
    const Complex psi = std::polar(std::sqrt(9.9), 0.4);
    r = rhs_split_nonlinear(psi, 10.0, p);
    EXPECT_NEAR(r.dn, 0.0, 1e-12);
    // d|psi|^2/dt = 2 Re(conj(psi) psi').
    EXPECT_NEAR(2.0 * (std::conj(psi) * r.dpsi).real(), 0.0, 1e-12);

    p.g = 1e-300;
    p.lambda = 1e-300;
    r = rhs_split_nonlinear(Complex(0.3, -0.2), p.alpha / p.R, p);
    EXPECT_LE(std::abs(r.dpsi), 1e-15);
}

TEST(RhsSplit, ArrayOverloadAgrees)
{
    const Params p = node_set();
    const Complex psi(0.7, -1.3);
    const auto a = rhs_split_nonlinear(psi, 2.5, p);
    const auto b = rhs_split_nonlinear(std::array<double, 3>{psi.real(), psi.imag(), 2.5}, p);
    EXPECT_DOUBLE_EQ(b[0], a.dpsi.real());
    EXPECT_DOUBLE_EQ(b[1], a.dpsi.imag());
    EXPECT_DOUBLE_EQ(b[2], a.dn);
}

TEST(RhsAdiabatic, Examples)
{
    const Params sub = subthreshold_set();
    EXPECT_EQ(rhs_adiabatic_hom(0.0, sub), 0.0);
    EXPECT_NEAR(rhs_adiabatic_hom(1.0, sub), 0.5 * (1.0 / 11.0 - 10.0), 1e-12);
    EXPECT_NEAR(rhs_adiabatic_hom(1.0, sub), -4.9545, 1e-4);
    const Params p = spiral_set();
    const double rho2 = (p.P * p.R - p.beta * p.alpha) / (p.R * p.alpha);
    EXPECT_NEAR(rhs_adiabatic_hom(rho2, p), 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(rhs_adiabatic_density(1.7, p), 2.0 * rhs_adiabatic_hom(1.7, p));
}

TEST(RhsAdiabatic, NonlinearMatchesDensityRate)
{
    const Params p = node_set();
    const std::array<double, 2> y{1.1, -0.4};
    const auto r = rhs_adiabatic_nonlinear(y, p);
    const double rho = y[0] * y[0] + y[1] * y[1];
    EXPECT_NEAR(2.0 * (y[0] * r[0] + y[1] * r[1]), rhs_adiabatic_density(rho, p), 1e-12);
}

TEST(Step, ZeroRhsLeavesStateUnchanged)
{
    const auto zero = [](const std::array<double, 3>&) { return std::array<double, 3>{}; };
    const std::array<double, 3> y{1.5, -2.0, 3.25};
    for (auto kind : {OdeStepperKind::RK4, OdeStepperKind::Midpoint}) {
        for (double tau : {1e-6, 0.1, 10.0}) {
            EXPECT_EQ(step(y, zero, tau, kind), y);
        }
    }
}

TEST(Step, Rk4ExponentialDecay)
{
    const auto decay = [](const std::array<double, 1>& y) { return std::array<double, 1>{-y[0]}; };
    const double tau = 0.1;
    const auto y = step(std::array<double, 1>{1.0}, decay, tau, OdeStepperKind::RK4);
    // One classical RK4 step on a linear problem is the degree-4 Taylor polynomial of exp(-tau).
    const double taylor = 1.0 - tau + tau * tau / 2.0 - tau * tau * tau / 6.0 + tau * tau * tau * tau / 24.0;
    EXPECT_NEAR(y[0], taylor, 4e-16);
    // Its distance to exp(-tau) is the local error tau^5/120 (about 8.2e-8 here).
    const double local = std::pow(tau, 5) / 120.0;
    EXPECT_NEAR(y[0] - std::exp(-tau), local, 0.05 * local);
}

TEST(Step, RejectsBadStepAndNonFinite)
{
    const auto id = [](const std::array<double, 1>& y) { return y; };
    EXPECT_EQ(code_of([&] { step(std::array<double, 1>{1.0}, id, 0.0, OdeStepperKind::RK4); }),
              ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { step(std::array<double, 1>{1.0}, id, -1.0, OdeStepperKind::Midpoint); }),
              ErrorCode::InvalidArgument);
    const auto blow = [](const std::array<double, 1>& y) { return std::array<double, 1>{y[0] * 1e308}; };
    EXPECT_EQ(code_of([&] { step(std::array<double, 1>{10.0}, blow, 1.0, OdeStepperKind::RK4); }),
              ErrorCode::NonFiniteState);
}

TEST(StepperKind, NamesRoundTrip)
{
    for (auto kind : {OdeStepperKind::RK4, OdeStepperKind::Midpoint}) {
        EXPECT_EQ(parse_stepper_kind(to_string(kind)), kind);
    }
    EXPECT_EQ(stepper_order(OdeStepperKind::RK4), 4);
    EXPECT_EQ(stepper_order(OdeStepperKind::Midpoint), 2);
    EXPECT_THROW(parse_stepper_kind("euler"), Error);
}

namespace {

double endpoint_error(const HomState& init, const Params& p, double tau, double t_end, OdeStepperKind kind,
                      const HomState& ref)
{
    const HomState e = integrate_homogeneous(init, p, tau, t_end, kind).back();
    EXPECT_DOUBLE_EQ(e.t, ref.t);
    return std::max({std::abs(e.rho - ref.rho), std::abs(e.n - ref.n), std::abs(e.phi - ref.phi)});
}

double observed_order(OdeStepperKind kind)
{
    const Params p = node_set();
    const HomState init{0.0, 1.0, 1.0, 0.0};
    const double t_end = 2.0;
    // Independent reference: RK4 at a step far below the ladder.
    const HomState ref = integrate_homogeneous(init, p, 1e-4, t_end, OdeStepperKind::RK4).back();
    const double taus[] = {0.04, 0.02, 0.01};
    std::vector<double> lx, ly;
    for (double tau : taus) {
        lx.push_back(std::log(tau));
        ly.push_back(std::log(endpoint_error(init, p, tau, t_end, kind, ref)));
    }
    const double mx = (lx[0] + lx[1] + lx[2]) / 3.0;
    const double my = (ly[0] + ly[1] + ly[2]) / 3.0;
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < 3; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

} // namespace

TEST(IntegrateHomogeneous, Rk4OrderFour)
{
    const double q = observed_order(OdeStepperKind::RK4);
    EXPECT_GE(q, 3.7);
    EXPECT_LE(q, 4.3);
}

TEST(IntegrateHomogeneous, MidpointOrderTwo)
{
    const double q = observed_order(OdeStepperKind::Midpoint);
    EXPECT_GE(q, 1.8);
    EXPECT_LE(q, 2.2);
}

TEST(IntegrateHomogeneous, EquilibriumIsConstantWithLinearPhase)
{
    const Params p = spiral_set();
    const double mu = p.g * 9.9 + p.lambda * 10.0;
    for (auto kind : {OdeStepperKind::RK4, OdeStepperKind::Midpoint}) {
        const auto traj = integrate_homogeneous({0.0, 9.9, 10.0, 0.3}, p, 1e-3, 2.0, kind);
        EXPECT_EQ(traj.front().phi, 0.3);
        for (const HomState& s : traj) {
            EXPECT_NEAR(s.rho, 9.9, 1e-12);
            EXPECT_NEAR(s.n, 10.0, 1e-12);
            EXPECT_NEAR(s.phi, 0.3 - mu * s.t, 1e-9);
        }
        EXPECT_DOUBLE_EQ(traj.back().t, 2.0);
    }
}

TEST(IntegrateHomogeneous, LastStepLandsOnEnd)
{
    const auto traj = integrate_homogeneous({0.0, 1.0, 1.0, 0.0}, node_set(), 0.3, 1.0, OdeStepperKind::RK4);
    ASSERT_EQ(traj.size(), 5u);
    EXPECT_DOUBLE_EQ(traj.back().t, 1.0);
}

TEST(IntegrateHomogeneous, SubthresholdConvergesToXi2)
{
    const Params p = subthreshold_set();
    const auto traj = integrate_homogeneous({0.0, 1.0, 1.0, 0.0}, p, 1e-3, 20.0, OdeStepperKind::RK4);
    EXPECT_LT(traj.back().rho, 1e-12);
    EXPECT_NEAR(traj.back().n, 0.1, 1e-12);
}

TEST(IntegrateHomogeneous, SpiralsIntoXi1)
{
    const Params p = spiral_set();
    const auto traj = integrate_homogeneous({0.0, 10.4, 10.5, 0.0}, p, 1e-3, 20.0, OdeStepperKind::RK4);
    EXPECT_NEAR(traj.back().rho, 9.9, 1e-8);
    EXPECT_NEAR(traj.back().n, 10.0, 1e-8);
    // A spiral crosses rho = rho* repeatedly on the way in.
    int crossings = 0;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        if ((traj[i - 1].rho - 9.9) * (traj[i].rho - 9.9) < 0.0) {
            ++crossings;
        }
    }
    EXPECT_GE(crossings, 3);
}

TEST(IntegrateHomogeneous, PositivityAndReservoirCapRandom)
{
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int i = 0; i < 100; ++i) {
        const Params p = random_params(gen, 0.1, 5.0);
        const HomState init{0.0, u(gen), u(gen), 0.0};
        // Step well below the relaxation scales of both components.
        const double rate = p.R * std::max(init.rho, p.P / p.beta + init.n) + p.beta + p.alpha + p.R * init.n;
        const double tau = 0.05 / rate;
        const auto traj = integrate_homogeneous(init, p, tau, 5.0, OdeStepperKind::RK4);
        const double cap = std::max(init.n, p.P / p.beta) * (1.0 + 1e-10);
        for (const HomState& s : traj) {
            ASSERT_GT(s.rho, 0.0) << i;
            ASSERT_GT(s.n, 0.0) << i;
            ASSERT_LE(s.n, cap) << i;
        }
    }
}

TEST(IntegrateHomogeneous, GrowthBoundHolds)
{
    const Params p = spiral_set();
    const HomState init{0.0, 0.5, 20.0, 0.0};
    const auto traj = integrate_homogeneous(init, p, 1e-3, 2.0, OdeStepperKind::RK4);
    for (const HomState& s : traj) {
        EXPECT_LE(s.rho, homogeneous_growth_bound(init, p, s.t) * (1 + 1e-9));
    }
}

TEST(IntegrateHomogeneous, PositivityLostOnHugeStep)
{
    const Params p = spiral_set();
    EXPECT_EQ(code_of([&] { integrate_homogeneous({0.0, 1.0, 1.0, 0.0}, p, 0.5, 5.0, OdeStepperKind::Midpoint); }),
              ErrorCode::PositivityLost);
}

TEST(AbelOrbit, SingularOnResonantReservoir)
{
    const Params p = node_set();
    EXPECT_EQ(code_of([&] { abel_orbit_rhs(1.0, p.alpha / p.R, p); }), ErrorCode::OrbitSingularity);
    EXPECT_EQ(code_of([&] { abel_orbit_rhs(0.0, 3.0, p); }), ErrorCode::OrbitSingularity);
}

TEST(AbelOrbit, ChainRule)
{
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.1, 20.0);
    for (int i = 0; i < 50; ++i) {
        const Params p = random_params(gen);
        const double rho = u(gen);
        const double n = u(gen);
        if (std::abs(p.R * n - p.alpha) < 1e-3 * p.alpha) {
            continue;
        }
        const auto r = rhs_homogeneous({rho, n}, p);
        const double q = r[1] / r[0];
        EXPECT_NEAR(abel_orbit_rhs(rho, n, p), q, 1e-12 * std::max(1.0, std::abs(q)));
    }
}

TEST(AbelOrbit, SpiralSetValue)
{
    EXPECT_NEAR(abel_orbit_rhs(1.0, 1.0, spiral_set()), 98.9 / -9.0, 1e-12);
    EXPECT_NEAR(abel_orbit_rhs(1.0, 1.0, spiral_set()), -10.9889, 1e-4);
}

TEST(AbelOrbit, CrossCheckAlongMonotoneArc)
{
    const Params p = spiral_set();
    const auto traj = integrate_homogeneous({0.0, 10.4, 10.5, 0.0}, p, 1e-3, 20.0, OdeStepperKind::RK4);
    const OrbitCheck oc = orbit_cross_check(traj, p);
    EXPECT_GT(oc.samples, 50u);
    EXPECT_LE(oc.max_deviation, 1e-6);
    for (std::size_t i = oc.first + 1; i <= oc.last; ++i) {
        EXPECT_NE(traj[i].rho > traj[i - 1].rho, traj[oc.first + 1].rho < traj[oc.first].rho);
    }
}

TEST(AbelOrbit, CrossCheckOnNodeAndSubthresholdSets)
{
    for (const Params& p : {node_set(), subthreshold_set()}) {
        const auto traj = integrate_homogeneous({0.0, 2.0, 0.2, 0.0}, p, 1e-3, 10.0, OdeStepperKind::RK4);
        EXPECT_LE(orbit_cross_check(traj, p).max_deviation, 1e-6);
    }
}
