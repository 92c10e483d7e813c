#include <cmath>

#include <gtest/gtest.h>

#include "tunnelpath/phase.hpp"

using namespace tunnelpath;

namespace {

// (m/k)(d arg T/dk + 2a) by central difference of the complex amplitude
double phase_time_oracle(double k, const BarrierParams& b) {
  const double h = 1e-5 * k;
  const double up = std::arg(transmission_amplitude(k + h, b));
  const double down = unwrap_near(std::arg(transmission_amplitude(k - h, b)), up);
  return b.m / k * ((up - down) / (2.0 * h) + 2.0 * b.a);
}

}  // namespace

TEST(TransmissionPhase, MatchesArgModTwoPi) {
  for (double g : {0.2, 2.0, 12.0}) {
    const auto b = BarrierParams::from_opacity(g, 0.3);
    for (double e : {0.05, 0.3, 0.9}) {
      const double k = b.momentum_at(e);
      const double phi = transmission_phase(k, b);
      EXPECT_NEAR(unwrap_near(std::arg(transmission_amplitude(k, b)), phi), phi, 1e-12);
    }
  }
}

TEST(PhaseTime, ZeroWidth) { EXPECT_EQ(phase_time(1.0, {4.0, 0.0, 1.0}), 0.0); }

TEST(PhaseTime, MatchesFiniteDifference) {
  for (double g : {0.1, 0.5, 2.0, 5.0, 10.0, 19.0, 25.0}) {
    for (double e : {0.05, 0.1, 0.5, 0.9}) {
      const auto b = BarrierParams::from_opacity(g, e, 1.3, 0.7);
      const double k = b.momentum_at(e);
      const double want = phase_time_oracle(k, b);
      EXPECT_NEAR(phase_time(k, b) / want, 1.0, 1e-6) << g << " " << e;
    }
  }
}

TEST(PhaseTime, BranchesMeet) {
  // at fixed epsilon and a, t_ph ~ 1/gamma^2 deep in the opaque regime
  const double g_lo = 20.0 - 1e-9;
  const double g_hi = 20.0 + 1e-9;
  const auto lo = BarrierParams::from_opacity(g_lo, 0.1);
  const auto hi = BarrierParams::from_opacity(g_hi, 0.1);
  EXPECT_NEAR(phase_time(lo.momentum_at(0.1), lo) * g_lo * g_lo / (phase_time(hi.momentum_at(0.1), hi) * g_hi * g_hi),
              1.0, 1e-12);
}

TEST(PhaseTime, SaturatesForOpaqueBarriers) {
  // fixed lambda and k, growing width
  const double k = 0.5;
  const double lam = 1.5;
  double previous = 0.0;
  for (double a : {10.0, 20.0, 40.0}) {
    const BarrierParams b{(lam * lam + k * k) / 2.0, a, 1.0};
    const double t = phase_time(k, b);
    if (previous > 0.0) {
      EXPECT_NEAR(t, previous, 1e-9);
    }
    previous = t;
  }
  // limit 2m/(k lambda)
  EXPECT_NEAR(previous, 2.0 / (k * lam), 1e-12);
}

TEST(PhaseTime, ThresholdFinite) {
  const BarrierParams b{2.0, 1.0, 1.0};
  const double t = phase_time(2.0, b);
  EXPECT_TRUE(std::isfinite(t));
  EXPECT_NEAR(t, phase_time(2.0 * (1.0 - 1e-10), b), 1e-6);
}

TEST(PhaseTheta, ExitValue) {
  const auto b = BarrierParams::from_opacity(2.0, 0.1);
  const double k = b.momentum_at(0.1);
  EXPECT_NEAR(phase_theta(k, b.a, b), k * b.a + transmission_phase(k, b), 1e-15);
}

TEST(PhaseTheta, AgreesWithEigenfunctionArgument) {
  const auto b = BarrierParams::from_opacity(2.0, 0.1);
  const double k = b.momentum_at(0.1);
  for (int i = 0; i <= 20; ++i) {
    const double x = -b.a + 2.0 * b.a * i / 20.0;
    const double theta = phase_theta(k, x, b);
    EXPECT_NEAR(unwrap_near(std::arg(eigenfunction_plus(k, x, b)), theta), theta, 1e-8) << x;
  }
}

TEST(PhaseTheta, ContinuousAlongScan) {
  const auto b = BarrierParams::from_opacity(8.0, 0.6);
  const double k = b.momentum_at(0.6);
  double prev = phase_theta(k, -b.a, b);
  for (int i = 1; i <= 400; ++i) {
    const double cur = phase_theta(k, -b.a + 2.0 * b.a * i / 400.0, b);
    EXPECT_LT(std::abs(cur - prev), 0.1);
    prev = cur;
  }
}

TEST(PhaseTheta, OutsideRejected) {
  const auto b = BarrierParams::from_opacity(2.0, 0.1);
  EXPECT_THROW(phase_theta(0.5, 1.5, b), std::domain_error);
}

TEST(Omega, ClosedFormMatchesFiniteDifference) {
  for (double g : {0.3, 2.0, 6.0}) {
    for (double e : {0.1, 0.5, 0.85}) {
      const auto b = BarrierParams::from_opacity(g, e);
      const double k = b.momentum_at(e);
      for (double x : {-1.0, -0.5, 0.0, 0.7, 1.0})
        EXPECT_NEAR(omega(k, x, b), omega_finite_difference(k, x, b), 1e-6 * b.a) << g << " " << e << " " << x;
    }
  }
}

TEST(Omega, ExitAndDecomposition) {
  const auto b = BarrierParams::from_opacity(2.0, 0.1);
  const double k = b.momentum_at(0.1);
  EXPECT_NEAR(omega(k, b.a, b), b.a + transmission_phase_derivative(k, b), 1e-14);
  for (double x : {-0.9, 0.0, 0.5})
    EXPECT_NEAR(omega(k, x, b) - b.a - transmission_phase_derivative(k, b), k / b.m * beta_exact(k, x, b), 1e-10);
}

TEST(Omega, TinyBarrierApproachesPosition) {
  const BarrierParams b{1e-10, 1.0, 1.0};
  const auto p = PiecewisePotential::square(b);
  for (double x : {-0.8, 0.1, 0.9}) EXPECT_NEAR(omega_oracle(p, 1.0, x), x, 1e-6);
  EXPECT_EQ(omega(1.0, 0.3, BarrierParams{0.0, 1.0, 1.0}), 0.3);
}

TEST(Beta, VanishesAtExitAndMatchesPrintedForm) {
  const auto b = BarrierParams::from_opacity(2.0, 0.1);
  const double k = b.momentum_at(0.1);
  const double lam = kappa(k, b);
  EXPECT_EQ(beta_exact(k, b.a, b), 0.0);
  const double q = b.two_m_v0() / (k * k);
  for (double x : {-1.0, -0.3, 0.0, 0.6}) {
    const double u = lam * (b.a - x);
    const double printed = b.m / k * (b.a - x - q * k / lam * std::sinh(u) * std::cosh(u) / k) /
                           (q * std::cosh(u) * std::cosh(u) - 1.0);
    EXPECT_NEAR(beta_exact(k, x, b), printed, 1e-12 * std::abs(printed)) << x;
    EXPECT_LT(beta_exact(k, x, b), 0.0);
  }
}

TEST(Beta, MatchesFiniteDifferenceRoute) {
  const auto b = BarrierParams::from_opacity(2.0, 0.1);
  const double k = b.momentum_at(0.1);
  const double from_fd = b.m / k * (omega_finite_difference(k, 0.0, b) - b.a - transmission_phase_derivative(k, b));
  EXPECT_NEAR(beta_exact(k, 0.0, b), from_fd, 1e-5);
}

TEST(LogModulus, MatchesEigenfunction) {
  for (double g : {0.5, 3.0, 30.0}) {
    const auto b = BarrierParams::from_opacity(g, 0.2);
    const double k = b.momentum_at(0.2);
    for (double x : {-1.0, -0.2, 0.5, 1.0}) {
      const double direct = std::log(std::abs(eigenfunction_plus(k, x, b)));
      EXPECT_NEAR(log_modulus(k, x, b), direct, 1e-10 * std::max(1.0, std::abs(direct))) << g << " " << x;
    }
  }
}

TEST(PhaseData, Bundle) {
  const auto b = BarrierParams::from_opacity(2.0, 0.1);
  const double k = b.momentum_at(0.1);
  const auto d = phase_data(k, 0.0, b);
  EXPECT_EQ(d.theta, phase_theta(k, 0.0, b));
  EXPECT_EQ(d.omega, omega(k, 0.0, b));
  EXPECT_EQ(d.beta, beta_exact(k, 0.0, b));
  EXPECT_EQ(d.r, log_modulus(k, 0.0, b));
}
