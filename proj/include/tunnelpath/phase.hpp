#pragma once

// Phase functions of the right-moving square-barrier eigenfunction inside the
// barrier, f_{k+}(x) = exp(r_k(x) + i theta_k(x)), and the derived transit
// quantities: omega = d theta / dk, the interior delay beta_k(x) and the
// phase time t_ph(k).
//
// Branch convention: arg T_k = -2ka - arg(denominator), where the denominator
// has positive real part, so phi_k is continuous in k; theta_k(a) = ka + phi_k
// seeds the interior branch and the remaining Im log term has positive real
// argument, so theta_k is continuous in x as well.

#include <cmath>
#include <stdexcept>

#include "tunnelpath/numerics.hpp"
#include "tunnelpath/scattering.hpp"

namespace tunnelpath {

namespace detail {

inline void require_inside(double x, const BarrierParams& b, const char* who) {
  if (std::abs(x) > b.a * (1.0 + 1e-12))
    throw std::domain_error(std::string(who) + ": x must satisfy |x| <= a");
}

// tanh(u)/u
inline double tanhc(double u) { return std::abs(u) < 1e-8 ? 1.0 - u * u / 3.0 : std::tanh(u) / u; }

// (tanh u - u sech^2 u) / u^3
inline double tanh_defect_ratio(double u) {
  if (std::abs(u) < 1e-2) {
    const double u2 = u * u;
    return 2.0 / 3.0 - u2 * (8.0 / 15.0 - u2 * (34.0 / 105.0));
  }
  return tanh_minus_u_sech2(u) / (u * u * u);
}

}  // namespace detail

/// phi_k = arg T_k on the continuous branch described above.
inline double transmission_phase(double k, const BarrierParams& b) {
  if (!(k > 0.0)) throw std::domain_error("transmission_phase: momentum must be > 0");
  if (b.absent()) return 0.0;
  const auto K = detail::barrier_kernel(k, b);
  return -2.0 * k * b.a - std::arg(K.denominator);
}

/// Wigner–Bohm phase time t_ph = (m/k)(phi'_k + 2a).
inline double phase_time(double k, const BarrierParams& b) {
  if (!(k > 0.0)) throw std::domain_error("phase_time: momentum must be > 0");
  if (b.absent()) return 2.0 * b.a * b.m / k;
  const auto K = detail::barrier_kernel(k, b);
  const double lam = K.lambda;
  const double gam = K.gamma;
  const double a = b.a;
  const double k2 = k * k;
  const double lam2 = lam * lam;
  const double q2 = (k2 + lam2) * (k2 + lam2);  // (2 m V0)^2

  if (gam > 20.0) {
    // Divide numerator and denominator by sinh^2(2 gamma).
    const double e4 = std::exp(-4.0 * gam);
    const double csch2 = 4.0 * e4 / ((1.0 - e4) * (1.0 - e4));
    const double coth = (1.0 + e4) / (1.0 - e4);
    const double x_ratio = q2 / (k2 * lam2);  // (lambda/k + k/lambda)^2
    const double num = x_ratio * coth / (2.0 * lam) + (1.0 - k2 / lam2) * a * csch2;
    const double den = csch2 + 0.25 * x_ratio;
    return b.m / k * num / den;
  }
  // Printed form multiplied through by k^2 lambda^2 / lambda^2, which removes
  // the 0/0 at lambda = 0.
  const double z = 4.0 * gam;
  const double num = a * (16.0 * a * a * k2 * k2 * sinhc_excess(z) + k2 * (2.0 * sinhc(z) + 1.0) + lam2 * sinhc(z));
  const double sc = sinhc(2.0 * gam);
  const double den = k2 + q2 * a * a * sc * sc;
  return b.m / k * num / den;
}

/// d phi_k / dk from the phase-time closed form.
inline double transmission_phase_derivative(double k, const BarrierParams& b) {
  return k / b.m * phase_time(k, b) - 2.0 * b.a;
}

/// Interior delay beta_k(x); vanishes at the exit x = a and is negative inside.
inline double beta_exact(double k, double x, const BarrierParams& b) {
  if (!(k > 0.0)) throw std::domain_error("beta_exact: momentum must be > 0");
  if (b.absent()) return b.m / k * (x - b.a);
  detail::require_inside(x, b, "beta_exact");
  const auto K = detail::barrier_kernel(k, b);
  const double depth = b.a - x;
  const double u = K.lambda * depth;
  const double tc = detail::tanhc(u);
  const double kd = k * depth;
  const double num = kd * kd * detail::tanh_defect_ratio(u) + tc;
  const double den = 1.0 + kd * kd * tc * tc;
  const double value = -b.m / k * depth * num / den;
  if (!std::isfinite(value)) throw NumericalError("beta_exact: non-finite result");
  return value;
}

/// theta_k(x) = ka + phi_k + Im log[1 - i (k/lambda) tanh lambda(a - x)].
inline double phase_theta(double k, double x, const BarrierParams& b) {
  if (!(k > 0.0)) throw std::domain_error("phase_theta: momentum must be > 0");
  if (b.absent()) return k * x;
  detail::require_inside(x, b, "phase_theta");
  const auto K = detail::barrier_kernel(k, b);
  const double depth = b.a - x;
  const double ratio = k * depth * detail::tanhc(K.lambda * depth);  // (k/λ) tanh u
  return k * b.a + transmission_phase(k, b) - std::atan(ratio);
}

/// omega_k(x) = d theta_k / dk = a + phi'_k + (k/m) beta_k(x).
inline double omega(double k, double x, const BarrierParams& b) {
  if (b.absent()) return x;
  return b.a + transmission_phase_derivative(k, b) + k / b.m * beta_exact(k, x, b);
}

/// Central finite difference of phase_theta in k (oracle route for omega).
inline double omega_finite_difference(double k, double x, const BarrierParams& b, double rel_step = 1e-5) {
  const double h = rel_step * k;
  const double up = phase_theta(k + h, x, b);
  const double down = unwrap_near(phase_theta(k - h, x, b), up);
  return (up - down) / (2.0 * h);
}

/// d/dk of the phase of the transfer-matrix eigenfunction of an arbitrary
/// piecewise-constant potential (valid above the barrier too).
inline double omega_oracle(const PiecewisePotential& p, double k, double x, double m = 1.0,
                           double rel_step = 1e-5) {
  const double h = rel_step * k;
  const double up = std::arg(transfer_matrix_wavefunction(p, k + h, x, m));
  const double down = unwrap_near(std::arg(transfer_matrix_wavefunction(p, k - h, x, m)), up);
  return (up - down) / (2.0 * h);
}

/// Log-modulus r_k(x) = log |f_{k+}(x)| inside the barrier.
inline double log_modulus(double k, double x, const BarrierParams& b) {
  if (!(k > 0.0)) throw std::domain_error("log_modulus: momentum must be > 0");
  if (b.absent()) return -std::log(sqrt_2pi);
  detail::require_inside(x, b, "log_modulus");
  const auto K = detail::barrier_kernel(k, b);
  const double depth = b.a - x;
  const double u = K.lambda * depth;
  const double ratio = k * depth * detail::tanhc(u);
  const double log_t = -2.0 * K.gamma - std::log(std::abs(K.denominator));
  const double log_cosh = u + std::log(0.5 * (1.0 + std::exp(-2.0 * u)));
  return log_t + log_cosh + 0.5 * std::log1p(ratio * ratio) - std::log(sqrt_2pi);
}

struct PhaseData {
  double k = 0.0;
  double x = 0.0;
  double r = 0.0;      ///< log-modulus
  double theta = 0.0;  ///< phase on the continuous branch
  double omega = 0.0;  ///< d theta / dk
  double beta = 0.0;   ///< interior delay
};

inline PhaseData phase_data(double k, double x, const BarrierParams& b) {
  return {k, x, log_modulus(k, x, b), phase_theta(k, x, b), omega(k, x, b),
          b.absent() ? b.m / k * (x - b.a) : beta_exact(k, x, b)};
}

}  // namespace tunnelpath
