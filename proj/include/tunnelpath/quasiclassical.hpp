#pragma once

// Quasi-classical tunnelling path for the square barrier: the dimensionless
// relation S(D) between D = x/a and S = (k0 lambda / m) tau_1, its inverse
// x(tau), the effective velocity dD/dS, and the classically allowed limit.
//
// Shifted time: tau_1 = tau + m (x0 + a) / k0, so tau_1 = t_ph at the exit.

#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>
#include <vector>

#include "tunnelpath/numerics.hpp"
#include "tunnelpath/phase.hpp"
#include "tunnelpath/scattering.hpp"
#include "tunnelpath/wavepacket.hpp"

namespace tunnelpath {

namespace detail {

inline void require_path_domain(double gamma, double epsilon) {
  if (!(gamma > 0.0)) throw std::domain_error("path relation: gamma must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::domain_error("path relation: epsilon must lie in (0, 1)");
}

inline void require_unit_interval(double D) {
  if (!(D >= -1.0 - 1e-12 && D <= 1.0 + 1e-12)) throw std::domain_error("path relation: D must lie in [-1, 1]");
}

// Interior term h(u), u = gamma (1 - D):
//   [eps u sech^2 u - tanh u] / [1 - eps sech^2 u]
// written without cancellation as
//   -[eps (tanh u - u sech^2 u) + (1 - eps) tanh u] / [(1 - eps) + eps tanh^2 u].
inline double interior_term(double u, double eps) {
  const double t = std::tanh(u);
  return -(eps * tanh_minus_u_sech2(u) + (1.0 - eps) * t) / ((1.0 - eps) + eps * t * t);
}

inline double interior_term_derivative(double u, double eps) {
  const double t = std::tanh(u);
  const double s = sech2(u);
  const double num = -(eps * tanh_minus_u_sech2(u) + (1.0 - eps) * t);
  const double den = (1.0 - eps) + eps * t * t;
  return s * ((eps - 1.0 - 2.0 * eps * u * t) * den - num * 2.0 * eps * t) / (den * den);
}

// Exit value S(1) = [sinh(4g)/4 + eps(1 - 2eps) g] / [eps(1 - eps) + sinh^2(2g)/4].
inline double exit_term(double g, double eps) {
  if (g > 20.0) {
    const double e4 = std::exp(-4.0 * g);
    const double csch2 = 4.0 * e4 / ((1.0 - e4) * (1.0 - e4));
    const double coth = (1.0 + e4) / (1.0 - e4);
    return (0.5 * coth + eps * (1.0 - 2.0 * eps) * g * csch2) / (eps * (1.0 - eps) * csch2 + 0.25);
  }
  const double sh = std::sinh(2.0 * g);
  return (0.25 * std::sinh(4.0 * g) + eps * (1.0 - 2.0 * eps) * g) / (eps * (1.0 - eps) + 0.25 * sh * sh);
}

}  // namespace detail

/// S(D) for the square barrier at opacity gamma and energy ratio epsilon.
inline double s_of_d_exact(double D, double gamma, double epsilon) {
  detail::require_path_domain(gamma, epsilon);
  detail::require_unit_interval(D);
  const double u = gamma * (1.0 - std::min(D, 1.0));
  return detail::exit_term(gamma, epsilon) + detail::interior_term(u, epsilon);
}

/// dS/dD, non-negative on [-1, 1].
inline double ds_dd_exact(double D, double gamma, double epsilon) {
  detail::require_path_domain(gamma, epsilon);
  detail::require_unit_interval(D);
  return -gamma * detail::interior_term_derivative(gamma * (1.0 - std::min(D, 1.0)), epsilon);
}

/// Dimensionless phase time (k lambda / m) t_ph, i.e. S at the exit.
inline double dimensionless_phase_time(double k, const BarrierParams& b) {
  return k * kappa(k, b) / b.m * phase_time(k, b);
}

/// Unique D in [-1, 1] with S(D) = S.
inline double invert_path(double gamma, double epsilon, double S, RootOptions opts = {}) {
  const double lo = s_of_d_exact(-1.0, gamma, epsilon);
  const double hi = s_of_d_exact(1.0, gamma, epsilon);
  const double slack = 1e-12 * std::max(1.0, std::abs(hi));
  if (!(S >= lo - slack && S <= hi + slack))
    throw std::out_of_range("invert_path: S = " + std::to_string(S) + " outside attainable range [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
  const double snap = 1e-14 * std::max(1.0, std::abs(hi));
  if (S >= hi - snap) return 1.0;
  if (S <= lo + snap) return -1.0;
  return find_root([&](double D) { return s_of_d_exact(D, gamma, epsilon) - S; }, -1.0, 1.0, opts);
}

struct PathSample {
  double D;
  double S;
};

struct PathTable {
  double gamma = 0.0;
  double epsilon = 0.0;
  std::vector<PathSample> samples;

  /// D(S) by root finding on the exact relation (not by table interpolation).
  [[nodiscard]] double position_at(double S) const { return invert_path(gamma, epsilon, S); }
  [[nodiscard]] double time_at(double D) const { return s_of_d_exact(D, gamma, epsilon); }
  [[nodiscard]] double s_min() const { return samples.front().S; }
  [[nodiscard]] double s_max() const { return samples.back().S; }
};

/// n uniformly spaced D samples on [-1, 1]; throws if S decreases anywhere.
inline PathTable build_path(double gamma, double epsilon, std::size_t n) {
  if (n < 2) throw std::invalid_argument("build_path: need at least two samples");
  PathTable t{gamma, epsilon, {}};
  t.samples.reserve(n);
  for (double D : linspace(-1.0, 1.0, n)) {
    const double S = s_of_d_exact(D, gamma, epsilon);
    if (!t.samples.empty() && S < t.samples.back().S - 1e-10)
      throw NumericalError("build_path: S(D) decreases at D = " + std::to_string(D));
    t.samples.push_back({D, S});
  }
  return t;
}

/// tau_1 = tau + m (x0 + a)/k0.
inline double shifted_time(double tau, const WavePacketSpec& spec, const BarrierParams& b) {
  return tau + b.m * (spec.x0 + b.a) / spec.k0;
}

/// Quasi-classical detection time tau at interior point x: tau_1 = t_ph + beta.
inline double path_time(double x, const WavePacketSpec& spec, const BarrierParams& b) {
  const double k = spec.k0;
  return phase_time(k, b) + beta_exact(k, x, b) - b.m * (spec.x0 + b.a) / k;
}

/// Position on the quasi-classical path at time tau (inverse of path_time).
inline double path_position(double tau, const WavePacketSpec& spec, const BarrierParams& b) {
  const double k = spec.k0;
  const double lam = kappa(k, b);
  const double S = k * lam / b.m * shifted_time(tau, spec, b);
  return b.a * invert_path(lam * b.a, b.energy_ratio(k), S);
}

struct HartmannVelocity {
  double exact;       ///< 1 / (dS/dD)
  double asymptotic;  ///< e^{2 gamma (1 - D)} / (8 gamma^2 eps (1 - D))
};

inline HartmannVelocity hartmann_velocity(double D, double gamma, double epsilon) {
  const double slope = ds_dd_exact(D, gamma, epsilon);
  const double d = 1.0 - D;
  return {1.0 / slope, std::exp(2.0 * gamma * d) / (8.0 * gamma * gamma * epsilon * d)};
}

/// Classical flight time m * integral_{x0}^{x} dx' / sqrt(k0^2 - 2 m V(x')).
/// Piecewise-constant potentials are integrated exactly; any other callable
/// V(x) by Gauss–Legendre panels.
template <class Potential>
double allowed_region_time(double x, const WavePacketSpec& spec, const Potential& V, double m = 1.0,
                           std::size_t panels = 64) {
  const double k2 = spec.k0 * spec.k0;
  if (!(x >= spec.x0)) throw std::domain_error("allowed_region_time: x must not precede x0");
  auto speed_inverse = [&](double v) {
    const double q2 = k2 - 2.0 * m * v;
    if (!(q2 > 0.0)) throw std::domain_error("allowed_region_time: path crosses a classical turning point");
    return m / std::sqrt(q2);
  };
  if constexpr (std::same_as<Potential, PiecewisePotential>) {
    double total = 0.0;
    double cursor = spec.x0;
    for (const auto& s : V.layers()) {
      if (s.right <= cursor) continue;
      if (s.left >= x) break;
      const double from = std::max(s.left, cursor);
      const double to = std::min(s.right, x);
      if (from > cursor) total += (from - cursor) * speed_inverse(0.0);
      total += (to - from) * speed_inverse(s.height);
      cursor = to;
    }
    if (x > cursor) total += (x - cursor) * speed_inverse(0.0);
    return total;
  } else {
    const double width = (x - spec.x0) / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
      const double lo = spec.x0 + width * static_cast<double>(p);
      total += gauss_legendre(16, lo, lo + width).integrate([&](double y) { return speed_inverse(V(y)); });
    }
    return total;
  }
}

/// Default detection-time grid step 0.02 m a / k0 (m / k0 for a zero-width barrier).
inline double default_tau_step(double k0, const BarrierParams& b) {
  return 0.02 * b.m * (b.a > 0.0 ? b.a : 1.0) / k0;
}

/// Location of the maximum of a tau-indexed density on [lo, hi].
template <class Density>
PeakSearch argmax_tau(Density&& density, double lo, double hi, double step) {
  return locate_peak(std::forward<Density>(density), lo, hi, step);
}

/// Envelope-peak time from omega_{k0}(x) = x0 + k0 tau / m.
inline double saddle_time(double x, const WavePacketSpec& spec, const BarrierParams& b) {
  const double w = (b.absent() || x <= b.a) ? omega(spec.k0, x, b) : transmission_phase_derivative(spec.k0, b) + x;
  return b.m * (w - spec.x0) / spec.k0;
}

}  // namespace tunnelpath
