#pragma once

// Stationary scattering off a symmetric square barrier V0 on [-a, a]
// (hbar = 1), plus a transfer-matrix solver for arbitrary piecewise-constant
// potentials that serves as an independent check of the closed forms.

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "tunnelpath/numerics.hpp"

namespace tunnelpath {

struct BarrierParams {
  double V0 = 0.0;  ///< barrier height
  double a = 1.0;   ///< half-width
  double m = 1.0;   ///< particle mass

  /// Barrier of opacity gamma = lambda*a at energy ratio epsilon = k^2/(2 m V0).
  /// The matching incident momentum is returned by momentum_at().
  static BarrierParams from_opacity(double gamma, double epsilon, double a = 1.0, double m = 1.0) {
    if (!(gamma >= 0.0)) throw std::domain_error("from_opacity: gamma must be >= 0");
    if (!(epsilon > 0.0 && epsilon < 1.0))
      throw std::domain_error("from_opacity: epsilon must lie in (0, 1)");
    if (!(a > 0.0) || !(m > 0.0)) throw std::domain_error("from_opacity: a and m must be > 0");
    const double lambda = gamma / a;
    return {lambda * lambda / ((1.0 - epsilon) * 2.0 * m), a, m};
  }

  void validate() const {
    if (!(V0 >= 0.0)) throw std::domain_error("BarrierParams: V0 must be >= 0");
    if (!(a >= 0.0)) throw std::domain_error("BarrierParams: a must be >= 0");
    if (!(m > 0.0)) throw std::domain_error("BarrierParams: m must be > 0");
  }

  [[nodiscard]] bool absent() const noexcept { return V0 == 0.0 || a == 0.0; }
  [[nodiscard]] double two_m_v0() const noexcept { return 2.0 * m * V0; }
  [[nodiscard]] double momentum_at(double epsilon) const { return std::sqrt(two_m_v0() * epsilon); }
  [[nodiscard]] double energy(double k) const noexcept { return k * k / (2.0 * m); }
  [[nodiscard]] double energy_ratio(double k) const { return k * k / two_m_v0(); }
  [[nodiscard]] bool tunneling(double k) const noexcept { return k * k < two_m_v0(); }
};

/// Evanescent decay rate lambda = sqrt(2 m V0 - k^2).
inline double kappa(double k, const BarrierParams& b) {
  if (!(k >= 0.0)) throw std::domain_error("kappa: momentum must be >= 0");
  const double d = b.two_m_v0() - k * k;
  if (!(d > 0.0))
    throw std::domain_error("kappa: k^2 >= 2 m V0 (above-barrier regime)");
  return std::sqrt(d);
}

/// Opacity gamma = lambda(k) a.
inline double opacity(double k, const BarrierParams& b) { return kappa(k, b) * b.a; }

struct ScatteringAmplitudes {
  complex T{1.0, 0.0};
  complex R{0.0, 0.0};
  double k = 0.0;
  bool ill_conditioned = false;

  [[nodiscard]] double transmission() const { return std::norm(T); }
  [[nodiscard]] double reflection() const { return std::norm(R); }
  [[nodiscard]] double unitarity_defect() const { return std::norm(T) + std::norm(R) - 1.0; }
};

namespace detail {

// Quantities shared by the closed-form amplitudes and eigenfunctions. Every
// hyperbolic function of gamma is carried with a factor e^{-2 gamma}, so
// nothing overflows for opaque barriers, and the 1/lambda terms are written
// through (1 - e^{-z})/z so the threshold lambda -> 0 is regular.
struct BarrierKernel {
  double k;
  double lambda;
  double gamma;
  complex phase;        // e^{-2ika}
  complex denominator;  // e^{-2 gamma} [cosh 2 gamma + (i/2)(lambda/k - k/lambda) sinh 2 gamma]
  double sinh_scaled;   // e^{-2 gamma} sinh 2 gamma
  double sinh_over_lambda;  // e^{-2 gamma} sinh(2 gamma) / lambda
};

inline BarrierKernel barrier_kernel(double k, const BarrierParams& b) {
  if (!(k > 0.0)) throw std::domain_error("scattering: momentum must be > 0");
  const double d = b.two_m_v0() - k * k;
  if (d < 0.0)
    throw std::domain_error("scattering: k^2 > 2 m V0 is above the barrier; "
                            "use transfer_matrix_solve");
  BarrierKernel out{};
  out.k = k;
  out.lambda = std::sqrt(d);
  out.gamma = out.lambda * b.a;
  const double e4 = std::exp(-4.0 * out.gamma);
  out.sinh_scaled = -0.5 * std::expm1(-4.0 * out.gamma);
  out.sinh_over_lambda = 2.0 * b.a * one_minus_exp_ratio(4.0 * out.gamma);
  const double cosh_scaled = 0.5 * (1.0 + e4);
  const double odd = (out.lambda / k) * out.sinh_scaled - k * out.sinh_over_lambda;
  out.denominator = complex(cosh_scaled, 0.5 * odd);
  out.phase = std::polar(1.0, -2.0 * k * b.a);
  return out;
}

}  // namespace detail

/// T_k = e^{-2ika} / [cosh 2λa + (i/2)(λ/k - k/λ) sinh 2λa].
inline complex transmission_amplitude(double k, const BarrierParams& b) {
  if (!(k > 0.0)) throw std::domain_error("transmission_amplitude: momentum must be > 0");
  if (b.absent()) return {1.0, 0.0};
  const auto K = detail::barrier_kernel(k, b);
  return K.phase * std::exp(-2.0 * K.gamma) / K.denominator;
}

/// R_k = -(i/2)(λ/k + k/λ) sinh(2λa) T_k, from matching value and slope at x = -a.
inline complex reflection_amplitude(double k, const BarrierParams& b) {
  if (!(k > 0.0)) throw std::domain_error("reflection_amplitude: momentum must be > 0");
  if (b.absent()) return {0.0, 0.0};
  const auto K = detail::barrier_kernel(k, b);
  const double even = (K.lambda / k) * K.sinh_scaled + k * K.sinh_over_lambda;
  return complex(0.0, -0.5 * even) * K.phase / K.denominator;
}

inline ScatteringAmplitudes amplitudes(double k, const BarrierParams& b) {
  return {transmission_amplitude(k, b), reflection_amplitude(k, b), k, false};
}

/// Right-moving scattering eigenfunction f_{k+}(x), delta-normalized in k.
inline complex eigenfunction_plus(double k, double x, const BarrierParams& b) {
  if (!(k > 0.0)) throw std::domain_error("eigenfunction_plus: momentum must be > 0");
  if (b.absent()) return std::polar(1.0 / sqrt_2pi, k * x);
  const auto K = detail::barrier_kernel(k, b);
  if (x < -b.a) {
    const double even = (K.lambda / k) * K.sinh_scaled + k * K.sinh_over_lambda;
    const complex R = complex(0.0, -0.5 * even) * K.phase / K.denominator;
    return (std::polar(1.0, k * x) + R * std::polar(1.0, -k * x)) / sqrt_2pi;
  }
  if (x > b.a) {
    const complex T = K.phase * std::exp(-2.0 * K.gamma) / K.denominator;
    return T * std::polar(1.0, k * x) / sqrt_2pi;
  }
  // e^{ika} T [cosh u - (ik/λ) sinh u] with u = λ(a - x) in [0, 2γ]
  const double depth = b.a - x;
  const double u = K.lambda * depth;
  const double grow = std::exp(u - 2.0 * K.gamma);
  const double cosh_part = 0.5 * (grow + std::exp(-u - 2.0 * K.gamma));
  const double sinh_part = grow * depth * one_minus_exp_ratio(2.0 * u);
  const complex bracket(cosh_part, -k * sinh_part);
  return std::polar(1.0, k * b.a) * K.phase / K.denominator * bracket / sqrt_2pi;
}

/// Left-moving eigenfunction; the barrier is parity symmetric so f_{k-}(x) = f_{k+}(-x).
inline complex eigenfunction_minus(double k, double x, const BarrierParams& b) {
  return eigenfunction_plus(k, -x, b);
}

// ---------------------------------------------------------------------------
// Piecewise-constant potentials and the transfer-matrix oracle
// ---------------------------------------------------------------------------

struct Segment {
  double left;
  double right;
  double height;
};

/// Potential made of constant segments; zero outside their union.
class PiecewisePotential {
 public:
  PiecewisePotential() = default;

  explicit PiecewisePotential(std::vector<Segment> segments) : segments_(std::move(segments)) {
    std::sort(segments_.begin(), segments_.end(),
              [](const Segment& l, const Segment& r) { return l.left < r.left; });
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const auto& s = segments_[i];
      if (!std::isfinite(s.left) || !std::isfinite(s.right) || !(s.right > s.left))
        throw std::invalid_argument("PiecewisePotential: segment " + std::to_string(i) +
                                    " must have finite left < right");
      if (i > 0 && s.left < segments_[i - 1].right)
        throw std::invalid_argument("PiecewisePotential: overlapping segments");
    }
  }

  static PiecewisePotential square(const BarrierParams& b) {
    if (b.absent()) return {};
    return PiecewisePotential({{-b.a, b.a, b.V0}});
  }

  [[nodiscard]] const std::vector<Segment>& segments() const noexcept { return segments_; }
  [[nodiscard]] bool empty() const noexcept { return segments_.empty(); }
  [[nodiscard]] double left_edge() const { return segments_.front().left; }
  [[nodiscard]] double right_edge() const { return segments_.back().right; }

  [[nodiscard]] double operator()(double x) const {
    for (const auto& s : segments_)
      if (x >= s.left && x <= s.right) return s.height;
    return 0.0;
  }

  [[nodiscard]] double max_height() const {
    double v = 0.0;
    for (const auto& s : segments_) v = std::max(v, s.height);
    return v;
  }

  /// Segments plus the zero-height gaps between them, left to right.
  [[nodiscard]] std::vector<Segment> layers() const {
    std::vector<Segment> out;
    for (const auto& s : segments_) {
      if (!out.empty() && s.left > out.back().right) out.push_back({out.back().right, s.left, 0.0});
      out.push_back(s);
    }
    return out;
  }

 private:
  std::vector<Segment> segments_;
};

enum class Incidence { from_left, from_right };

namespace detail {

// (psi, psi') carried through constant layers; log_scale tracks the
// renormalizations applied to keep the state finite.
struct WaveState {
  complex psi;
  complex dpsi;
  double log_scale = 0.0;

  void renormalize() {
    const double n = std::max(std::abs(psi), std::abs(dpsi));
    if (n > 1e100 || (n < 1e-100 && n > 0.0)) {
      psi /= n;
      dpsi /= n;
      log_scale += std::log(n);
    }
  }
};

inline void advance_step(WaveState& s, double q2, double dx);

// Advance the state by dx through a layer where k^2 - 2mV = q2, in sub-steps
// short enough that cosh never overflows before renormalization.
inline void advance(WaveState& s, double q2, double dx) {
  const double growth = q2 < 0.0 ? std::sqrt(-q2) * std::abs(dx) : 0.0;
  const int steps = growth > 50.0 ? static_cast<int>(std::ceil(growth / 50.0)) : 1;
  for (int i = 0; i < steps; ++i) advance_step(s, q2, dx / steps);
}

inline void advance_step(WaveState& s, double q2, double dx) {
  double c = 0.0;
  double sq = 0.0;  // sin(q dx)/q
  if (q2 >= 0.0) {
    const double q = std::sqrt(q2);
    c = std::cos(q * dx);
    sq = q * dx == 0.0 ? dx : std::sin(q * dx) / q;
  } else {
    const double kap = std::sqrt(-q2);
    c = std::cosh(kap * dx);
    sq = dx * sinhc(kap * dx);
  }
  const complex psi = c * s.psi + sq * s.dpsi;
  const complex dpsi = -q2 * sq * s.psi + c * s.dpsi;
  s.psi = psi;
  s.dpsi = dpsi;
  s.renormalize();
}

inline constexpr double overflow_guard_log = 575.0;  // ~ log(1e250)

// Sweep across all layers toward the incidence side, stopping at `stop`
// when it lies inside the structure. Returns the state at the stop point.
inline WaveState sweep(const PiecewisePotential& p, double k, double m, Incidence inc, double stop) {
  const auto layers = p.layers();
  WaveState s;
  if (inc == Incidence::from_left) {
    const double xr = p.right_edge();
    s.psi = std::polar(1.0, k * xr);
    s.dpsi = complex(0.0, k) * s.psi;
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
      const double q2 = k * k - 2.0 * m * it->height;
      const double to = std::max(it->left, stop);
      const double from = std::min(it->right, xr);
      if (to < from) advance(s, q2, to - from);
      if (stop >= it->left) break;
    }
  } else {
    const double xl = p.left_edge();
    s.psi = std::polar(1.0, -k * xl);
    s.dpsi = complex(0.0, -k) * s.psi;
    for (const auto& layer : layers) {
      const double q2 = k * k - 2.0 * m * layer.height;
      const double to = std::min(layer.right, stop);
      const double from = std::max(layer.left, xl);
      if (to > from) advance(s, q2, to - from);
      if (stop <= layer.right) break;
    }
  }
  return s;
}

// Coefficients of e^{ikx} (forward) and e^{-ikx} (backward) at x.
inline std::pair<complex, complex> split_plane_waves(const WaveState& s, double k, double x) {
  const complex ratio = s.dpsi / complex(0.0, k);
  return {0.5 * (s.psi + ratio) * std::polar(1.0, -k * x), 0.5 * (s.psi - ratio) * std::polar(1.0, k * x)};
}

}  // namespace detail

/// (T, R) by propagating (psi, psi') across the layers with 2x2 real-analytic
/// transfer matrices. Valid above and below every layer height.
inline ScatteringAmplitudes transfer_matrix_solve(const PiecewisePotential& p, double k, double m = 1.0,
                                                  Incidence inc = Incidence::from_left) {
  if (!(k > 0.0)) throw std::domain_error("transfer_matrix_solve: momentum must be > 0");
  if (p.empty()) return {{1.0, 0.0}, {0.0, 0.0}, k, false};
  ScatteringAmplitudes out;
  out.k = k;
  if (inc == Incidence::from_left) {
    const double xl = p.left_edge();
    const auto s = detail::sweep(p, k, m, inc, xl);
    const auto [fwd, bwd] = detail::split_plane_waves(s, k, xl);
    out.T = std::exp(-s.log_scale) / fwd;
    out.R = bwd / fwd;
    out.ill_conditioned = s.log_scale + std::log(std::abs(fwd)) > detail::overflow_guard_log;
  } else {
    const double xr = p.right_edge();
    const auto s = detail::sweep(p, k, m, inc, xr);
    const auto [fwd, bwd] = detail::split_plane_waves(s, k, xr);
    out.T = std::exp(-s.log_scale) / bwd;
    out.R = fwd / bwd;
    out.ill_conditioned = s.log_scale + std::log(std::abs(bwd)) > detail::overflow_guard_log;
  }
  return out;
}

/// Scattering eigenfunction at x from the transfer-matrix sweep, with the same
/// 1/sqrt(2 pi) normalization as eigenfunction_plus.
inline complex transfer_matrix_wavefunction(const PiecewisePotential& p, double k, double x, double m = 1.0,
                                            Incidence inc = Incidence::from_left) {
  if (p.empty()) {
    const double sign = inc == Incidence::from_left ? 1.0 : -1.0;
    return std::polar(1.0 / sqrt_2pi, sign * k * x);
  }
  const auto amp = transfer_matrix_solve(p, k, m, inc);
  if (inc == Incidence::from_left) {
    if (x >= p.right_edge()) return amp.T * std::polar(1.0, k * x) / sqrt_2pi;
    if (x <= p.left_edge()) return (std::polar(1.0, k * x) + amp.R * std::polar(1.0, -k * x)) / sqrt_2pi;
  } else {
    if (x <= p.left_edge()) return amp.T * std::polar(1.0, -k * x) / sqrt_2pi;
    if (x >= p.right_edge()) return (std::polar(1.0, -k * x) + amp.R * std::polar(1.0, k * x)) / sqrt_2pi;
  }
  // Interior: the sweep starts from a unit outgoing wave; dividing by the
  // incident coefficient at the far edge normalizes it.
  const double edge = inc == Incidence::from_left ? p.left_edge() : p.right_edge();
  const auto full = detail::sweep(p, k, m, inc, edge);
  const auto [fwd, bwd] = detail::split_plane_waves(full, k, edge);
  const complex incident = inc == Incidence::from_left ? fwd : bwd;
  const auto s = detail::sweep(p, k, m, inc, x);
  return s.psi / incident * std::exp(s.log_scale - full.log_scale) / sqrt_2pi;
}

/// (T, R) for any k > 0: closed form below the barrier top, transfer matrix above.
inline ScatteringAmplitudes general_amplitudes(double k, const BarrierParams& b) {
  if (b.absent() || k * k <= b.two_m_v0()) return amplitudes(k, b);
  return transfer_matrix_solve(PiecewisePotential::square(b), k, b.m);
}

/// f_{k+}(x) for any k > 0, same fallback as general_amplitudes.
inline complex general_eigenfunction(double k, double x, const BarrierParams& b) {
  if (b.absent() || k * k <= b.two_m_v0()) return eigenfunction_plus(k, x, b);
  return transfer_matrix_wavefunction(PiecewisePotential::square(b), k, x, b.m);
}

}  // namespace tunnelpath
