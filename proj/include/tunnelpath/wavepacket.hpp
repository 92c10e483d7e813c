#pragma once

// Initial wave packets and their evolution through the square barrier, by
// quadrature over the exact scattering states and by the narrow-band saddle
// approximation.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tunnelpath/numerics.hpp"
#include "tunnelpath/phase.hpp"
#include "tunnelpath/scattering.hpp"

namespace tunnelpath {

enum class Envelope { gaussian };

struct WavePacketSpec {
  double x0 = -10.0;     ///< initial centre, left of the barrier
  double k0 = 1.0;       ///< mean momentum
  double sigma_p = 0.1;  ///< momentum spread
  Envelope envelope = Envelope::gaussian;
  double band_sigmas = 6.0;  ///< half-width of the momentum band, in sigma_p

  [[nodiscard]] double sigma_x() const { return 0.5 / sigma_p; }

  void validate(const BarrierParams& b) const {
    if (!(k0 > 0.0)) throw std::invalid_argument("WavePacketSpec: k0 must be > 0");
    if (!(sigma_p > 0.0)) throw std::invalid_argument("WavePacketSpec: sigma_p must be > 0");
    if (!(band_sigmas > 0.0)) throw std::invalid_argument("WavePacketSpec: band_sigmas must be > 0");
    if (!std::isfinite(x0)) throw std::invalid_argument("WavePacketSpec: x0 must be finite");
    if (!b.absent() && !(x0 < -b.a)) throw std::invalid_argument("WavePacketSpec: x0 must lie left of the barrier");
  }

  /// Soft conditions under which the narrow-band picture is trustworthy.
  [[nodiscard]] std::vector<std::string> warnings(const BarrierParams& b) const {
    std::vector<std::string> out;
    if (sigma_p / k0 > 0.1) out.push_back("sigma_p/k0 exceeds 0.1; saddle-point results are unreliable");
    if (std::abs(x0 + b.a) < 5.0 * sigma_x())
      out.push_back("x0 lies within 5 sigma_x of the barrier entrance; the packet overlaps the barrier at tau = 0");
    if (k0 - band_sigmas * sigma_p <= 0.0) out.push_back("momentum band truncated at k = 0");
    return out;
  }

  /// Packet starting `sigmas` position widths left of the barrier entrance.
  static WavePacketSpec before_barrier(const BarrierParams& b, double k0, double sigma_p, double sigmas = 8.0) {
    WavePacketSpec s;
    s.k0 = k0;
    s.sigma_p = sigma_p;
    s.x0 = -b.a - sigmas * s.sigma_x();
    return s;
  }
};

/// Momentum envelope phi~(q), even and normalized: integral of phi~^2 dq = 1.
inline double envelope_momentum(const WavePacketSpec& s, double q) {
  const double sp = s.sigma_p;
  return std::pow(2.0 * pi * sp * sp, -0.25) * std::exp(-q * q / (4.0 * sp * sp));
}

/// Position envelope phi(y) = integral dq phi~(q) e^{iqy} / sqrt(2 pi).
inline double envelope_position(const WavePacketSpec& s, double y) {
  const double sp = s.sigma_p;
  return std::pow(2.0 * sp * sp / pi, 0.25) * std::exp(-sp * sp * y * y);
}

/// psi~_0(k) = phi~(k - k0) e^{-ik x0}; zero for k <= 0.
inline complex momentum_amplitude(const WavePacketSpec& s, double k) {
  if (!(k > 0.0)) return {0.0, 0.0};
  return std::polar(envelope_momentum(s, k - s.k0), -k * s.x0);
}

/// Free initial state psi_0(x) = phi(x - x0) e^{i k0 (x - x0)}.
inline complex initial_state(const WavePacketSpec& s, double x) {
  return std::polar(envelope_position(s, x - s.x0), s.k0 * (x - s.x0));
}

struct MomentumGrid {
  std::vector<double> k;
  std::vector<double> w;
  std::vector<complex> amplitude;  ///< psi~_0(k_i)

  [[nodiscard]] std::size_t size() const noexcept { return k.size(); }

  /// Sum of w_i |psi~_0(k_i)|^2; close to 1 unless the band is truncated.
  [[nodiscard]] double norm() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) sum += w[i] * std::norm(amplitude[i]);
    return sum;
  }
};

inline MomentumGrid momentum_grid(const WavePacketSpec& s, std::size_t nodes = 257) {
  const double lo = std::max(s.k0 - s.band_sigmas * s.sigma_p, 0.0);
  const double hi = s.k0 + s.band_sigmas * s.sigma_p;
  const auto rule = gauss_legendre(nodes, lo, hi);
  MomentumGrid g;
  g.k = rule.nodes;
  g.w = rule.weights;
  g.amplitude.reserve(nodes);
  for (double k : g.k) g.amplitude.push_back(momentum_amplitude(s, k));
  return g;
}

/// psi_tau(x) = sum_i c_i e^{-i E_i tau} at a fixed position.
struct ModeExpansion {
  std::vector<complex> coefficient;
  std::vector<double> energy;

  [[nodiscard]] complex at(double tau) const {
    complex sum{};
    for (std::size_t i = 0; i < coefficient.size(); ++i) sum += coefficient[i] * std::polar(1.0, -energy[i] * tau);
    return sum;
  }

  /// Triangle-inequality bound sum |c_i|, the scale of round-off in at().
  [[nodiscard]] double magnitude() const {
    double sum = 0.0;
    for (const auto& c : coefficient) sum += std::abs(c);
    return sum;
  }
};

/// Momentum-space propagator built once per (packet, barrier, node count).
class ExactPropagator {
 public:
  ExactPropagator(const WavePacketSpec& spec, const BarrierParams& b, std::size_t nodes = 257)
      : barrier_(b), grid_(momentum_grid(spec, nodes)) {
    spec.validate(b);
    b.validate();
  }

  [[nodiscard]] const MomentumGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] const BarrierParams& barrier() const noexcept { return barrier_; }

  [[nodiscard]] ModeExpansion modes(double x) const {
    ModeExpansion out;
    out.coefficient.reserve(grid_.size());
    out.energy.reserve(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const double k = grid_.k[i];
      out.coefficient.push_back(grid_.w[i] * grid_.amplitude[i] * general_eigenfunction(k, x, barrier_));
      out.energy.push_back(barrier_.energy(k));
    }
    return out;
  }

  [[nodiscard]] complex operator()(double x, double tau) const { return modes(x).at(tau); }

 private:
  BarrierParams barrier_;
  MomentumGrid grid_;
};

inline complex evolve_exact(const WavePacketSpec& spec, const BarrierParams& b, double x, double tau,
                            std::size_t nodes = 257) {
  return ExactPropagator(spec, b, nodes)(x, tau);
}

/// evolve_exact with a node-doubling check: converged when the two results
/// differ by at most `tolerance` relative to max(|psi|, 1e-10 sum|c_i|).
inline Checked<complex> evolve_exact_checked(const WavePacketSpec& spec, const BarrierParams& b, double x,
                                             double tau, std::size_t nodes = 257, double tolerance = 1e-6) {
  const auto coarse = ExactPropagator(spec, b, nodes).modes(x);
  const auto fine = ExactPropagator(spec, b, 2 * nodes).modes(x);
  const complex c = coarse.at(tau);
  const complex f = fine.at(tau);
  const double scale = std::max(std::abs(f), 1e-10 * fine.magnitude());
  Checked<complex> out;
  out.value = f;
  out.relative_change = scale > 0.0 ? std::abs(f - c) / scale : 0.0;
  out.converged = out.relative_change <= tolerance;
  return out;
}

/// Saddle-point evolution sqrt(2 pi) phi(omega - x0 - k0 tau/m) e^{r + i(theta - k0 x0 - E0 tau)}
/// for x inside or to the right of the barrier.
inline complex evolve_saddle(const WavePacketSpec& spec, const BarrierParams& b, double x, double tau) {
  const double k = spec.k0;
  double r = -std::log(sqrt_2pi);
  double theta = k * x;
  double w = x;
  if (!b.absent()) {
    if (x < -b.a * (1.0 + 1e-12)) throw std::domain_error("evolve_saddle: x must not lie left of the barrier");
    if (x <= b.a) {
      const auto d = phase_data(k, x, b);
      r = d.r;
      theta = d.theta;
      w = d.omega;
    } else {
      const auto K = detail::barrier_kernel(k, b);
      r = -2.0 * K.gamma - std::log(std::abs(K.denominator)) - std::log(sqrt_2pi);
      theta = transmission_phase(k, b) + k * x;
      w = transmission_phase_derivative(k, b) + x;
    }
  }
  const double arg = w - spec.x0 - k * tau / b.m;
  return sqrt_2pi * envelope_position(spec, arg) * std::exp(r) *
         std::polar(1.0, theta - k * spec.x0 - b.energy(k) * tau);
}

inline double born_density(complex psi) { return std::norm(psi); }

}  // namespace tunnelpath
