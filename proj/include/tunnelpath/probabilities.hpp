#pragma once

// Detection-time densities for ideal detectors: arrival at L beyond the
// barrier, first detection at x, the post-selected density for a detection at
// x followed by one at L, the joint two-detector density, the integrated
// detection / non-detection probabilities, and the von Neumann contrast.
//
// Normalizations are fixed by free-particle unit probability. Every
// double-momentum density is a hermitian form
//   P(tau) = sum_ij u_i M_ij conj(u_j),  u_i = a_i e^{-i E_i tau},
// with M real symmetric, so samples are real by construction.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tunnelpath/numerics.hpp"
#include "tunnelpath/scattering.hpp"
#include "tunnelpath/wavepacket.hpp"

namespace tunnelpath {

struct DetectorPair {
  double x_first = 0.0;
  double L_second = 0.0;

  void validate(const BarrierParams& b) const {
    if (!(L_second > b.a)) throw std::invalid_argument("DetectorPair: L_second must lie beyond the barrier (L > a)");
    if (!(x_first < L_second)) throw std::invalid_argument("DetectorPair: x_first must precede L_second");
  }
};

struct DensitySeries {
  std::string name;      ///< e.g. "P(L,t)"
  std::string variable;  ///< abscissa name, "t" or "tau"
  std::vector<double> grid;
  std::vector<double> values;
};

struct ProbabilityTable {
  std::vector<DensitySeries> densities;
  double P_tot = 0.0;
  double P_pp = 0.0;  ///< both detectors fire
  double P_pe = 0.0;  ///< first only
  double P_ep = 0.0;  ///< second only
  double P_ee = 0.0;  ///< neither; the complement
  std::vector<std::string> warnings;

  [[nodiscard]] double total() const { return P_pp + P_pe + P_ep + P_ee; }
};

/// Relative floor below which negative density samples count as round-off.
inline constexpr double density_noise_floor = 1e-8;

namespace detail {

inline void require_barrier_interior(double x, const BarrierParams& b, const char* who) {
  if (!b.absent() && std::abs(x) > b.a * (1.0 + 1e-12))
    throw std::domain_error(std::string(who) + ": x must satisfy |x| <= a");
}

inline void require_beyond(double L, const BarrierParams& b, const char* who) {
  if (!(L > b.a)) throw std::domain_error(std::string(who) + ": L must satisfy L > a");
}

// T* f_{k+}(x) + R* f_{k-}(x); f_{k-}(x) = f_{k+}(-x) by parity.
inline complex exit_combination(double k, double x, const BarrierParams& b) {
  const auto amp = general_amplitudes(k, b);
  return std::conj(amp.T) * general_eigenfunction(k, x, b) + std::conj(amp.R) * general_eigenfunction(k, -x, b);
}

}  // namespace detail

/// Hermitian form over the modes of a momentum grid.
class ModeDensity {
 public:
  ModeDensity(std::vector<complex> amplitude, std::vector<double> energy, std::vector<double> kernel)
      : a_(std::move(amplitude)), e_(std::move(energy)), m_(std::move(kernel)) {
    if (m_.size() != a_.size() * a_.size() || e_.size() != a_.size())
      throw std::invalid_argument("ModeDensity: inconsistent sizes");
    for (std::size_t i = 0; i < a_.size(); ++i)
      for (std::size_t j = 0; j < a_.size(); ++j) bound_ += std::abs(a_[i]) * std::abs(a_[j]) * std::abs(at(i, j));
  }

  /// Unclamped value of the form.
  [[nodiscard]] double raw(double tau) const {
    const std::size_t n = a_.size();
    std::vector<complex> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = a_[i] * std::polar(1.0, -e_[i] * tau);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += at(i, i) * std::norm(u[i]);
      complex row{};
      for (std::size_t j = i + 1; j < n; ++j) row += at(i, j) * std::conj(u[j]);
      sum += 2.0 * std::real(u[i] * row);
    }
    return sum;
  }

  /// Density clamped at zero.
  [[nodiscard]] double operator()(double tau) const { return std::max(raw(tau), 0.0); }

  /// Triangle-inequality bound on |raw|; the noise floor is relative to it.
  [[nodiscard]] double bound() const noexcept { return bound_; }
  [[nodiscard]] double noise_floor() const noexcept { return density_noise_floor * bound_; }
  [[nodiscard]] std::size_t size() const noexcept { return a_.size(); }

 private:
  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return m_[i * a_.size() + j]; }

  std::vector<complex> a_;
  std::vector<double> e_;
  std::vector<double> m_;
  double bound_ = 0.0;
};

namespace detail {

template <class Kernel>
std::vector<double> pair_kernel(const std::vector<double>& energy, Kernel&& kernel) {
  const std::size_t n = energy.size();
  std::vector<double> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m[i * n + j] = m[j * n + i] = kernel(energy[i], energy[j]);
  return m;
}

// a_i = w_i psi~_0(k_i) f_{k_i}(x)
inline ModeExpansion weighted_modes(const WavePacketSpec& spec, const BarrierParams& b, double x, std::size_t nodes) {
  return ExactPropagator(spec, b, nodes).modes(x);
}

inline std::vector<double> flux_kernel(const std::vector<double>& energy, double m) {
  return pair_kernel(energy, [m](double e1, double e2) { return std::sqrt((e1 + e2) / m); });
}

}  // namespace detail

/// F+(x, E) = 2 pi (k/m) |T*_k f_{k+}(x) + R*_k f_{k-}(x)|^2, k = sqrt(2mE).
/// The energy delta of the shell integral is resolved exactly: the factor
/// (k/m)^2 times the density of states m/k leaves k/m.
inline double postselected_kernel(double x, double E, const BarrierParams& b) {
  if (!(E > 0.0)) throw std::domain_error("postselected_kernel: energy must be > 0");
  const double k = std::sqrt(2.0 * b.m * E);
  if (b.absent()) return k / b.m;
  if (!(E < b.V0)) throw std::domain_error("postselected_kernel: energy must lie below the barrier top");
  detail::require_barrier_interior(x, b, "postselected_kernel");
  return 2.0 * pi * k / b.m * std::norm(detail::exit_combination(k, x, b));
}

/// Arrival density at L > a, precomputed for repeated evaluation in t.
inline ModeDensity make_toa_density(double L, const WavePacketSpec& spec, const BarrierParams& b,
                                    std::size_t nodes = 257) {
  detail::require_beyond(L, b, "toa_density");
  spec.validate(b);
  const auto grid = momentum_grid(spec, nodes);
  std::vector<complex> amp(grid.size());
  std::vector<double> energy(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k = grid.k[i];
    amp[i] = grid.w[i] * grid.amplitude[i] * general_amplitudes(k, b).T * std::polar(1.0 / sqrt_2pi, k * L);
    energy[i] = b.energy(k);
  }
  auto kernel = detail::flux_kernel(energy, b.m);
  return {std::move(amp), std::move(energy), std::move(kernel)};
}

/// First-detector density P1(x, tau) at any x.
inline ModeDensity make_first_detector_density(double x, const WavePacketSpec& spec, const BarrierParams& b,
                                               std::size_t nodes = 257) {
  auto modes = detail::weighted_modes(spec, b, x, nodes);
  auto kernel = detail::flux_kernel(modes.energy, b.m);
  return {std::move(modes.coefficient), std::move(modes.energy), std::move(kernel)};
}

/// Post-selected density P_ps(x, tau) for |x| <= a.
inline ModeDensity make_postselected_density(double x, const WavePacketSpec& spec, const BarrierParams& b,
                                             std::size_t nodes = 257) {
  detail::require_barrier_interior(x, b, "postselected_density");
  auto modes = detail::weighted_modes(spec, b, x, nodes);
  auto kernel =
      detail::pair_kernel(modes.energy, [&](double e1, double e2) { return postselected_kernel(x, 0.5 * (e1 + e2), b); });
  return {std::move(modes.coefficient), std::move(modes.energy), std::move(kernel)};
}

inline double toa_density(double L, double t, const WavePacketSpec& spec, const BarrierParams& b,
                          std::size_t nodes = 257) {
  return make_toa_density(L, spec, b, nodes)(t);
}

inline double first_detector_density(double x, double tau, const WavePacketSpec& spec, const BarrierParams& b,
                                     std::size_t nodes = 257) {
  return make_first_detector_density(x, spec, b, nodes)(tau);
}

inline double postselected_density(double x, double tau, const WavePacketSpec& spec, const BarrierParams& b,
                                   std::size_t nodes = 257) {
  return make_postselected_density(x, spec, b, nodes)(tau);
}

/// Evaluates a density at `nodes` and `2 nodes` momentum nodes; converged when
/// they agree to `tolerance` relative to the form's magnitude bound.
template <class Factory>
Checked<double> density_checked(Factory&& make, double time, std::size_t nodes = 257, double tolerance = 1e-6) {
  const auto coarse = make(nodes);
  const auto fine = make(2 * nodes);
  const double c = coarse(time);
  const double f = fine(time);
  const double scale = std::max(f, fine.noise_floor());
  Checked<double> out;
  out.value = f;
  out.relative_change = scale > 0.0 ? std::abs(f - c) / scale : 0.0;
  out.converged = out.relative_change <= tolerance;
  return out;
}

inline Checked<double> toa_density_checked(double L, double t, const WavePacketSpec& spec, const BarrierParams& b,
                                           std::size_t nodes = 257, double tolerance = 1e-6) {
  return density_checked([&](std::size_t n) { return make_toa_density(L, spec, b, n); }, t, nodes, tolerance);
}

inline Checked<double> first_detector_density_checked(double x, double tau, const WavePacketSpec& spec,
                                                      const BarrierParams& b, std::size_t nodes = 257,
                                                      double tolerance = 1e-6) {
  return density_checked([&](std::size_t n) { return make_first_detector_density(x, spec, b, n); }, tau, nodes,
                         tolerance);
}

inline Checked<double> postselected_density_checked(double x, double tau, const WavePacketSpec& spec,
                                                    const BarrierParams& b, std::size_t nodes = 257,
                                                    double tolerance = 1e-6) {
  return density_checked([&](std::size_t n) { return make_postselected_density(x, spec, b, n); }, tau, nodes,
                         tolerance);
}

/// P_tot = integral dk |T_k|^2 |psi~_0(k)|^2.
inline double total_transmission_probability(const WavePacketSpec& spec, const BarrierParams& b,
                                             std::size_t nodes = 257) {
  spec.validate(b);
  const auto grid = momentum_grid(spec, nodes);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    sum += grid.w[i] * general_amplitudes(grid.k[i], b).transmission() * std::norm(grid.amplitude[i]);
  return std::clamp(sum, 0.0, 1.0);
}

/// |1 + e^{-2 i k0 a} R*_{k0}|^2 = 2 pi |T* f_+(a) + R* f_-(a)|^2.
inline double exit_point_ratio(const WavePacketSpec& spec, const BarrierParams& b) {
  const double k = spec.k0;
  if (!(k > 0.0)) throw std::invalid_argument("exit_point_ratio: k0 must be > 0");
  if (b.absent()) return 1.0;
  const complex R = general_amplitudes(k, b).R;
  return std::norm(1.0 + std::polar(1.0, -2.0 * k * b.a) * std::conj(R));
}

enum class Spread { monochromatic, quadrature };

/// Both/first-only/second-only/neither detection probabilities for a first
/// detector at x inside the barrier and an ideal absorber beyond it.
inline ProbabilityTable joint_detection_probabilities(double x, const WavePacketSpec& spec, const BarrierParams& b,
                                                      Spread spread = Spread::quadrature, std::size_t nodes = 257,
                                                      double tolerance = 1e-8) {
  detail::require_barrier_interior(x, b, "joint_detection_probabilities");
  spec.validate(b);
  ProbabilityTable t;
  auto terms = [&](double k) {
    const double f2 = std::norm(general_eigenfunction(k, x, b));
    const double a2 = std::norm(detail::exit_combination(k, x, b));
    const double first = 2.0 * pi * f2;
    const double both = 4.0 * pi * pi * f2 * a2;
    return std::array<double, 3>{both, first - both, general_amplitudes(k, b).transmission()};
  };
  if (spread == Spread::monochromatic) {
    const auto v = terms(spec.k0);
    t.P_pp = v[0];
    t.P_pe = v[1];
    t.P_ep = v[2];
    t.P_tot = v[2];
  } else {
    const auto grid = momentum_grid(spec, nodes);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto v = terms(grid.k[i]);
      const double w = grid.w[i] * std::norm(grid.amplitude[i]);
      t.P_pp += w * v[0];
      t.P_pe += w * v[1];
      t.P_ep += w * v[2];
    }
    t.P_tot = t.P_ep;
  }
  t.P_ee = 1.0 - t.P_pp - t.P_pe - t.P_ep;
  const std::pair<const char*, double> named[] = {
      {"P_pp", t.P_pp}, {"P_pe", t.P_pe}, {"P_ep", t.P_ep}, {"P_ee", t.P_ee}};
  for (const auto& [name, value] : named)
    if (value < -tolerance || value > 1.0 + tolerance)
      t.warnings.push_back(std::string(name) + " = " + std::to_string(value) +
                           " lies outside [0, 1]; the detection probabilities are not mutually consistent here");
  return t;
}

struct JointOptions {
  std::size_t k_nodes = 96;       ///< momentum nodes of the packet
  std::size_t shell_nodes = 512;  ///< angular nodes on the energy shell
  std::size_t energy_nodes = 16;  ///< Chebyshev nodes for the kernel's energy dependence
};

/// Joint density P(x, tau; L, t). The kernel F(L, s; x; E) is evaluated on the
/// shell E_q + E_q' = 2E through q = sqrt(4mE) cos phi, q' = sqrt(4mE) sin phi
/// (Jacobian 2m dphi), at Chebyshev energies, and interpolated in between.
class JointDensity {
 public:
  JointDensity(double x, double L, const WavePacketSpec& spec, const BarrierParams& b, JointOptions opts = {})
      : b_(b) {
    detail::require_barrier_interior(x, b, "joint_density");
    detail::require_beyond(L, b, "joint_density");
    auto modes = detail::weighted_modes(spec, b, x, opts.k_nodes);
    a_ = std::move(modes.coefficient);
    e_ = std::move(modes.energy);
    const std::size_t nc = std::max<std::size_t>(opts.energy_nodes, 2);
    const double lo = *std::min_element(e_.begin(), e_.end());
    const double hi = *std::max_element(e_.begin(), e_.end());
    for (std::size_t c = 0; c < nc; ++c) {
      const double angle = pi * (2.0 * static_cast<double>(c) + 1.0) / (2.0 * static_cast<double>(nc));
      nodes_.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * std::cos(angle));
      bary_.push_back((c % 2 == 0 ? 1.0 : -1.0) * std::sin(angle));
    }
    const auto rule = gauss_legendre(opts.shell_nodes, 0.0, 0.5 * pi);
    for (double E : nodes_) shells_.push_back(shell(E, x, L, rule));
    const std::size_t n = a_.size();
    lagrange_.assign(nc, std::vector<double>(n * n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const auto l = basis(0.5 * (e_[i] + e_[j]));
        for (std::size_t c = 0; c < nc; ++c) lagrange_[c][i * n + j] = lagrange_[c][j * n + i] = l[c];
      }
  }

  /// Kernel F(L, s; x; E_c) at the c-th Chebyshev energy.
  [[nodiscard]] double kernel(std::size_t c, double s) const {
    double sum = 0.0;
    for (const auto& node : shells_[c]) sum += std::real(node.coefficient * std::polar(1.0, -node.frequency * s));
    return sum;
  }

  /// Time-of-first-detection weights B_c(tau); the density is sum_c B_c F_c(t - tau).
  [[nodiscard]] std::vector<double> weights(double tau) const {
    const std::size_t n = a_.size();
    std::vector<complex> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = a_[i] * std::polar(1.0, -e_[i] * tau);
    std::vector<double> out(nodes_.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        const double pair = (i == j ? 1.0 : 2.0) * std::real(u[i] * std::conj(u[j]));
        for (std::size_t c = 0; c < out.size(); ++c) out[c] += pair * lagrange_[c][i * n + j];
      }
    return out;
  }

  [[nodiscard]] double raw(double tau, double t) const { return evaluate(weights(tau), t - tau); }
  [[nodiscard]] double operator()(double tau, double t) const { return std::max(raw(tau, t), 0.0); }

  /// Density along t at fixed tau, reusing the tau weights.
  [[nodiscard]] std::vector<double> slice(double tau, const std::vector<double>& t) const {
    const auto w = weights(tau);
    std::vector<double> out;
    out.reserve(t.size());
    for (double ti : t) out.push_back(std::max(evaluate(w, ti - tau), 0.0));
    return out;
  }

  [[nodiscard]] double evaluate(const std::vector<double>& w, double s) const {
    double sum = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) sum += w[c] * kernel(c, s);
    return sum;
  }

  [[nodiscard]] const std::vector<double>& energies() const noexcept { return nodes_; }

 private:
  struct ShellNode {
    complex coefficient;
    double frequency;
  };

  [[nodiscard]] std::vector<ShellNode> shell(double E, double x, double L, const QuadratureRule& rule) const {
    const double rho = std::sqrt(4.0 * b_.m * E);
    const double prefactor = 2.0 * b_.m * std::pow(2.0 * E / b_.m, 1.5);
    auto G = [&](double q) {
      const auto amp = general_amplitudes(q, b_);
      const complex g = amp.T * std::conj(general_eigenfunction(q, x, b_)) +
                        amp.R * std::conj(general_eigenfunction(q, -x, b_));
      return std::polar(1.0 / sqrt_2pi, q * L) * g;
    };
    const std::size_t n = rule.size();
    std::vector<complex> values(n);
    for (std::size_t j = 0; j < n; ++j) values[j] = G(rho * std::cos(rule.nodes[j]));
    // Gauss–Legendre nodes on [0, pi/2] are symmetric, so q' at node j is q at node n-1-j.
    std::vector<ShellNode> out(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double q = rho * std::cos(rule.nodes[j]);
      const double qp = rho * std::sin(rule.nodes[j]);
      out[j].coefficient = 2.0 * pi * prefactor * rule.weights[j] * values[j] * std::conj(values[n - 1 - j]);
      out[j].frequency = (q * q - qp * qp) / (2.0 * b_.m);
    }
    return out;
  }

  [[nodiscard]] std::vector<double> basis(double E) const {
    std::vector<double> l(nodes_.size());
    for (std::size_t c = 0; c < nodes_.size(); ++c)
      if (E == nodes_[c]) {
        l[c] = 1.0;
        return l;
      }
    double total = 0.0;
    for (std::size_t c = 0; c < nodes_.size(); ++c) {
      l[c] = bary_[c] / (E - nodes_[c]);
      total += l[c];
    }
    for (double& v : l) v /= total;
    return l;
  }

  BarrierParams b_;
  std::vector<complex> a_;
  std::vector<double> e_;
  std::vector<double> nodes_;
  std::vector<double> bary_;
  std::vector<std::vector<ShellNode>> shells_;
  std::vector<std::vector<double>> lagrange_;
};

inline double joint_density(double x, double tau, double L, double t, const WavePacketSpec& spec,
                            const BarrierParams& b, JointOptions opts = {}) {
  if (!(t >= tau)) throw std::domain_error("joint_density: requires t >= tau");
  return JointDensity(x, L, spec, b, opts)(tau, t);
}

struct VonNeumannOptions {
  double delta = 0.1;           ///< width of the Gaussian position POVM
  std::size_t y_nodes = 192;    ///< spatial nodes over x +- 6 delta
  std::size_t k_nodes = 384;    ///< positive-momentum nodes for the projection
  std::size_t mode_nodes = 257;  ///< packet momentum nodes
};

/// Tr[Pi+ sqrt(P_x) e^{-iH tau} rho_0 e^{iH tau} sqrt(P_x)] with a Gaussian
/// position POVM of width delta and Pi+ = integral_{k>0} dk |T_k|^2 |k><k|.
class VonNeumannDensity {
 public:
  VonNeumannDensity(const WavePacketSpec& spec, const BarrierParams& b, VonNeumannOptions opts = {})
      : prop_(spec, b, opts.mode_nodes), opts_(opts) {
    if (!(opts.delta > 0.0)) throw std::invalid_argument("vn_postselected_density: delta must be > 0");
    const double kmax = spec.k0 + spec.band_sigmas * spec.sigma_p + 10.0 / opts.delta;
    const auto rule = gauss_legendre(opts.k_nodes, 0.0, kmax);
    k_ = rule.nodes;
    weight_.resize(k_.size());
    for (std::size_t i = 0; i < k_.size(); ++i) weight_[i] = rule.weights[i] * general_amplitudes(k_[i], b).transmission();
  }

  [[nodiscard]] double operator()(double x, double tau) const {
    const double d = opts_.delta;
    const auto rule = gauss_legendre(opts_.y_nodes, x - 6.0 * d, x + 6.0 * d);
    std::vector<complex> chi(rule.size());
    for (std::size_t j = 0; j < rule.size(); ++j) {
      const double y = rule.nodes[j] - x;
      const double root = std::pow(2.0 * pi * d * d, -0.25) * std::exp(-y * y / (4.0 * d * d));
      chi[j] = rule.weights[j] * root * prop_(rule.nodes[j], tau);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < k_.size(); ++i) {
      complex ft{};
      for (std::size_t j = 0; j < rule.size(); ++j) ft += chi[j] * std::polar(1.0, -k_[i] * rule.nodes[j]);
      sum += weight_[i] * std::norm(ft) / (2.0 * pi);
    }
    return sum;
  }

 private:
  ExactPropagator prop_;
  VonNeumannOptions opts_;
  std::vector<double> k_;
  std::vector<double> weight_;
};

inline double vn_postselected_density(double x, double tau, const WavePacketSpec& spec, const BarrierParams& b,
                                      VonNeumannOptions opts = {}) {
  return VonNeumannDensity(spec, b, opts)(x, tau);
}

}  // namespace tunnelpath
