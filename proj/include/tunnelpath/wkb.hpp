#pragma once

// WKB description of the forbidden region (-x1, x1) of a barrier V(x) at
// energy E: eigenfunctions, the interior delay beta, the shifted-time path
// relation tau_1 = beta_{k0}(x) and its dimensionless square-barrier form.
//
// Potentials: BarrierParams (square, x1 = a), PiecewisePotential, or any
// callable double(double) supported on [-a, a] with its maximum at x = 0.

#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "tunnelpath/numerics.hpp"
#include "tunnelpath/scattering.hpp"
#include "tunnelpath/wavepacket.hpp"

namespace tunnelpath {

template <class P>
concept SmoothPotential = std::is_invocable_r_v<double, const P&, double> &&
                          !std::same_as<P, BarrierParams> && !std::same_as<P, PiecewisePotential>;

template <class Potential>
struct WkbContext {
  Potential potential;
  double E = 0.0;   ///< energy k^2 / 2m
  double m = 1.0;   ///< mass
  double x1 = 0.0;  ///< positive turning point
  double a = 0.0;   ///< half-width of the support of V
};

namespace detail {

inline std::string energy_text(double E) { return std::to_string(E); }

inline double decay_sqrt(double v, double E, double m) {
  const double d = 2.0 * m * (v - E);
  return d > 0.0 ? std::sqrt(d) : 0.0;
}

// Layers of a piecewise potential clipped to [lo, hi].
inline std::vector<Segment> clip_layers(const PiecewisePotential& p, double lo, double hi) {
  std::vector<Segment> out;
  for (const auto& s : p.layers()) {
    const double l = std::max(s.left, lo);
    const double r = std::min(s.right, hi);
    if (r > l) out.push_back({l, r, s.height});
  }
  return out;
}

// integral_lo^hi g(x) dx for g with a square-root zero or singularity at hi:
// x = hi - s^2 turns it into the smooth integral_0^{sqrt(hi-lo)} 2 s g(hi - s^2) ds.
template <class F>
double turning_point_integral(F&& g, double lo, double hi, std::size_t panels = 8) {
  if (!(hi > lo)) return 0.0;
  const double top = std::sqrt(hi - lo);
  const double width = top / static_cast<double>(panels);
  double sum = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double from = width * static_cast<double>(p);
    sum += gauss_legendre(24, from, from + width).integrate([&](double t) { return 2.0 * t * g(hi - t * t); });
  }
  return sum;
}

}  // namespace detail

/// Positive turning point x1 with V(x1) = E.
inline double turning_point(const BarrierParams& b, double E) {
  if (!(E < b.V0)) throw std::domain_error("turning_point: E = " + detail::energy_text(E) + " is not below V0");
  return b.a;
}

/// Outward walk from x = 0 through contiguous layers higher than E.
inline double turning_point(const PiecewisePotential& p, double E) {
  if (!(p(0.0) > E)) throw std::domain_error("turning_point: V(0) does not exceed E; no forbidden region");
  double x1 = 0.0;
  for (const auto& s : p.layers()) {
    if (s.right <= 0.0) continue;
    if (s.left > x1 || !(s.height > E)) break;
    x1 = s.right;
  }
  return x1;
}

/// Bracketed root of V(x) - E on [0, a].
template <SmoothPotential F>
double turning_point(const F& V, double E, double a) {
  if (!(V(0.0) > E)) throw std::domain_error("turning_point: V(0) does not exceed E; no forbidden region");
  if (!(V(a) < E)) throw std::domain_error("turning_point: V(a) must lie below E");
  return find_root([&](double x) { return V(x) - E; }, 0.0, a, {1e-14, 200});
}

inline WkbContext<BarrierParams> make_wkb_context(const BarrierParams& b, double E) {
  return {b, E, b.m, turning_point(b, E), b.a};
}

inline WkbContext<PiecewisePotential> make_wkb_context(const PiecewisePotential& p, double E, double m = 1.0) {
  if (p.empty()) throw std::domain_error("make_wkb_context: empty potential");
  return {p, E, m, turning_point(p, E), std::max(std::abs(p.left_edge()), std::abs(p.right_edge()))};
}

template <SmoothPotential F>
WkbContext<F> make_wkb_context(const F& V, double E, double a, double m = 1.0) {
  return {V, E, m, turning_point(V, E, a), a};
}

namespace detail {

template <class P>
void require_forbidden(const WkbContext<P>& c, double x, bool closed, const char* who) {
  const bool inside = closed ? std::abs(x) <= c.x1 * (1.0 + 1e-12) : std::abs(x) < c.x1;
  if (!inside) throw std::domain_error(std::string(who) + ": x outside the forbidden region");
}

}  // namespace detail

/// Decay rate lambda(x) = sqrt(2m(V(x) - E)).
template <class P>
double wkb_lambda(const WkbContext<P>& c, double x) {
  if constexpr (std::same_as<P, BarrierParams>) {
    return detail::decay_sqrt(std::abs(x) <= c.a ? c.potential.V0 : 0.0, c.E, c.m);
  } else {
    return detail::decay_sqrt(c.potential(x), c.E, c.m);
  }
}

/// integral_x^{x1} lambda.
template <class P>
double wkb_decay_integral(const WkbContext<P>& c, double x) {
  if (x >= c.x1) return 0.0;
  if constexpr (std::same_as<P, BarrierParams>) {
    return wkb_lambda(c, 0.0) * (c.x1 - x);
  } else if constexpr (std::same_as<P, PiecewisePotential>) {
    double sum = 0.0;
    for (const auto& s : detail::clip_layers(c.potential, x, c.x1)) {
      if (!(s.height > c.E)) throw std::domain_error("wkb: allowed layer inside the forbidden interval");
      sum += detail::decay_sqrt(s.height, c.E, c.m) * (s.right - s.left);
    }
    return sum;
  } else {
    return detail::turning_point_integral([&](double y) { return detail::decay_sqrt(c.potential(y), c.E, c.m); }, x,
                                      c.x1);
  }
}

/// integral_x^{x1} dx' / lambda(x').
template <class P>
double wkb_inverse_decay_integral(const WkbContext<P>& c, double x) {
  if (x >= c.x1) return 0.0;
  if constexpr (std::same_as<P, BarrierParams>) {
    return (c.x1 - x) / wkb_lambda(c, 0.0);
  } else if constexpr (std::same_as<P, PiecewisePotential>) {
    double sum = 0.0;
    for (const auto& s : detail::clip_layers(c.potential, x, c.x1)) {
      if (!(s.height > c.E)) throw std::domain_error("wkb: allowed layer inside the forbidden interval");
      sum += (s.right - s.left) / detail::decay_sqrt(s.height, c.E, c.m);
    }
    return sum;
  } else {
    return detail::turning_point_integral(
        [&](double y) {
          const double l = detail::decay_sqrt(c.potential(y), c.E, c.m);
          return l > 0.0 ? 1.0 / l : 0.0;
        },
        x, c.x1);
  }
}

namespace detail {

// integral_{-a}^{-x1} of g(sqrt(k^2 - 2 m V)) over the allowed approach.
template <class P, class G>
double approach_integral(const WkbContext<P>& c, G&& g) {
  if constexpr (std::same_as<P, BarrierParams>) {
    return 0.0;
  } else {
    auto q = [&](double v) {
      const double d = 2.0 * c.m * (c.E - v);
      return d > 0.0 ? std::sqrt(d) : 0.0;
    };
    if constexpr (std::same_as<P, PiecewisePotential>) {
      double sum = 0.0;
      for (const auto& s : clip_layers(c.potential, -c.a, -c.x1)) sum += g(q(s.height)) * (s.right - s.left);
      return sum;
    } else {
      return turning_point_integral([&](double y) { return g(q(c.potential(y))); }, -c.a, -c.x1);
    }
  }
}

}  // namespace detail

/// WKB eigenfunction inside the forbidden region:
///   e^{i Phi} [e^{-I(x)} - 2i e^{I(x)}] / (sqrt(2 pi lambda(x)) [e^{-I_tot}/2 + 2 e^{I_tot}])
/// with Phi = integral_{-a}^{-x1} q - ka + pi/4, I(x) = integral_x^{x1} lambda, I_tot = I(-x1).
template <class P>
complex wkb_eigenfunction(double k, double x, const WkbContext<P>& c) {
  detail::require_forbidden(c, x, false, "wkb_eigenfunction");
  const double I = wkb_decay_integral(c, x);
  const double total = wkb_decay_integral(c, -c.x1);
  const double phi = detail::approach_integral(c, [](double q) { return q; }) - k * c.a + 0.25 * pi;
  const complex bracket(std::exp(-I - total), -2.0 * std::exp(I - total));
  const double den = 0.5 * std::exp(-2.0 * total) + 2.0;
  return std::polar(1.0, phi) * bracket / (den * std::sqrt(2.0 * pi * wkb_lambda(c, x)));
}

/// beta_k(x) = m integral_x^{x1} dx'/lambda / cosh[log 2 + 2 integral_x^{x1} lambda].
template <class P>
double wkb_beta(const WkbContext<P>& c, double x) {
  detail::require_forbidden(c, x, true, "wkb_beta");
  const double arg = std::log(2.0) + 2.0 * wkb_decay_integral(c, x);
  return c.m * wkb_inverse_decay_integral(c, x) / std::cosh(arg);
}

struct WkbPathTime {
  double tau1 = 0.0;        ///< shifted time, zero on entering the forbidden region
  double tau = 0.0;         ///< unshifted detection time
  double entry_time = 0.0;  ///< classical time from x0 to -x1
  double bound = 0.0;       ///< (4m/5) integral_{-x1}^{x1} dx'/lambda
  bool within_bound = true;
};

/// tau_1 = beta_{k0}(x) and tau = tau_1 + t(x0, k0), where t(x0, k0) is the
/// classical flight time from x0 to the entrance -x1.
template <class P>
WkbPathTime wkb_path_time(double x, const WavePacketSpec& spec, const WkbContext<P>& c) {
  WkbPathTime out;
  out.tau1 = wkb_beta(c, x);
  const double k0 = spec.k0;
  out.entry_time = c.m * detail::approach_integral(c, [](double q) { return q > 0.0 ? 1.0 / q : 0.0; }) -
                   c.m * (spec.x0 + c.a) / k0;
  out.tau = out.tau1 + out.entry_time;
  out.bound = 0.8 * c.m * wkb_inverse_decay_integral(c, -c.x1);
  out.within_bound = out.tau1 <= out.bound * (1.0 + 1e-12);
  return out;
}

/// Square-barrier WKB relation S(D) = gamma sqrt(eps/(1 - eps)) (1 - D) / cosh[log 2 + 2 gamma (1 - D)].
inline double wkb_s_of_d(double D, double gamma, double epsilon) {
  if (!(D >= -1.0 - 1e-12 && D <= 1.0 + 1e-12)) throw std::domain_error("wkb_s_of_d: D must lie in [-1, 1]");
  if (!(gamma > 0.0)) throw std::domain_error("wkb_s_of_d: gamma must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::domain_error("wkb_s_of_d: epsilon must lie in (0, 1)");
  const double d = 1.0 - std::min(D, 1.0);
  if (d == 0.0) return 0.0;
  return gamma * std::sqrt(epsilon / (1.0 - epsilon)) * d / std::cosh(std::log(2.0) + 2.0 * gamma * d);
}

struct InvertibilityWitness {
  bool found = false;
  double D1 = 0.0;
  double D2 = 0.0;
  double S = 0.0;
  std::string report;
};

/// Search [-1, 1] for two distinct D with equal S: locate an interior extremum
/// on a scan, then solve S(D) = S* on both of its flanks.
template <class F>
InvertibilityWitness find_invertibility_witness(F&& S, std::size_t scan = 4001, double tolerance = 1e-8) {
  const auto D = linspace(-1.0, 1.0, scan);
  std::vector<double> v(scan);
  for (std::size_t i = 0; i < scan; ++i) v[i] = S(D[i]);

  InvertibilityWitness out;
  for (int sign : {1, -1}) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scan; ++i)
      if (sign * v[i] > sign * v[best]) best = i;
    if (best == 0 || best + 1 == scan) continue;
    const double edge = sign > 0 ? std::max(v.front(), v.back()) : std::min(v.front(), v.back());
    if (!(sign * (v[best] - edge) > 0.0)) continue;
    const double target = 0.5 * (v[best] + edge);
    auto g = [&](double d) { return S(d) - target; };
    const double left = find_root(g, -1.0, D[best], {1e-14, 300});
    const double right = find_root(g, D[best], 1.0, {1e-14, 300});
    const double s1 = S(left);
    const double s2 = S(right);
    if (std::abs(s1 - s2) <= tolerance && right - left > 1e-6) {
      out.found = true;
      out.D1 = left;
      out.D2 = right;
      out.S = 0.5 * (s1 + s2);
      out.report = "interior " + std::string(sign > 0 ? "maximum" : "minimum") + " at D = " +
                   std::to_string(D[best]) + "; S(D1) = S(D2) within " + std::to_string(std::abs(s1 - s2));
      return out;
    }
  }
  bool increasing = true;
  bool decreasing = true;
  for (std::size_t i = 1; i < scan; ++i) {
    increasing = increasing && v[i] >= v[i - 1];
    decreasing = decreasing && v[i] <= v[i - 1];
  }
  out.report = increasing || decreasing ? "monotone on [-1, 1]; no witness"
                                        : "non-monotone samples but no bracketed witness";
  return out;
}

inline InvertibilityWitness wkb_invertibility_witness(double gamma, double epsilon) {
  return find_invertibility_witness([&](double D) { return wkb_s_of_d(D, gamma, epsilon); });
}

}  // namespace tunnelpath
