#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/sinhc.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace tunnelpath {

using complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double sqrt_2pi = 2.5066282746310002;

/// Raised when a numerical procedure cannot deliver a trustworthy value
/// (ill-conditioned propagation, root not bracketed, non-convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value together with a convergence verdict from a refinement check.
template <class T>
struct Checked {
  T value{};
  bool converged = true;
  double relative_change = 0.0;
};

// ---------------------------------------------------------------------------
// Removable-singularity helpers
// ---------------------------------------------------------------------------

/// sinh(z)/z, exact at z = 0.
inline double sinhc(double z) { return boost::math::sinhc_pi(z); }

/// (1 - e^{-z}) / z for z >= 0, exact at z = 0.
inline double one_minus_exp_ratio(double z) {
  if (std::abs(z) < 1e-8) return 1.0 - 0.5 * z;
  return -std::expm1(-z) / z;
}

/// sech^2(u) without overflow for large |u|.
inline double sech2(double u) {
  const double e = std::exp(-2.0 * std::abs(u));
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

/// tanh(u) - u sech^2(u), series below u = 1e-2 where the difference cancels.
inline double tanh_minus_u_sech2(double u) {
  if (std::abs(u) < 1e-2) {
    const double u2 = u * u;
    return u * u2 * (2.0 / 3.0 - u2 * (8.0 / 15.0 - u2 * (34.0 / 105.0)));
  }
  return std::tanh(u) - u * sech2(u);
}

/// (sinh(z)/z - 1) / z^2.
inline double sinhc_excess(double z) {
  if (std::abs(z) < 1e-2) {
    const double z2 = z * z;
    return 1.0 / 6.0 + z2 * (1.0 / 120.0 + z2 / 5040.0);
  }
  return (sinhc(z) - 1.0) / (z * z);
}

/// Shift `angle` by multiples of 2π to the branch nearest `reference`.
inline double unwrap_near(double angle, double reference) {
  const double two_pi = 2.0 * pi;
  return angle - two_pi * std::round((angle - reference) / two_pi);
}

// ---------------------------------------------------------------------------
// Gauss–Legendre quadrature
// ---------------------------------------------------------------------------

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }

  template <class F>
  [[nodiscard]] auto integrate(F&& f) const {
    using R = decltype(f(0.0));
    R sum{};
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// n-point Gauss–Legendre rule on [lo, hi]; nodes by Newton iteration on
/// the three-term recurrence, ascending order.
inline QuadratureRule gauss_legendre(std::size_t n, double lo, double hi) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (hi + lo);
  const double half = 0.5 * (hi - lo);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double z = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * static_cast<double>(j) - 1.0) * z * p1 - (static_cast<double>(j) - 1.0) * p2) /
             static_cast<double>(j);
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = mid - half * z;
    rule.nodes[n - 1 - i] = mid + half * z;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

// ---------------------------------------------------------------------------
// Bracketed root finding
// ---------------------------------------------------------------------------

struct RootOptions {
  double x_tolerance = 1e-10;
  std::size_t max_iterations = 200;
};

/// Solve f(x) = 0 on [lo, hi] given a sign change. TOMS 748 (bracketed
/// bisection/secant/inverse-cubic hybrid).
template <class F>
double find_root(F&& f, double lo, double hi, RootOptions opts = {}) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw NumericalError("find_root: root not bracketed on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
  auto tol = [&](double a, double b) { return std::abs(b - a) <= opts.x_tolerance; };
  std::uintmax_t iters = opts.max_iterations;
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  if (iters >= opts.max_iterations && !tol(a, b))
    throw NumericalError("find_root: no convergence within iteration budget");
  return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------
// Peak location on a uniform grid
// ---------------------------------------------------------------------------

struct PeakSearch {
  double location = 0.0;
  double value = 0.0;
  bool flat = false;  ///< prominence below 1e-6 of the maximum
};

/// Grid scan of `f` over [lo, hi] with step `step`, then a three-point
/// parabolic refinement. Ties resolve to the smaller abscissa.
template <class F>
PeakSearch locate_peak(F&& f, double lo, double hi, double step) {
  if (!(hi > lo) || !(step > 0.0)) throw std::invalid_argument("locate_peak: empty window");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = f(lo + step * static_cast<double>(i));
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (values[i] > values[best]) best = i;
  const double vmax = values[best];
  const double vmin = *std::min_element(values.begin(), values.end());

  PeakSearch out;
  out.location = lo + step * static_cast<double>(best);
  out.value = vmax;
  out.flat = !(vmax - vmin > 1e-6 * std::abs(vmax));
  if (best == 0 || best + 1 == n || out.flat) return out;

  const double y0 = values[best - 1];
  const double y1 = values[best];
  const double y2 = values[best + 1];
  const double curvature = y0 - 2.0 * y1 + y2;
  if (curvature < 0.0) {
    const double shift = 0.5 * (y0 - y2) / curvature;
    out.location += shift * step;
    out.value = y1 - 0.25 * (y0 - y2) * shift;
  }
  return out;
}

/// Trapezoid rule for samples on a uniform grid.
inline double trapezoid(const std::vector<double>& samples, double step) {
  if (samples.size() < 2) return 0.0;
  double sum = 0.5 * (samples.front() + samples.back());
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) sum += samples[i];
  return sum * step;
}

/// n evenly spaced points on [lo, hi] inclusive.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

}  // namespace tunnelpath
