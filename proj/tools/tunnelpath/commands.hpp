#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "config.hpp"
#include "output.hpp"
#include "tunnelpath/parallel.hpp"
#include "tunnelpath/tunnelpath.hpp"

namespace tunnelpath::cli {

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

/// Process exit status of a command.
enum Status : int { ok = 0, invalid = 1, numerical = 2 };

namespace detail {

inline double min_slope(const std::vector<double>& D, const std::vector<double>& S) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < S.size(); ++i) lo = std::min(lo, (S[i] - S[i - 1]) / (D[i] - D[i - 1]));
  return lo;
}

inline void require_tunneling(const Case& c, const char* command) {
  if (c.barrier.absent() || !c.barrier.tunneling(c.packet.k0))
    throw ConfigError(std::string(command) + ": needs a barrier with k0^2 < 2 m V0");
}

inline json case_json(const Case& c) {
  return {{"gamma", c.gamma},
          {"epsilon", c.epsilon},
          {"V0", c.barrier.V0},
          {"a", c.barrier.a},
          {"m", c.barrier.m},
          {"k0", c.packet.k0},
          {"x0", c.packet.x0},
          {"sigma_p", c.packet.sigma_p}};
}

// Coarse scan followed by a scan at `step` around the coarse maximum.
template <class F>
PeakSearch refined_peak(F&& f, double lo, double hi, double step) {
  const double coarse = std::max(step, (hi - lo) / 400.0);
  const double c = locate_peak(f, lo, hi, coarse).location;
  return locate_peak(f, std::max(lo, c - 2.0 * coarse), std::min(hi, c + 2.0 * coarse), step);
}

// Expected detection time of the packet peak at x.
inline double expected_time(double x, const Case& c) {
  const auto& b = c.barrier;
  const auto& s = c.packet;
  if (b.absent() || x < -b.a) return b.m * (x - s.x0) / s.k0;
  if (x <= b.a) return b.tunneling(s.k0) ? path_time(x, s, b) : b.m * (x - s.x0) / s.k0;
  const double delay = b.tunneling(s.k0) ? phase_time(s.k0, b) - 2.0 * b.a * b.m / s.k0 : 0.0;
  return b.m * (x - s.x0) / s.k0 + delay;
}

}  // namespace detail

inline int cmd_scatter(const RunConfig& cfg, OutputWriter& out) {
  Table t{"scatter", {"gamma", "epsilon", "V0", "k", "opacity", "T2", "R2", "argT", "unitarity_defect"}, {}};
  json summary;
  double worst = 0.0;
  auto row = [&](double gamma, double eps, const BarrierParams& b, double k) {
    const auto amp = general_amplitudes(k, b);
    worst = std::max(worst, std::abs(amp.unitarity_defect()));
    const double lambda_a = !b.absent() && b.tunneling(k) ? opacity(k, b) : nan;
    t.rows.push_back({gamma, eps, b.V0, k, lambda_a, amp.transmission(), amp.reflection(), std::arg(amp.T),
                      amp.unitarity_defect()});
  };
  if (cfg.dimensional()) {
    const auto c = resolve_cases(cfg).front();
    const auto& b = c.barrier;
    const double kmax = b.absent() ? 2.0 * c.packet.k0 : 2.0 * std::sqrt(b.two_m_v0());
    for (std::size_t i = 1; i <= cfg.samples; ++i) {
      const double k = kmax * static_cast<double>(i) / static_cast<double>(cfg.samples);
      const double eps = b.absent() ? nan : b.energy_ratio(k);
      row(b.absent() ? 0.0 : b.a * std::sqrt(b.two_m_v0()), eps, b, k);
    }
  } else {
    const auto gammas = cfg.gamma.empty() ? std::vector<double>{2.0} : cfg.gamma;
    std::vector<double> eps = cfg.epsilon;
    if (eps.empty())
      for (std::size_t i = 1; i <= cfg.samples; ++i)
        eps.push_back(static_cast<double>(i) / static_cast<double>(cfg.samples + 1));
    json monotone = json::array();
    for (double g : gammas) {
      double previous = -1.0;
      bool increasing = true;
      // gamma fixes the barrier through its zero-energy strength a sqrt(2 m V0)
      const BarrierParams b{(g / cfg.a) * (g / cfg.a) / (2.0 * cfg.m), cfg.a, cfg.m};
      for (double e : eps) {
        row(g, e, b, b.momentum_at(e));
        increasing = increasing && t.rows.back()[5] >= previous;
        previous = t.rows.back()[5];
      }
      monotone.push_back({{"gamma", g}, {"T2_monotone_in_epsilon", increasing}});
    }
    summary["monotone"] = monotone;
  }
  summary["max_unitarity_defect"] = worst;
  out.write(t);
  out.write_summary("scatter_summary", summary);
  return ok;
}

inline int cmd_path(const RunConfig& cfg, OutputWriter& out) {
  const auto cases = resolve_cases(cfg);
  Table curves{"path", {"gamma", "epsilon", "D", "S", "dSdD"}, {}};
  Table inverted{"path_inverted", {"gamma", "epsilon", "S", "D", "tau1", "x"}, {}};
  json per_case = json::array();
  const auto D = linspace(-1.0, 1.0, cfg.d_samples);
  for (const auto& c : cases) {
    detail::require_tunneling(c, "path");
    std::vector<double> S;
    for (double d : D) {
      S.push_back(s_of_d_exact(d, c.gamma, c.epsilon));
      curves.rows.push_back({c.gamma, c.epsilon, d, S.back(), ds_dd_exact(d, c.gamma, c.epsilon)});
    }
    const double tph = dimensionless_phase_time(c.packet.k0, c.barrier);
    const double slope = detail::min_slope(D, S);
    per_case.push_back({{"case", detail::case_json(c)},
                        {"S_exit", S.back()},
                        {"dimensionless_phase_time", tph},
                        {"exit_identity_residual", S.back() - tph},
                        {"min_numerical_slope", slope},
                        {"monotone", slope >= -1e-10}});
    if (cfg.invert) {
      const double scale = c.barrier.m / (c.packet.k0 * kappa(c.packet.k0, c.barrier));
      for (double s : linspace(S.front(), S.back(), cfg.d_samples)) {
        const double d = invert_path(c.gamma, c.epsilon, s);
        inverted.rows.push_back({c.gamma, c.epsilon, s, d, s * scale, d * c.barrier.a});
      }
    }
  }
  out.write(curves);
  if (cfg.invert) out.write(inverted);
  out.write_summary("path_summary", {{"cases", per_case}});
  return ok;
}

inline int cmd_wkb_compare(const RunConfig& cfg, OutputWriter& out) {
  const auto pairs = zip_pairs(cfg);
  Table t{"wkb_compare", {"gamma", "epsilon", "D", "S_exact", "S_wkb"}, {}};
  json report = json::array();
  const auto D = linspace(-1.0, 1.0, cfg.d_samples);
  for (const auto& [g, e] : pairs) {
    std::vector<double> exact;
    for (double d : D) {
      exact.push_back(s_of_d_exact(d, g, e));
      t.rows.push_back({g, e, d, exact.back(), wkb_s_of_d(d, g, e)});
    }
    const auto w = wkb_invertibility_witness(g, e);
    const auto x = find_invertibility_witness([&](double d) { return s_of_d_exact(d, g, e); });
    json entry{{"gamma", g},
               {"epsilon", e},
               {"wkb_witness_found", w.found},
               {"wkb_report", w.report},
               {"wkb_S_at_exit", wkb_s_of_d(1.0, g, e)},
               {"exact_S_at_exit", exact.back()},
               {"exact_monotone", detail::min_slope(D, exact) >= -1e-10},
               {"exact_witness_found", x.found}};
    if (w.found) entry["wkb_witness"] = {{"D1", w.D1}, {"D2", w.D2}, {"S", w.S}};
    report.push_back(entry);
  }
  out.write(t);
  out.write_summary("wkb_witness", {{"pairs", report}});
  return ok;
}

inline int cmd_probabilities(const RunConfig& cfg, OutputWriter& out) {
  const auto cases = resolve_cases(cfg);
  if (cases.size() != 1) throw ConfigError("probabilities: expects a single (gamma, epsilon) case");
  const Case c = cases.front();
  const auto& b = c.barrier;
  const auto& s = c.packet;
  s.validate(b);
  const double x = cfg.x_first;
  const double L = cfg.l_second.value_or(3.0 * b.a);
  if (!(L > b.a)) throw ConfigError("detectors.l_second: must lie beyond the barrier (L > a)");
  const bool interior = b.absent() || std::abs(x) <= b.a;
  const bool tunneling = !b.absent() && b.tunneling(s.k0);
  const std::size_t n = cfg.k_nodes;

  json warnings = json::array();
  for (const auto& w : s.warnings(b)) warnings.push_back(w);

  const double half = cfg.tau_window.value_or(6.0 * s.sigma_x() * b.m / s.k0);
  const double step = cfg.tau_step.value_or(half / 200.0);
  auto grid = [&](double centre) {
    std::vector<double> g;
    const auto count = static_cast<std::size_t>(std::floor(2.0 * half / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) g.push_back(centre - half + step * static_cast<double>(i));
    return g;
  };
  auto sample = [&](const std::vector<double>& g, auto&& f) {
    return parallel_map(g.size(), cfg.jobs, [&](std::size_t i) { return f(g[i]); });
  };

  const double t_arrival = detail::expected_time(L, c);
  const double t_first = detail::expected_time(x, c);

  const auto toa = make_toa_density(L, s, b, n);
  const auto ts = grid(t_arrival);
  const auto toa_values = sample(ts, [&](double t) { return toa(t); });
  Table toa_table{"toa", {"t", "P_L"}, {}};
  for (std::size_t i = 0; i < ts.size(); ++i) toa_table.rows.push_back({ts[i], toa_values[i]});

  const auto p1 = make_first_detector_density(x, s, b, n);
  const auto modes = ExactPropagator(s, b, n).modes(x);
  const auto taus = grid(t_first);
  const auto p1_values = sample(taus, [&](double t) { return p1(t); });
  const auto born_values = sample(taus, [&](double t) { return std::norm(modes.at(t)); });
  Table first{"first_detector", {"tau", "P1", "psi2"}, {}};
  for (std::size_t i = 0; i < taus.size(); ++i) first.rows.push_back({taus[i], p1_values[i], born_values[i]});

  const double fine = default_tau_step(s.k0, b);
  json peaks;
  peaks["quasiclassical_tau"] = t_first;
  peaks["argmax_P1"] = detail::refined_peak([&](double t) { return p1(t); }, taus.front(), taus.back(), fine).location;
  peaks["argmax_psi2"] =
      detail::refined_peak([&](double t) { return std::norm(modes.at(t)); }, taus.front(), taus.back(), fine).location;

  Table post{"postselected", {"tau", "P_ps"}, {}};
  if (interior && (b.absent() || tunneling)) {
    const auto ps = make_postselected_density(x, s, b, n);
    const auto ps_values = sample(taus, [&](double t) { return ps(t); });
    for (std::size_t i = 0; i < taus.size(); ++i) post.rows.push_back({taus[i], ps_values[i]});
    peaks["argmax_P_ps"] =
        detail::refined_peak([&](double t) { return ps(t); }, taus.front(), taus.back(), fine).location;
  } else {
    warnings.push_back("x_first lies outside the barrier or k0 is above it; post-selected density skipped");
  }

  const auto toa_check = toa_density_checked(L, t_arrival, s, b, n);
  if (!toa_check.converged)
    warnings.push_back("P(L,t) quadrature not converged at the arrival peak: relative change " +
                       format_number(toa_check.relative_change));
  const auto p1_check = first_detector_density_checked(x, t_first, s, b, n);
  if (!p1_check.converged)
    warnings.push_back("P1(x,tau) quadrature not converged at the detection peak: relative change " +
                       format_number(p1_check.relative_change));

  json scalars;
  scalars["P_tot"] = total_transmission_probability(s, b, n);
  auto table_json_of = [](const ProbabilityTable& p) {
    return json{{"P_pp", p.P_pp}, {"P_pe", p.P_pe}, {"P_ep", p.P_ep}, {"P_ee", p.P_ee}, {"sum", p.total()}};
  };
  if (interior && (b.absent() || tunneling)) {
    const auto quad = joint_detection_probabilities(x, s, b, Spread::quadrature, n);
    const auto mono = joint_detection_probabilities(x, s, b, Spread::monochromatic, n);
    for (const auto& w : quad.warnings) warnings.push_back("quadrature: " + w);
    for (const auto& w : mono.warnings) warnings.push_back("monochromatic: " + w);
    scalars["quadrature"] = table_json_of(quad);
    scalars["monochromatic"] = table_json_of(mono);
    scalars["ordering"] = {{"P_pp_le_P_pe", quad.P_pp <= quad.P_pe}, {"P_pp_le_P_ep", quad.P_pp <= quad.P_ep}};
  }
  scalars["exit_ratio"] = exit_point_ratio(s, b);
  if (b.absent() || tunneling) {
    const double t_exit = detail::expected_time(b.a, c);
    const auto ps_exit = make_postselected_density(b.a, s, b, n);
    const auto p1_exit = make_first_detector_density(b.a, s, b, n);
    const double measured = ps_exit(t_exit) / p1_exit(t_exit);
    const double expected = scalars["exit_ratio"].get<double>();
    scalars["exit_ratio_measured"] = measured;
    scalars["exit_ratio_pass"] = std::abs(measured / expected - 1.0) <= 1e-2;
  }

  json details{{"case", detail::case_json(c)}, {"x_first", x}, {"L_second", L}, {"tau_step", step},
               {"tau_half_window", half}};
  out.write(toa_table, details);
  out.write(first, details);
  if (!post.rows.empty()) out.write(post, details);
  out.write_summary("probabilities_summary",
                    {{"case", detail::case_json(c)}, {"scalars", scalars}, {"peaks", peaks}, {"warnings", warnings}});
  return ok;
}

inline int cmd_sweep(const RunConfig& cfg, OutputWriter& out) {
  if (cfg.dimensional()) throw ConfigError("sweep: requires dimensionless gamma and epsilon grids");
  const auto gammas = cfg.gamma.empty() ? std::vector<double>{2.0} : cfg.gamma;
  const auto epsilons = cfg.epsilon.empty() ? std::vector<double>{0.1} : cfg.epsilon;
  struct Cell {
    std::vector<double> row;
    std::string error;
  };
  const std::size_t total = gammas.size() * epsilons.size();
  const auto D = linspace(-1.0, 1.0, cfg.d_samples);
  const auto cells = parallel_map(total, cfg.jobs, [&](std::size_t i) {
    const double g = gammas[i / epsilons.size()];
    const double e = epsilons[i % epsilons.size()];
    Cell cell;
    try {
      const auto c = make_case(cfg, g, e);
      const double k = c.packet.k0;
      std::vector<double> S;
      for (double d : D) S.push_back(s_of_d_exact(d, g, e));
      const double tph = dimensionless_phase_time(k, c.barrier);
      const double slope = detail::min_slope(D, S);
      const auto amp = amplitudes(k, c.barrier);
      if (!std::isfinite(tph) || !std::isfinite(S.back())) throw NumericalError("non-finite path relation");
      cell.row = {static_cast<double>(i),
                  g,
                  e,
                  k,
                  amp.transmission(),
                  phase_time(k, c.barrier),
                  S.back(),
                  S.back() - tph,
                  slope,
                  slope >= -1e-10 ? 1.0 : 0.0,
                  wkb_invertibility_witness(g, e).found ? 1.0 : 0.0,
                  total_transmission_probability(c.packet, c.barrier, cfg.k_nodes)};
    } catch (const std::exception& ex) {
      cell.error = ex.what();
    }
    return cell;
  });
  Table t{"sweep",
          {"index", "gamma", "epsilon", "k0", "T2", "t_ph", "S_exit", "exit_residual", "min_dSdD", "monotone",
           "wkb_witness", "P_tot"},
          {}};
  json failures = json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].error.empty()) {
      t.rows.push_back(cells[i].row);
    } else {
      failures.push_back({{"index", i},
                          {"gamma", gammas[i / epsilons.size()]},
                          {"epsilon", epsilons[i % epsilons.size()]},
                          {"reason", cells[i].error}});
    }
  }
  out.write(t);
  out.write_summary("sweep_failures", {{"cells", total}, {"failed", failures.size()}, {"failures", failures}});
  return failures.empty() ? ok : numerical;
}

}  // namespace tunnelpath::cli
