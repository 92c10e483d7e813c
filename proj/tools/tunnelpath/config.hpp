#pragma once

// Run configuration: a JSON document overlaid by command-line flags, then
// validated and resolved into barrier / packet cases.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "tunnelpath/probabilities.hpp"
#include "tunnelpath/quasiclassical.hpp"
#include "tunnelpath/scattering.hpp"
#include "tunnelpath/wavepacket.hpp"

namespace tunnelpath::cli {

using json = nlohmann::json;

/// Invalid configuration; maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { csv, json };

struct RunConfig {
  // barrier: dimensional (v0) or dimensionless (gamma, epsilon)
  std::optional<double> v0;
  std::vector<double> gamma;
  std::vector<double> epsilon;
  double a = 1.0;
  double m = 1.0;
  // packet
  std::optional<double> x0;
  std::optional<double> k0;
  std::optional<double> sigma_p;
  double band_sigmas = 6.0;
  // detectors
  double x_first = 0.0;
  std::optional<double> l_second;
  // grids
  std::size_t d_samples = 201;
  std::optional<double> tau_window;
  std::optional<double> tau_step;
  std::size_t k_nodes = 257;
  std::size_t samples = 201;
  // output
  Format format = Format::csv;
  std::string out = ".";
  bool invert = false;
  unsigned jobs = 1;

  [[nodiscard]] bool dimensional() const { return v0.has_value(); }
};

inline std::string format_name(Format f) { return f == Format::csv ? "csv" : "json"; }

inline Format parse_format(const std::string& s, const std::string& path) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ConfigError(path + ": unknown format '" + s + "' (expected csv or json)");
}

namespace detail {

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path + ": must be finite");
  return v;
}

inline std::size_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(path + ": expected a non-negative integer");
  return j.get<std::size_t>();
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
  std::vector<double> out;
  if (j.is_number()) return {number(j, path)};
  if (!j.is_array()) throw ConfigError(path + ": expected a number or an array of numbers");
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError((path.empty() ? key : path + "." + key) + ": unknown field");
  }
}

}  // namespace detail

/// Overlay the fields present in a JSON document onto `c`.
inline void apply_json(RunConfig& c, const json& j) {
  using namespace detail;
  reject_unknown(j, "", {"barrier", "packet", "detectors", "grids", "output", "invert", "jobs"});
  if (j.contains("barrier")) {
    const auto& b = j["barrier"];
    reject_unknown(b, "barrier", {"v0", "a", "m", "gamma", "epsilon"});
    if (b.contains("v0")) c.v0 = number(b["v0"], "barrier.v0");
    if (b.contains("a")) c.a = number(b["a"], "barrier.a");
    if (b.contains("m")) c.m = number(b["m"], "barrier.m");
    if (b.contains("gamma")) c.gamma = numbers(b["gamma"], "barrier.gamma");
    if (b.contains("epsilon")) c.epsilon = numbers(b["epsilon"], "barrier.epsilon");
  }
  if (j.contains("packet")) {
    const auto& p = j["packet"];
    reject_unknown(p, "packet", {"x0", "k0", "sigma_p", "band_sigmas"});
    if (p.contains("x0")) c.x0 = number(p["x0"], "packet.x0");
    if (p.contains("k0")) c.k0 = number(p["k0"], "packet.k0");
    if (p.contains("sigma_p")) c.sigma_p = number(p["sigma_p"], "packet.sigma_p");
    if (p.contains("band_sigmas")) c.band_sigmas = number(p["band_sigmas"], "packet.band_sigmas");
  }
  if (j.contains("detectors")) {
    const auto& d = j["detectors"];
    reject_unknown(d, "detectors", {"x_first", "l_second"});
    if (d.contains("x_first")) c.x_first = number(d["x_first"], "detectors.x_first");
    if (d.contains("l_second")) c.l_second = number(d["l_second"], "detectors.l_second");
  }
  if (j.contains("grids")) {
    const auto& g = j["grids"];
    reject_unknown(g, "grids", {"d_samples", "tau_window", "tau_step", "k_nodes", "samples"});
    if (g.contains("d_samples")) c.d_samples = count(g["d_samples"], "grids.d_samples");
    if (g.contains("tau_window")) c.tau_window = number(g["tau_window"], "grids.tau_window");
    if (g.contains("tau_step")) c.tau_step = number(g["tau_step"], "grids.tau_step");
    if (g.contains("k_nodes")) c.k_nodes = count(g["k_nodes"], "grids.k_nodes");
    if (g.contains("samples")) c.samples = count(g["samples"], "grids.samples");
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    reject_unknown(o, "output", {"format", "out"});
    if (o.contains("format")) {
      if (!o["format"].is_string()) throw ConfigError("output.format: expected a string");
      c.format = parse_format(o["format"].get<std::string>(), "output.format");
    }
    if (o.contains("out")) {
      if (!o["out"].is_string()) throw ConfigError("output.out: expected a string");
      c.out = o["out"].get<std::string>();
    }
  }
  if (j.contains("invert")) {
    if (!j["invert"].is_boolean()) throw ConfigError("invert: expected a boolean");
    c.invert = j["invert"].get<bool>();
  }
  if (j.contains("jobs")) c.jobs = static_cast<unsigned>(std::max<std::size_t>(1, count(j["jobs"], "jobs")));
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config: cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config: " + path + ": " + e.what());
  }
}

/// Default worker count: TUNNELPATH_JOBS if set, else the hardware concurrency.
inline unsigned default_jobs() {
  if (const char* env = std::getenv("TUNNELPATH_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("TUNNELPATH_JOBS: expected a positive integer");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline void validate(const RunConfig& c) {
  auto positive = [](double v, const std::string& path) {
    if (!(v > 0.0)) throw ConfigError(path + ": must be > 0");
  };
  if (c.dimensional() && (!c.gamma.empty() || !c.epsilon.empty()))
    throw ConfigError("barrier: dimensional (v0) and dimensionless (gamma, epsilon) barrier settings are mutually exclusive");
  if (c.dimensional() && !(*c.v0 >= 0.0)) throw ConfigError("barrier.v0: must be >= 0");
  positive(c.a, "barrier.a");
  positive(c.m, "barrier.m");
  for (std::size_t i = 0; i < c.gamma.size(); ++i) positive(c.gamma[i], "barrier.gamma[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < c.epsilon.size(); ++i)
    if (!(c.epsilon[i] > 0.0 && c.epsilon[i] < 1.0))
      throw ConfigError("barrier.epsilon[" + std::to_string(i) + "]: must lie in (0, 1)");
  if (c.k0) positive(*c.k0, "packet.k0");
  if (!c.dimensional() && c.k0) throw ConfigError("packet.k0: only valid with a dimensional barrier (v0); use epsilon");
  if (c.sigma_p) positive(*c.sigma_p, "packet.sigma_p");
  positive(c.band_sigmas, "packet.band_sigmas");
  if (c.x0 && !(*c.x0 < -c.a)) throw ConfigError("packet.x0: must lie left of the barrier (x0 < -a)");
  if (c.l_second && !(*c.l_second > c.a)) throw ConfigError("detectors.l_second: must lie beyond the barrier (L > a)");
  if (c.d_samples < 2) throw ConfigError("grids.d_samples: need at least 2 samples");
  if (c.samples < 2) throw ConfigError("grids.samples: need at least 2 samples");
  if (c.k_nodes < 8) throw ConfigError("grids.k_nodes: need at least 8 nodes");
  if (c.tau_window) positive(*c.tau_window, "grids.tau_window");
  if (c.tau_step) positive(*c.tau_step, "grids.tau_step");
  if (c.jobs < 1) throw ConfigError("jobs: must be >= 1");
}

/// One barrier / packet configuration.
struct Case {
  double gamma = 0.0;    ///< opacity at k0 (0 when the barrier is absent)
  double epsilon = 0.0;  ///< k0^2 / (2 m V0) (0 when the barrier is absent)
  BarrierParams barrier;
  WavePacketSpec packet;
};

inline WavePacketSpec packet_for(const RunConfig& c, const BarrierParams& b, double k0) {
  WavePacketSpec s = WavePacketSpec::before_barrier(b, k0, c.sigma_p.value_or(0.01 * k0));
  s.band_sigmas = c.band_sigmas;
  if (c.x0) s.x0 = *c.x0;
  return s;
}

inline Case make_case(const RunConfig& c, double gamma, double epsilon) {
  Case out;
  out.gamma = gamma;
  out.epsilon = epsilon;
  out.barrier = BarrierParams::from_opacity(gamma, epsilon, c.a, c.m);
  out.packet = packet_for(c, out.barrier, out.barrier.momentum_at(epsilon));
  return out;
}

/// Cases of a run. Dimensionless runs pair every gamma with every epsilon
/// (gamma-major); a dimensional run yields one case.
inline std::vector<Case> resolve_cases(const RunConfig& c) {
  if (c.dimensional()) {
    Case out;
    out.barrier = BarrierParams{*c.v0, c.a, c.m};
    const double k0 = c.k0.value_or(out.barrier.absent() ? 1.0 : out.barrier.momentum_at(0.1));
    if (!out.barrier.absent() && out.barrier.tunneling(k0)) {
      out.gamma = opacity(k0, out.barrier);
      out.epsilon = out.barrier.energy_ratio(k0);
    }
    out.packet = packet_for(c, out.barrier, k0);
    return {out};
  }
  const auto gammas = c.gamma.empty() ? std::vector<double>{2.0} : c.gamma;
  const auto epsilons = c.epsilon.empty() ? std::vector<double>{0.1} : c.epsilon;
  std::vector<Case> out;
  for (double g : gammas)
    for (double e : epsilons) out.push_back(make_case(c, g, e));
  return out;
}

/// (gamma, epsilon) pairs zipped element-wise; a single value broadcasts.
inline std::vector<std::pair<double, double>> zip_pairs(const RunConfig& c) {
  if (c.dimensional()) throw ConfigError("wkb-compare: requires dimensionless (gamma, epsilon) pairs");
  if (c.gamma.empty() || c.epsilon.empty())
    throw ConfigError("wkb-compare: empty (gamma, epsilon) pair list; pass --gamma and --epsilon");
  const std::size_t n = std::max(c.gamma.size(), c.epsilon.size());
  if ((c.gamma.size() != n && c.gamma.size() != 1) || (c.epsilon.size() != n && c.epsilon.size() != 1))
    throw ConfigError("wkb-compare: gamma and epsilon lists must have equal length or length 1");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < n; ++i)
    out.emplace_back(c.gamma[c.gamma.size() == 1 ? 0 : i], c.epsilon[c.epsilon.size() == 1 ? 0 : i]);
  return out;
}

inline json to_json(const RunConfig& c) {
  json j;
  json barrier;
  if (c.v0) barrier["v0"] = *c.v0;
  if (!c.gamma.empty()) barrier["gamma"] = c.gamma;
  if (!c.epsilon.empty()) barrier["epsilon"] = c.epsilon;
  barrier["a"] = c.a;
  barrier["m"] = c.m;
  j["barrier"] = barrier;
  json packet;
  if (c.x0) packet["x0"] = *c.x0;
  if (c.k0) packet["k0"] = *c.k0;
  if (c.sigma_p) packet["sigma_p"] = *c.sigma_p;
  packet["band_sigmas"] = c.band_sigmas;
  j["packet"] = packet;
  json detectors;
  detectors["x_first"] = c.x_first;
  if (c.l_second) detectors["l_second"] = *c.l_second;
  j["detectors"] = detectors;
  json grids;
  grids["d_samples"] = c.d_samples;
  grids["k_nodes"] = c.k_nodes;
  grids["samples"] = c.samples;
  if (c.tau_window) grids["tau_window"] = *c.tau_window;
  if (c.tau_step) grids["tau_step"] = *c.tau_step;
  j["grids"] = grids;
  j["output"] = {{"format", format_name(c.format)}};
  j["invert"] = c.invert;
  return j;
}

}  // namespace tunnelpath::cli
