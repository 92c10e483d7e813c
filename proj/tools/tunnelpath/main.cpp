#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace tunnelpath::cli;

struct Flags {
  std::string config;
  std::vector<double> gamma;
  std::vector<double> epsilon;
  std::optional<double> v0, a, m, x0, k0, sigma_p, x_first, l_second, tau_window, tau_step;
  std::optional<std::size_t> d_samples, k_nodes, samples;
  std::optional<unsigned> jobs;
  std::optional<std::string> out, format;
  bool invert = false;
};

void add_flags(CLI::App& sub, Flags& f) {
  sub.add_option("--config", f.config, "JSON configuration file");
  sub.add_option("--gamma", f.gamma, "opacity gamma = lambda a (repeatable)")->expected(1, -1)->allow_extra_args();
  sub.add_option("--epsilon", f.epsilon, "energy ratio k^2 / (2 m V0) (repeatable)")
      ->expected(1, -1)
      ->allow_extra_args();
  sub.add_option("--v0", f.v0, "barrier height (dimensional mode)");
  sub.add_option("--a", f.a, "barrier half-width");
  sub.add_option("--m", f.m, "particle mass");
  sub.add_option("--x0", f.x0, "initial packet centre");
  sub.add_option("--k0", f.k0, "mean momentum (dimensional mode)");
  sub.add_option("--sigma-p", f.sigma_p, "momentum spread");
  sub.add_option("--x-first", f.x_first, "first detector position");
  sub.add_option("--l-second", f.l_second, "second detector position L > a");
  sub.add_option("--d-samples", f.d_samples, "samples of D in [-1, 1]");
  sub.add_option("--tau-window", f.tau_window, "half-width of the time window");
  sub.add_option("--tau-step", f.tau_step, "time step");
  sub.add_option("--k-nodes", f.k_nodes, "momentum quadrature nodes");
  sub.add_option("--samples", f.samples, "samples of the scatter sweep");
  sub.add_option("--out", f.out, "output directory");
  sub.add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub.add_option("--jobs", f.jobs, "worker threads (default: TUNNELPATH_JOBS or hardware concurrency)");
  sub.add_flag("--invert", f.invert, "also write the inverted path x(tau1)");
}

RunConfig build_config(const Flags& f) {
  RunConfig c;
  bool jobs_set = false;
  if (!f.config.empty()) {
    const json j = load_json_file(f.config);
    apply_json(c, j);
    jobs_set = j.is_object() && j.contains("jobs");
  }
  if (!f.gamma.empty()) c.gamma = f.gamma;
  if (!f.epsilon.empty()) c.epsilon = f.epsilon;
  if (f.v0) c.v0 = f.v0;
  if (f.a) c.a = *f.a;
  if (f.m) c.m = *f.m;
  if (f.x0) c.x0 = f.x0;
  if (f.k0) c.k0 = f.k0;
  if (f.sigma_p) c.sigma_p = f.sigma_p;
  if (f.x_first) c.x_first = *f.x_first;
  if (f.l_second) c.l_second = f.l_second;
  if (f.d_samples) c.d_samples = *f.d_samples;
  if (f.tau_window) c.tau_window = f.tau_window;
  if (f.tau_step) c.tau_step = f.tau_step;
  if (f.k_nodes) c.k_nodes = *f.k_nodes;
  if (f.samples) c.samples = *f.samples;
  if (f.out) c.out = *f.out;
  if (f.format) c.format = parse_format(*f.format, "--format");
  if (f.invert) c.invert = true;
  if (f.jobs) {
    if (*f.jobs < 1) throw ConfigError("--jobs: must be >= 1");
    c.jobs = *f.jobs;
  } else if (!jobs_set) {
    c.jobs = default_jobs();
  }
  validate(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tunnelling-time paths, detector densities and WKB comparisons for a square barrier"};
  app.set_version_flag("--version", std::string(tunnelpath::version));
  app.require_subcommand(1);

  using Command = std::function<int(const RunConfig&, OutputWriter&)>;
  const std::map<std::string, std::pair<std::string, Command>> commands{
      {"scatter", {"transmission and reflection over energy or momentum", cmd_scatter}},
      {"path", {"quasi-classical path S(D) and its inverse", cmd_path}},
      {"wkb-compare", {"exact versus WKB path relation with an invertibility witness", cmd_wkb_compare}},
      {"probabilities", {"detector densities and joint detection probabilities", cmd_probabilities}},
      {"sweep", {"gamma x epsilon parameter sweep", cmd_sweep}},
  };

  Flags flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    add_flags(*sub, flags);
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Status::ok : Status::invalid;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    try {
      const RunConfig cfg = build_config(flags);
      OutputWriter writer(cfg.out, cfg.format, to_json(cfg), name);
      const int status = commands.at(name).second(cfg, writer);
      for (const auto& path : writer.written()) std::cout << path << '\n';
      return status;
    } catch (const ConfigError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return Status::invalid;
    } catch (const tunnelpath::NumericalError& e) {
      std::cerr << "numerical error: " << e.what() << '\n';
      return Status::numerical;
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << '\n';
      return Status::invalid;
    } catch (const std::domain_error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return Status::invalid;
    } catch (const std::out_of_range& e) {
      std::cerr << "error: " << e.what() << '\n';
      return Status::invalid;
    } catch (const std::exception& e) {
      std::cerr << "numerical error: " << e.what() << '\n';
      return Status::numerical;
    }
  }
  return Status::invalid;
}
