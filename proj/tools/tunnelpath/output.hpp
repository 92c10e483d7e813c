#pragma once

// Tables and summaries written as CSV / JSON with 12 significant digits, each
// table accompanied by a <name>.meta.json sidecar.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"
#include "tunnelpath/version.hpp"

namespace tunnelpath::cli {

inline constexpr int precision = 12;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

/// JSON value carrying the same 12 digits as the CSV form.
inline json rounded(double v) {
  if (!std::isfinite(v)) return format_number(v);
  return std::strtod(format_number(v).c_str(), nullptr);
}

inline std::string render_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

inline json table_json(const Table& t) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (double v : row) r.push_back(rounded(v));
    rows.push_back(std::move(r));
  }
  return {{"name", t.name}, {"columns", t.columns}, {"rows", std::move(rows)}};
}

/// Recursively round every floating-point number in a JSON document.
inline json round_all(const json& j) {
  if (j.is_number_float()) return rounded(j.get<double>());
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(round_all(v));
    return out;
  }
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : j.items()) out[k] = round_all(v);
    return out;
  }
  return j;
}

class OutputWriter {
 public:
  OutputWriter(std::string dir, Format format, json config, std::string command)
      : dir_(std::move(dir)), format_(format), config_(std::move(config)), command_(std::move(command)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ConfigError("output.out: cannot create '" + dir_ + "': " + ec.message());
  }

  /// Writes the table and its sidecar; returns the table path.
  std::string write(const Table& t, const json& extra = json::object()) {
    const std::string ext = format_ == Format::csv ? ".csv" : ".json";
    const auto path = file(t.name + ext);
    emit(path, format_ == Format::csv ? render_csv(t) : table_json(t).dump(2) + "\n");
    json meta = sidecar();
    meta["table"] = t.name;
    meta["columns"] = t.columns;
    meta["rows"] = t.rows.size();
    if (!extra.empty()) meta["details"] = round_all(extra);
    emit(file(t.name + ".meta.json"), meta.dump(2) + "\n");
    written_.push_back(path);
    return path;
  }

  /// Writes a scalar summary as JSON (format-independent).
  std::string write_summary(const std::string& name, const json& body) {
    json doc = sidecar();
    doc["summary"] = round_all(body);
    const auto path = file(name + ".json");
    emit(path, doc.dump(2) + "\n");
    written_.push_back(path);
    return path;
  }

  [[nodiscard]] const std::vector<std::string>& written() const noexcept { return written_; }

 private:
  [[nodiscard]] std::string file(const std::string& name) const {
    return (std::filesystem::path(dir_) / name).string();
  }

  [[nodiscard]] json sidecar() const {
    return {{"tool", "tunnelpath"},
            {"version", version},
            {"command", command_},
            {"config", round_all(config_)},
            {"precision", precision},
            {"tolerances",
             {{"density_noise_floor", density_noise_floor},
              {"quadrature_relative", 1e-6},
              {"root_x_tolerance", RootOptions{}.x_tolerance},
              {"witness_tolerance", 1e-8}}}};
  }

  static void emit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("output.out: cannot write '" + path + "'");
    out << text;
  }

  std::string dir_;
  Format format_;
  json config_;
  std::string command_;
  std::vector<std::string> written_;
};

}  // namespace tunnelpath::cli
