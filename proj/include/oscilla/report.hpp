#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "oscilla/gamma_lab.hpp"

namespace oscilla {

std::string version_string();

/// 64-bit FNV-1a of the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Validated run configuration: the subcommand plus key=value settings.
struct RunConfig {
  std::string command;
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  const std::string& get(const std::string& key) const;  // throws ValidationError naming the key
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  /// Comma-separated reals.
  std::vector<double> get_list(const std::string& key) const;

  nlohmann::json to_json() const;
  /// Hash of the canonical JSON form; stable across runs.
  std::string hash() const;
};

/// key=value lines; '#' starts a comment; blank lines ignored.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

struct Report {
  std::string kind;
  RunConfig config;
  nlohmann::json result = nlohmann::json::object();
  std::vector<Series> series;
  std::string plot_title;
  double runtime_seconds = 0.0;

  nlohmann::json to_json() const;
  static Report from_json(const nlohmann::json& j);
};

struct EmittedFiles {
  std::filesystem::path json;
  std::vector<std::filesystem::path> csv;
  std::filesystem::path svg;  // empty when there is nothing to plot
};

/// "eps,value" header plus one row per point.
std::string series_csv(const Series& s);
/// Log-log plot of value against eps, one polyline per series.
std::string series_svg(const std::vector<Series>& series, const std::string& title);

/// Writes <kind>-<hash>.json, one <kind>-<hash>-<series>.csv per series and
/// <kind>-<hash>.svg into dir (created if needed). All writes are atomic.
EmittedFiles emit_report(const Report& report, const std::filesystem::path& dir);

}  // namespace oscilla
