#include "oscilla/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "oscilla/error.hpp"
#include "oscilla/field_io.hpp"

namespace oscilla {

std::string version_string() { return OSCILLA_VERSION; }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- config -------------------------------------------------------------------

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw ValidationError("missing required key '" + key + "'");
  return it->second;
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

namespace {

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(v)) {
    throw ValidationError("key '" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

double RunConfig::get_double(const std::string& key) const { return to_double(key, get(key)); }

int RunConfig::get_int(const std::string& key) const {
  const double v = get_double(key);
  if (v != std::floor(v) || std::abs(v) > 2e9) throw ValidationError("key '" + key + "': expected an integer");
  return static_cast<int>(v);
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  const std::string& t = get(key);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
    throw ValidationError("key '" + key + "': expected a non-negative integer, got '" + t + "'");
  }
  return std::stoull(t);
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& t = get(key);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ValidationError("key '" + key + "': expected a boolean, got '" + t + "'");
}

std::vector<double> RunConfig::get_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  if (out.empty()) throw ValidationError("key '" + key + "': empty list");
  return out;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json v = nlohmann::json::object();
  for (const auto& [k, s] : values) v[k] = s;
  return {{"command", command}, {"values", v}};
}

std::string RunConfig::hash() const { return fnv1a_hex(to_json().dump()); }

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ValidationError("config file not found: " + path.string());
  return parse_key_values(read_file(path));
}

// --- reports --------------------------------------------------------------------------

nlohmann::json Report::to_json() const {
  nlohmann::json s = nlohmann::json::array();
  for (const auto& x : series) s.push_back({{"name", x.name}, {"eps", x.eps}, {"values", x.values}});
  return {{"kind", kind},
          {"version", version_string()},
          {"config", config.to_json()},
          {"config_hash", config.hash()},
          {"result", result},
          {"series", s},
          {"plot_title", plot_title},
          {"runtime_seconds", runtime_seconds}};
}

Report Report::from_json(const nlohmann::json& j) {
  Report r;
  try {
    r.kind = j.at("kind").get<std::string>();
    r.config.command = j.at("config").at("command").get<std::string>();
    for (auto& [k, v] : j.at("config").at("values").items()) r.config.values[k] = v.get<std::string>();
    r.result = j.value("result", nlohmann::json::object());
    for (const auto& s : j.value("series", nlohmann::json::array())) {
      r.series.push_back({s.at("name").get<std::string>(), s.at("eps").get<std::vector<double>>(),
                          s.at("values").get<std::vector<double>>()});
    }
    r.plot_title = j.value("plot_title", std::string());
    r.runtime_seconds = j.value("runtime_seconds", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string series_csv(const Series& s) {
  require(s.eps.size() == s.values.size(), "series '" + s.name + "': eps and values differ in length");
  std::string out = "eps,value\n";
  char buf[64];
  for (std::size_t i = 0; i < s.eps.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s.eps[i], s.values[i]);
    out += buf;
  }
  return out;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
  return out.empty() ? "series" : out;
}

}  // namespace

std::string series_svg(const std::vector<Series>& series, const std::string& title) {
  const double W = 640, H = 420, L = 70, R = 150, T = 40, B = 50;
  // log10 eps on x; value on y, log scale when all values are positive
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  bool ylog = true;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.eps.size(); ++i) {
      if (s.eps[i] > 0.0) {
        xmin = std::min(xmin, std::log10(s.eps[i]));
        xmax = std::max(xmax, std::log10(s.eps[i]));
      }
      if (!(s.values[i] > 0.0)) ylog = false;
    }
  }
  auto yv = [&](double v) { return ylog ? std::log10(v) : v; };
  for (const auto& s : series) {
    for (double v : s.values) {
      if (std::isfinite(yv(v))) {
        ymin = std::min(ymin, yv(v));
        ymax = std::max(ymax, yv(v));
      }
    }
  }
  if (!std::isfinite(xmin)) xmin = -1, xmax = 0;
  if (!std::isfinite(ymin)) ymin = 0, ymax = 1;
  if (xmax - xmin < 1e-12) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin < 1e-12) ymin -= 0.5, ymax += 0.5;
  auto px = [&](double e) { return L + (std::log10(e) - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double v) { return H - B - (yv(v) - ymin) / (ymax - ymin) * (H - T - B); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  std::ostringstream o;
  o.precision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << L << "\" y=\"24\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<text x=\"" << (W - R + L) / 2 << "\" y=\"" << H - 12 << "\" font-size=\"12\">eps (log)</text>\n";
  o << "<text x=\"8\" y=\"" << T - 8 << "\" font-size=\"12\">" << (ylog ? "value (log)" : "value") << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colors[k % 8];
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.eps.size(); ++i) {
      if (!(s.eps[i] > 0.0) || !std::isfinite(yv(s.values[i]))) continue;
      o << px(s.eps[i]) << "," << py(s.values[i]) << " ";
    }
    o << "\"/>\n";
    o << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (k + 1) << "\" font-size=\"12\" fill=\"" << c << "\">"
      << xml_escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

EmittedFiles emit_report(const Report& report, const std::filesystem::path& dir) {
  require(!report.kind.empty(), "report kind must not be empty");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory " + dir.string() + ": " + ec.message());
  const std::string stem = safe_name(report.kind) + "-" + report.config.hash();
  EmittedFiles files;
  files.json = dir / (stem + ".json");
  write_file_atomic(files.json, report.to_json().dump(2) + "\n");
  for (const auto& s : report.series) {
    auto path = dir / (stem + "-" + safe_name(s.name) + ".csv");
    write_file_atomic(path, series_csv(s));
    files.csv.push_back(path);
  }
  if (!report.series.empty()) {
    files.svg = dir / (stem + ".svg");
    write_file_atomic(files.svg, series_svg(report.series, report.plot_title.empty() ? report.kind : report.plot_title));
  }
  return files;
}

}  // namespace oscilla
