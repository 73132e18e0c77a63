#include <filesystem>
#include <regex>

#include "doctest.h"
#include "oscilla/error.hpp"
#include "oscilla/field_io.hpp"
#include "oscilla/report.hpp"

using namespace oscilla;
namespace fs = std::filesystem;

namespace {

Report sample_report(int points, int series) {
  Report r;
  r.kind = "gamma";
  r.config.command = "gamma";
  r.config.values = {{"experiment", "liminf"}, {"seed", "3"}};
  r.result = {{"value", 0.25}};
  for (int s = 0; s < series; ++s) {
    Series x{"s" + std::to_string(s), {}, {}};
    for (int k = 0; k < points; ++k) x.eps.push_back(std::pow(0.5, k + 1)), x.values.push_back(0.25 + 0.01 * k + s);
    r.series.push_back(x);
  }
  r.runtime_seconds = 1.5;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / "oscilla-test-report" / name;
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("FNV-1a test vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("config values") {
  const auto kv = parse_key_values("# comment\n a = 1.5 \nlist=1, 2,3\n\nflag=yes # trailing\nname=x\n");
  RunConfig c{"eval-h", kv};
  CHECK(c.get_double("a") == 1.5);
  CHECK(c.get_list("list") == std::vector<double>{1, 2, 3});
  CHECK(c.get_bool("flag"));
  CHECK(c.get("name") == "x");
  CHECK(c.get("missing", "fallback") == "fallback");
  CHECK_THROWS_WITH_AS(c.get("missing"), "missing required key 'missing'", ValidationError);
  CHECK_THROWS_AS(c.get_int("a"), ValidationError);
  CHECK_THROWS_AS(c.get_bool("name"), ValidationError);
  CHECK_THROWS_AS(c.get_double("name"), ValidationError);
  CHECK_THROWS_AS(parse_key_values("novalue\n"), ValidationError);
  CHECK_THROWS_AS(read_config_file("/nonexistent/x.cfg"), ValidationError);
  RunConfig d = c;
  CHECK(d.hash() == c.hash());
  d.values["a"] = "1.6";
  CHECK(d.hash() != c.hash());
}

TEST_CASE("report JSON round trip and content") {
  const auto r = sample_report(5, 2);
  const auto j = r.to_json();
  for (const char* k : {"kind", "version", "config", "config_hash", "result", "series", "runtime_seconds"}) CHECK(j.contains(k));
  CHECK(j["version"] == version_string());
  CHECK(j["config"]["values"]["seed"] == "3");
  const auto back = Report::from_json(j);
  CHECK(back.to_json() == j);
  CHECK_THROWS_AS(Report::from_json(nlohmann::json{{"kind", 3}}), ValidationError);
}

TEST_CASE("emitted files are content addressed and deterministic") {
  const auto dir = fresh_dir("det");
  auto a = sample_report(5, 3);
  const auto fa = emit_report(a, dir);
  const std::string first = read_file(fa.json);
  a.runtime_seconds = 9.0;
  const auto fb = emit_report(a, dir);
  CHECK(fa.json == fb.json);
  auto ja = nlohmann::json::parse(first), jb = nlohmann::json::parse(read_file(fb.json));
  ja.erase("runtime_seconds");
  jb.erase("runtime_seconds");
  CHECK(ja.dump() == jb.dump());
  CHECK(fa.json.filename().string() == "gamma-" + a.config.hash() + ".json");

  REQUIRE(fa.csv.size() == 3);
  const std::string csv = read_file(fa.csv[0]);
  CHECK(csv.rfind("eps,value\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);

  const std::string svg = read_file(fa.svg);
  const std::regex poly("<polyline");
  CHECK(std::distance(std::sregex_iterator(svg.begin(), svg.end(), poly), std::sregex_iterator()) == 3);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("series without positive values still plot") {
  Series s{"zero", {0.1, 0.05}, {0.0, 0.0}};
  const auto svg = series_svg({s}, "zeros & <stuff>");
  CHECK(svg.find("zeros &amp; &lt;stuff&gt;") != std::string::npos);
  CHECK_THROWS_AS(series_csv(Series{"bad", {0.1}, {}}), ValidationError);
}
