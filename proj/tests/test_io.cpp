#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "generators.hpp"
#include "oscilla/error.hpp"
#include "oscilla/field_io.hpp"

using namespace oscilla;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "oscilla-test-io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("1D CSV round trip") {
  testgen::FieldGen g(1);
  const auto u = g.field_1d(BoxDomain::interval(-0.5, 1.5), 37);
  const auto p = scratch("line.csv");
  write_field_csv(u, p);
  CHECK(read_file(p).rfind("x,value\n", 0) == 0);
  const auto v = read_field(p);
  REQUIRE(v.same_grid(u));
  for (std::size_t k = 0; k < u.size(); ++k) CHECK(v.samples()[k] == u.samples()[k]);
}

TEST_CASE("2D CSV round trip") {
  testgen::FieldGen g(2);
  const auto u = g.smooth_2d(BoxDomain::rectangle({0, -1}, {2, 1}), 9);
  const auto p = scratch("grid.csv");
  write_field_csv(u, p);
  CHECK(read_file(p).rfind("rows,cols,lx,ly,ux,uy\n", 0) == 0);
  const auto v = read_field(p);
  REQUIRE(v.same_grid(u));
  for (std::size_t k = 0; k < u.size(); ++k) CHECK(v.samples()[k] == u.samples()[k]);
}

TEST_CASE("PGM round trip within quantization") {
  testgen::FieldGen g(3);
  const auto u = g.smooth_2d(BoxDomain::rectangle({0, 0}, {1, 1}), 16);
  double lo = 1e300, hi = -1e300;
  for (double x : u.samples()) lo = std::min(lo, x), hi = std::max(hi, x);
  for (int depth : {8, 16}) {
    for (bool binary : {true, false}) {
      const auto p = scratch("img" + std::to_string(depth) + (binary ? "b" : "a") + ".pgm");
      write_pgm(u, p, {depth, binary});
      CHECK(fs::exists(p.string() + ".json"));
      const auto v = read_field(p);
      REQUIRE(v.same_grid(u));
      const double step = (hi - lo) / (depth == 8 ? 255.0 : 65535.0);
      for (std::size_t k = 0; k < u.size(); ++k) CHECK(std::abs(v.samples()[k] - u.samples()[k]) <= 0.5 * step + 1e-12);
    }
  }
}

TEST_CASE("PGM without sidecar maps onto the unit square") {
  const auto p = scratch("plain.pgm");
  fs::remove(p.string() + ".json");
  std::ofstream(p) << "P2\n# comment\n3 2\n255\n0 51 255\n102 0 0\n";
  const auto v = read_field(p);
  CHECK(v.nx() == 3);
  CHECK(v.ny() == 2);
  CHECK(v.domain().upper[0] == 1.0);
  // row 0 of the image is the top, i.e. the highest y
  CHECK(v(1, 1) == doctest::Approx(0.2));
  CHECK(v(0, 0) == doctest::Approx(0.4));
}

TEST_CASE("I/O errors are validation errors") {
  CHECK_THROWS_AS(read_field(scratch("does-not-exist.csv")), ValidationError);
  CHECK_THROWS_AS(read_field(scratch("bad.xyz")), ValidationError);
  const auto p = scratch("broken.csv");
  std::ofstream(p) << "x,value\n0.1,abc\n";
  CHECK_THROWS_AS(read_field(p), ValidationError);
}

TEST_CASE("atomic write leaves no temporaries") {
  const auto p = scratch("atomic/out.txt");
  fs::create_directories(p.parent_path());
  write_file_atomic(p, "one");
  write_file_atomic(p, "two");
  CHECK(read_file(p) == "two");
  int files = 0;
  for (auto& e : fs::directory_iterator(p.parent_path())) (void)e, ++files;
  CHECK(files == 1);
}
