#include "oscilla/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "oscilla/error.hpp"

namespace oscilla {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_double(const std::string& s, const fs::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(trim(s), &used);
    if (used != trim(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("malformed number '" + s + "' in " + path.string());
  }
}

// skips PGM comments and whitespace, reads one token
std::string pgm_token(std::istream& in) {
  std::string tok;
  while (in) {
    const int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  in >> tok;
  return tok;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

ScalarField read_field_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string header;
  if (!std::getline(in, header)) throw ValidationError("empty CSV file: " + path.string());
  header = trim(header);
  if (header == "x,value") {
    std::vector<double> xs, vs;
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto cells = split(line, ',');
      if (cells.size() != 2) throw ValidationError("expected two columns in " + path.string());
      xs.push_back(parse_double(cells[0], path));
      vs.push_back(parse_double(cells[1], path));
    }
    require(xs.size() >= 2, "1D CSV needs at least two rows");
    const double h = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    require(h > 0.0, "1D CSV x column must increase");
    for (std::size_t k = 0; k < xs.size(); ++k) {
      require(std::abs(xs[k] - (xs.front() + k * h)) <= 1e-9 * std::max(1.0, std::abs(h) * xs.size()),
              "1D CSV x column must be uniformly spaced cell centers");
    }
    const auto domain = BoxDomain::interval(xs.front() - 0.5 * h, xs.back() + 0.5 * h);
    const int n = static_cast<int>(vs.size());
    return ScalarField(domain, {n, 1}, std::move(vs));
  }
  if (header == "rows,cols,lx,ly,ux,uy") {
    std::string meta;
    if (!std::getline(in, meta)) throw ValidationError("2D CSV missing metadata line: " + path.string());
    const auto m = split(meta, ',');
    if (m.size() != 6) throw ValidationError("2D CSV metadata needs six values: " + path.string());
    const int rows = static_cast<int>(parse_double(m[0], path));
    const int cols = static_cast<int>(parse_double(m[1], path));
    require(rows >= 1 && cols >= 1, "2D CSV rows/cols must be positive");
    const auto domain = BoxDomain::rectangle({parse_double(m[2], path), parse_double(m[3], path)},
                                             {parse_double(m[4], path), parse_double(m[5], path)});
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(rows) * cols);
    std::string line;
    int r = 0;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const auto cells = split(line, ',');
      if (static_cast<int>(cells.size()) != cols) throw ValidationError("2D CSV row has wrong column count: " + path.string());
      for (const auto& c : cells) values.push_back(parse_double(c, path));
      ++r;
    }
    require(r == rows, "2D CSV row count does not match metadata");
    return ScalarField(domain, {cols, rows}, std::move(values));
  }
  throw ValidationError("unrecognized CSV header in " + path.string());
}

void write_field_csv(const ScalarField& field, const fs::path& path) {
  std::ostringstream out;
  out << std::setprecision(17);
  if (field.dim() == 1) {
    out << "x,value\n";
    for (int i = 0; i < field.nx(); ++i) out << field.cell_center(i)[0] << ',' << field(i) << '\n';
  } else {
    const auto& d = field.domain();
    out << "rows,cols,lx,ly,ux,uy\n";
    out << field.ny() << ',' << field.nx() << ',' << d.lower[0] << ',' << d.lower[1] << ',' << d.upper[0] << ','
        << d.upper[1] << '\n';
    for (int j = 0; j < field.ny(); ++j) {
      for (int i = 0; i < field.nx(); ++i) out << (i ? "," : "") << field(i, j);
      out << '\n';
    }
  }
  write_file_atomic(path, out.str());
}

ScalarField read_pgm(const fs::path& path) {
  std::istringstream in(read_file(path));
  const std::string magic = pgm_token(in);
  require(magic == "P2" || magic == "P5", "not a PGM P2/P5 file: " + path.string());
  const int width = std::stoi(pgm_token(in));
  const int height = std::stoi(pgm_token(in));
  const int maxval = std::stoi(pgm_token(in));
  require(width >= 1 && height >= 1, "PGM dimensions must be positive");
  require(maxval >= 1 && maxval <= 65535, "PGM maxval must be in [1, 65535]");
  std::vector<double> pixels(static_cast<std::size_t>(width) * height);
  if (magic == "P2") {
    for (auto& p : pixels) p = std::stod(pgm_token(in));
  } else {
    in.get();  // single whitespace after maxval
    const int bytes = maxval < 256 ? 1 : 2;
    for (auto& p : pixels) {
      int v = in.get();
      if (bytes == 2) v = (v << 8) | in.get();
      if (!in) throw ValidationError("truncated PGM data: " + path.string());
      p = v;
    }
  }
  double lo = 0.0, hi = 1.0;
  BoxDomain domain = BoxDomain::rectangle({0.0, 0.0}, {1.0, 1.0});
  fs::path sidecar = path;
  sidecar += ".json";
  if (fs::exists(sidecar)) {
    const auto meta = nlohmann::json::parse(read_file(sidecar));
    lo = meta.at("min").get<double>();
    hi = meta.at("max").get<double>();
    if (meta.contains("lower")) domain = BoxDomain::rectangle(meta.at("lower").get<Point>(), meta.at("upper").get<Point>());
  }
  std::vector<double> values(pixels.size());
  for (int r = 0; r < height; ++r) {
    const int j = height - 1 - r;
    for (int i = 0; i < width; ++i) {
      values[i + static_cast<std::size_t>(width) * j] = lo + (hi - lo) * pixels[i + static_cast<std::size_t>(width) * r] / maxval;
    }
  }
  return ScalarField(domain, {width, height}, std::move(values));
}

void write_pgm(const ScalarField& field, const fs::path& path, PgmOptions options) {
  require(field.dim() == 2, "PGM output needs a 2D field");
  require(options.bit_depth == 8 || options.bit_depth == 16, "PGM bit depth must be 8 or 16");
  const int maxval = options.bit_depth == 8 ? 255 : 65535;
  const auto s = field.samples();
  const double lo = *std::min_element(s.begin(), s.end());
  double hi = *std::max_element(s.begin(), s.end());
  if (hi <= lo) hi = lo + 1.0;
  std::ostringstream out;
  out << (options.binary ? "P5" : "P2") << '\n' << field.nx() << ' ' << field.ny() << '\n' << maxval << '\n';
  for (int r = 0; r < field.ny(); ++r) {
    const int j = field.ny() - 1 - r;
    for (int i = 0; i < field.nx(); ++i) {
      const int v = static_cast<int>(std::lround((field(i, j) - lo) / (hi - lo) * maxval));
      if (options.binary) {
        if (maxval > 255) out.put(static_cast<char>((v >> 8) & 0xff));
        out.put(static_cast<char>(v & 0xff));
      } else {
        out << v << (i + 1 == field.nx() ? '\n' : ' ');
      }
    }
  }
  write_file_atomic(path, out.str());
  const auto& d = field.domain();
  nlohmann::json meta{{"min", lo}, {"max", hi}, {"maxval", maxval}, {"lower", d.lower}, {"upper", d.upper}};
  fs::path sidecar = path;
  sidecar += ".json";
  write_file_atomic(sidecar, meta.dump(2) + "\n");
}

ScalarField read_field(const fs::path& path) {
  if (!fs::exists(path)) throw ValidationError("input file not found: " + path.string());
  const auto ext = path.extension().string();
  if (ext == ".csv") return read_field_csv(path);
  if (ext == ".pgm") return read_pgm(path);
  throw ValidationError("unsupported field file extension: " + ext);
}

void write_field(const ScalarField& field, const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".pgm") return write_pgm(field, path);
  return write_field_csv(field, path);
}

}  // namespace oscilla
