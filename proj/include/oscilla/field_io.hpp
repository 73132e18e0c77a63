#pragma once

#include <filesystem>
#include <string>

#include "oscilla/field.hpp"

namespace oscilla {

// 1D CSV: header "x,value", one row per cell center.
// 2D CSV: header "rows,cols,lx,ly,ux,uy", one line with those numbers, then
// `rows` lines of `cols` values; row r holds y-index r (lowest y first).
ScalarField read_field_csv(const std::filesystem::path& path);
void write_field_csv(const ScalarField& field, const std::filesystem::path& path);

struct PgmOptions {
  int bit_depth = 8;  // 8 or 16
  bool binary = true; // P5 when true, P2 otherwise
};

// PGM P2/P5 with a linear rescale of [min, max] onto [0, maxval]. The rescale
// and the domain are recorded in a sidecar "<path>.json"; without a sidecar the
// image maps onto the unit square with values pixel / maxval. Image row 0 is
// the top (highest y).
ScalarField read_pgm(const std::filesystem::path& path);
void write_pgm(const ScalarField& field, const std::filesystem::path& path, PgmOptions options = {});

/// Dispatches on extension (.csv, .pgm).
ScalarField read_field(const std::filesystem::path& path);
void write_field(const ScalarField& field, const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace oscilla
