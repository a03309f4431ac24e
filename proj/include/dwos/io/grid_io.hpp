#pragma once

#include "dwos/core/errors.hpp"
#include "dwos/pde/grid_field.hpp"

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace dwos {

namespace detail {

inline void write_grid_header(std::ostream& os, const GridField& g) {
  os.precision(17);
  os << g.nx << ' ' << g.ny << ' ' << g.channels << ' ' << g.box.lo.x() << ' ' << g.box.lo.y() << ' ' << g.box.hi.x()
     << ' ' << g.box.hi.y() << '\n';
}

inline GridField read_grid_header(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("grid: missing header", 1);
  std::istringstream hs(line);
  GridField g;
  double x0, y0, x1, y1;
  if (!(hs >> g.nx >> g.ny >> g.channels >> x0 >> y0 >> x1 >> y1))
    throw ParseError("grid: header must be 'nx ny channels xmin ymin xmax ymax'", 1);
  std::string extra;
  if (hs >> extra) throw ParseError("grid: trailing header field '" + extra + "'", 1);
  if (g.nx <= 0 || g.ny <= 0 || g.channels <= 0) throw ParseError("grid: dimensions must be positive", 1);
  if (!(x1 > x0) || !(y1 > y0)) throw ParseError("grid: empty bounding box", 1);
  g.box.lo = {x0, y0};
  g.box.hi = {x1, y1};
  return g;
}

}  // namespace detail

// Text format: header line, then one grid row (nx * channels values) per line, 17 significant digits.
inline void write_grid_text(std::ostream& os, const GridField& g) {
  g.validate();
  detail::write_grid_header(os, g);
  const int row = g.nx * g.channels;
  for (int j = 0; j < g.ny; ++j) {
    for (int k = 0; k < row; ++k) {
      if (k) os << ' ';
      os << g.values[static_cast<std::size_t>(j) * row + k];
    }
    os << '\n';
  }
}

inline GridField read_grid_text(std::istream& is) {
  GridField g = detail::read_grid_header(is);
  const std::size_t expected = g.size() * g.channels;
  g.values.reserve(expected);
  std::string line, tok;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    while (ls >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') throw ParseError("grid: bad value '" + tok + "'", lineno);
      if (g.values.size() == expected) throw ParseError("grid: more values than the header declares", lineno);
      g.values.push_back(v);
    }
  }
  if (g.values.size() != expected)
    throw ParseError("grid: expected " + std::to_string(expected) + " values, found " + std::to_string(g.values.size()),
                     lineno);
  return g;
}

// Binary variant: the same text header line followed by little-endian float32 values.
inline void write_grid_binary(std::ostream& os, const GridField& g) {
  g.validate();
  detail::write_grid_header(os, g);
  for (double v : g.values) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    const char b[4] = {static_cast<char>(bits), static_cast<char>(bits >> 8), static_cast<char>(bits >> 16),
                       static_cast<char>(bits >> 24)};
    os.write(b, 4);
  }
}

inline GridField read_grid_binary(std::istream& is) {
  GridField g = detail::read_grid_header(is);
  const std::size_t expected = g.size() * g.channels;
  g.values.resize(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw ParseError("grid: binary payload shorter than header declares", 2);
    const std::uint32_t bits = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    float f;
    std::memcpy(&f, &bits, 4);
    g.values[i] = f;
  }
  if (is.peek() != std::char_traits<char>::eof()) throw ParseError("grid: binary payload longer than header declares", 2);
  return g;
}

// ".bin" selects the binary variant.
inline bool is_binary_grid_path(const std::filesystem::path& p) { return p.extension() == ".bin"; }

inline GridField load_grid(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw ConfigError("grid: cannot open " + p.string());
  return is_binary_grid_path(p) ? read_grid_binary(is) : read_grid_text(is);
}

inline void save_grid(const std::filesystem::path& p, const GridField& g) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("grid: cannot write " + p.string());
  if (is_binary_grid_path(p)) write_grid_binary(os, g);
  else write_grid_text(os, g);
}

}  // namespace dwos
