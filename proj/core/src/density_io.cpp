#include "emd/density_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "emd/error.hpp"

namespace emd::io {

namespace {

// Reads the next whitespace-delimited token; empty at end of input.
std::string next_token(std::istream& in) {
  std::string token;
  in >> token;
  return token;
}

double parse_double(const std::string& token, const char* what) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (token.empty() || ec != std::errc() || ptr != last) {
    throw ParseError(std::string("expected a number for ") + what + ", got '" +
                     token + "'");
  }
  return value;
}

std::size_t parse_count(const std::string& token, const char* what) {
  std::size_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size() ||
      value == 0) {
    throw ParseError(std::string("expected a positive integer for ") + what +
                     ", got '" + token + "'");
  }
  return value;
}

void require_2d(const LatticeGrid& grid) {
  if (grid.dims() != 2) {
    throw ConfigurationError("text output supports 2D lattices only");
  }
}

void write_rows(std::ostream& out, const LatticeGrid& grid,
                std::span<const double> values) {
  const auto ny = grid.shape()[0];
  const auto nx = grid.shape()[1];
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      out << (ix ? " " : "") << format_double(values[iy * nx + ix]);
    }
    out << '\n';
  }
}

}  // namespace

std::string format_double(double x) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), x,
                                       std::chars_format::general, 12);
  return std::string(buffer, ptr);
}

DensityField read_density(std::istream& in) {
  const std::size_t nx = parse_count(next_token(in), "nx");
  const std::size_t ny = parse_count(next_token(in), "ny");
  const double xmin = parse_double(next_token(in), "xmin");
  const double xmax = parse_double(next_token(in), "xmax");
  const double ymin = parse_double(next_token(in), "ymin");
  const double ymax = parse_double(next_token(in), "ymax");
  if (!(xmax > xmin) || !(ymax > ymin)) {
    throw ParseError("bounding box is empty");
  }
  const double dx = (xmax - xmin) / static_cast<double>(nx);
  const double dy = (ymax - ymin) / static_cast<double>(ny);
  if (std::abs(dx - dy) > 1e-9) {
    throw ParseError("cells are not square: dx = " + format_double(dx) +
                     ", dy = " + format_double(dy));
  }

  std::vector<double> values;
  values.reserve(nx * ny);
  for (std::size_t k = 0; k < nx * ny; ++k) {
    const std::string token = next_token(in);
    if (token.empty()) {
      throw ParseError("expected " + std::to_string(nx * ny) +
                       " values, found " + std::to_string(k));
    }
    values.push_back(parse_double(token, "density value"));
  }
  if (!next_token(in).empty()) {
    throw ParseError("trailing data after " + std::to_string(nx * ny) +
                     " values");
  }
  return normalize(LatticeGrid::over_box({ny, nx}, {ymin, xmin}, dx),
                   std::move(values));
}

DensityField read_density_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  try {
    return read_density(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_density(std::ostream& out, const DensityField& p) {
  const auto& grid = p.grid();
  require_2d(grid);
  const double dx = grid.spacing();
  const double ymin = grid.origin()[0] - 0.5 * dx;
  const double xmin = grid.origin()[1] - 0.5 * dx;
  const auto ny = grid.shape()[0];
  const auto nx = grid.shape()[1];
  out << nx << ' ' << ny << ' ' << format_double(xmin) << ' '
      << format_double(xmin + static_cast<double>(nx) * dx) << ' '
      << format_double(ymin) << ' '
      << format_double(ymin + static_cast<double>(ny) * dx) << '\n';
  write_rows(out, grid, p.mass());
}

void write_residuals(std::ostream& out, const SolveReport& report) {
  for (const auto& sample : report.residual_history) {
    out << sample.iteration << ' ' << format_double(sample.residual) << '\n';
  }
}

void write_flux(std::ostream& out, const FluxField& m) {
  const auto& grid = m.grid();
  require_2d(grid);
  const auto nx = grid.shape()[1];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::size_t iy = i / nx;
    const std::size_t ix = i % nx;
    // Lattice axis 1 is x.
    out << ix << ' ' << iy << " 0 " << format_double(m.at(i, 1)) << '\n';
    out << ix << ' ' << iy << " 1 " << format_double(m.at(i, 0)) << '\n';
  }
}

void write_potential(std::ostream& out, const DualPotential& phi) {
  require_2d(phi.grid());
  write_rows(out, phi.grid(), phi.values());
}

}  // namespace emd::io
