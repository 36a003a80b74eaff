#pragma once

// Plain-text density files:
//
//   nx ny xmin xmax ymin ymax
//   v_0 v_1 ... v_{nx*ny-1}
//
// Values are whitespace separated and row-major: ny rows of nx values, x
// varying fastest. On the lattice, axis 0 is y and axis 1 is x, so value k
// is vertex k. Cells must be square.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "emd/lattice.hpp"
#include "emd/pd_solver.hpp"

namespace emd::io {

/// Parses and normalizes a density. Throws ParseError or InvalidMeasure.
DensityField read_density(std::istream& in);
DensityField read_density_file(const std::filesystem::path& path);

void write_density(std::ostream& out, const DensityField& p);

/// 12 significant digits in %g style, independent of the global locale.
std::string format_double(double x);

/// "iteration residual" per line.
void write_residuals(std::ostream& out, const SolveReport& report);
/// "ix iy axis value" per face (2D lattices); axis 0 is the x face, axis 1
/// the y face.
void write_flux(std::ostream& out, const FluxField& m);
/// ny lines of nx values, same layout as density files.
void write_potential(std::ostream& out, const DualPotential& phi);

}  // namespace emd::io
