#pragma once

// Named benchmark density pairs on a 2D lattice.
//
//   dirac_pair     delta(0,0)                -> delta(0.4,0.4)
//   dirac_split2   delta(0,0)                -> (delta(.4,.4) + delta(-.4,-.4))/2
//   dirac_split4   delta(0,0)                -> quarter mass at (+-0.4, +-0.4)
//   dirac_to_ring  delta(0,0)                -> exp((r^2 - r^4)/sigma)/K
//   cross_to_ring  exp(-(r^2-|x|-|y|)/sigma) -> exp((r^2 - r^4)/sigma)/K
//
// Diracs are placed at the nearest vertex, ties going to the smaller
// coordinate. Smooth densities are sampled at vertices and normalized.
// Lattice axis 0 is y and axis 1 is x (rows of constant y, x fastest).

#include <array>
#include <string>
#include <string_view>
#include <utility>

#include "emd/lattice.hpp"

namespace emd::examples {

enum class ExampleName {
  DiracPair,
  DiracSplit2,
  DiracSplit4,
  DiracToRing,
  CrossToRing,
};

inline constexpr std::array<ExampleName, 5> kAllExamples = {
    ExampleName::DiracPair, ExampleName::DiracSplit2,
    ExampleName::DiracSplit4, ExampleName::DiracToRing,
    ExampleName::CrossToRing};

std::string_view to_string(ExampleName name);
/// Throws ConfigurationError for unknown names.
ExampleName parse_example(std::string_view text);

/// 1e-3 for dirac_to_ring, 0.2 for cross_to_ring, 1 (unused) otherwise.
double default_sigma(ExampleName name);

struct ExampleSpec {
  ExampleName name = ExampleName::DiracPair;
  LatticeGrid grid = LatticeGrid::square(40);
  double sigma = 1.0;

  void validate() const;
};

ExampleSpec make_spec(ExampleName name, std::size_t n);

/// Vertex nearest to `point` (given in lattice axis order), ties toward
/// negative coordinates. Points outside the lattice clamp to the edge.
std::size_t snap_to_vertex(const LatticeGrid& grid, std::span<const double> point);

std::pair<DensityField, DensityField> generate(const ExampleSpec& spec);

}  // namespace emd::examples
