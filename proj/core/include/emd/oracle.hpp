#pragma once

// Exact Kantorovich EMD for small measures with rational masses.
//
// Each measure is split into K unit atoms of mass 1/K. With uniform masses
// some optimal transport plan is a permutation, so the problem reduces to a
// K x K linear assignment, solved exactly by the Hungarian method.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "emd/lattice.hpp"
#include "emd/pd_solver.hpp"

namespace emd {

struct Atom {
  std::vector<double> position;
  std::int64_t units = 0;  // mass = units / denominator
};

class AtomicMeasure {
 public:
  /// Merges atoms at identical positions. Throws InvalidMeasure unless the
  /// units are positive and sum exactly to `denominator`.
  AtomicMeasure(std::vector<Atom> atoms, std::int64_t denominator);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::int64_t denominator() const noexcept { return denominator_; }
  std::size_t dims() const noexcept { return dims_; }

 private:
  std::vector<Atom> atoms_;
  std::int64_t denominator_;
  std::size_t dims_;
};

/// Largest total unit count exact_emd accepts.
inline constexpr std::int64_t kMaxOracleUnits = 256;

double ground_distance(std::span<const double> x, std::span<const double> y,
                       Metric metric);

/// Minimum-cost square assignment. Returns the total cost; `assignment[r]`
/// receives the column matched to row r. `cost` is row-major n x n.
double solve_assignment(std::span<const double> cost, std::size_t n,
                        std::vector<std::size_t>& assignment);

double exact_emd(const AtomicMeasure& mu0, const AtomicMeasure& mu1,
                 Metric metric);

/// One atom per vertex with positive mass, at the vertex coordinate.
/// Throws RationalityError if some p_i * denominator is not an integer
/// within 1e-9.
AtomicMeasure measure_from_density(const DensityField& p,
                                   std::int64_t denominator);

}  // namespace emd
