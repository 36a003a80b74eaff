#pragma once

// Command-line front end for the solver: single solves, reproduction sweeps
// and the exact-oracle cross-check. Everything writes to caller-provided
// streams so it can be driven from tests.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "emd/lattice.hpp"
#include "emd/pd_solver.hpp"

namespace emd::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kNumericalFailure = 2,
  kNotConverged = 3,
};

/// Parses argv-style arguments (args[0] is the program name) and runs.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

enum class TableId { T1, T2, T3, T4, T5 };

TableId parse_table(const std::string& text);

struct SweepRow {
  double parameter = 0.0;  // vertex count N, or epsilon for t5
  double seconds = 0.0;
  std::size_t iterations = 0;
  double relative_error = 0.0;
  bool failed = false;
};

struct SweepSection {
  std::string title;
  std::string parameter_name;
  Metric metric = Metric::L2;
  std::vector<SweepRow> rows;
};

struct TableOptions {
  std::optional<double> tol;  // overrides the per-table threshold
  unsigned threads = 1;
  std::size_t max_iters = 1000000;
};

/// Runs one reproduction sweep. Cells that fail are marked, not thrown.
std::vector<SweepSection> run_table(TableId id, const TableOptions& options);
void write_table(std::ostream& out, TableId id,
                 const std::vector<SweepSection>& sections);

struct OracleComparison {
  double exact = 0.0;
  double solver = 0.0;
  double gap = 0.0;  // relative; absolute when exact == 0
  std::size_t iterations = 0;
  bool converged = false;
};

/// L1 primal-dual (epsilon 1e-4, tol 1e-9) against the assignment oracle
/// with the Manhattan metric at vertex coordinates.
OracleComparison compare_with_oracle(const DensityField& p0,
                                     const DensityField& p1,
                                     std::int64_t denominator);

/// Distributes `denominator` unit masses uniformly at random over the
/// vertices.
DensityField random_rational_density(const LatticeGrid& grid,
                                     std::int64_t denominator,
                                     std::mt19937_64& rng);

inline constexpr std::size_t kOracleMaxGrid = 8;
inline constexpr std::int64_t kOracleMaxDenominator = 64;
inline constexpr double kOracleGapLimit = 0.01;

}  // namespace emd::cli
