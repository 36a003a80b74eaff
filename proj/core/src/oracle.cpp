#include "emd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

#include "emd/error.hpp"

namespace emd {

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms, std::int64_t denominator)
    : denominator_(denominator), dims_(0) {
  if (denominator <= 0) throw InvalidMeasure("denominator must be positive");
  if (atoms.empty()) throw InvalidMeasure("measure has no atoms");
  dims_ = atoms.front().position.size();

  std::map<std::vector<double>, std::int64_t> merged;
  std::int64_t total = 0;
  for (auto& atom : atoms) {
    if (atom.position.size() != dims_) {
      throw InvalidMeasure("atoms have mixed dimensions");
    }
    for (double x : atom.position) {
      if (!std::isfinite(x)) throw InvalidMeasure("atom position not finite");
    }
    if (atom.units <= 0) throw InvalidMeasure("atom mass must be positive");
    total += atom.units;
    merged[std::move(atom.position)] += atom.units;
  }
  if (total != denominator) {
    throw InvalidMeasure("atom units sum to " + std::to_string(total) +
                         ", expected " + std::to_string(denominator));
  }
  atoms_.reserve(merged.size());
  for (auto& [position, units] : merged) {
    atoms_.push_back({position, units});
  }
}

double ground_distance(std::span<const double> x, std::span<const double> y,
                       Metric metric) {
  if (x.size() != y.size()) {
    throw IncompatibleFields("ground_distance: dimension mismatch");
  }
  double acc = 0.0;
  for (std::size_t v = 0; v < x.size(); ++v) {
    const double delta = x[v] - y[v];
    acc += metric == Metric::L1 ? std::abs(delta) : delta * delta;
  }
  return metric == Metric::L1 ? acc : std::sqrt(acc);
}

// Shortest augmenting path variant of the Hungarian method with row and
// column potentials, O(n^3).
double solve_assignment(std::span<const double> cost, std::size_t n,
                        std::vector<std::size_t>& assignment) {
  if (cost.size() != n * n) {
    throw std::invalid_argument("assignment cost matrix must be n x n");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  // 1-based columns; column 0 is a virtual start node.
  std::vector<double> row_pot(n + 1, 0.0), col_pot(n + 1, 0.0);
  std::vector<std::size_t> row_of_col(n + 1, kNone), way(n + 1, 0);

  for (std::size_t row = 0; row < n; ++row) {
    row_of_col[0] = row;
    std::size_t col0 = 0;
    std::vector<double> min_slack(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const std::size_t r = row_of_col[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double slack = cost[r * n + (c - 1)] - row_pot[r + 1] - col_pot[c];
        if (slack < min_slack[c]) {
          min_slack[c] = slack;
          way[c] = col0;
        }
        if (min_slack[c] < delta) {
          delta = min_slack[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          row_pot[row_of_col[c] + 1] += delta;
          col_pot[c] -= delta;
        } else {
          min_slack[c] -= delta;
        }
      }
      col0 = col1;
    } while (row_of_col[col0] != kNone);
    do {
      const std::size_t col1 = way[col0];
      row_of_col[col0] = row_of_col[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  assignment.assign(n, 0);
  double total = 0.0;
  for (std::size_t c = 1; c <= n; ++c) {
    assignment[row_of_col[c]] = c - 1;
  }
  for (std::size_t r = 0; r < n; ++r) total += cost[r * n + assignment[r]];
  return total;
}

double exact_emd(const AtomicMeasure& mu0, const AtomicMeasure& mu1,
                 Metric metric) {
  if (mu0.denominator() != mu1.denominator()) {
    throw InvalidMeasure("exact_emd: measures have different denominators (" +
                         std::to_string(mu0.denominator()) + " vs " +
                         std::to_string(mu1.denominator()) + ")");
  }
  if (mu0.dims() != mu1.dims()) {
    throw IncompatibleFields("exact_emd: dimension mismatch");
  }
  const std::int64_t k = mu0.denominator();
  if (k > kMaxOracleUnits) {
    throw ConfigurationError("exact_emd: " + std::to_string(k) +
                             " unit atoms exceed the limit of " +
                             std::to_string(kMaxOracleUnits));
  }

  auto expand = [](const AtomicMeasure& mu) {
    std::vector<const std::vector<double>*> units;
    for (const auto& atom : mu.atoms()) {
      for (std::int64_t u = 0; u < atom.units; ++u) {
        units.push_back(&atom.position);
      }
    }
    return units;
  };
  const auto from = expand(mu0);
  const auto to = expand(mu1);
  const auto n = static_cast<std::size_t>(k);

  std::vector<double> cost(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      cost[r * n + c] = ground_distance(*from[r], *to[c], metric);
    }
  }
  std::vector<std::size_t> assignment;
  return solve_assignment(cost, n, assignment) / static_cast<double>(k);
}

AtomicMeasure measure_from_density(const DensityField& p,
                                   std::int64_t denominator) {
  if (denominator <= 0) throw InvalidMeasure("denominator must be positive");
  std::vector<Atom> atoms;
  const double scale = static_cast<double>(denominator);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double scaled = p[i] * scale;
    const double rounded = std::round(scaled);
    if (std::abs(scaled - rounded) > 1e-9) {
      throw RationalityError("density entry " + std::to_string(i) +
                             " is not a multiple of 1/" +
                             std::to_string(denominator));
    }
    if (rounded > 0.0) {
      atoms.push_back({p.grid().coordinate(i),
                       static_cast<std::int64_t>(rounded)});
    }
  }
  return AtomicMeasure(std::move(atoms), denominator);
}

}  // namespace emd
