#include "emd/examples.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "emd/error.hpp"

namespace emd::examples {

namespace {

// (x, y); lattice axis 0 is y and axis 1 is x.
using Point = std::array<double, 2>;

DensityField diracs(const LatticeGrid& grid,
                    std::initializer_list<Point> points) {
  std::vector<double> mass(grid.size(), 0.0);
  const double weight = 1.0 / static_cast<double>(points.size());
  for (const Point& p : points) {
    const std::array<double, 2> lattice_order{p[1], p[0]};
    mass[snap_to_vertex(grid, lattice_order)] += weight;
  }
  return DensityField(grid, std::move(mass));
}

// Exponentiates a log-density after subtracting its maximum, so that steep
// profiles (sigma = 1e-3) do not overflow.
template <typename LogDensity>
DensityField sampled(const LatticeGrid& grid, LogDensity&& log_density) {
  std::vector<double> logs(grid.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto c = grid.coordinate(i);
    logs[i] = log_density(c[1], c[0]);
    peak = std::max(peak, logs[i]);
  }
  for (double& l : logs) l = std::exp(l - peak);
  return normalize(grid, std::move(logs));
}

double ring_log_density(double x, double y, double sigma) {
  const double r2 = x * x + y * y;
  return (r2 - r2 * r2) / sigma;
}

double cross_log_density(double x, double y, double sigma) {
  return -(x * x + y * y - std::abs(x) - std::abs(y)) / sigma;
}

}  // namespace

std::string_view to_string(ExampleName name) {
  switch (name) {
    case ExampleName::DiracPair: return "dirac_pair";
    case ExampleName::DiracSplit2: return "dirac_split2";
    case ExampleName::DiracSplit4: return "dirac_split4";
    case ExampleName::DiracToRing: return "dirac_to_ring";
    case ExampleName::CrossToRing: return "cross_to_ring";
  }
  return "unknown";
}

ExampleName parse_example(std::string_view text) {
  for (ExampleName name : kAllExamples) {
    if (to_string(name) == text) return name;
  }
  throw ConfigurationError("unknown example '" + std::string(text) + "'");
}

double default_sigma(ExampleName name) {
  switch (name) {
    case ExampleName::DiracToRing: return 1e-3;
    case ExampleName::CrossToRing: return 0.2;
    default: return 1.0;
  }
}

void ExampleSpec::validate() const {
  if (grid.dims() != 2) throw ConfigurationError("examples need a 2D lattice");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigurationError("sigma must be positive");
  }
}

ExampleSpec make_spec(ExampleName name, std::size_t n) {
  return ExampleSpec{name, LatticeGrid::square(n), default_sigma(name)};
}

std::size_t snap_to_vertex(const LatticeGrid& grid,
                           std::span<const double> point) {
  if (point.size() != grid.dims()) {
    throw IncompatibleFields("point dimension does not match lattice");
  }
  std::vector<std::size_t> multi(grid.dims());
  for (std::size_t v = 0; v < grid.dims(); ++v) {
    const double t = (point[v] - grid.origin()[v]) / grid.spacing();
    // Round half down; the slack absorbs representation error in t.
    const double k = std::ceil(t - 0.5 - 1e-9);
    const double hi = static_cast<double>(grid.shape()[v] - 1);
    multi[v] = static_cast<std::size_t>(std::clamp(k, 0.0, hi));
  }
  return grid.linear_index(multi);
}

std::pair<DensityField, DensityField> generate(const ExampleSpec& spec) {
  spec.validate();
  const LatticeGrid& g = spec.grid;
  const double sigma = spec.sigma;
  switch (spec.name) {
    case ExampleName::DiracPair:
      return {diracs(g, {Point{0.0, 0.0}}), diracs(g, {Point{0.4, 0.4}})};
    case ExampleName::DiracSplit2:
      return {diracs(g, {Point{0.0, 0.0}}),
              diracs(g, {Point{0.4, 0.4}, Point{-0.4, -0.4}})};
    case ExampleName::DiracSplit4:
      return {diracs(g, {Point{0.0, 0.0}}),
              diracs(g, {Point{0.4, 0.4}, Point{0.4, -0.4}, Point{-0.4, 0.4},
                         Point{-0.4, -0.4}})};
    case ExampleName::DiracToRing:
      return {diracs(g, {Point{0.0, 0.0}}),
              sampled(g, [sigma](double x, double y) {
                return ring_log_density(x, y, sigma);
              })};
    case ExampleName::CrossToRing:
      return {sampled(g,
                      [sigma](double x, double y) {
                        return cross_log_density(x, y, sigma);
                      }),
              sampled(g, [sigma](double x, double y) {
                return ring_log_density(x, y, sigma);
              })};
  }
  throw ConfigurationError("unhandled example");
}

}  // namespace emd::examples
