#include "emd/lattice.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "emd/error.hpp"

namespace emd {

namespace {

void require_same_grid(const LatticeGrid& a, const LatticeGrid& b,
                       const char* what) {
  if (!(a == b)) {
    throw IncompatibleFields(std::string(what) +
                             ": fields live on different lattices");
  }
}

// Odometer over multi-indices, starting at a given linear index. Avoids a
// div/mod per axis in the inner loops.
class MultiIndexCursor {
 public:
  MultiIndexCursor(const LatticeGrid& grid, std::size_t start)
      : shape_(grid.shape()), index_(grid.multi_index(start)) {}

  std::size_t operator[](std::size_t axis) const { return index_[axis]; }

  void advance() {
    for (std::size_t v = index_.size(); v-- > 0;) {
      if (++index_[v] < shape_[v]) return;
      index_[v] = 0;
    }
  }

 private:
  const std::vector<std::size_t>& shape_;
  std::vector<std::size_t> index_;
};

}  // namespace

LatticeGrid::LatticeGrid(std::vector<std::size_t> shape, double spacing,
                         std::vector<double> origin)
    : shape_(std::move(shape)),
      spacing_(spacing),
      origin_(std::move(origin)),
      strides_(shape_.size()),
      size_(0) {
  if (shape_.empty()) {
    throw ConfigurationError("lattice must have at least one axis");
  }
  if (origin_.size() != shape_.size()) {
    throw ConfigurationError("lattice origin has " +
                             std::to_string(origin_.size()) +
                             " coordinates, expected " +
                             std::to_string(shape_.size()));
  }
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) {
    throw ConfigurationError("lattice spacing must be positive and finite");
  }
  for (std::size_t n : shape_) {
    if (n == 0) throw ConfigurationError("lattice shape entries must be >= 1");
  }
  for (double o : origin_) {
    if (!std::isfinite(o)) throw ConfigurationError("lattice origin not finite");
  }
  std::size_t stride = 1;
  for (std::size_t v = shape_.size(); v-- > 0;) {
    strides_[v] = stride;
    stride *= shape_[v];
  }
  size_ = stride;
}

LatticeGrid LatticeGrid::square(std::size_t n, double lo, double hi) {
  if (n == 0) throw ConfigurationError("lattice shape entries must be >= 1");
  if (!(hi > lo)) throw ConfigurationError("empty box");
  const double dx = (hi - lo) / static_cast<double>(n);
  return LatticeGrid({n, n}, dx, {lo + 0.5 * dx, lo + 0.5 * dx});
}

LatticeGrid LatticeGrid::over_box(std::vector<std::size_t> shape,
                                  const std::vector<double>& lower,
                                  double spacing) {
  std::vector<double> origin(lower.size());
  for (std::size_t v = 0; v < lower.size(); ++v) {
    origin[v] = lower[v] + 0.5 * spacing;
  }
  return LatticeGrid(std::move(shape), spacing, std::move(origin));
}

std::size_t LatticeGrid::linear_index(
    std::span<const std::size_t> multi) const {
  if (multi.size() != dims()) {
    throw std::invalid_argument("multi-index has wrong dimension");
  }
  std::size_t linear = 0;
  for (std::size_t v = 0; v < dims(); ++v) {
    if (multi[v] >= shape_[v]) {
      throw std::out_of_range("multi-index outside lattice");
    }
    linear += multi[v] * strides_[v];
  }
  return linear;
}

std::vector<std::size_t> LatticeGrid::multi_index(std::size_t linear) const {
  if (linear >= size_) throw std::out_of_range("linear index outside lattice");
  std::vector<std::size_t> multi(dims());
  for (std::size_t v = 0; v < dims(); ++v) {
    multi[v] = (linear / strides_[v]) % shape_[v];
  }
  return multi;
}

std::vector<double> LatticeGrid::coordinate(std::size_t linear) const {
  if (linear >= size_) throw std::out_of_range("linear index outside lattice");
  std::vector<double> x(dims());
  for (std::size_t v = 0; v < dims(); ++v) {
    x[v] = origin_[v] +
           static_cast<double>(axis_index(linear, v)) * spacing_;
  }
  return x;
}

std::vector<unsigned char> LatticeGrid::interior_face_mask() const {
  const std::size_t d = dims();
  std::vector<unsigned char> mask(size_ * d);
  MultiIndexCursor cursor(*this, 0);
  for (std::size_t i = 0; i < size_; ++i, cursor.advance()) {
    for (std::size_t v = 0; v < d; ++v) {
      mask[i * d + v] = cursor[v] + 1 < shape_[v] ? 1 : 0;
    }
  }
  return mask;
}

DensityField::DensityField(LatticeGrid grid, std::vector<double> mass)
    : grid_(std::move(grid)), mass_(std::move(mass)) {
  if (mass_.size() != grid_.size()) {
    throw IncompatibleFields("density has " + std::to_string(mass_.size()) +
                             " entries, lattice has " +
                             std::to_string(grid_.size()) + " vertices");
  }
  for (double p : mass_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw InvalidMeasure("density entries must be finite and nonnegative");
    }
  }
}

double DensityField::total() const {
  return std::accumulate(mass_.begin(), mass_.end(), 0.0);
}

FluxField::FluxField(LatticeGrid grid)
    : grid_(std::move(grid)), values_(grid_.size() * grid_.dims(), 0.0) {}

FluxField::FluxField(LatticeGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  const std::size_t d = grid_.dims();
  if (values_.size() != grid_.size() * d) {
    throw IncompatibleFields("flux has " + std::to_string(values_.size()) +
                             " entries, expected " +
                             std::to_string(grid_.size() * d));
  }
  const auto mask = grid_.interior_face_mask();
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!mask[k] && values_[k] != 0.0) {
      throw std::invalid_argument("flux through a boundary face must be 0");
    }
  }
}

void FluxField::set(std::size_t vertex, std::size_t axis, double value) {
  if (vertex >= grid_.size() || axis >= grid_.dims()) {
    throw std::out_of_range("flux index outside lattice");
  }
  if (grid_.is_last_along(vertex, axis) && value != 0.0) {
    throw std::invalid_argument("flux through a boundary face must be 0");
  }
  values_[vertex * grid_.dims() + axis] = value;
}

DualPotential::DualPotential(LatticeGrid grid)
    : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

DualPotential::DualPotential(LatticeGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw IncompatibleFields("potential has " +
                             std::to_string(values_.size()) +
                             " entries, lattice has " +
                             std::to_string(grid_.size()) + " vertices");
  }
  for (double x : values_) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("potential entries must be finite");
    }
  }
}

namespace detail {

void divergence_into(const LatticeGrid& grid, std::span<const double> flux,
                     std::span<double> out, std::size_t begin,
                     std::size_t end) {
  const std::size_t d = grid.dims();
  const double inv_dx = 1.0 / grid.spacing();
  if (begin >= end) return;
  MultiIndexCursor cursor(grid, begin);
  for (std::size_t i = begin; i < end; ++i, cursor.advance()) {
    double acc = 0.0;
    for (std::size_t v = 0; v < d; ++v) {
      acc += flux[i * d + v];
      if (cursor[v] > 0) acc -= flux[(i - grid.stride(v)) * d + v];
    }
    out[i] = acc * inv_dx;
  }
}

void gradient_into(const LatticeGrid& grid, std::span<const double> phi,
                   std::span<double> out, std::size_t begin, std::size_t end) {
  const std::size_t d = grid.dims();
  const double inv_dx = 1.0 / grid.spacing();
  const auto& shape = grid.shape();
  if (begin >= end) return;
  MultiIndexCursor cursor(grid, begin);
  for (std::size_t i = begin; i < end; ++i, cursor.advance()) {
    for (std::size_t v = 0; v < d; ++v) {
      out[i * d + v] = cursor[v] + 1 < shape[v]
                           ? (phi[i + grid.stride(v)] - phi[i]) * inv_dx
                           : 0.0;
    }
  }
}

}  // namespace detail

std::vector<double> divergence(const FluxField& m) {
  std::vector<double> out(m.grid().size());
  detail::divergence_into(m.grid(), m.values(), out);
  return out;
}

std::vector<double> gradient(const DualPotential& phi) {
  std::vector<double> out(phi.grid().size() * phi.grid().dims());
  detail::gradient_into(phi.grid(), phi.values(), out);
  return out;
}

double total_divergence_residual(const FluxField& m, const DensityField& p0,
                                 const DensityField& p1) {
  require_same_grid(m.grid(), p0.grid(), "total_divergence_residual");
  require_same_grid(m.grid(), p1.grid(), "total_divergence_residual");
  const auto div = divergence(m);
  double sum = 0.0;
  for (std::size_t i = 0; i < div.size(); ++i) {
    sum += std::abs(div[i] + p1[i] - p0[i]);
  }
  return sum / static_cast<double>(div.size());
}

DensityField normalize(const LatticeGrid& grid, std::vector<double> raw) {
  double total = 0.0;
  for (double p : raw) {
    if (!std::isfinite(p) || p < 0.0) {
      throw InvalidMeasure("cannot normalize: negative or non-finite mass");
    }
    total += p;
  }
  if (!(total > 0.0)) {
    throw InvalidMeasure("cannot normalize: total mass is zero");
  }
  for (double& p : raw) p /= total;
  return DensityField(grid, std::move(raw));
}

}  // namespace emd
