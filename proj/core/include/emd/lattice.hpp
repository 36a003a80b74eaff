#pragma once

// Uniform lattice, discrete measures and staggered fluxes.
//
// Vertices are cell centered: vertex with multi-index (k_1..k_d) sits at
// origin + k*spacing. Linear indices are row-major (last axis fastest).
// A flux field stores one scalar per (vertex, axis) pair, interleaved as
// values[i*d + v]; entry (i, v) lives on the face between vertex i and its
// forward neighbour along v and holds the face-integrated flux. Faces on
// the far boundary are pinned to zero (no flux leaves the domain).

#include <cstddef>
#include <span>
#include <vector>

namespace emd {

class LatticeGrid {
 public:
  LatticeGrid(std::vector<std::size_t> shape, double spacing,
              std::vector<double> origin);

  /// n by n lattice covering [lo, hi]^2 with cell-centered vertices.
  static LatticeGrid square(std::size_t n, double lo = -2.0, double hi = 2.0);

  /// Lattice whose cells tile the box [lower, lower + shape*spacing].
  static LatticeGrid over_box(std::vector<std::size_t> shape,
                              const std::vector<double>& lower,
                              double spacing);

  std::size_t dims() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return size_; }
  double spacing() const noexcept { return spacing_; }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  const std::vector<double>& origin() const noexcept { return origin_; }

  /// Linear-index distance between neighbours along `axis`.
  std::size_t stride(std::size_t axis) const { return strides_.at(axis); }

  std::size_t linear_index(std::span<const std::size_t> multi) const;
  std::vector<std::size_t> multi_index(std::size_t linear) const;
  std::vector<double> coordinate(std::size_t linear) const;

  /// Index of the vertex along `axis` for linear index `linear`.
  std::size_t axis_index(std::size_t linear, std::size_t axis) const {
    return (linear / strides_[axis]) % shape_[axis];
  }
  bool is_last_along(std::size_t linear, std::size_t axis) const {
    return axis_index(linear, axis) + 1 == shape_[axis];
  }
  bool is_first_along(std::size_t linear, std::size_t axis) const {
    return axis_index(linear, axis) == 0;
  }

  /// Per (vertex, axis) flag: 1 when the face has a neighbour on the far
  /// side, 0 when it sits on the boundary. Same layout as FluxField.
  std::vector<unsigned char> interior_face_mask() const;

  bool operator==(const LatticeGrid& other) const = default;

 private:
  std::vector<std::size_t> shape_;
  double spacing_;
  std::vector<double> origin_;
  std::vector<std::size_t> strides_;
  std::size_t size_;
};

class DensityField {
 public:
  /// Takes masses as given; they must be nonnegative and finite but need
  /// not sum to one (see normalize()).
  DensityField(LatticeGrid grid, std::vector<double> mass);

  const LatticeGrid& grid() const noexcept { return grid_; }
  std::span<const double> mass() const noexcept { return mass_; }
  double operator[](std::size_t i) const { return mass_[i]; }
  std::size_t size() const noexcept { return mass_.size(); }
  double total() const;

 private:
  LatticeGrid grid_;
  std::vector<double> mass_;
};

class FluxField {
 public:
  /// All-zero flux.
  explicit FluxField(LatticeGrid grid);
  /// Throws std::invalid_argument if any boundary face is nonzero.
  FluxField(LatticeGrid grid, std::vector<double> values);

  const LatticeGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }

  double at(std::size_t vertex, std::size_t axis) const {
    return values_[vertex * grid_.dims() + axis];
  }
  /// Throws std::invalid_argument when writing a nonzero boundary face.
  void set(std::size_t vertex, std::size_t axis, double value);

 private:
  LatticeGrid grid_;
  std::vector<double> values_;
};

class DualPotential {
 public:
  explicit DualPotential(LatticeGrid grid);
  /// Throws std::invalid_argument on non-finite entries.
  DualPotential(LatticeGrid grid, std::vector<double> values);

  const LatticeGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  LatticeGrid grid_;
  std::vector<double> values_;
};

/// div(m)_i = (1/dx) * sum_v (m_{i,v} - m_{i-e_v,v}); missing faces count 0.
std::vector<double> divergence(const FluxField& m);

/// Forward difference (phi_{i+e_v} - phi_i)/dx per face; 0 on boundary
/// faces. Returned in FluxField layout (i*d + v).
std::vector<double> gradient(const DualPotential& phi);

/// Mean absolute violation of div(m) + p1 - p0 = 0.
double total_divergence_residual(const FluxField& m, const DensityField& p0,
                                 const DensityField& p1);

/// Rescales nonnegative masses to sum to one. Throws InvalidMeasure on
/// negative, non-finite or all-zero input.
DensityField normalize(const LatticeGrid& grid, std::vector<double> raw);

namespace detail {

// Span kernels shared by the public operators and the solver loop. Output
// spans must not alias the inputs.
// The ranged overloads touch only vertices [begin, end): out[i] for the
// divergence, out[i*d + v] for the gradient.
void divergence_into(const LatticeGrid& grid, std::span<const double> flux,
                     std::span<double> out, std::size_t begin,
                     std::size_t end);
void gradient_into(const LatticeGrid& grid, std::span<const double> phi,
                   std::span<double> out, std::size_t begin, std::size_t end);

inline void divergence_into(const LatticeGrid& grid,
                            std::span<const double> flux,
                            std::span<double> out) {
  divergence_into(grid, flux, out, 0, grid.size());
}
inline void gradient_into(const LatticeGrid& grid, std::span<const double> phi,
                          std::span<double> out) {
  gradient_into(grid, phi, out, 0, grid.size());
}

}  // namespace detail

}  // namespace emd
