#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "shapedos/geometry.hpp"
#include "shapedos/potential.hpp"

namespace shapedos {

/// Lattice nodes retained strictly inside a domain.
///
/// Boxes use the classical interior-node rule x = -a + k h, k = 1..n per axis.
/// Every other kind uses the half-offset lattice x = h (k + 1/2), so no node
/// sits on a ball's boundary sphere. Nodes are numbered 0..N-1 in
/// lexicographic lattice order (first axis slowest).
class Grid {
 public:
  int dimension() const noexcept { return dimension_; }
  double spacing() const noexcept { return spacing_; }
  std::size_t size() const noexcept { return lattice_.size() / dimension_; }

  std::span<const double> node(std::size_t i) const {
    return {coords_.data() + i * dimension_, static_cast<std::size_t>(dimension_)};
  }
  /// Node position in units of the spacing, x / h. Independent of a common
  /// rescaling of domain and spacing.
  std::span<const double> unit_node(std::size_t i) const {
    return {units_.data() + i * dimension_, static_cast<std::size_t>(dimension_)};
  }
  std::span<const std::int32_t> lattice(std::size_t i) const {
    return {lattice_.data() + i * dimension_, static_cast<std::size_t>(dimension_)};
  }
  /// Index of the lattice neighbor across face `2*axis + (0 for -, 1 for +)`,
  /// or -1 when that neighbor lies outside the domain.
  std::int32_t neighbor(std::size_t i, int face) const {
    return neighbors_[i * 2 * dimension_ + face];
  }
  /// Index of a lattice coordinate, or -1.
  std::int64_t index_of(std::span<const std::int32_t> k) const;

  friend Grid build_grid(const Domain& domain, double spacing);

 private:
  int dimension_ = 0;
  double spacing_ = 0.0;
  std::vector<double> coords_;
  std::vector<double> units_;
  std::vector<std::int32_t> lattice_;
  std::vector<std::int32_t> neighbors_;
  std::vector<std::int32_t> lattice_lo_;
  std::vector<std::int32_t> lattice_extent_;
  std::vector<std::int32_t> dense_index_;
};

/// Throws PreconditionError if `spacing` exceeds the domain's inradius and
/// NumericalError if no lattice point falls inside.
Grid build_grid(const Domain& domain, double spacing);

/// Semiclassical parameter. It keeps the inverse length scale R = 1/hbar
/// alongside hbar so that a grid on R*Omega with (hbar = 1, spacing h*R) and a
/// grid on Omega with (hbar = 1/R, spacing h) get bit-identical couplings.
class Hbar {
 public:
  static Hbar from_value(double hbar);
  static Hbar from_scale(double scale);

  double value() const noexcept { return value_; }
  double scale() const noexcept { return scale_; }
  /// hbar^2 / h^2, computed as (1 / (h * R))^2.
  double coupling(double spacing) const noexcept {
    const double q = 1.0 / (spacing * scale_);
    return q * q;
  }

 private:
  Hbar(double v, double s) : value_(v), scale_(s) {}
  double value_;
  double scale_;
};

/// H = hbar^2 (-Delta_h) + diag(V) on a grid with Dirichlet conditions
/// realized by dropping couplings to nodes outside the domain.
class DiscreteHamiltonian {
 public:
  DiscreteHamiltonian(std::shared_ptr<const Grid> grid, std::vector<double> potential_values,
                      Hbar hbar, double potential_bound);

  std::size_t size() const noexcept { return diagonal_.size(); }
  const Grid& grid() const noexcept { return *grid_; }
  int dimension() const noexcept { return grid_->dimension(); }
  double spacing() const noexcept { return grid_->spacing(); }
  const Hbar& hbar() const noexcept { return hbar_; }
  /// Off-diagonal entries are -coupling().
  double coupling() const noexcept { return coupling_; }
  const std::vector<double>& diagonal() const noexcept { return diagonal_; }
  const std::vector<double>& potential_values() const noexcept { return potential_; }
  double potential_bound() const noexcept { return bound_; }

  /// Gershgorin upper bound 4 d hbar^2 / h^2 + M.
  double lambda_max() const noexcept { return 4.0 * dimension() * coupling_ + bound_; }
  /// Lower end of the spectral enclosure: 0 for V >= 0, -M otherwise.
  double lambda_min_bound() const noexcept { return min_potential_ < 0.0 ? -bound_ : 0.0; }

  void apply(std::span<const double> x, std::span<double> y) const;

  Eigen::SparseMatrix<double> sparse() const;
  Eigen::MatrixXd dense() const;

  /// Coordinate-list dump: "row col value" per line, sorted by (row, col),
  /// values with 17 significant digits.
  void write_coordinate_list(std::ostream& out) const;

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<double> potential_;
  std::vector<double> diagonal_;
  Hbar hbar_;
  double coupling_;
  double bound_;
  double min_potential_;
};

DiscreteHamiltonian assemble(std::shared_ptr<const Grid> grid, const Potential& potential,
                             Hbar hbar);
DiscreteHamiltonian assemble(const Grid& grid, const Potential& potential, Hbar hbar);

/// The two operators related by the unitary dilation x -> R x: `large` lives
/// on R*Omega with hbar = 1 and spacing h*R, `small` on Omega with hbar = 1/R
/// and spacing h. Node i of `large` corresponds to node bijection[i] of `small`.
struct RescaledPair {
  DiscreteHamiltonian large;
  DiscreteHamiltonian small;
  std::vector<std::size_t> bijection;
};

/// Rejects non-homogeneous potentials, for which the identity fails.
RescaledPair rescaled_pair(const Domain& domain, const Potential& potential, double scale,
                           double spacing);

struct PairDeviation {
  bool same_pattern = false;
  double max_entry_difference = 0.0;
};

/// Entrywise comparison of the pair under its bijection.
PairDeviation compare_pair(const RescaledPair& pair);

}  // namespace shapedos
