#include "shapedos/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "shapedos/errors.hpp"

namespace shapedos {

std::int64_t Grid::index_of(std::span<const std::int32_t> k) const {
  if (static_cast<int>(k.size()) != dimension_) return -1;
  std::int64_t flat = 0;
  for (int a = 0; a < dimension_; ++a) {
    const std::int64_t off = k[a] - lattice_lo_[a];
    if (off < 0 || off >= lattice_extent_[a]) return -1;
    flat = flat * lattice_extent_[a] + off;
  }
  return dense_index_[flat];
}

Grid build_grid(const Domain& domain, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw PreconditionError("grid spacing must be positive");
  if (domain.inradius() > 0.0 && h > domain.inradius()) {
    throw PreconditionError("grid spacing " + std::to_string(h) + " exceeds the domain inradius " +
                            std::to_string(domain.inradius()));
  }
  const int d = domain.dimension();
  Grid g;
  g.dimension_ = d;
  g.spacing_ = h;
  g.lattice_lo_.assign(d, 0);
  g.lattice_extent_.assign(d, 0);

  std::vector<double> origin(d, 0.0);
  // Box offset a/h in spacing units, quantized so that it does not depend on
  // the rounding of a common scale factor.
  double unit_origin = 0.0;
  const bool is_box = domain.kind() == DomainKind::box;
  if (is_box) {
    // Classical interior-node rule; a ratio within 1e-9 of an integer counts
    // as landing on the boundary.
    const double a = domain.half_width();
    const double ratio = 2.0 * a / h;
    const double nearest = std::round(ratio);
    const long n = std::abs(ratio - nearest) <= 1e-9 * ratio ? static_cast<long>(nearest) - 1
                                                             : static_cast<long>(std::floor(ratio));
    if (n < 1) throw NumericalError("grid has no interior nodes");
    std::fill(g.lattice_lo_.begin(), g.lattice_lo_.end(), 1);
    std::fill(g.lattice_extent_.begin(), g.lattice_extent_.end(), static_cast<std::int32_t>(n));
    std::fill(origin.begin(), origin.end(), -a);
    unit_origin = -std::ldexp(std::round(std::ldexp(0.5 * ratio, 40)), -40);
  } else {
    const auto k = static_cast<std::int32_t>(std::ceil(domain.bounding_radius() / h)) + 1;
    std::fill(g.lattice_lo_.begin(), g.lattice_lo_.end(), -k - 1);
    std::fill(g.lattice_extent_.begin(), g.lattice_extent_.end(), 2 * k + 2);
  }

  std::size_t total = 1;
  for (auto e : g.lattice_extent_) total *= static_cast<std::size_t>(e);
  g.dense_index_.assign(total, -1);

  std::vector<std::int32_t> k(d);
  std::vector<double> x(d), u(d);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int a = d - 1; a >= 0; --a) {
      k[a] = g.lattice_lo_[a] + static_cast<std::int32_t>(rem % g.lattice_extent_[a]);
      rem /= g.lattice_extent_[a];
    }
    for (int a = 0; a < d; ++a) {
      u[a] = is_box ? unit_origin + k[a] : k[a] + 0.5;
      x[a] = is_box ? origin[a] + k[a] * h : h * (k[a] + 0.5);
    }
    if (!domain.contains(x)) continue;
    g.dense_index_[flat] = static_cast<std::int32_t>(g.lattice_.size() / d);
    g.lattice_.insert(g.lattice_.end(), k.begin(), k.end());
    g.coords_.insert(g.coords_.end(), x.begin(), x.end());
    g.units_.insert(g.units_.end(), u.begin(), u.end());
  }
  if (g.lattice_.empty()) throw NumericalError("grid has no interior nodes");

  const std::size_t n = g.size();
  g.neighbors_.assign(n * 2 * d, -1);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(g.lattice_.begin() + i * d, d, k.begin());
    for (int a = 0; a < d; ++a) {
      for (int s = 0; s < 2; ++s) {
        k[a] += s == 0 ? -1 : 1;
        g.neighbors_[i * 2 * d + 2 * a + s] = static_cast<std::int32_t>(g.index_of(k));
        k[a] -= s == 0 ? -1 : 1;
      }
    }
  }
  return g;
}

Hbar Hbar::from_value(double hbar) {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw PreconditionError("hbar must be positive");
  return Hbar(hbar, 1.0 / hbar);
}

Hbar Hbar::from_scale(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw PreconditionError("scale must be positive");
  return Hbar(1.0 / scale, scale);
}

DiscreteHamiltonian::DiscreteHamiltonian(std::shared_ptr<const Grid> grid,
                                         std::vector<double> potential_values, Hbar hbar,
                                         double potential_bound)
    : grid_(std::move(grid)),
      potential_(std::move(potential_values)),
      hbar_(hbar),
      coupling_(hbar.coupling(grid_->spacing())),
      bound_(potential_bound) {
  if (potential_.size() != grid_->size()) {
    throw PreconditionError("potential values do not match the grid size");
  }
  const double center = 2.0 * grid_->dimension() * coupling_;
  diagonal_.resize(potential_.size());
  min_potential_ = 0.0;
  for (std::size_t i = 0; i < potential_.size(); ++i) {
    diagonal_[i] = center + potential_[i];
    min_potential_ = std::min(min_potential_, potential_[i]);
  }
}

void DiscreteHamiltonian::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  const int faces = 2 * dimension();
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    for (int f = 0; f < faces; ++f) {
      const std::int32_t j = grid_->neighbor(i, f);
      if (j >= 0) off += x[j];
    }
    y[i] = diagonal_[i] * x[i] - coupling_ * off;
  }
}

Eigen::SparseMatrix<double> DiscreteHamiltonian::sparse() const {
  const std::size_t n = size();
  const int faces = 2 * dimension();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n * (faces + 1));
  for (std::size_t i = 0; i < n; ++i) {
    triplets.emplace_back(i, i, diagonal_[i]);
    for (int f = 0; f < faces; ++f) {
      const std::int32_t j = grid_->neighbor(i, f);
      if (j >= 0) triplets.emplace_back(i, j, -coupling_);
    }
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

Eigen::MatrixXd DiscreteHamiltonian::dense() const { return Eigen::MatrixXd(sparse()); }

void DiscreteHamiltonian::write_coordinate_list(std::ostream& out) const {
  const Eigen::SparseMatrix<double, Eigen::RowMajor> m = sparse();
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(m, r); it; ++it) {
      out << fmt::format("{} {} {:.17g}\n", it.row(), it.col(), it.value());
    }
  }
}

DiscreteHamiltonian assemble(std::shared_ptr<const Grid> grid, const Potential& potential,
                             Hbar hbar) {
  if (potential.kind() != PotentialKind::constant &&
      potential.dimension() != grid->dimension()) {
    throw PreconditionError("potential and grid dimensions differ");
  }
  std::vector<double> values(grid->size());
  // Degree-0 homogeneity: V(x) = V(x / h), so rescaled grids see identical values.
  const bool unit = potential.is_homogeneous();
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = potential(unit ? grid->unit_node(i) : grid->node(i));
  }
  const double bound = potential.bound();
  return DiscreteHamiltonian(std::move(grid), std::move(values), hbar, bound);
}

DiscreteHamiltonian assemble(const Grid& grid, const Potential& potential, Hbar hbar) {
  return assemble(std::make_shared<const Grid>(grid), potential, hbar);
}

RescaledPair rescaled_pair(const Domain& domain, const Potential& potential, double scale,
                           double spacing) {
  if (!potential.is_homogeneous()) {
    throw PreconditionError("rescaling identity requires a radially homogeneous potential");
  }
  if (!(scale > 0.0)) throw PreconditionError("scale R must be positive");
  auto small_grid = std::make_shared<const Grid>(build_grid(domain, spacing));
  auto large_grid = std::make_shared<const Grid>(build_grid(domain.scaled(scale), spacing * scale));
  if (small_grid->size() != large_grid->size()) {
    throw NumericalError("rescaled grids have different node counts");
  }
  std::vector<std::size_t> bijection(large_grid->size());
  for (std::size_t i = 0; i < bijection.size(); ++i) {
    const std::int64_t j = small_grid->index_of(large_grid->lattice(i));
    if (j < 0) throw NumericalError("rescaled grids have different lattices");
    bijection[i] = static_cast<std::size_t>(j);
  }
  DiscreteHamiltonian large = assemble(large_grid, potential, Hbar::from_value(1.0));
  DiscreteHamiltonian small = assemble(small_grid, potential, Hbar::from_scale(scale));
  return RescaledPair{std::move(large), std::move(small), std::move(bijection)};
}

PairDeviation compare_pair(const RescaledPair& pair) {
  PairDeviation dev;
  dev.same_pattern = pair.large.size() == pair.small.size();
  if (!dev.same_pattern) return dev;
  const int faces = 2 * pair.large.dimension();
  double worst = std::abs(pair.large.coupling() - pair.small.coupling());
  for (std::size_t i = 0; i < pair.large.size(); ++i) {
    const std::size_t j = pair.bijection[i];
    worst = std::max(worst, std::abs(pair.large.diagonal()[i] - pair.small.diagonal()[j]));
    for (int f = 0; f < faces; ++f) {
      const std::int32_t a = pair.large.grid().neighbor(i, f);
      const std::int32_t b = pair.small.grid().neighbor(j, f);
      const bool match = (a < 0 && b < 0) ||
                         (a >= 0 && b >= 0 && pair.bijection[a] == static_cast<std::size_t>(b));
      dev.same_pattern = dev.same_pattern && match;
    }
  }
  dev.max_entry_difference = worst;
  return dev;
}

}  // namespace shapedos
