#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace shapedos {

enum class DomainKind { box, ball, star_polygon, mask };

std::string to_string(DomainKind kind);

using Vertex2 = std::array<double, 2>;
using MaskPredicate = std::function<bool(std::span<const double>)>;

/// A bounded open set containing the origin.
///
/// Boxes are the cubes [-a, a]^d, balls are centered at the origin, star
/// polygons are planar polygons whose boundary is crossed exactly once by every
/// ray from the origin, and mask domains are defined by a membership predicate
/// inside a bounding ball. Values are immutable once constructed.
class Domain {
 public:
  static Domain box(int dimension, double half_width);
  static Domain ball(int dimension, double radius);
  static Domain star_polygon(std::vector<Vertex2> vertices);
  /// `predicate` must be true at the origin and false outside the ball of
  /// radius `bounding_radius`.
  static Domain mask(int dimension, MaskPredicate predicate,
                     double bounding_radius, std::string name);

  DomainKind kind() const noexcept { return kind_; }
  int dimension() const noexcept { return dimension_; }

  double half_width() const;
  double radius() const;
  const std::vector<Vertex2>& vertices() const;
  const std::string& name() const noexcept { return name_; }

  /// Radius of a ball centered at 0 that contains the domain.
  double bounding_radius() const noexcept { return bounding_radius_; }
  /// Radius of a ball centered at 0 contained in the domain (0 if unknown).
  double inradius() const noexcept { return inradius_; }

  bool contains(std::span<const double> point) const;

  /// Lebesgue measure. Exact for box, ball and polygon; a lattice count for
  /// mask domains (see volume_is_exact / mask_volume_spacing).
  double volume() const;
  bool volume_is_exact() const noexcept { return kind_ != DomainKind::mask; }
  /// Lattice spacing used for the mask counting estimate.
  double mask_volume_spacing() const;

  /// (d-1)-dimensional measure of the boundary; throws for mask domains.
  double boundary_measure() const;

  Domain scaled(double factor) const;

  /// Canonical description used for reports and cache keys.
  nlohmann::json descriptor() const;

 private:
  Domain() = default;

  DomainKind kind_ = DomainKind::box;
  int dimension_ = 0;
  double size_ = 0.0;  // half-width or radius
  std::vector<Vertex2> vertices_;
  MaskPredicate predicate_;
  double mask_scale_ = 1.0;
  double bounding_radius_ = 0.0;
  double inradius_ = 0.0;
  std::string name_;
  double mask_volume_ = 0.0;
};

bool contains(const Domain& domain, std::span<const double> point);
double volume(const Domain& domain);
Domain scale(const Domain& domain, double factor);

/// Surface quadrature over the boundary: node coordinates, outward unit
/// normals and surface weights, stored row-major with stride `dimension`.
struct BoundaryQuadrature {
  int dimension = 0;
  std::vector<double> points;
  std::vector<double> normals;
  std::vector<double> weights;

  std::size_t size() const noexcept { return weights.size(); }
  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * dimension, static_cast<std::size_t>(dimension)};
  }
  std::span<const double> normal(std::size_t i) const {
    return {normals.data() + i * dimension, static_cast<std::size_t>(dimension)};
  }
  double total_weight() const;
  /// sigma . n(sigma) at node i.
  double support(std::size_t i) const;
};

/// Boundary rule for box, ball and star-polygon domains.
///
/// Box faces and polygon edges use composite midpoint panels (`resolution`
/// panels per edge, resolution^2 per 3-D face). Circles use `resolution`
/// equal-angle nodes; spheres use a Gauss-Legendre(cos theta) x equal-angle
/// product with `resolution` longitudes and resolution/2 latitudes.
BoundaryQuadrature boundary_quadrature(const Domain& domain, int resolution);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace shapedos
