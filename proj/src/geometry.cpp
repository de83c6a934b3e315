#include "shapedos/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "shapedos/errors.hpp"

namespace shapedos {
namespace {

constexpr double kPi = std::numbers::pi;

void check_dimension(int dimension) {
  if (dimension < 1) {
    throw PreconditionError("domain dimension must be >= 1, got " + std::to_string(dimension));
  }
}

double cross(const Vertex2& a, const Vertex2& b) { return a[0] * b[1] - a[1] * b[0]; }

double unit_ball_volume(int d) {
  return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

}  // namespace

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::box:
      return "box";
    case DomainKind::ball:
      return "ball";
    case DomainKind::star_polygon:
      return "star-polygon";
    case DomainKind::mask:
      return "mask";
  }
  return "unknown";
}

Domain Domain::box(int dimension, double half_width) {
  check_dimension(dimension);
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw PreconditionError("box half-width must be positive and finite");
  }
  Domain d;
  d.kind_ = DomainKind::box;
  d.dimension_ = dimension;
  d.size_ = half_width;
  d.bounding_radius_ = half_width * std::sqrt(static_cast<double>(dimension));
  d.inradius_ = half_width;
  d.name_ = "box";
  return d;
}

Domain Domain::ball(int dimension, double radius) {
  check_dimension(dimension);
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw PreconditionError("ball radius must be positive and finite");
  }
  Domain d;
  d.kind_ = DomainKind::ball;
  d.dimension_ = dimension;
  d.size_ = radius;
  d.bounding_radius_ = radius;
  d.inradius_ = radius;
  d.name_ = "ball";
  return d;
}

Domain Domain::star_polygon(std::vector<Vertex2> vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) throw PreconditionError("star polygon needs at least 3 vertices");
  double signed_area = 0.0;
  for (std::size_t i = 0; i < n; ++i) signed_area += cross(vertices[i], vertices[(i + 1) % n]);
  if (signed_area < 0.0) std::reverse(vertices.begin(), vertices.end());

  // Star-shaped about 0 (each ray crosses once): every fan triangle
  // (0, v_i, v_{i+1}) is positively oriented and the angles wind exactly once.
  double winding = 0.0;
  double inradius = std::numeric_limits<double>::infinity();
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex2& a = vertices[i];
    const Vertex2& b = vertices[(i + 1) % n];
    const double c = cross(a, b);
    if (!(c > 0.0)) {
      throw PreconditionError("polygon is not strictly star-shaped about the origin");
    }
    winding += std::atan2(c, a[0] * b[0] + a[1] * b[1]);
    const double edge = std::hypot(b[0] - a[0], b[1] - a[1]);
    inradius = std::min(inradius, c / edge);
    bound = std::max(bound, std::hypot(a[0], a[1]));
  }
  if (std::abs(winding - 2.0 * kPi) > 1e-9) {
    throw PreconditionError("polygon boundary must wind exactly once around the origin");
  }
  Domain d;
  d.kind_ = DomainKind::star_polygon;
  d.dimension_ = 2;
  d.vertices_ = std::move(vertices);
  d.bounding_radius_ = bound;
  d.inradius_ = inradius;
  d.name_ = "star-polygon";
  return d;
}

Domain Domain::mask(int dimension, MaskPredicate predicate, double bounding_radius,
                    std::string name) {
  check_dimension(dimension);
  if (!predicate) throw PreconditionError("mask domain needs a predicate");
  if (!(bounding_radius > 0.0)) throw PreconditionError("mask bounding radius must be positive");
  const std::vector<double> origin(dimension, 0.0);
  if (!predicate(origin)) throw PreconditionError("mask domain must contain the origin");
  Domain d;
  d.kind_ = DomainKind::mask;
  d.dimension_ = dimension;
  d.predicate_ = std::move(predicate);
  d.bounding_radius_ = bounding_radius;
  d.inradius_ = 0.0;
  d.name_ = std::move(name);

  // Midpoint lattice count over the bounding cube. Scaling the domain scales
  // the lattice with it, so scaled() multiplies this by factor^d.
  const double h = d.mask_volume_spacing();
  const long per_axis = std::lround(2.0 * bounding_radius / h);
  std::vector<long> idx(dimension, 0);
  std::vector<double> x(dimension);
  long count = 0;
  while (true) {
    for (int k = 0; k < dimension; ++k) x[k] = -bounding_radius + (idx[k] + 0.5) * h;
    if (d.predicate_(x)) ++count;
    int k = 0;
    while (k < dimension && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == dimension) break;
  }
  d.mask_volume_ = count * std::pow(h, dimension);
  return d;
}

double Domain::half_width() const {
  if (kind_ != DomainKind::box) throw PreconditionError("half_width requires a box domain");
  return size_;
}

double Domain::radius() const {
  if (kind_ != DomainKind::ball) throw PreconditionError("radius requires a ball domain");
  return size_;
}

const std::vector<Vertex2>& Domain::vertices() const {
  if (kind_ != DomainKind::star_polygon) {
    throw PreconditionError("vertices require a star-polygon domain");
  }
  return vertices_;
}

bool Domain::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dimension_) {
    throw PreconditionError("point dimension " + std::to_string(x.size()) +
                            " does not match domain dimension " + std::to_string(dimension_));
  }
  switch (kind_) {
    case DomainKind::box:
      return std::all_of(x.begin(), x.end(), [&](double v) { return std::abs(v) < size_; });
    case DomainKind::ball: {
      double r2 = 0.0;
      for (double v : x) r2 += v * v;
      return r2 < size_ * size_;
    }
    case DomainKind::star_polygon: {
      // Locate the fan triangle whose angular sector holds x, then test the
      // open half-plane of its outer edge.
      const std::size_t n = vertices_.size();
      const Vertex2 p{x[0], x[1]};
      if (p[0] == 0.0 && p[1] == 0.0) return true;
      for (std::size_t i = 0; i < n; ++i) {
        const Vertex2& a = vertices_[i];
        const Vertex2& b = vertices_[(i + 1) % n];
        if (cross(a, p) >= 0.0 && cross(p, b) > 0.0) {
          const Vertex2 ab{b[0] - a[0], b[1] - a[1]};
          const Vertex2 ap{p[0] - a[0], p[1] - a[1]};
          return cross(ab, ap) > 0.0;
        }
      }
      return false;
    }
    case DomainKind::mask: {
      if (mask_scale_ == 1.0) return predicate_(x);
      std::vector<double> y(x.begin(), x.end());
      for (double& v : y) v /= mask_scale_;
      return predicate_(y);
    }
  }
  return false;
}

double Domain::mask_volume_spacing() const {
  if (kind_ != DomainKind::mask) throw PreconditionError("mask_volume_spacing requires a mask");
  const int per_axis = dimension_ == 1 ? 20000 : (dimension_ == 2 ? 1000 : 160);
  return 2.0 * bounding_radius_ / per_axis;
}

double Domain::volume() const {
  switch (kind_) {
    case DomainKind::box:
      return std::pow(2.0 * size_, dimension_);
    case DomainKind::ball:
      return unit_ball_volume(dimension_) * std::pow(size_, dimension_);
    case DomainKind::star_polygon: {
      double twice = 0.0;
      for (std::size_t i = 0; i < vertices_.size(); ++i) {
        twice += cross(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
      }
      return 0.5 * twice;
    }
    case DomainKind::mask:
      return mask_volume_;
  }
  return 0.0;
}

double Domain::boundary_measure() const {
  switch (kind_) {
    case DomainKind::box:
      if (dimension_ == 1) return 2.0;
      return 2.0 * dimension_ * std::pow(2.0 * size_, dimension_ - 1);
    case DomainKind::ball:
      return dimension_ * unit_ball_volume(dimension_) * std::pow(size_, dimension_ - 1);
    case DomainKind::star_polygon: {
      double p = 0.0;
      for (std::size_t i = 0; i < vertices_.size(); ++i) {
        const Vertex2& a = vertices_[i];
        const Vertex2& b = vertices_[(i + 1) % vertices_.size()];
        p += std::hypot(b[0] - a[0], b[1] - a[1]);
      }
      return p;
    }
    case DomainKind::mask:
      break;
  }
  throw PreconditionError("boundary measure is not available for mask domains");
}

Domain Domain::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw PreconditionError("scale factor must be positive and finite");
  }
  Domain d = *this;
  d.size_ *= factor;
  for (auto& v : d.vertices_) {
    v[0] *= factor;
    v[1] *= factor;
  }
  d.mask_scale_ *= factor;
  d.bounding_radius_ *= factor;
  d.inradius_ *= factor;
  d.mask_volume_ *= std::pow(factor, dimension_);
  return d;
}

nlohmann::json Domain::descriptor() const {
  nlohmann::json j;
  j["kind"] = to_string(kind_);
  j["dimension"] = dimension_;
  nlohmann::json params = nlohmann::json::object();
  switch (kind_) {
    case DomainKind::box:
      params["half_width"] = size_;
      break;
    case DomainKind::ball:
      params["radius"] = size_;
      break;
    case DomainKind::star_polygon: {
      nlohmann::json verts = nlohmann::json::array();
      for (const auto& v : vertices_) verts.push_back({v[0], v[1]});
      params["vertices"] = verts;
      break;
    }
    case DomainKind::mask:
      params["name"] = name_;
      params["scale"] = mask_scale_;
      params["bounding_radius"] = bounding_radius_;
      break;
  }
  j["parameters"] = params;
  return j;
}

bool contains(const Domain& domain, std::span<const double> point) {
  return domain.contains(point);
}
double volume(const Domain& domain) { return domain.volume(); }
Domain scale(const Domain& domain, double factor) { return domain.scaled(factor); }

double BoundaryQuadrature::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double BoundaryQuadrature::support(std::size_t i) const {
  double s = 0.0;
  for (int k = 0; k < dimension; ++k) s += points[i * dimension + k] * normals[i * dimension + k];
  return s;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

void push_node(BoundaryQuadrature& q, std::span<const double> p, std::span<const double> n,
               double w) {
  q.points.insert(q.points.end(), p.begin(), p.end());
  q.normals.insert(q.normals.end(), n.begin(), n.end());
  q.weights.push_back(w);
}

BoundaryQuadrature box_rule(int d, double a, int res) {
  BoundaryQuadrature q;
  q.dimension = d;
  std::vector<double> p(d), n(d);
  if (d == 1) {
    for (double s : {-1.0, 1.0}) {
      p[0] = s * a;
      n[0] = s;
      push_node(q, p, n, 1.0);
    }
    return q;
  }
  const double panel = 2.0 * a / res;
  const int tangential = d - 1;
  std::vector<int> idx(tangential);
  for (int axis = 0; axis < d; ++axis) {
    for (double s : {-1.0, 1.0}) {
      std::fill(idx.begin(), idx.end(), 0);
      while (true) {
        int t = 0;
        for (int k = 0; k < d; ++k) {
          if (k == axis) {
            p[k] = s * a;
            n[k] = s;
          } else {
            p[k] = -a + (idx[t++] + 0.5) * panel;
            n[k] = 0.0;
          }
        }
        push_node(q, p, n, std::pow(panel, tangential));
        int k = 0;
        while (k < tangential && ++idx[k] == res) idx[k++] = 0;
        if (k == tangential) break;
      }
    }
  }
  return q;
}

BoundaryQuadrature ball_rule(int d, double r, int res) {
  if (d == 1) return box_rule(1, r, res);
  BoundaryQuadrature q;
  q.dimension = d;
  if (d == 2) {
    const double w = 2.0 * kPi * r / res;
    for (int j = 0; j < res; ++j) {
      const double theta = 2.0 * kPi * (j + 0.5) / res;
      const double n[2] = {std::cos(theta), std::sin(theta)};
      const double p[2] = {r * n[0], r * n[1]};
      push_node(q, p, n, w);
    }
    return q;
  }
  if (d == 3) {
    std::vector<double> z, wz;
    const int latitudes = std::max(2, res / 2);
    gauss_legendre(latitudes, z, wz);
    const double dphi = 2.0 * kPi / res;
    for (int i = 0; i < latitudes; ++i) {
      const double s = std::sqrt(std::max(0.0, 1.0 - z[i] * z[i]));
      for (int j = 0; j < res; ++j) {
        const double phi = dphi * (j + 0.5);
        const double n[3] = {s * std::cos(phi), s * std::sin(phi), z[i]};
        const double p[3] = {r * n[0], r * n[1], r * n[2]};
        push_node(q, p, n, r * r * wz[i] * dphi);
      }
    }
    return q;
  }
  throw PreconditionError("ball boundary quadrature supports d <= 3");
}

BoundaryQuadrature polygon_rule(const std::vector<Vertex2>& v, int res) {
  BoundaryQuadrature q;
  q.dimension = 2;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vertex2& a = v[i];
    const Vertex2& b = v[(i + 1) % v.size()];
    const double ex = b[0] - a[0], ey = b[1] - a[1];
    const double len = std::hypot(ex, ey);
    // Counter-clockwise orientation: the outward normal is the edge rotated by -90 degrees.
    const double n[2] = {ey / len, -ex / len};
    for (int j = 0; j < res; ++j) {
      const double s = (j + 0.5) / res;
      const double p[2] = {a[0] + s * ex, a[1] + s * ey};
      push_node(q, p, n, len / res);
    }
  }
  return q;
}

}  // namespace

BoundaryQuadrature boundary_quadrature(const Domain& domain, int resolution) {
  if (resolution < 1) throw PreconditionError("boundary resolution must be >= 1");
  switch (domain.kind()) {
    case DomainKind::box:
      return box_rule(domain.dimension(), domain.half_width(), resolution);
    case DomainKind::ball:
      return ball_rule(domain.dimension(), domain.radius(), resolution);
    case DomainKind::star_polygon:
      return polygon_rule(domain.vertices(), resolution);
    case DomainKind::mask:
      break;
  }
  throw PreconditionError("boundary quadrature is not available for mask domains");
}

}  // namespace shapedos
