#include "shapedos/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shapedos/cubature.hpp"
#include "shapedos/errors.hpp"

namespace shapedos {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

// Sorted unique cut points in [lo, hi] including both ends.
std::vector<double> cut_points(double lo, double hi, std::vector<double> inner) {
  std::vector<double> cuts{lo, hi};
  for (double c : inner) {
    if (c > lo && c < hi) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-14; }),
             cuts.end());
  return cuts;
}

std::vector<double> planar_breaks(const Potential& v) {
  std::vector<double> b{0.0, 0.5 * kPi, kPi, 1.5 * kPi};
  for (double a : v.angular_breaks()) b.push_back(wrap_angle(a));
  return b;
}

bool has_off_axis_breaks(const Potential& v) {
  for (double a : v.angular_breaks()) {
    const double q = wrap_angle(a) / (0.5 * kPi);
    if (std::abs(q - std::round(q)) > 1e-12) return true;
  }
  return false;
}

CubatureResult checked(const CubatureResult& r, const char* what) {
  if (!r.converged) {
    throw NumericalError(std::string("quadrature did not converge over ") + what +
                         " (error estimate " + std::to_string(r.error) + ")");
  }
  return r;
}

// Maps the angle box (theta_1..theta_{d-2}, psi) to a unit vector. The
// azimuth psi lives in the (x1, x2) plane so planar breaks map to psi cuts.
double sphere_point(std::span<const double> angles, int d, std::span<double> out) {
  double s = 1.0;
  double jac = 1.0;
  const int polar = d - 2;
  for (int k = 0; k < polar; ++k) {
    const double th = angles[k];
    out[d - 1 - k] = s * std::cos(th);
    jac *= std::pow(std::sin(th), d - 2 - k);
    s *= std::sin(th);
  }
  const double psi = angles[polar];
  out[0] = s * std::cos(psi);
  out[1] = s * std::sin(psi);
  return jac;
}

double integrate_box(const Potential& v, const Domain& dom, const std::function<double(double)>& g,
                     double tol) {
  const int d = dom.dimension();
  const double a = dom.half_width();
  std::vector<Region> regions;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    Region r{std::vector<double>(d), std::vector<double>(d)};
    for (int k = 0; k < d; ++k) {
      r.lower[k] = (mask & (1u << k)) ? 0.0 : -a;
      r.upper[k] = (mask & (1u << k)) ? a : 0.0;
    }
    regions.push_back(std::move(r));
  }
  auto f = [&](std::span<const double> x) { return g(v(x)); };
  return checked(adaptive_cubature(f, std::move(regions), tol), "box").value;
}

// Degree-0 homogeneous V is constant along rays, so the cone over each face
// contributes (a / d) times the face integral.
double integrate_box_faces(const Potential& v, const Domain& dom,
                           const std::function<double(double)>& g, double tol) {
  const int d = dom.dimension();
  const double a = dom.half_width();
  const int m = d - 1;
  double total = 0.0;
  for (int axis = 0; axis < d; ++axis) {
    for (double side : {-a, a}) {
      std::vector<Region> regions;
      for (unsigned mask = 0; mask < (1u << m); ++mask) {
        Region r{std::vector<double>(m), std::vector<double>(m)};
        for (int k = 0; k < m; ++k) {
          r.lower[k] = (mask & (1u << k)) ? 0.0 : -a;
          r.upper[k] = (mask & (1u << k)) ? a : 0.0;
        }
        regions.push_back(std::move(r));
      }
      auto f = [&, axis, side](std::span<const double> y) {
        double x[16];
        for (int k = 0, j = 0; k < d; ++k) x[k] = k == axis ? side : y[j++];
        return g(v(std::span<const double>(x, d)));
      };
      const double face_tol = tol * d / (a * 2 * d);
      total += checked(adaptive_cubature(f, std::move(regions), face_tol), "box face").value;
    }
  }
  return total * a / d;
}

double integrate_ball(const Potential& v, const Domain& dom, const std::function<double(double)>& g,
                      double tol) {
  const int d = dom.dimension();
  const double r = dom.radius();
  if (d == 1) {
    std::vector<Region> regions{{{-r}, {0.0}}, {{0.0}, {r}}};
    auto f = [&](std::span<const double> x) { return g(v(x)); };
    return checked(adaptive_cubature(f, std::move(regions), tol), "interval").value;
  }
  const int polar = d - 2;
  const std::vector<double> psi_cuts = cut_points(0.0, kTwoPi, planar_breaks(v));
  const std::vector<double> theta_cuts{0.0, 0.5 * kPi, kPi};
  const bool radial = !v.is_homogeneous();
  const int dims = d - 1 + (radial ? 1 : 0);

  // Cartesian product of angular cells (and [0, r] radially for general V).
  std::vector<Region> regions;
  std::vector<int> idx(polar + 1, 0);
  while (true) {
    Region reg{std::vector<double>(dims), std::vector<double>(dims)};
    for (int k = 0; k < polar; ++k) {
      reg.lower[k] = theta_cuts[idx[k]];
      reg.upper[k] = theta_cuts[idx[k] + 1];
    }
    reg.lower[polar] = psi_cuts[idx[polar]];
    reg.upper[polar] = psi_cuts[idx[polar] + 1];
    if (radial) {
      reg.lower[dims - 1] = 0.0;
      reg.upper[dims - 1] = r;
    }
    regions.push_back(std::move(reg));
    int k = 0;
    while (k <= polar) {
      const int limit = (k == polar ? static_cast<int>(psi_cuts.size()) : 3) - 1;
      if (++idx[k] < limit) break;
      idx[k++] = 0;
    }
    if (k > polar) break;
  }

  if (!radial) {
    // Homogeneous V: the radial factor integrates exactly to r^d / d.
    const double radial_factor = std::pow(r, d) / d;
    auto f = [&, d](std::span<const double> ang) {
      double w[16];
      const double jac = sphere_point(ang, d, std::span<double>(w, d));
      return jac * g(v(std::span<const double>(w, d)));
    };
    const double sphere_tol = tol / radial_factor;
    return radial_factor * checked(adaptive_cubature(f, std::move(regions), sphere_tol), "sphere").value;
  }
  auto f = [&, d](std::span<const double> coords) {
    double w[16];
    const double jac = sphere_point(coords.first(d - 1), d, std::span<double>(w, d));
    const double rho = coords[d - 1];
    for (int k = 0; k < d; ++k) w[k] *= rho;
    return jac * std::pow(rho, d - 1) * g(v(std::span<const double>(w, d)));
  };
  return checked(adaptive_cubature(f, std::move(regions), tol), "ball").value;
}

double integrate_polygon(const Potential& v, const std::vector<Vertex2>& verts,
                         const std::function<double(double)>& g, double tol) {
  const std::vector<double> breaks = planar_breaks(v);
  const std::size_t n = verts.size();
  std::vector<Region> line_regions, plane_regions;
  struct Fan {
    Vertex2 a, edge;
    double twice_area;
  };
  std::vector<Fan> fans;
  std::vector<int> owner;
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex2& a = verts[i];
    const Vertex2& b = verts[(i + 1) % n];
    const Vertex2 e{b[0] - a[0], b[1] - a[1]};
    fans.push_back({a, e, a[0] * b[1] - a[1] * b[0]});
    // Edge parameters where the ray direction crosses a break angle.
    std::vector<double> inner;
    for (double phi : breaks) {
      const double ex = std::cos(phi), ey = std::sin(phi);
      const double denom = ex * e[1] - ey * e[0];
      if (denom == 0.0) continue;
      const double s = -(ex * a[1] - ey * a[0]) / denom;
      const double px = a[0] + s * e[0], py = a[1] + s * e[1];
      if (s > 0.0 && s < 1.0 && px * ex + py * ey > 0.0) inner.push_back(s);
    }
    const std::vector<double> cuts = cut_points(0.0, 1.0, inner);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      owner.push_back(static_cast<int>(i));
      if (v.is_homogeneous()) {
        line_regions.push_back({{cuts[c]}, {cuts[c + 1]}});
      } else {
        plane_regions.push_back({{cuts[c], 0.0}, {cuts[c + 1], 1.0}});
      }
    }
  }
  // The fan index is recovered from the parameter interval, so each region
  // carries its triangle through a lookup on the owner list.
  double total = 0.0;
  if (v.is_homogeneous()) {
    // V(u * p(s)) = V(p(s)); the u-integral of u over [0, 1] is 1/2.
    std::size_t r = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Region> mine;
      while (r < owner.size() && owner[r] == static_cast<int>(i)) mine.push_back(line_regions[r++]);
      const Fan& fan = fans[i];
      auto f = [&](std::span<const double> s) {
        const double p[2] = {fan.a[0] + s[0] * fan.edge[0], fan.a[1] + s[0] * fan.edge[1]};
        return g(v(std::span<const double>(p, 2)));
      };
      const double scale = 0.5 * fan.twice_area;
      total += scale * checked(adaptive_cubature(f, std::move(mine), tol / (scale * n)), "polygon").value;
    }
    return total;
  }
  std::size_t r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Region> mine;
    while (r < owner.size() && owner[r] == static_cast<int>(i)) mine.push_back(plane_regions[r++]);
    const Fan& fan = fans[i];
    auto f = [&](std::span<const double> su) {
      const double u = su[1];
      const double p[2] = {u * (fan.a[0] + su[0] * fan.edge[0]), u * (fan.a[1] + su[0] * fan.edge[1])};
      return u * g(v(std::span<const double>(p, 2)));
    };
    total += fan.twice_area *
             checked(adaptive_cubature(f, std::move(mine), tol / (fan.twice_area * n)), "polygon").value;
  }
  return total;
}

}  // namespace

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::constant:
      return "constant";
    case PotentialKind::radially_homogeneous:
      return "radially-homogeneous";
    case PotentialKind::general_bounded:
      return "general-bounded";
  }
  return "unknown";
}

Potential Potential::constant(double value) {
  if (!std::isfinite(value)) throw PreconditionError("constant potential must be finite");
  Potential p;
  p.kind_ = PotentialKind::constant;
  p.value_ = value;
  p.bound_ = std::abs(value);
  p.name_ = "constant";
  p.parameters_ = {{"value", value}};
  return p;
}

Potential Potential::radially_homogeneous(int dimension, PointFunction profile, double bound,
                                          std::string name, nlohmann::json parameters,
                                          std::vector<double> angular_breaks) {
  if (dimension < 1) throw PreconditionError("potential dimension must be >= 1");
  if (!profile) throw PreconditionError("radially homogeneous potential needs a profile");
  if (!(bound >= 0.0)) throw PreconditionError("potential bound must be >= 0");
  Potential p;
  p.kind_ = PotentialKind::radially_homogeneous;
  p.dimension_ = dimension;
  p.function_ = std::move(profile);
  p.bound_ = bound;
  p.name_ = std::move(name);
  p.parameters_ = parameters.is_null() ? nlohmann::json::object() : std::move(parameters);
  p.breaks_ = std::move(angular_breaks);
  return p;
}

Potential Potential::general(int dimension, PointFunction function, double bound, std::string name,
                             nlohmann::json parameters) {
  if (dimension < 1) throw PreconditionError("potential dimension must be >= 1");
  if (!function) throw PreconditionError("general potential needs a function");
  if (!(bound >= 0.0)) throw PreconditionError("potential bound must be >= 0");
  Potential p;
  p.kind_ = PotentialKind::general_bounded;
  p.dimension_ = dimension;
  p.function_ = std::move(function);
  p.bound_ = bound;
  p.name_ = std::move(name);
  p.parameters_ = parameters.is_null() ? nlohmann::json::object() : std::move(parameters);
  return p;
}

double Potential::constant_value() const {
  if (kind_ != PotentialKind::constant) throw PreconditionError("potential is not constant");
  return value_;
}

double Potential::operator()(std::span<const double> x) const {
  if (kind_ == PotentialKind::constant) return value_;
  if (static_cast<int>(x.size()) != dimension_) {
    throw PreconditionError("point dimension " + std::to_string(x.size()) +
                            " does not match potential dimension " + std::to_string(dimension_));
  }
  if (kind_ == PotentialKind::general_bounded) return function_(x);
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  if (norm2 == 0.0) return 0.0;
  const double inv = 1.0 / std::sqrt(norm2);
  double dir[16];
  std::vector<double> heap_dir;
  double* w = dir;
  if (x.size() > 16) {
    heap_dir.resize(x.size());
    w = heap_dir.data();
  }
  for (std::size_t k = 0; k < x.size(); ++k) w[k] = x[k] * inv;
  return function_(std::span<const double>(w, x.size()));
}

nlohmann::json Potential::descriptor() const {
  nlohmann::json j;
  j["kind"] = to_string(kind_);
  j["name"] = name_;
  j["dimension"] = dimension_;
  j["bound"] = bound_;
  j["parameters"] = parameters_;
  return j;
}

double eval(const Potential& potential, std::span<const double> x) { return potential(x); }

Potential example_potential(int dimension) {
  if (dimension < 2) throw PreconditionError("example potential requires dimension >= 2");
  auto profile = [](std::span<const double> w) {
    const double den = w[0] * w[0] + w[1] * w[1];
    if (den == 0.0) return 0.0;
    return std::abs(w[0] * w[1]) / den;
  };
  return Potential::radially_homogeneous(dimension, profile, 0.5, "example", nlohmann::json::object(),
                                         {0.0, 0.5 * kPi, kPi, 1.5 * kPi});
}

Potential angular_step_potential(int dimension, double theta_min, double theta_max, double value) {
  if (dimension < 2) throw PreconditionError("angular-step potential requires dimension >= 2");
  if (!(theta_max > theta_min) || theta_max - theta_min > kTwoPi) {
    throw PreconditionError("angular-step sector must satisfy 0 < theta_max - theta_min <= 2pi");
  }
  const double lo = wrap_angle(theta_min);
  const double width = theta_max - theta_min;
  auto profile = [lo, width, value](std::span<const double> w) {
    if (w[0] == 0.0 && w[1] == 0.0) return 0.0;
    const double rel = wrap_angle(std::atan2(w[1], w[0]) - lo);
    return rel < width ? value : 0.0;
  };
  return Potential::radially_homogeneous(
      dimension, profile, std::abs(value), "angular-step",
      {{"theta_min", theta_min}, {"theta_max", theta_max}, {"value", value}},
      {wrap_angle(theta_min), wrap_angle(theta_max)});
}

Potential gaussian_potential(int dimension, double amplitude, double width) {
  if (!(width > 0.0)) throw PreconditionError("gaussian width must be positive");
  auto f = [amplitude, width](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return amplitude * std::exp(-r2 / (width * width));
  };
  return Potential::general(dimension, f, std::abs(amplitude), "gaussian",
                            {{"amplitude", amplitude}, {"width", width}});
}

double integrate_transfer(const Potential& potential, const Domain& domain,
                          const std::function<double(double)>& transfer, double tol) {
  if (!(tol > 0.0)) throw PreconditionError("quadrature tolerance must be positive");
  if (potential.kind() != PotentialKind::constant && potential.dimension() != domain.dimension()) {
    throw PreconditionError("potential and domain dimensions differ");
  }
  if (domain.kind() == DomainKind::mask) {
    throw PreconditionError("quadrature over mask domains is not supported");
  }
  if (potential.kind() == PotentialKind::constant) {
    return transfer(potential.constant_value()) * domain.volume();
  }
  switch (domain.kind()) {
    case DomainKind::box:
      if (domain.dimension() == 2 && has_off_axis_breaks(potential)) {
        const double a = domain.half_width();
        return integrate_polygon(potential, {{a, a}, {-a, a}, {-a, -a}, {a, -a}}, transfer, tol);
      }
      if (domain.dimension() >= 2 && potential.is_homogeneous()) {
        return integrate_box_faces(potential, domain, transfer, tol);
      }
      return integrate_box(potential, domain, transfer, tol);
    case DomainKind::ball:
      return integrate_ball(potential, domain, transfer, tol);
    case DomainKind::star_polygon:
      return integrate_polygon(potential, domain.vertices(), transfer, tol);
    case DomainKind::mask:
      break;
  }
  throw PreconditionError("unsupported domain kind");
}

double mean_over_domain(const Potential& potential, const Domain& domain, double tol) {
  if (potential.kind() == PotentialKind::constant) return potential.constant_value();
  const double vol = domain.volume();
  return integrate_transfer(potential, domain, [](double v) { return v; }, tol * vol) / vol;
}

double exp_integral(const Potential& potential, const Domain& domain, double t, double tol) {
  if (!(t >= 0.0)) throw PreconditionError("exp_integral requires t >= 0");
  if (t == 0.0) return domain.volume();
  return integrate_transfer(potential, domain, [t](double v) { return std::exp(-t * v); }, tol);
}

double exp_mean(const Potential& potential, const Domain& domain, double t, double tol) {
  if (potential.kind() == PotentialKind::constant) {
    return std::exp(-t * potential.constant_value());
  }
  const double vol = domain.volume();
  return exp_integral(potential, domain, t, tol * vol) / vol;
}

}  // namespace shapedos
