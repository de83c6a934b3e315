#include "shapedos/ids.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "shapedos/discretize.hpp"
#include "shapedos/errors.hpp"

namespace shapedos {

std::string to_string(IdsProvenance provenance) {
  switch (provenance) {
    case IdsProvenance::empirical_counting: return "empirical-counting";
    case IdsProvenance::surface_average_uniform: return "surface-average-uniform";
    case IdsProvenance::surface_average_weighted: return "surface-average-weighted";
    case IdsProvenance::free_constant: return "free-constant";
  }
  return "free-constant";
}

std::string to_string(SurfaceVariant variant) {
  return variant == SurfaceVariant::uniform ? "uniform" : "cone-weighted";
}

double free_ids(double lambda, double c, int dimension) {
  if (dimension < 1) throw PreconditionError("dimension must be >= 1");
  if (!(lambda > c)) return 0.0;
  const double half = 0.5 * dimension;
  return std::pow(4.0 * std::numbers::pi, -half) / std::tgamma(half + 1.0) *
         std::pow(lambda - c, half);
}

namespace {

void check_grid(std::span<const double> lambda) {
  if (lambda.empty()) throw PreconditionError("lambda grid is empty");
  for (std::size_t i = 1; i < lambda.size(); ++i) {
    if (!(lambda[i] > lambda[i - 1])) throw PreconditionError("lambda grid must be ascending");
  }
}

}  // namespace

IDSCurve free_ids_curve(std::span<const double> lambda, double c, int dimension) {
  check_grid(lambda);
  IDSCurve curve;
  curve.dimension = dimension;
  curve.provenance = IdsProvenance::free_constant;
  curve.lambda.assign(lambda.begin(), lambda.end());
  for (double l : lambda) curve.values.push_back(free_ids(l, c, dimension));
  return curve;
}

IDSCurve surface_average_ids(const Potential& potential, const Domain& domain,
                             std::span<const double> lambda, SurfaceVariant variant,
                             int resolution) {
  check_grid(lambda);
  if (!potential.is_homogeneous()) {
    throw PreconditionError("surface average requires a radially homogeneous potential");
  }
  const int d = domain.dimension();
  const BoundaryQuadrature q = boundary_quadrature(domain, resolution);
  std::vector<double> level(q.size());
  std::vector<double> weight(q.size());
  const double total = q.total_weight();
  const double volume = domain.volume();
  for (std::size_t i = 0; i < q.size(); ++i) {
    level[i] = potential(q.point(i));
    weight[i] = variant == SurfaceVariant::uniform ? q.weights[i] / total
                                                   : q.weights[i] * q.support(i) / (d * volume);
  }
  IDSCurve curve;
  curve.dimension = d;
  curve.provenance = variant == SurfaceVariant::uniform ? IdsProvenance::surface_average_uniform
                                                        : IdsProvenance::surface_average_weighted;
  curve.label = variant == SurfaceVariant::uniform ? "paper form" : "star-shaped form";
  curve.lambda.assign(lambda.begin(), lambda.end());
  curve.values.reserve(lambda.size());
  for (double l : lambda) {
    double sum = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) sum += weight[i] * free_ids(l, level[i], d);
    curve.values.push_back(sum);
  }
  return curve;
}

IDSCurve empirical_ids(const Domain& domain, const Potential& potential, double scale,
                       std::span<const double> lambda, double eta, std::size_t dense_cap) {
  check_grid(lambda);
  if (!(scale > 0.0)) throw PreconditionError("scale R must be positive");
  const Domain large = domain.scaled(scale);
  auto grid = std::make_shared<const Grid>(build_grid(large, eta));
  const DiscreteHamiltonian h = assemble(grid, potential, Hbar::from_value(1.0));
  const std::vector<double> eigenvalues = eigen_dense(h, dense_cap);
  const double volume = large.volume();
  IDSCurve curve;
  curve.dimension = domain.dimension();
  curve.provenance = IdsProvenance::empirical_counting;
  curve.step = true;
  curve.lambda.assign(lambda.begin(), lambda.end());
  for (double l : lambda) {
    const auto count = std::upper_bound(eigenvalues.begin(), eigenvalues.end(), l) -
                       eigenvalues.begin();
    curve.values.push_back(static_cast<double>(count) / volume);
  }
  return curve;
}

LaplaceOfIds laplace_of_ids(const IDSCurve& curve, double t) {
  if (!(t > 0.0)) throw PreconditionError("Laplace transform requires t > 0");
  if (curve.lambda.size() != curve.values.size() || curve.lambda.empty()) {
    throw PreconditionError("curve grid and values differ in length");
  }
  for (std::size_t i = 1; i < curve.values.size(); ++i) {
    if (curve.values[i] < curve.values[i - 1]) throw PreconditionError("IDS curve is not monotone");
    if (!(curve.lambda[i] > curve.lambda[i - 1])) {
      throw PreconditionError("lambda grid must be ascending");
    }
  }
  LaplaceOfIds out;
  out.value = curve.values[0] * std::exp(-t * curve.lambda[0]);
  for (std::size_t i = 1; i < curve.values.size(); ++i) {
    const double jump = curve.values[i] - curve.values[i - 1];
    if (jump == 0.0) continue;
    const double a = curve.lambda[i - 1];
    const double b = curve.lambda[i];
    if (curve.step) {
      out.value += jump * std::exp(-t * b);
    } else {
      const double width = t * (b - a);
      out.value += jump * std::exp(-t * a) * (-std::expm1(-width)) / width;
    }
  }
  // int_L^inf e^{-t l} dN <= N(L) [ (tL)^{-d/2} Gamma(d/2 + 1, tL) - e^{-tL} ]
  // when N(l) <= N(L) (l / L)^{d/2} beyond L.
  const double last = curve.lambda.back();
  const double mass = curve.values.back();
  if (mass > 0.0 && last > 0.0 && curve.dimension > 0) {
    const double a = 0.5 * curve.dimension + 1.0;
    const double x = t * last;
    const double upper = boost::math::tgamma(a, x);
    out.tail_bound = std::max(0.0, mass * (std::pow(x, 1.0 - a) * upper - std::exp(-x)));
  } else if (mass > 0.0) {
    out.tail_bound = std::numeric_limits<double>::infinity();
  }
  return out;
}

std::vector<double> linear_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw PreconditionError("invalid lambda grid");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) g[i] = lo + static_cast<double>(i) * step;
  return g;
}

}  // namespace shapedos
