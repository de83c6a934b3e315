#pragma once

#include <span>
#include <string>
#include <vector>

#include "shapedos/dos.hpp"

namespace shapedos {

enum class IdsProvenance {
  empirical_counting,
  surface_average_uniform,
  surface_average_weighted,
  free_constant,
};

std::string to_string(IdsProvenance provenance);

/// Integrated density of states sampled on an ascending lambda grid.
///
/// Step curves (empirical counting) are right-continuous step functions with
/// jumps at grid points; the other kinds are continuous and read as piecewise
/// linear between grid points.
struct IDSCurve {
  int dimension = 0;
  std::vector<double> lambda;
  std::vector<double> values;
  IdsProvenance provenance = IdsProvenance::free_constant;
  bool step = false;
  /// Extra labels, e.g. "paper form" for the uniform surface average.
  std::string label;
};

/// (4 pi)^(-d/2) / Gamma(d/2 + 1) * max(lambda - c, 0)^(d/2).
double free_ids(double lambda, double c, int dimension);

IDSCurve free_ids_curve(std::span<const double> lambda, double c, int dimension);

enum class SurfaceVariant { uniform, cone_weighted };

std::string to_string(SurfaceVariant variant);

/// Surface average of free_ids(lambda, V(sigma), d) over the boundary.
/// Uniform: (1/|dOmega|) int dsigma. Cone-weighted: (1/|Omega|) int
/// (sigma . n / d) dsigma.
IDSCurve surface_average_ids(const Potential& potential, const Domain& domain,
                             std::span<const double> lambda, SurfaceVariant variant,
                             int resolution = 4096);

/// lambda -> #{eigenvalues <= lambda} / |R Omega| for the direct
/// discretization of R Omega with hbar = 1 and spacing eta.
IDSCurve empirical_ids(const Domain& domain, const Potential& potential, double scale,
                       std::span<const double> lambda, double eta,
                       std::size_t dense_cap = kDefaultDenseCap);

struct LaplaceOfIds {
  double value = 0.0;
  /// Bound on the mass of exp(-t lambda) dN beyond the last grid point,
  /// assuming N(lambda) grows no faster than lambda^(d/2) there.
  double tail_bound = 0.0;
};

/// Stieltjes integral of exp(-t lambda) against the curve. The value at the
/// first grid point counts as a point mass there.
LaplaceOfIds laplace_of_ids(const IDSCurve& curve, double t);

/// Ascending grid lo, lo + step, ..., up to hi inclusive.
std::vector<double> linear_grid(double lo, double hi, double step);

}  // namespace shapedos
