#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shapedos/geometry.hpp"

namespace shapedos {

enum class PotentialKind { constant, radially_homogeneous, general_bounded };

std::string to_string(PotentialKind kind);

using PointFunction = std::function<double(std::span<const double>)>;

/// A bounded real potential V on R^d.
///
/// Radially homogeneous potentials satisfy V(tx) = V(x) for t > 0 and are
/// described by an angular profile evaluated at x/|x|; V(0) is defined as 0.
class Potential {
 public:
  static Potential constant(double value);
  /// `profile` receives a unit vector. `angular_breaks` lists angles in the
  /// (x1, x2) plane, in [0, 2pi), across which the profile is not smooth;
  /// quadrature splits there.
  static Potential radially_homogeneous(int dimension, PointFunction profile, double bound,
                                        std::string name, nlohmann::json parameters = {},
                                        std::vector<double> angular_breaks = {});
  static Potential general(int dimension, PointFunction function, double bound,
                           std::string name, nlohmann::json parameters = {});

  PotentialKind kind() const noexcept { return kind_; }
  bool is_homogeneous() const noexcept { return kind_ != PotentialKind::general_bounded; }
  /// 0 for constants (any dimension).
  int dimension() const noexcept { return dimension_; }
  /// Claimed sup-norm bound M with |V| <= M.
  double bound() const noexcept { return bound_; }
  /// Value of a constant potential.
  double constant_value() const;
  const std::string& name() const noexcept { return name_; }
  const std::vector<double>& angular_breaks() const noexcept { return breaks_; }

  double operator()(std::span<const double> x) const;

  nlohmann::json descriptor() const;

 private:
  Potential() = default;

  PotentialKind kind_ = PotentialKind::constant;
  int dimension_ = 0;
  double bound_ = 0.0;
  double value_ = 0.0;
  PointFunction function_;
  std::string name_;
  nlohmann::json parameters_;
  std::vector<double> breaks_;
};

double eval(const Potential& potential, std::span<const double> x);

/// V(x) = |x1 x2| / (x1^2 + x2^2) on R^d, d >= 2, bound 1/2.
Potential example_potential(int dimension);

/// Indicator-type profile: `value` on directions whose (x1, x2) angle lies in
/// [theta_min, theta_max) (radians, taken mod 2pi), 0 elsewhere.
Potential angular_step_potential(int dimension, double theta_min, double theta_max,
                                 double value);

/// V(x) = amplitude * exp(-|x|^2 / width^2). Not homogeneous.
Potential gaussian_potential(int dimension, double amplitude, double width);

/// Adaptive-quadrature mean (1/|Omega|) * integral of V over the domain,
/// absolute error <= tol.
double mean_over_domain(const Potential& potential, const Domain& domain, double tol = 1e-9);

/// Integral of exp(-t V(x)) over the domain, absolute error <= tol.
double exp_integral(const Potential& potential, const Domain& domain, double t,
                    double tol = 1e-9);

/// (1/|Omega|) * integral of exp(-t V); exactly exp(-t c) for constants.
double exp_mean(const Potential& potential, const Domain& domain, double t, double tol = 1e-10);

/// Integral over the domain of g(V(x)) for an arbitrary transfer g, with
/// absolute error <= tol. Mask domains are rejected.
double integrate_transfer(const Potential& potential, const Domain& domain,
                          const std::function<double(double)>& transfer, double tol);

}  // namespace shapedos
