#pragma once

#include <vector>

namespace shapedos {

/// Scaled modified Bessel functions exp(-x) I_k(x) for k = 0..count-1,
/// x >= 0, by Miller's backward recurrence normalized with
/// I_0 + 2 sum_{k>=1} I_k = exp(x).
std::vector<double> scaled_bessel_i(double x, int count);

/// Chebyshev expansion of lambda -> exp(-t lambda) on [lower, upper].
///
/// Coefficients are exact: exp(-t lambda) = exp(-t lower) * sum_k
/// (2 - delta_k0) (-1)^k exp(-beta) I_k(beta) T_k(x) with beta = t (upper -
/// lower) / 2 and x the affine image of lambda in [-1, 1]. The uniform error of
/// the truncated series is bounded by the absolute tail sum, kept in
/// `tail_bound`.
struct ChebyshevExpansion {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> coefficients;
  double tail_bound = 0.0;

  int degree() const noexcept { return static_cast<int>(coefficients.size()) - 1; }
  /// Clenshaw evaluation at lambda.
  double operator()(double lambda) const;
};

/// Smallest degree whose tail bound is <= tolerance.
int required_degree(double t, double lower, double upper, double tolerance);

/// `degree` <= 0 selects required_degree(); an explicit degree that misses
/// the tolerance raises DegreeInsufficient.
ChebyshevExpansion exp_expansion(double t, double lower, double upper, double tolerance,
                                 int degree = 0);

}  // namespace shapedos
