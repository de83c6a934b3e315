#include "shapedos/chebyshev.hpp"

#include <algorithm>
#include <cmath>

#include "shapedos/errors.hpp"

namespace shapedos {
namespace {

// Past this index the scaled Bessel terms are below 1e-300 for any beta.
int recurrence_top(double x) {
  return static_cast<int>(std::ceil(x + 40.0 * std::sqrt(x + 1.0))) + 64;
}

struct Series {
  std::vector<double> coefficients;  // full, untruncated
  std::vector<double> tails;         // tails[k] = sum_{j > k} |c_j|
};

Series full_series(double t, double lower, double upper) {
  if (!(t >= 0.0)) throw PreconditionError("expansion requires t >= 0");
  if (!(upper > lower)) throw PreconditionError("expansion interval must be nonempty");
  const double beta = 0.5 * t * (upper - lower);
  const int count = recurrence_top(beta);
  const std::vector<double> bessel = scaled_bessel_i(beta, count);
  const double prefactor = std::exp(-t * lower);
  Series s;
  s.coefficients.resize(count);
  for (int k = 0; k < count; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    s.coefficients[k] = prefactor * (k == 0 ? 1.0 : 2.0) * sign * bessel[k];
  }
  s.tails.assign(count, 0.0);
  double acc = 0.0;
  for (int k = count - 1; k >= 0; --k) {
    s.tails[k] = acc;
    acc += std::abs(s.coefficients[k]);
  }
  return s;
}

int first_within(const Series& s, double tolerance) {
  for (std::size_t k = 0; k < s.tails.size(); ++k) {
    if (s.tails[k] <= tolerance) return static_cast<int>(k);
  }
  return static_cast<int>(s.tails.size()) - 1;
}

}  // namespace

std::vector<double> scaled_bessel_i(double x, int count) {
  if (!(x >= 0.0)) throw PreconditionError("scaled Bessel argument must be >= 0");
  std::vector<double> out(std::max(count, 1), 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const int top = std::max(count, recurrence_top(x));
  std::vector<double> v(top + 2, 0.0);
  v[top] = 1e-280;
  for (int k = top; k >= 1; --k) {
    v[k - 1] = (2.0 * k / x) * v[k] + v[k + 1];
    if (v[k - 1] > 1e250) {
      for (int j = k - 1; j <= top; ++j) v[j] *= 1e-250;
    }
  }
  double sum = v[0];
  for (int k = 1; k <= top; ++k) sum += 2.0 * v[k];
  for (int k = 0; k < static_cast<int>(out.size()); ++k) out[k] = v[k] / sum;
  return out;
}

double ChebyshevExpansion::operator()(double lambda) const {
  const double center = 0.5 * (upper + lower);
  const double radius = 0.5 * (upper - lower);
  const double x = (lambda - center) / radius;
  double b1 = 0.0, b2 = 0.0;
  for (int k = degree(); k >= 1; --k) {
    const double b0 = coefficients[k] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return coefficients[0] + x * b1 - b2;
}

int required_degree(double t, double lower, double upper, double tolerance) {
  if (!(tolerance > 0.0)) throw PreconditionError("polynomial tolerance must be positive");
  return first_within(full_series(t, lower, upper), tolerance);
}

ChebyshevExpansion exp_expansion(double t, double lower, double upper, double tolerance,
                                 int degree) {
  if (!(tolerance > 0.0)) throw PreconditionError("polynomial tolerance must be positive");
  const Series s = full_series(t, lower, upper);
  const int needed = first_within(s, tolerance);
  int used = needed;
  if (degree > 0) {
    const int capped = std::min(degree, static_cast<int>(s.coefficients.size()) - 1);
    if (s.tails[capped] > tolerance) throw DegreeInsufficient(degree, needed, s.tails[capped]);
    used = capped;
  }
  ChebyshevExpansion e;
  e.lower = lower;
  e.upper = upper;
  e.coefficients.assign(s.coefficients.begin(), s.coefficients.begin() + used + 1);
  e.tail_bound = s.tails[used];
  return e;
}

}  // namespace shapedos
