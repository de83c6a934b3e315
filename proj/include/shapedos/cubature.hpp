#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace shapedos {

/// Axis-aligned hyper-rectangle [lower, upper].
struct Region {
  std::vector<double> lower;
  std::vector<double> upper;
};

struct CubatureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

using Integrand = std::function<double(std::span<const double>)>;

/// Globally adaptive tensor Gauss-Kronrod (7/15) cubature over a union of
/// rectangles. The region with the largest |K15 - G7| is bisected along every
/// axis until the summed error estimate drops below `abs_tol` or the
/// evaluation budget is exhausted (converged = false).
CubatureResult adaptive_cubature(const Integrand& f, std::vector<Region> regions, double abs_tol,
                                 std::size_t max_evaluations = 40'000'000);

}  // namespace shapedos
