#include "shapedos/cubature.hpp"

#include <array>
#include <cmath>
#include <queue>

#include "shapedos/errors.hpp"

namespace shapedos {
namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights sit on the odd Kronrod nodes (1, 3, 5) and the center.
constexpr std::array<double, 8> kGaussWeights = {
    0.0, 0.129484966168869693270611432679082, 0.0, 0.279705391489276667901467771423780,
    0.0, 0.381830050505118944950369775488975, 0.0, 0.417959183673469387755102040816327};

struct Rule15 {
  std::array<double, 15> x{};
  std::array<double, 15> wk{};
  std::array<double, 15> wg{};
  Rule15() {
    for (int i = 0; i < 8; ++i) {
      x[i] = -kKronrodNodes[i];
      x[14 - i] = kKronrodNodes[i];
      wk[i] = wk[14 - i] = kKronrodWeights[i];
      wg[i] = wg[14 - i] = kGaussWeights[i];
    }
  }
};

const Rule15& rule() {
  static const Rule15 r;
  return r;
}

struct Evaluated {
  Region region;
  double value = 0.0;
  double error = 0.0;
};

struct ByError {
  bool operator()(const Evaluated& a, const Evaluated& b) const { return a.error < b.error; }
};

Evaluated evaluate(const Integrand& f, Region region, std::size_t& evaluations) {
  const Rule15& r = rule();
  const int d = static_cast<int>(region.lower.size());
  std::vector<double> center(d), half(d), x(d);
  double jacobian = 1.0;
  for (int k = 0; k < d; ++k) {
    center[k] = 0.5 * (region.lower[k] + region.upper[k]);
    half[k] = 0.5 * (region.upper[k] - region.lower[k]);
    jacobian *= half[k];
  }
  std::vector<int> idx(d, 0);
  double kronrod = 0.0, gauss = 0.0;
  while (true) {
    double wk = 1.0, wg = 1.0;
    for (int k = 0; k < d; ++k) {
      x[k] = center[k] + half[k] * r.x[idx[k]];
      wk *= r.wk[idx[k]];
      wg *= r.wg[idx[k]];
    }
    const double v = f(x);
    kronrod += wk * v;
    gauss += wg * v;
    ++evaluations;
    int k = 0;
    while (k < d && ++idx[k] == 15) idx[k++] = 0;
    if (k == d) break;
  }
  Evaluated e;
  e.region = std::move(region);
  e.value = kronrod * jacobian;
  e.error = std::abs(kronrod - gauss) * jacobian;
  return e;
}

}  // namespace

CubatureResult adaptive_cubature(const Integrand& f, std::vector<Region> regions, double abs_tol,
                                 std::size_t max_evaluations) {
  if (!(abs_tol > 0.0)) throw PreconditionError("cubature tolerance must be positive");
  CubatureResult result;
  std::priority_queue<Evaluated, std::vector<Evaluated>, ByError> heap;
  double total = 0.0, error = 0.0;
  for (auto& reg : regions) {
    if (reg.lower.size() != reg.upper.size() || reg.lower.empty()) {
      throw PreconditionError("cubature region has inconsistent dimensions");
    }
    Evaluated e = evaluate(f, std::move(reg), result.evaluations);
    total += e.value;
    error += e.error;
    heap.push(std::move(e));
  }
  while (error > abs_tol && !heap.empty() && result.evaluations < max_evaluations) {
    Evaluated worst = heap.top();
    heap.pop();
    const int d = static_cast<int>(worst.region.lower.size());
    double children_value = 0.0, children_error = 0.0;
    std::vector<Evaluated> children;
    children.reserve(std::size_t{1} << d);
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      Region child{worst.region.lower, worst.region.upper};
      for (int k = 0; k < d; ++k) {
        const double mid = 0.5 * (worst.region.lower[k] + worst.region.upper[k]);
        if (mask & (1u << k)) {
          child.lower[k] = mid;
        } else {
          child.upper[k] = mid;
        }
      }
      children.push_back(evaluate(f, std::move(child), result.evaluations));
      children_value += children.back().value;
      children_error += children.back().error;
    }
    total += children_value - worst.value;
    error += children_error - worst.error;
    for (auto& c : children) heap.push(std::move(c));
  }
  // Re-sum to shed the drift of the incremental updates.
  double value = 0.0, err = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  result.value = value;
  result.error = err;
  result.converged = err <= abs_tol;
  return result;
}

}  // namespace shapedos
