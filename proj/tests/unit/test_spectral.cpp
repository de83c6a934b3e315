#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "shapedos/chebyshev.hpp"
#include "shapedos/discretize.hpp"
#include "shapedos/errors.hpp"
#include "shapedos/spectral.hpp"

using namespace shapedos;
using std::numbers::pi;

namespace {

DiscreteHamiltonian small_operator(const Potential& v, double hbar = 0.2) {
  // 29 x 29 = 841 nodes.
  return assemble(build_grid(Domain::box(2, 1.0), 2.0 / 30.0), v, Hbar::from_value(hbar));
}

}  // namespace

TEST_CASE("scaled Bessel values against boost") {
  for (double x : {0.01, 0.5, 3.0, 40.0, 700.0, 5000.0}) {
    const auto b = scaled_bessel_i(x, 60);
    for (int k = 0; x < 700.0 && k < 60; k += 7) {
      CHECK(b[k] == doctest::Approx(boost::math::cyl_bessel_i(k, x) * std::exp(-x)).epsilon(1e-12));
    }
    // Large x: compare with the asymptotic ratio I_1 / I_0.
    if (x >= 700.0) CHECK(b[1] / b[0] == doctest::Approx(1.0 - 1.0 / (2.0 * x)).epsilon(1e-5));
  }
  const auto many = scaled_bessel_i(2.0, 500);
  CHECK(many.size() == 500u);
  CHECK(many[499] == 0.0);
}

TEST_CASE("Chebyshev expansion error stays within its tail bound") {
  for (double t : {0.1, 1.0, 5.0}) {
    const ChebyshevExpansion e = exp_expansion(t, 0.0, 50.0, 1e-10);
    CHECK(e.tail_bound <= 1e-10);
    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const double l = 50.0 * i / 2000.0;
      worst = std::max(worst, std::abs(e(l) - std::exp(-t * l)));
    }
    // Clenshaw rounding grows with the degree.
    CHECK(worst <= e.tail_bound + 4.0 * e.degree() * std::numeric_limits<double>::epsilon());
  }
  CHECK(required_degree(2.0, 0.0, 100.0, 1e-12) > required_degree(2.0, 0.0, 100.0, 1e-6));
  CHECK_THROWS_AS(exp_expansion(1.0, 0.0, 400.0, 1e-10, 5), DegreeInsufficient);
  try {
    exp_expansion(1.0, 0.0, 400.0, 1e-10, 5);
  } catch (const DegreeInsufficient& e) {
    CHECK(e.required() == required_degree(1.0, 0.0, 400.0, 1e-10));
    CHECK(e.bound_at_requested() > 1e-10);
  }
}

TEST_CASE("dense trace of the Dirichlet chain") {
  const Grid g = build_grid(Domain::box(1, 1.0), 0.05);
  const DiscreteHamiltonian h = assemble(g, Potential::constant(0.0), Hbar::from_value(1.0));
  double expected = 0.0;
  for (std::size_t k = 1; k <= h.size(); ++k) {
    const double s = std::sin(pi * k * 0.05 / 4.0);
    expected += std::exp(-0.3 * 4.0 / (0.05 * 0.05) * s * s);
  }
  CHECK(heat_trace_dense(h, 0.3).value == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(eigen_dense(h, 5), PreconditionError);
}

TEST_CASE("vanishing operator has trace N") {
  const DiscreteHamiltonian h = small_operator(Potential::constant(0.0), 1e-9);
  CHECK(heat_trace_dense(h, 1.0).value == doctest::Approx(static_cast<double>(h.size())).epsilon(1e-12));
}

TEST_CASE("stochastic estimate on a diagonal operator is exact") {
  // With a negligible Laplacian H is diag(V) and every probe gives sum p(V_i).
  const DiscreteHamiltonian h = small_operator(example_potential(2), 1e-9);
  StochasticOptions o;
  o.probes = 8;
  const auto est = heat_trace_stochastic(h, 1.0, o, 11);
  double exact = 0.0;
  for (double v : h.potential_values()) exact += std::exp(-v);
  CHECK(std::abs(est.value - exact) <= est.truncation_bound + 1e-9 * exact);
  CHECK(est.std_error < 1e-9 * exact);
}

TEST_CASE("stochastic estimates are seed deterministic and schedule independent") {
  const DiscreteHamiltonian h = small_operator(example_potential(2));
  StochasticOptions o;
  o.probes = 10;
  const auto a = heat_trace_stochastic(h, 0.7, o, 99);
  const auto b = heat_trace_stochastic(h, 0.7, o, 99);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  StochasticOptions threaded = o;
  threaded.threads = 3;
  CHECK(heat_trace_stochastic(h, 0.7, threaded, 99).value == a.value);
  const auto c = heat_trace_stochastic(h, 0.7, o, 100);
  CHECK(c.value != a.value);
  CHECK(a.seed == 99u);
  CHECK(a.probes == 10);
  CHECK(a.method == TraceMethod::stochastic);
}

TEST_CASE("multi-t run equals single-t runs") {
  const DiscreteHamiltonian h = small_operator(example_potential(2));
  StochasticOptions o;
  o.probe_spacing = 4;
  const double ts[3] = {0.25, 1.0, 2.0};
  const auto all = heat_traces_stochastic(h, ts, o, 5);
  for (int i = 0; i < 3; ++i) {
    const auto one = heat_trace_stochastic(h, ts[i], o, 5);
    CHECK(one.value == all[i].value);
    CHECK(one.degree == all[i].degree);
  }
}

TEST_CASE("colored probes stay unbiased and reduce the spread") {
  const DiscreteHamiltonian h = small_operator(example_potential(2));
  const double exact = heat_trace_dense(h, 0.5).value;
  for (int spacing : {1, 3, 8}) {
    StochasticOptions o;
    o.probes = 16;
    o.probe_spacing = spacing;
    const auto e = heat_trace_stochastic(h, 0.5, o, 2024);
    CHECK(e.probe_spacing == spacing);
    CHECK(std::abs(e.value - exact) <= 4.0 * e.std_error + e.truncation_bound);
  }
  StochasticOptions plain, colored;
  colored.probe_spacing = 8;
  CHECK(heat_trace_stochastic(h, 0.5, colored, 1).std_error <
        heat_trace_stochastic(h, 0.5, plain, 1).std_error);
}

TEST_CASE("precondition checks") {
  const DiscreteHamiltonian h = small_operator(Potential::constant(0.0));
  StochasticOptions few;
  few.probes = 4;
  CHECK_THROWS_AS(heat_trace_stochastic(h, 1.0, few, 1), PreconditionError);
  CHECK_THROWS_AS(heat_trace_dense(h, 0.0), PreconditionError);
  StochasticOptions low;
  low.degree = 3;
  CHECK_THROWS_AS(heat_trace_stochastic(h, 1.0, low, 1), DegreeInsufficient);
}
