#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "shapedos/discretize.hpp"
#include "shapedos/errors.hpp"
#include "shapedos/ids.hpp"

using namespace shapedos;
using std::numbers::pi;

TEST_CASE("free IDS values") {
  CHECK(free_ids(4.0 * pi, 0.0, 2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(free_ids(pi * pi, 0.0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(free_ids(1.0, 2.0, 3) == 0.0);
  CHECK(free_ids(2.0, 2.0, 2) == 0.0);
  CHECK(free_ids(5.0, 1.0, 3) == doctest::Approx(8.0 / (6.0 * pi * pi)).epsilon(1e-14));
}

TEST_CASE("free IDS Laplace identity by independent quadrature") {
  // int exp(-t l) dN = t int exp(-t l) N(l) dl = (4 pi t)^(-d/2) exp(-t c).
  boost::math::quadrature::exp_sinh<double> integrator;
  const double c = 0.3;
  for (int d : {1, 2, 3}) {
    for (double t : {0.5, 1.0, 2.0}) {
      const double q = t * integrator.integrate([&](double u) {
        return std::exp(-t * (c + u)) * free_ids(c + u, c, d);
      });
      CHECK(q == doctest::Approx(std::pow(4.0 * pi * t, -0.5 * d) * std::exp(-t * c)).epsilon(1e-10));
    }
  }
}

TEST_CASE("surface averages") {
  const auto grid = linear_grid(0.0, 10.0, 0.5);
  CHECK(grid.size() == 21u);
  CHECK(grid.back() == 10.0);
  const Potential v = example_potential(2);
  const Domain ball = Domain::ball(2, 1.0);
  const IDSCurve u = surface_average_ids(v, ball, grid, SurfaceVariant::uniform);
  const IDSCurve w = surface_average_ids(v, ball, grid, SurfaceVariant::cone_weighted);
  CHECK(u.label == "paper form");
  CHECK(w.label == "star-shaped form");
  CHECK(u.provenance == IdsProvenance::surface_average_uniform);
  CHECK(w.provenance == IdsProvenance::surface_average_weighted);
  // sigma . n is constant on the unit ball and the centered unit box.
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(u.values[i] == doctest::Approx(w.values[i]).epsilon(1e-12));
  const IDSCurve ub = surface_average_ids(v, Domain::box(2, 1.0), grid, SurfaceVariant::uniform);
  const IDSCurve wb = surface_average_ids(v, Domain::box(2, 1.0), grid, SurfaceVariant::cone_weighted);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(ub.values[i] == doctest::Approx(wb.values[i]).epsilon(1e-12));

  // On a non-centered shape the two forms separate.
  const Domain tri = Domain::star_polygon({{{-0.5, -0.5}}, {{2.0, -0.5}}, {{-0.5, 1.0}}});
  const IDSCurve ut = surface_average_ids(v, tri, grid, SurfaceVariant::uniform);
  const IDSCurve wt = surface_average_ids(v, tri, grid, SurfaceVariant::cone_weighted);
  double gap = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) gap = std::max(gap, std::abs(ut.values[i] - wt.values[i]));
  CHECK(gap > 1e-4);

  // Constant potential reduces to the free IDS.
  const IDSCurve c = surface_average_ids(Potential::constant(0.7), ball, grid, SurfaceVariant::uniform);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(c.values[i] == doctest::Approx(free_ids(grid[i], 0.7, 2)).epsilon(1e-12).scale(1e-300));
  }
  CHECK_THROWS_AS(surface_average_ids(gaussian_potential(2, 1.0, 0.5), ball, grid, SurfaceVariant::uniform),
                  PreconditionError);
}

TEST_CASE("empirical IDS on the box equals the exact discrete count") {
  const double r = 10.0, eta = 0.35;
  const Domain box = Domain::box(2, 1.0);
  const auto grid = linear_grid(0.0, 10.0, 0.25);
  const IDSCurve e = empirical_ids(box, Potential::constant(0.0), r, grid, eta);
  CHECK(e.step);
  CHECK(e.provenance == IdsProvenance::empirical_counting);
  // Dirichlet chain of n nodes: (4/eta^2) sin^2(j pi / (2 (n + 1))).
  const int n = static_cast<int>(std::ceil(2.0 * r / eta)) - 1;
  std::vector<double> chain;
  for (int j = 1; j <= n; ++j) {
    const double s = std::sin(j * pi / (2.0 * (n + 1)));
    chain.push_back(4.0 / (eta * eta) * s * s);
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    long count = 0;
    for (double a : chain) {
      for (double b : chain) count += (a + b <= grid[i] * (1.0 - 1e-12)) ? 1 : 0;
    }
    long upper = 0;
    for (double a : chain) {
      for (double b : chain) upper += (a + b <= grid[i] * (1.0 + 1e-12)) ? 1 : 0;
    }
    const double got = e.values[i] * 4.0 * r * r;
    CHECK(got >= count - 0.5);
    CHECK(got <= upper + 0.5);
  }
  CHECK(e.values[0] == 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(e.values[i] >= e.values[i - 1]);
}

TEST_CASE("empirical IDS approaches the free IDS at moderate scale") {
  const auto grid = linear_grid(2.0, 10.0, 0.5);
  const IDSCurve e = empirical_ids(Domain::box(2, 1.0), Potential::constant(0.0), 10.0, grid, 0.35);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(e.values[i] / free_ids(grid[i], 0.0, 2) - 1.0) < 0.1);
  }
}

TEST_CASE("Laplace transform of curves") {
  const auto grid = linear_grid(0.0, 60.0, 0.01);
  for (double t : {0.5, 1.0, 2.0}) {
    const LaplaceOfIds f = laplace_of_ids(free_ids_curve(grid, 0.2, 2), t);
    CHECK(f.value == doctest::Approx(std::exp(-0.2 * t) / (4.0 * pi * t)).epsilon(1e-3));
    CHECK(f.tail_bound < 1e-10);
  }
  IDSCurve jump;
  jump.dimension = 2;
  jump.step = true;
  jump.lambda = {0.0, 1.0, 2.0, 3.0};
  jump.values = {0.0, 0.0, 0.5, 0.5};
  CHECK(laplace_of_ids(jump, 1.5).value == doctest::Approx(0.5 * std::exp(-3.0)).epsilon(1e-15));
  jump.values = {0.0, 0.6, 0.5, 0.5};
  CHECK_THROWS_AS(laplace_of_ids(jump, 1.0), PreconditionError);
  CHECK_THROWS_AS(laplace_of_ids(free_ids_curve(grid, 0.0, 2), 0.0), PreconditionError);
}

TEST_CASE("surface IDS transform matches the oracle on the ball") {
  const Potential v = example_potential(2);
  const Domain ball = Domain::ball(2, 1.0);
  const auto grid = linear_grid(0.0, 40.0, 0.05);
  const IDSCurve u = surface_average_ids(v, ball, grid, SurfaceVariant::uniform);
  for (double t : {0.5, 1.0, 2.0}) {
    const LaplaceOfIds l = laplace_of_ids(u, t);
    CHECK(std::abs(l.value / oracle_laplace(v, ball, t) - 1.0) < 5e-3);
  }
}
