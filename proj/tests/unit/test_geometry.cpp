#include <doctest.h>

#include <cmath>
#include <numbers>

#include "shapedos/errors.hpp"
#include "shapedos/geometry.hpp"

using namespace shapedos;
using std::numbers::pi;

TEST_CASE("box and ball measures") {
  const Domain box = Domain::box(2, 1.0);
  CHECK(box.volume() == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(box.boundary_measure() == doctest::Approx(8.0).epsilon(1e-15));
  const Domain ball = Domain::ball(2, 1.0);
  CHECK(ball.volume() == doctest::Approx(pi).epsilon(1e-15));
  CHECK(ball.boundary_measure() == doctest::Approx(2.0 * pi).epsilon(1e-15));
  const Domain ball3 = Domain::ball(3, 2.0);
  CHECK(ball3.volume() == doctest::Approx(4.0 / 3.0 * pi * 8.0).epsilon(1e-14));
  CHECK(ball3.boundary_measure() == doctest::Approx(4.0 * pi * 4.0).epsilon(1e-14));
  CHECK(Domain::box(3, 0.5).volume() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("membership is open") {
  const Domain box = Domain::box(2, 1.0);
  const double inside[2] = {0.999, -0.999};
  const double edge[2] = {1.0, 0.0};
  CHECK(box.contains(inside));
  CHECK_FALSE(box.contains(edge));
  const Domain ball = Domain::ball(2, 1.0);
  const double near[2] = {0.7, 0.7};
  const double rim[2] = {0.0, -1.0};
  CHECK(ball.contains(near));
  CHECK_FALSE(ball.contains(rim));
}

TEST_CASE("scaling multiplies volume by R^d") {
  for (double r : {0.5, 2.0, 3.0}) {
    CHECK(scale(Domain::box(2, 1.0), r).volume() == doctest::Approx(4.0 * r * r).epsilon(1e-14));
    CHECK(scale(Domain::ball(3, 1.0), r).volume() ==
          doctest::Approx(4.0 / 3.0 * pi * r * r * r).epsilon(1e-14));
  }
}

TEST_CASE("star polygon: square matches box, orientation and star check") {
  const Domain sq = Domain::star_polygon({{{-1, -1}}, {{1, -1}}, {{1, 1}}, {{-1, 1}}});
  CHECK(sq.volume() == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(sq.boundary_measure() == doctest::Approx(8.0).epsilon(1e-15));
  const Domain cw = Domain::star_polygon({{{-1, 1}}, {{1, 1}}, {{1, -1}}, {{-1, -1}}});
  CHECK(cw.volume() == doctest::Approx(4.0).epsilon(1e-15));
  const double p[2] = {0.5, -0.25};
  CHECK(sq.contains(p));
  // Origin outside the polygon.
  CHECK_THROWS_AS(Domain::star_polygon({{{1, 1}}, {{2, 1}}, {{2, 2}}}), PreconditionError);
}

TEST_CASE("mask volume is a flagged estimate") {
  const Domain m = Domain::mask(
      2, [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1] < 1.0; }, 1.0, "disk");
  CHECK_FALSE(m.volume_is_exact());
  CHECK(m.mask_volume_spacing() > 0.0);
  CHECK(m.volume() == doctest::Approx(pi).epsilon(1e-3));
  CHECK(scale(m, 2.0).volume() == doctest::Approx(4.0 * m.volume()).epsilon(1e-14));
}

TEST_CASE("boundary quadrature totals and support function") {
  for (const Domain& d : {Domain::box(2, 1.0), Domain::ball(2, 1.0), Domain::box(3, 1.0),
                          Domain::ball(3, 1.0)}) {
    const BoundaryQuadrature q = boundary_quadrature(d, 64);
    CHECK(q.total_weight() == doctest::Approx(d.boundary_measure()).epsilon(1e-12));
    // Centered unit box and unit ball have sigma . n = 1 everywhere.
    for (std::size_t i = 0; i < q.size(); i += 37) CHECK(q.support(i) == doctest::Approx(1.0));
    // Divergence theorem: int sigma . n = d |Omega|.
    double flux = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) flux += q.weights[i] * q.support(i);
    CHECK(flux == doctest::Approx(d.dimension() * d.volume()).epsilon(1e-12));
  }
}

TEST_CASE("Gauss-Legendre is exact for degree 2n-1") {
  std::vector<double> x, w;
  gauss_legendre(6, x, w);
  for (int k = 0; k <= 11; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += w[i] * std::pow(x[i], k);
    const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
    CHECK(sum == doctest::Approx(exact).epsilon(1e-14));
  }
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(Domain::box(2, -1.0), PreconditionError);
  CHECK_THROWS_AS(Domain::ball(0, 1.0), PreconditionError);
}
