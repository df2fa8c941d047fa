#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gelap/errors.hpp"
#include "gelap/geometry.hpp"

using namespace gelap;

namespace {

// Adaptive Simpson quadrature, used as an independent perimeter oracle.
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  if (depth > 40 || std::abs(left + right - whole) < 15 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth + 1) +
         simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth + 1);
}

double adaptive_integral(const std::function<double(double)>& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  return simpson(f, a, b, f(a), f(m), f(b), tol, 0);
}

}  // namespace

TEST_CASE("unit circle: length, curvature, inward normal") {
  ClosedCurve c = ClosedCurve::from_coeffs(CurveCoeffs::circle(1.0), 64);
  CHECK(c.length() == doctest::Approx(2.0 * M_PI).epsilon(1e-13));
  CHECK((c.curvature().array() - 1.0).abs().maxCoeff() < 1e-10);
  for (int i = 0; i < c.size(); i += 5) {
    Vector2d p = c.nodes().row(i);
    Vector2d n = c.normals().row(i);
    CHECK((p + 0.5 * n).norm() < 0.51);  // inward
    CHECK(std::abs(c.tangents().row(i).norm() - 1.0) < 1e-12);
  }
  CHECK(c.area() == doctest::Approx(M_PI).epsilon(1e-5));
}

TEST_CASE("clockwise input is reoriented counterclockwise") {
  CurveCoeffs cw = CurveCoeffs::circle(2.0);
  cw.sin_y[0] = -2.0;  // y = -2 sin(theta): clockwise
  ClosedCurve c = ClosedCurve::from_coeffs(cw, 64);
  CHECK((c.curvature().array() - 0.5).abs().maxCoeff() < 1e-10);
  Vector2d p = c.nodes().row(10);
  Vector2d n = c.normals().row(10);
  CHECK((p + 0.1 * n).norm() < p.norm());
}

TEST_CASE("2:1 ellipse: perimeter oracle and unit-speed parametrization") {
  const double a = 2.0, b = 1.0;
  ClosedCurve c = ClosedCurve::from_coeffs(CurveCoeffs::ellipse(a, b), 128);

  const double perimeter = adaptive_integral(
      [&](double t) { return std::hypot(-a * std::sin(t), b * std::cos(t)); }, 0.0, 2.0 * M_PI,
      1e-13);
  CHECK(c.length() == doctest::Approx(perimeter).epsilon(1e-10));

  // Unit-speed certificate at off-node points via centered differences.
  const double h = 1e-6;
  for (double s : {0.3, 1.9, 4.0, 5.5}) {
    Vector2d d = (c.point(s + h) - c.point(s - h)) / (2.0 * h);
    CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-7));
  }

  // Nodes lie on the ellipse.
  for (int i = 0; i < c.size(); ++i) {
    const double rx = c.nodes()(i, 0) / a, ry = c.nodes()(i, 1) / b;
    CHECK(std::abs(rx * rx + ry * ry - 1.0) < 1e-11);
  }

  // Curvature at (a, 0) equals a/b^2; spectral accuracy needs a few more nodes.
  CHECK(c.curvature()[0] == doctest::Approx(a / (b * b)).epsilon(1e-7));
  ClosedCurve fine = ClosedCurve::from_coeffs(CurveCoeffs::ellipse(a, b), 192);
  CHECK(fine.curvature()[0] == doctest::Approx(a / (b * b)).epsilon(1e-11));
}

TEST_CASE("from_points reconstructs a curve from loop samples") {
  const int m = 128;
  Mat pts(m, 2);
  for (int j = 0; j < m; ++j) {
    const double t = 2.0 * M_PI * j / m;
    pts(j, 0) = 2.0 * std::cos(t) + 0.1;
    pts(j, 1) = std::sin(t) - 0.2;
  }
  ClosedCurve c = ClosedCurve::from_points(pts, 96);
  for (int i = 0; i < c.size(); ++i) {
    const double rx = (c.nodes()(i, 0) - 0.1) / 2.0, ry = c.nodes()(i, 1) + 0.2;
    CHECK(std::abs(rx * rx + ry * ry - 1.0) < 1e-10);
  }
}

TEST_CASE("invalid curves are rejected") {
  CHECK_THROWS_AS(ClosedCurve::from_coeffs(CurveCoeffs::circle(1.0), 63), ArgumentError);
  CHECK_THROWS_AS(ClosedCurve::from_coeffs(CurveCoeffs::circle(1.0), 8), ArgumentError);

  // Figure eight: x = cos t, y = 0.5 sin 2t.
  CurveCoeffs fig8;
  fig8.cos_x = Vec::Zero(2);
  fig8.cos_x << 0.0, 1.0;
  fig8.sin_x = Vec::Zero(1);
  fig8.cos_y = Vec::Zero(1);
  fig8.sin_y = Vec::Zero(2);
  fig8.sin_y << 0.0, 0.5;
  CHECK_THROWS_AS(ClosedCurve::from_coeffs(fig8, 64), GeometryError);
}

TEST_CASE("encloses") {
  ClosedCurve c = ClosedCurve::from_coeffs(CurveCoeffs::circle(1.0, 0.5, 0.0), 64);
  CHECK(c.encloses({0.5, 0.0}));
  CHECK(c.encloses({1.2, 0.3}));
  CHECK(!c.encloses({2.0, 0.0}));
  CHECK(!c.encloses({-0.8, 0.0}));
}

TEST_CASE("annulus domain: nesting, separation, tube width") {
  ClosedCurve outer = ClosedCurve::from_coeffs(CurveCoeffs::circle(4.0), 128);
  ClosedCurve inner = ClosedCurve::from_coeffs(CurveCoeffs::circle(1.0), 128);
  DomainSpec dom = DomainSpec::create(outer, inner);
  CHECK(dom.separation() == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(dom.contains({2.5, 0.0}));
  CHECK(!dom.contains({0.5, 0.0}));
  CHECK(!dom.contains({4.5, 0.0}));

  ClosedCurve gamma = ClosedCurve::from_coeffs(CurveCoeffs::circle(2.0), 128);
  // min(1/max|k|, half min boundary distance) = min(2, 0.5) -> 0.45
  CHECK(tube_width(gamma, dom) == doctest::Approx(0.45).epsilon(1e-6));

  ClosedCurve shifted = ClosedCurve::from_coeffs(CurveCoeffs::circle(1.0, 6.0, 0.0), 64);
  CHECK_THROWS_AS(DomainSpec::create(shifted, inner), GeometryError);
}

TEST_CASE("fermi chart round trip on an ellipse") {
  ClosedCurve gamma = ClosedCurve::from_coeffs(CurveCoeffs::ellipse(2.0, 1.0), 128);
  FermiChart chart(gamma, 0.3);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> us(0.0, gamma.length());
  std::uniform_real_distribution<double> ut(-0.29, 0.29);
  for (int trial = 0; trial < 50; ++trial) {
    const double s = us(rng), t = ut(rng);
    const Vector2d p = chart.to_point(s, t);
    auto f = chart.try_from_point(p);
    REQUIRE(f.has_value());
    CHECK(f->t == doctest::Approx(t).epsilon(1e-9));
    const double ds = std::min(std::abs(f->s - s), gamma.length() - std::abs(f->s - s));
    CHECK(ds < 1e-8 * gamma.length());
  }
}

TEST_CASE("fermi chart rejects far points and bad widths") {
  ClosedCurve gamma = ClosedCurve::from_coeffs(CurveCoeffs::circle(2.0), 64);
  FermiChart chart(gamma, 0.4);
  CHECK(!chart.try_from_point({0.0, 0.0}).has_value());
  CHECK(!chart.try_from_point({5.0, 5.0}).has_value());
  CHECK_THROWS_AS(chart.from_point({0.0, 0.0}), GeometryError);
  CHECK_THROWS_AS(FermiChart(gamma, 3.0), ArgumentError);  // exceeds 1/max|k|
}

TEST_CASE("fermi chart on annulus interface: t > 0 points inward") {
  ClosedCurve gamma = ClosedCurve::from_coeffs(CurveCoeffs::circle(2.0), 64);
  FermiChart chart(gamma, 0.45);
  const Vector2d inner_pt = chart.to_point(0.0, 0.2);
  CHECK(inner_pt.norm() == doctest::Approx(1.8).epsilon(1e-10));
  auto f = chart.from_point({2.3, 0.0});
  CHECK(f.t == doctest::Approx(-0.3).epsilon(1e-10));
}
