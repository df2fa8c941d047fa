#include "gelap/geometry.hpp"

#include <cmath>

#include "gelap/errors.hpp"

namespace gelap {

namespace {

double eval_cos_sin(const Vec& cosc, const Vec& sinc, double theta, int deriv) {
  // deriv = 0: value, 1: d/dtheta
  double acc = 0.0;
  if (deriv == 0 && cosc.size() > 0) acc = cosc[0];
  for (int k = 1; k < cosc.size(); ++k) {
    acc += (deriv == 0) ? cosc[k] * std::cos(k * theta) : -cosc[k] * k * std::sin(k * theta);
  }
  for (int k = 0; k < sinc.size(); ++k) {
    const int m = k + 1;
    acc += (deriv == 0) ? sinc[k] * std::sin(m * theta) : sinc[k] * m * std::cos(m * theta);
  }
  return acc;
}

bool segments_cross(const Vector2d& a, const Vector2d& b, const Vector2d& c, const Vector2d& d) {
  auto orient = [](const Vector2d& p, const Vector2d& q, const Vector2d& r) {
    return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
  };
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

}  // namespace

double CurveCoeffs::x(double theta) const { return eval_cos_sin(cos_x, sin_x, theta, 0); }
double CurveCoeffs::y(double theta) const { return eval_cos_sin(cos_y, sin_y, theta, 0); }
double CurveCoeffs::dx(double theta) const { return eval_cos_sin(cos_x, sin_x, theta, 1); }
double CurveCoeffs::dy(double theta) const { return eval_cos_sin(cos_y, sin_y, theta, 1); }

CurveCoeffs CurveCoeffs::circle(double radius, double cx, double cy) {
  CurveCoeffs c;
  c.cos_x = Vec::Zero(2);
  c.cos_x << cx, radius;
  c.sin_x = Vec::Zero(1);
  c.cos_y = Vec::Zero(1);
  c.cos_y << cy;
  c.sin_y = Vec::Zero(1);
  c.sin_y << radius;
  return c;
}

CurveCoeffs CurveCoeffs::ellipse(double a, double b, double cx, double cy) {
  CurveCoeffs c = circle(a, cx, cy);
  c.cos_x[1] = a;
  c.sin_y[0] = b;
  return c;
}

ClosedCurve ClosedCurve::from_coeffs(const CurveCoeffs& c, int n) {
  if (n < 16 || n % 2 != 0) throw ArgumentError("curve node count must be even and >= 16");

  // Orientation from the signed area; evaluate mirrored if clockwise.
  const int m = std::max(1024, 4 * n);
  double area2 = 0.0;
  for (int j = 0; j < m; ++j) {
    const double th = 2.0 * M_PI * j / m;
    area2 += c.x(th) * c.dy(th) - c.y(th) * c.dx(th);
  }
  area2 *= 2.0 * M_PI / m;
  if (std::abs(area2) < 1e-12) throw GeometryError("degenerate curve (zero enclosed area)");
  const double flip = (area2 > 0.0) ? 1.0 : -1.0;
  auto X = [&](double th) { return c.x(flip * th); };
  auto Y = [&](double th) { return c.y(flip * th); };
  auto DX = [&](double th) { return flip * c.dx(flip * th); };
  auto DY = [&](double th) { return flip * c.dy(flip * th); };

  // Arc length as a function of the parameter, integrated spectrally.
  Vec speed(m);
  for (int j = 0; j < m; ++j) {
    const double th = 2.0 * M_PI * j / m;
    speed[j] = std::hypot(DX(th), DY(th));
  }
  if (speed.minCoeff() <= 1e-12 * speed.maxCoeff())
    throw GeometryError("degenerate curve parametrization (vanishing speed)");
  CVec sp = spectrum(speed);
  const double mean_speed = sp[0].real();
  const double L = mean_speed * 2.0 * M_PI;
  CVec anti = CVec::Zero(m);
  for (int j = 1; j < m; ++j) {
    const int k = signed_freq(j, m);
    if (2 * j == m) continue;
    anti[j] = sp[j] / std::complex<double>(0.0, k);
  }
  TrigSeries s_per = TrigSeries::fit(from_spectrum(anti));
  auto arclen = [&](double th) { return mean_speed * th + s_per.eval(th); };
  auto speed_at = [&](double th) { return std::hypot(DX(th), DY(th)); };

  // Invert s(theta) at the n uniform arc length targets.
  ClosedCurve curve;
  curve.nodes_ = Mat(n, 2);
  double theta = 0.0;
  for (int i = 0; i < n; ++i) {
    const double target = L * i / n;
    if (i > 0) theta += 2.0 * M_PI / n;
    for (int it = 0; it < 60; ++it) {
      const double r = arclen(theta) - target;
      const double step = r / speed_at(theta);
      theta -= step;
      if (std::abs(step) < 1e-15 * (1.0 + std::abs(theta))) break;
    }
    curve.nodes_(i, 0) = X(theta);
    curve.nodes_(i, 1) = Y(theta);
  }
  curve.length_ = L;
  curve.finalize();
  return curve;
}

ClosedCurve ClosedCurve::from_points(const Mat& pts, int n) {
  if (pts.rows() < 16 || pts.rows() % 2 != 0)
    throw ArgumentError("from_points: need an even number (>= 16) of loop samples");
  TrigSeries fx = TrigSeries::fit(pts.col(0));
  TrigSeries fy = TrigSeries::fit(pts.col(1));
  CurveCoeffs c;
  const int K = fx.modes();
  c.cos_x = Vec(K + 1);
  c.cos_x[0] = fx.a0;
  c.cos_x.tail(K) = fx.ac;
  c.sin_x = fx.as;
  c.cos_y = Vec(K + 1);
  c.cos_y[0] = fy.a0;
  c.cos_y.tail(K) = fy.ac;
  c.sin_y = fy.as;
  return from_coeffs(c, n);
}

void ClosedCurve::finalize() {
  const int n = size();
  const Vec x = nodes_.col(0), y = nodes_.col(1);
  sx_ = TrigSeries::fit(x);
  sy_ = TrigSeries::fit(y);

  Vec dx = spectral_derivative(x, length_), dy = spectral_derivative(y, length_);
  tangents_ = Mat(n, 2);
  normals_ = Mat(n, 2);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sp = std::hypot(dx[i], dy[i]);
    worst = std::max(worst, std::abs(sp - 1.0));
    tangents_(i, 0) = dx[i] / sp;
    tangents_(i, 1) = dy[i] / sp;
    normals_(i, 0) = -tangents_(i, 1);
    normals_(i, 1) = tangents_(i, 0);
  }
  if (worst > 1e-3) throw GeometryError("arc-length resampling failed to converge");

  Vec ddx = spectral_derivative(x, length_, 2), ddy = spectral_derivative(y, length_, 2);
  curvature_ = Vec(n);
  for (int i = 0; i < n; ++i)
    curvature_[i] = ddx[i] * normals_(i, 0) + ddy[i] * normals_(i, 1);
  dcurvature_ = spectral_derivative(curvature_, length_);

  resolution_warning_ =
      worst > 1e-8 || sx_.tail_energy_fraction() > 1e-10 || sy_.tail_energy_fraction() > 1e-10;

  const int up = std::max(2, 2048 / n);
  dense_poly_ = Mat(n * up, 2);
  dense_poly_.col(0) = upsample(x, up);
  dense_poly_.col(1) = upsample(y, up);

  // Self-intersection scan over non-adjacent node segments.
  for (int i = 0; i < n; ++i) {
    const Vector2d a = nodes_.row(i), b = nodes_.row((i + 1) % n);
    for (int j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const Vector2d cc = nodes_.row(j), d = nodes_.row((j + 1) % n);
      if (segments_cross(a, b, cc, d)) throw GeometryError("curve self-intersects");
    }
  }
}

Vector2d ClosedCurve::point(double s) const {
  const double th = 2.0 * M_PI * s / length_;
  return {sx_.eval(th), sy_.eval(th)};
}

Vector2d ClosedCurve::tangent(double s) const {
  const double th = 2.0 * M_PI * s / length_;
  TrigSeries dsx = sx_.derivative(), dsy = sy_.derivative();
  Vector2d t(dsx.eval(th), dsy.eval(th));
  return t.normalized();
}

Vector2d ClosedCurve::normal(double s) const {
  const Vector2d t = tangent(s);
  return {-t.y(), t.x()};
}

double ClosedCurve::curvature_at(double s) const {
  // Interpolate the node curvature spectrally.
  static thread_local struct {
    const ClosedCurve* owner = nullptr;
    TrigSeries series;
  } cache;
  if (cache.owner != this) {
    cache.series = TrigSeries::fit(curvature_);
    cache.owner = this;
  }
  return cache.series.eval(2.0 * M_PI * s / length_);
}

bool ClosedCurve::encloses(const Vector2d& p) const {
  const int m = static_cast<int>(dense_poly_.rows());
  bool inside = false;
  for (int i = 0, j = m - 1; i < m; j = i++) {
    const double xi = dense_poly_(i, 0), yi = dense_poly_(i, 1);
    const double xj = dense_poly_(j, 0), yj = dense_poly_(j, 1);
    if ((yi > p.y()) != (yj > p.y()) &&
        p.x() < (xj - xi) * (p.y() - yi) / (yj - yi) + xi)
      inside = !inside;
  }
  return inside;
}

double ClosedCurve::area() const {
  const int m = static_cast<int>(dense_poly_.rows());
  double a2 = 0.0;
  for (int i = 0, j = m - 1; i < m; j = i++)
    a2 += dense_poly_(j, 0) * dense_poly_(i, 1) - dense_poly_(i, 0) * dense_poly_(j, 1);
  return 0.5 * std::abs(a2);
}

Vector2d ClosedCurve::centroid() const {
  return {nodes_.col(0).mean(), nodes_.col(1).mean()};
}

DomainSpec DomainSpec::create(ClosedCurve outer, ClosedCurve inner) {
  DomainSpec d;
  if (!outer.encloses(inner.centroid()) || !outer.encloses(Vector2d(inner.nodes().row(0))))
    throw GeometryError("inner boundary is not inside the outer boundary");
  if (inner.encloses(Vector2d(outer.nodes().row(0))))
    throw GeometryError("boundary curves are not nested");
  const double sep = curve_distance(outer, inner);
  const double scale = std::sqrt(outer.area());
  if (sep < 1e-6 * scale) throw GeometryError("boundary curves touch");
  d.outer = std::move(outer);
  d.inner = std::move(inner);
  d.separation_ = sep;
  return d;
}

double curve_distance(const ClosedCurve& a, const ClosedCurve& b) {
  const Mat& pa = a.nodes();
  const Mat& pb = b.nodes();
  double best = std::numeric_limits<double>::max();
  for (int i = 0; i < pa.rows(); ++i)
    for (int j = 0; j < pb.rows(); ++j) {
      const double d = (pa.row(i) - pb.row(j)).norm();
      best = std::min(best, d);
    }
  return best;
}

double tube_width(const ClosedCurve& gamma, const DomainSpec& domain) {
  const double kmax = gamma.curvature().cwiseAbs().maxCoeff();
  const double reach = (kmax > 0.0) ? 1.0 / kmax : std::numeric_limits<double>::max();
  const double d = std::min(curve_distance(gamma, domain.outer), curve_distance(gamma, domain.inner));
  return 0.9 * std::min(reach, 0.5 * d);
}

FermiChart::FermiChart(ClosedCurve gamma, double delta0)
    : gamma_(std::move(gamma)), delta0_(delta0) {
  const double kmax = gamma_.curvature().cwiseAbs().maxCoeff();
  if (delta0 <= 0.0 || delta0 * kmax >= 1.0)
    throw ArgumentError("tube half-width must satisfy 0 < delta0 < 1/max|k|");
}

Vector2d FermiChart::to_point(const FermiPoint& f) const {
  return gamma_.point(f.s) + f.t * gamma_.normal(f.s);
}

std::optional<FermiPoint> FermiChart::try_from_point(const Vector2d& p) const {
  const int n = gamma_.size();
  const Mat& nodes = gamma_.nodes();
  int best = 0;
  double bd = std::numeric_limits<double>::max();
  for (int i = 0; i < n; ++i) {
    const double d = (p.transpose() - nodes.row(i)).norm();
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  if (bd > delta0_ + 2.0 * gamma_.node_spacing()) return std::nullopt;

  const double L = gamma_.length();
  double s = gamma_.node_s(best);
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    const Vector2d g = gamma_.point(s), T = gamma_.tangent(s), N = gamma_.normal(s);
    const double k = gamma_.curvature_at(s);
    const Vector2d r = p - g;
    const double fval = r.dot(T);
    const double fder = -1.0 + k * r.dot(N);
    if (std::abs(fder) < 1e-12) break;
    const double step = fval / fder;
    s -= step;
    if (std::abs(step) < 1e-13 * (1.0 + L)) {
      converged = true;
      break;
    }
  }
  if (!converged) return std::nullopt;
  s = std::fmod(std::fmod(s, L) + L, L);
  const Vector2d g = gamma_.point(s), N = gamma_.normal(s);
  const double t = (p - g).dot(N);
  if ((p - g - t * N).norm() > 1e-9 * (1.0 + std::abs(t))) return std::nullopt;
  if (std::abs(t) > delta0_) return std::nullopt;
  return FermiPoint{s, t};
}

FermiPoint FermiChart::from_point(const Vector2d& p) const {
  auto f = try_from_point(p);
  if (!f) throw GeometryError("point lies outside the Fermi tube");
  return *f;
}

}  // namespace gelap
