#pragma once

// Smooth closed curves, doubly connected domains, and the tubular (Fermi)
// chart around an interface curve.
//
// Conventions used throughout:
//  * curves are stored at n uniform-arc-length nodes, positively oriented
//    (counterclockwise);
//  * the stored normal points INTO the region enclosed by the curve;
//  * curvature is k = gamma'' . normal, so a circle of radius R carries
//    k = 1/R and the chart Jacobian is 1 - t*k;
//  * the Fermi coordinate t increases along the stored normal, i.e. t > 0
//    lies inside the curve.

#include <Eigen/Dense>
#include <optional>

#include "gelap/fourier.hpp"

namespace gelap {

using Eigen::Vector2d;

// Truncated Fourier description of one closed curve. cos_* hold the constant
// term at index 0 and cos(k theta) at index k; sin_* hold sin((k+1) theta)
// at index k.
struct CurveCoeffs {
  Vec cos_x, sin_x, cos_y, sin_y;

  double x(double theta) const;
  double y(double theta) const;
  double dx(double theta) const;
  double dy(double theta) const;

  static CurveCoeffs circle(double radius, double cx = 0.0, double cy = 0.0);
  static CurveCoeffs ellipse(double a, double b, double cx = 0.0, double cy = 0.0);
};

class ClosedCurve {
 public:
  // Resample a parametric Fourier curve to n uniform-arc-length nodes.
  // n must be even and >= 16. Throws GeometryError on self-intersection.
  static ClosedCurve from_coeffs(const CurveCoeffs& c, int n);

  // Same pipeline starting from closed-loop samples that are uniform in some
  // smooth parameter (row i of pts sampled at parameter 2*pi*i/m).
  static ClosedCurve from_points(const Mat& pts, int n);

  int size() const { return static_cast<int>(nodes_.rows()); }
  double length() const { return length_; }
  double node_spacing() const { return length_ / size(); }
  const Mat& nodes() const { return nodes_; }
  const Mat& tangents() const { return tangents_; }
  const Mat& normals() const { return normals_; }
  const Vec& curvature() const { return curvature_; }
  const Vec& curvature_derivative() const { return dcurvature_; }
  bool resolution_warning() const { return resolution_warning_; }

  double node_s(int i) const { return length_ * i / size(); }

  // Spectral evaluation at arbitrary arc length.
  Vector2d point(double s) const;
  Vector2d tangent(double s) const;
  Vector2d normal(double s) const;
  double curvature_at(double s) const;

  // Winding test against the (upsampled) node polygon.
  bool encloses(const Vector2d& p) const;

  // Area enclosed (positive).
  double area() const;

  Vector2d centroid() const;

  ClosedCurve() = default;

 private:
  void finalize();

  Mat nodes_, tangents_, normals_;
  Vec curvature_, dcurvature_;
  double length_ = 0.0;
  bool resolution_warning_ = false;
  TrigSeries sx_, sy_;            // interpolants of the node coordinates in s
  Mat dense_poly_;                // upsampled polygon for point classification
};

// Doubly connected domain between two closed curves.
struct DomainSpec {
  ClosedCurve outer;
  ClosedCurve inner;

  // Validates nesting and separation. Throws GeometryError otherwise.
  static DomainSpec create(ClosedCurve outer, ClosedCurve inner);

  bool contains(const Vector2d& p) const {
    return outer.encloses(p) && !inner.encloses(p);
  }
  double separation() const { return separation_; }

 private:
  double separation_ = 0.0;
};

// Minimum distance between the node polygons of two curves (upsampled).
double curve_distance(const ClosedCurve& a, const ClosedCurve& b);

// Half-width of the usable tube around gamma inside the domain:
// 0.9 * min( 1/max|k|, half the minimal distance from gamma to either
// domain boundary ).
double tube_width(const ClosedCurve& gamma, const DomainSpec& domain);

struct FermiPoint {
  double s = 0.0;
  double t = 0.0;
};

// Tubular coordinate chart y = gamma(s) + t * n(s), |t| < delta0.
class FermiChart {
 public:
  FermiChart(ClosedCurve gamma, double delta0);

  const ClosedCurve& curve() const { return gamma_; }
  double delta0() const { return delta0_; }

  Vector2d to_point(const FermiPoint& f) const;
  Vector2d to_point(double s, double t) const { return to_point({s, t}); }

  // Closest-point projection. Returns nothing when p is farther than delta0
  // from gamma (measured via the converged foot point) or when the Newton
  // iteration leaves its basin.
  std::optional<FermiPoint> try_from_point(const Vector2d& p) const;

  // Throwing variant for callers that require chart membership.
  FermiPoint from_point(const Vector2d& p) const;

 private:
  ClosedCurve gamma_;
  double delta0_;
};

}  // namespace gelap
