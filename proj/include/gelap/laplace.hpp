#pragma once

// Boundary-integral solver for the Laplace equation on the annular region
// between two nested smooth curves.
//
// Representation: double-layer potential on both boundary curves plus a
// logarithmic source anchored inside the hole whose strength is slaved to
// the mean of the density over the hole boundary. This completes the rank
// of the double-layer operator on a doubly connected region, so the
// resulting second-kind system is uniquely solvable.
//
// Discretization: Nystrom collocation with the periodic trapezoid rule on
// the uniform arc-length nodes of each curve. The double-layer kernel is
// smooth on smooth curves (diagonal limit = curvature/(4 pi)), so the
// quadrature converges spectrally.
//
// Normal derivatives on a boundary curve are evaluated through the
// tangential form of the hypersingular operator (derivative of the single
// layer of the arc-length derivative of the density), which is continuous
// across the layer; no one-sided finite differences are involved.

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <random>

#include "gelap/geometry.hpp"

namespace gelap {

using BoundaryField = Vec;
using Cplx = std::complex<double>;

class RegionSolver;

// One harmonic function on a region, value-semantic: carries the solved
// density tables it needs for evaluation.
class HarmonicField {
 public:
  // Interior evaluation. Throws SolverError when p is too close to a
  // boundary curve for the refined quadrature tiers (use boundary_value).
  double value(const Vector2d& p) const;
  Vector2d gradient(const Vector2d& p) const;

  // One-sided boundary limit from inside the region, at arc length s of
  // curve `curve` (0 = outer, 1 = inner).
  double boundary_value(int curve, double s) const;

  // Derivative along the stored (inward) normal of the given curve, at its
  // nodes, via the tangential hypersingular identity.
  Vec inward_normal_derivative(int curve) const;

  const Vec& trace(int curve) const { return data_[curve]; }
  double log_amplitude() const { return log_amp_; }

  // Flux of the gradient through any loop separating the hole from the
  // outer boundary, oriented away from the hole.
  double hole_flux() const { return 2.0 * M_PI * log_amp_; }

 private:
  friend class RegionSolver;

  struct CurveTable {
    ClosedCurve curve;
    CVec y, tau;             // nodes and unit tangents (complex)
    double h = 0.0;          // arc-length weight
    double eps = 1.0;        // +1 outer curve, -1 inner curve (Cauchy form)
    double length = 0.0;
    Vec sigma, dsigma;       // density and its arc derivative
    TrigSeries sigma_series;
  };
  // near-curve quadrature refinements, built on first use
  struct FineTable {
    bool ready = false;
    CVec y, tau;
    Vec sigma, dsigma;
    double h = 0.0;
  };

  double layer_sum(const Vector2d& p) const;
  Cplx hprime(int c, Cplx x) const;
  Cplx hprime_self(int c, int node) const;
  int tier(int c, Cplx x) const;
  const FineTable& fine(int c, int factor) const;

  std::vector<CurveTable> tables_;
  mutable std::vector<FineTable> fine16_, fine64_;
  std::vector<Vec> data_;
  Cplx z0_;
  double log_amp_ = 0.0;
};

// Nystrom operator for the region between curve `outer` and curve `inner`.
class RegionSolver {
 public:
  RegionSolver(ClosedCurve outer, ClosedCurve inner);

  const ClosedCurve& curve(int i) const { return i == 0 ? outer_ : inner_; }
  const ClosedCurve& outer() const { return outer_; }
  const ClosedCurve& inner() const { return inner_; }
  int nodes(int i) const { return curve(i).size(); }

  HarmonicField solve(const Vec& outer_data, const Vec& inner_data) const;

  double condition_estimate() const;

 private:
  ClosedCurve outer_, inner_;
  Cplx z0_;
  Mat A_;
  Eigen::PartialPivLU<Mat> lu_;
  friend HarmonicField solve_with(const RegionSolver&, const Vec&);
};

// Harmonic measure of one boundary component (data 1 there, 0 on the other).
HarmonicField harmonic_measure(const RegionSolver& region, int curve_with_data);

// Second and third t-derivatives on a curve from the Dirichlet and Neumann
// traces, using the interior equation restricted to the wall:
//   u_tt  = k u_t - u_ss
//   u_ttt = -2 k u_ss - (u_t)_ss - k' u_s + k^2 u_t + k u_tt
// (t along the stored inward normal of the curve).
struct TraceJet {
  Vec u, ut, utt, uttt;
};
TraceJet boundary_jet(const ClosedCurve& gamma, const Vec& trace, const Vec& dn_trace);

// One more application of the interior equation on the wall:
//   u_tttt = -6k^2 u_ss - 4k (u_t)_ss - (u_tt)_ss - 6kk' u_s - 2k' (u_t)_s
//            + 2k^3 u_t + 2k^2 u_tt + k u_ttt
Vec fourth_t_derivative(const ClosedCurve& gamma, const TraceJet& jet);

// Dense Dirichlet-to-Neumann map on a curve of the region (zero data on the
// other curve); normal direction = stored inward normal of that curve.
struct DtNOperator {
  Mat map;
  Eigen::PartialPivLU<Mat> inv;

  Vec apply(const Vec& g) const { return map * g; }
  Vec invert(const Vec& q) const { return inv.solve(q); }
  double symmetry_defect() const;
};
DtNOperator dtn_operator(const RegionSolver& region, int curve);

// Conformal potential of the doubly connected domain: harmonic, 0 on the
// inner boundary, 1 on the outer one. modulus = exp(2 pi / flux).
struct ConformalData {
  std::shared_ptr<RegionSolver> solver;
  HarmonicField h;
  double modulus = 0.0;
};
ConformalData conformal_potential(const DomainSpec& domain);

// Trace the level set {h = level} and return it as a closed curve with n
// uniform arc-length nodes. Steps of length (outer length)/512 with Newton
// correction back to the level set.
ClosedCurve extract_level_curve(const HarmonicField& h, const DomainSpec& domain, double level,
                                int n);

// The split of the domain along the conformal mid-curve gamma = {h = 1/2},
// with solvers for both sides. gamma's inward normal points into the inner
// region (minus side), and t > 0 in the Fermi chart points the same way.
struct SplitDomain {
  DomainSpec domain;
  ConformalData conformal;
  ClosedCurve gamma;
  double delta0 = 0.0;
  std::shared_ptr<RegionSolver> plus;   // gamma .. outer boundary
  std::shared_ptr<RegionSolver> minus;  // inner boundary .. gamma
  HarmonicField wgamma_plus, wgamma_minus;
  Vec dn_wgamma_plus, dn_wgamma_minus;  // d/dn with n into the minus side
  std::shared_ptr<DtNOperator> dtn_plus, dtn_minus;

  static SplitDomain build(const DomainSpec& domain, int n_gamma, bool with_dtn = true);
  // Same wiring around a caller-supplied interface (perturbation controls,
  // synthetic charts).
  static SplitDomain with_interface(const DomainSpec& domain, ClosedCurve gamma,
                                    bool with_dtn = true);

  FermiChart chart() const { return FermiChart(gamma, delta0); }
  // gamma curve index inside each region solver
  static constexpr int kGammaInPlus = 1;   // inner curve of the plus region
  static constexpr int kGammaInMinus = 0;  // outer curve of the minus region
};

// Two-sided reflection battery across gamma: equal Dirichlet data must give
// opposite inward-normal derivatives; opposite Neumann data must give equal
// traces. Also runs the Dirichlet battery on a perturbed interface as a
// negative control.
struct ReflectionReport {
  double neumann_defect = 0.0;  // max |dn u+ + dn u-| over the battery
  double trace_defect = 0.0;    // max |NtD+(q) - NtD-(-q)|
  double scale = 0.0;           // typical |dn| for relative reading
  double control_neumann_defect = 0.0;
  int trials = 0;
};
ReflectionReport verify_reflection(const SplitDomain& sd, int trials, std::uint64_t seed);

}  // namespace gelap
