// Quantitative checks on the assembled approximation: residual evaluation in
// every region, the total nonlinear mass, a radial shooting oracle, and the
// lambda sweep that tracks each interface norm against its expected rate.
#pragma once

#include <string>
#include <vector>

#include "gelap/assembly.hpp"
#include "gelap/fourier.hpp"
#include "gelap/geometry.hpp"
#include "gelap/matching.hpp"

namespace gelap {

// Laplacian in tube coordinates of a second-order jet at offset t from the
// curve, with curvature k and curvature derivative ks at the foot point:
//   u_tt + u_ss / (1-tk)^2 + t ks u_s / (1-tk)^3 - k u_t / (1-tk).
double fermi_laplacian(const InnerJet& j, double t, double k, double ks);

// One classified residual sample.
struct ResidualSample {
  Vector2d y = Vector2d::Zero();
  double s = 0.0;
  double t = 0.0;
  int region = 0;  // 0 layer, 1 blend band, 2 outer
  int side = +1;
  double residual = 0.0;
};

// Region sup norms of the equation defect over a structured sample, plus the
// worst disagreement between the analytic paths and a finite-difference probe.
struct ResidualReport {
  double sup_layer = 0.0;
  double sup_band = 0.0;
  double sup_outer = 0.0;
  double sup_global = 0.0;
  int n_layer = 0;
  int n_band = 0;
  int n_outer = 0;
  double cross_gap = 0.0;
};

// Evaluates Delta u_ap + lambda^2 exp(u_ap) through the analytic pieces.
// Holds trigonometric fits of the interface curvature so arbitrary arc
// lengths can be queried.
class ResidualEvaluator {
 public:
  explicit ResidualEvaluator(const GlobalApprox& ga);

  // Defect of the layer field alone, valid for any |t| within the grid
  // coverage. All t-derivatives are analytic, s-derivatives spectral.
  double layer(double s, double t) const;

  // Defect of the blended field, assembled from the cutoff decomposition
  //   (1-eta) Delta u2 + (Delta eta)(W-u2) + 2 eta_t (W-u2)_t
  //   + lambda^2 exp(u2 + eta (W-u2)),
  // using that W is harmonic. Reduces to layer() below the ramp and to
  // outer() above it.
  double band(double s, double t) const;

  // Defect of the outer composite: exactly lambda^2 exp(W) on its side.
  double outer(int side, const Vector2d& y) const;

  // Defect at an arbitrary interior point, dispatched by region.
  ResidualSample at(const Vector2d& y) const;

  // Five-point Cartesian finite-difference probe of the same defect.
  // h = 0 selects 1e-4 times the domain diameter.
  double fd(const Vector2d& y, double h = 0.0) const;

  // Scale used to normalize path disagreements: the local nonlinear term.
  double scale(const Vector2d& y) const;

  const GlobalApprox& approx() const { return *ga_; }
  double diameter() const { return diam_; }

 private:
  const GlobalApprox* ga_;
  TrigSeries k_;
  TrigSeries ks_;
  double diam_ = 0.0;
};

// Structured residual survey: layer and band scanned on an (s,t) grid, the
// outer region on boundary-offset rays plus rejection-sampled bulk points.
ResidualReport residual_report(const ResidualEvaluator& ev, int n_s = 128,
                               int n_t = 33, int n_outer = 400,
                               unsigned seed = 1234u);

// Total nonlinear mass lambda^2 int_Omega exp(u_ap), split into the tube
// strip (|t| < r2, integrated in layer coordinates) and the remaining bulk
// (masked Cartesian grid). The reported gap is the relative change under one
// mesh refinement; values come from the finer mesh.
struct MassResult {
  double total = 0.0;
  double strip = 0.0;
  double outer = 0.0;
  double refine_gap = 0.0;
};
MassResult t_lambda(const GlobalApprox& ga, int n_s = 256, int n_t = 129);

// Brute-force check: the same integral on one uniform Cartesian grid with
// spacing h, no coordinate split. Slow; meant for cross-validation only.
double t_lambda_brute(const GlobalApprox& ga, double h);

// Radial solution of u'' + u'/r + lambda^2 exp(u) = 0, u(a) = u(b) = 0,
// found by shooting on u'(a). branch 0 is the minimal solution, branch 1 the
// large one. Throws SolverError past the fold, reporting the fold estimate.
struct RadialSolution {
  double a = 0.0;
  double b = 0.0;
  double lambda = 0.0;
  int branch = 0;
  double slope_a = 0.0;
  Vec r;
  Vec u;
  double max_u = 0.0;
  double argmax_r = 0.0;
  double mass = 0.0;       // lambda^2 2 pi int exp(u) r dr
  double bc_defect = 0.0;  // |u(b)| of the converged shot
};
RadialSolution radial_oracle(double a, double b, double lambda, int branch,
                             double tol = 1e-10, int n_out = 2001);

// Gap between the assembled approximation and a radial oracle on the same
// annulus, measured along one ray on the oracle grid.
struct OracleComparison {
  double rel_gap = 0.0;      // sup |u_ap - u| / sup |u|
  double profile_gap = 0.0;  // sup |(u - 2 ln mu) - V0(lambda mu (t - f))|
  int n = 0;
};
OracleComparison compare_to_oracle(const GlobalApprox& ga,
                                   const RadialSolution& oracle);

// One lambda rung of the sweep. Window quantities are measured at the radii
// [m q, 2 m q], q = lnln(1/lambda)/ln(1/lambda), along normal rays, with
// paper_m fixed across rungs; sides whose window falls outside the domain
// are skipped and noted.
struct SweepRung {
  double lambda = 0.0;
  double big = 0.0;  // ln(1/lambda)
  bool feasible = true;
  std::string note;
  int band_m = 0;
  double lm_sup = 0.0, lm_inf = 0.0, f_sup = 0.0;
  double d1e1_sup = 0.0, d2e2_sup = 0.0;
  double w2_sup = 0.0, w3_sup = 0.0, w4_sup = 0.0, r_sup = 0.0;
  bool window_plus = false, window_minus = false;
  double mismatch = 0.0;    // sup |u2 - W2| over the window
  double mismatch_t = 0.0;  // sup |d/dt (u2 - W2)|
  double res_layer = 0.0;   // sup defect for |t| <= q
  double res_window = 0.0;  // sup outer defect at distance >= 2 paper_m q
  double res_band = 0.0;    // sup defect on the realized ramp
  double res_outer = 0.0;   // sup outer defect beyond the realized band
  double res_global = 0.0;  // max of the realized-region sups
  double mass = 0.0;
};

// Fitted constant for one tracked bound: constants[i] is the measured value
// at rung i divided by the expected rate. flat means max/min <= 2 (or every
// raw value sat below the noise floor, recorded in note).
struct SweepRow {
  std::string name;
  std::vector<double> constants;
  double spread = 0.0;
  bool flat = false;
  std::string note;
};

struct SweepReport {
  std::vector<SweepRung> rungs;
  std::vector<SweepRow> rows;
  double outer_rate = 0.0;  // fitted c in the window decay (ln 1/lambda)^(-c m)
  int paper_m = 4;
};

// Runs the full ladder: at least three lambdas spanning three decades, one
// shared band multiplier (the smallest that fits every kept rung). Rungs
// where no scaled band fits are dropped with a note.
SweepReport run_sweep(const SplitDomain& sd, const std::vector<double>& lambdas,
                      int paper_m = 4);

}  // namespace gelap
