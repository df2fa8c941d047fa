#pragma once

// Global approximate solution: the boundary-layer evaluator u2 in Fermi
// coordinates, the cutoff band that blends it into the outer composites,
// and the piecewise evaluator
//
//   u_ap = u2                          dist(y, gamma) <= r1
//          u2 + eta * (W2 - u2)        r1 < dist(y, gamma) < r2
//          W2^{+-}                     dist(y, gamma) >= r2
//
// with W2 picked by the side of gamma the point lies on. eta depends on t
// only, vanishes to all orders at |t| = r1 and equals 1 from |t| = r2 on,
// so the three pieces agree bitwise with the regional evaluators on their
// own turf.

#include <Eigen/Dense>

#include "gelap/laplace.hpp"
#include "gelap/matching.hpp"
#include "gelap/profile.hpp"

namespace gelap {

// C^infinity step: 0 for tau <= 0, 1 for tau >= 1, strictly increasing
// between, built from exp(-1/tau). Peak slope is 2 at tau = 1/2.
double smooth_step(double tau);
double smooth_step_d(double tau);
double smooth_step_dd(double tau);

// Blend band in the Fermi coordinate t. eta ramps 0 -> 1 on [r1, r2] in |t|.
struct CutoffSpec {
  double r1 = 0.0;
  double r2 = 0.0;
  double m = 0.0;          // band multiplier behind r1 (0: fixed fallback)
  bool in_regime = false;  // band follows the scaled law with the full m

  double eta(double t) const;
  double eta_t(double t) const;
  double eta_tt(double t) const;
};

// Scaled band r1 = m * lnln(1/lambda)/ln(1/lambda), r2 = 2 r1. in_regime
// records whether m reached m_rate. Throws ArgumentError for lambda outside
// (0, 0.05) or m < 1.
CutoffSpec scaled_cutoff(double lambda, int m, int m_rate = 4);

// Fixed-fraction band for geometries too tight for any scaled one:
// r2 = 0.95 * reach and r1 clears the layer centerline f_sup by 2.5 decay
// lengths of the profile, clamped to [r2/2, 0.85 r2]. Throws BandError when
// even that margin does not fit.
CutoffSpec fallback_cutoff(double reach, double lambda_mu_min, double f_sup);

// Largest |t| the blend may use around gamma: 0.95 * min of the focal
// radius 1/max|k| and the distance from gamma to either boundary component.
double band_reach(const SplitDomain& sd);

// Band multiplier selection. m_rate = max(4, ceil(2/rate_c)) is what the
// outer decay rate asks for; m_max is the largest multiplier whose band
// fits the reach; the realized m is the smaller of the two.
struct BandChoice {
  int m = 0;
  int m_rate = 4;
  int m_max = 0;
  double reach = 0.0;

  bool in_regime() const { return m == m_rate; }
};

// Throws BandError when no scaled band fits the reach (m_max < 1); the
// message names the fallback band and a smaller lambda as the remedies.
BandChoice choose_m(double lambda, double reach, double rate_c = 1.0);

// Window [m, 2m] * lnln(1/lambda)/ln(1/lambda) in |t|, the band the scaled
// cutoff ramps across. Mismatch norms are measured on it.
struct BandWindow {
  double lo = 0.0;
  double hi = 0.0;
};
BandWindow band_window(double lambda, int m);

// Second-order Fermi jet of the layer evaluator at one point, plus the
// pieces the diagnostics decompose against.
struct InnerJet {
  double u = 0.0;
  double ut = 0.0, utt = 0.0;
  double us = 0.0, uss = 0.0;
  double x = 0.0;          // layer variable lambda mu (t - f)
  double lambda_mu = 0.0;  // at this s
  double core = 0.0, corr1 = 0.0, corr2 = 0.0;  // V0 and the two corrections
};

// u2(s,t) = 2 ln mu + V0(x) + phi1(s,x) + phi2(s,x), x = lambda mu (t - f).
// Interface fields are trigonometric in s (spectral interpolation from the
// nodes); the corrections are interpolated in x by an 8-point stencil on
// their grid, with x-derivatives read from the tabulated dx/dxx columns and
// s-derivatives from spectrally differentiated copies of the columns.
class InnerApprox {
 public:
  InnerApprox() = default;

  double value(double s, double t) const;
  InnerJet jet(double s, double t) const;

  double x_of(double s, double t) const;
  double coverage() const { return grid_.X; }  // admissible |x|
  double length() const { return ell_; }
  int nodes() const { return n_; }

  // Largest |t| representable at every s without leaving the x-grid.
  double t_reach() const;

  friend InnerApprox build_inner(const SplitDomain& sd, const MatchedData& md,
                                 const LayerCorrection& phi1,
                                 const LayerCorrection& phi2);

 private:
  // cardinal interpolation weights of the node values at arc length s
  Vec weights(double s) const;
  void correction_at(int which, const Vec& w, double x, bool with_jet,
                     double out[6]) const;

  ProfileGrid grid_;
  double ell_ = 0.0;
  double lambda_ = 0.0;
  int n_ = 0;
  Vec mu_, mu_s_, mu_ss_, f_, f_s_, f_ss_;
  // per correction: value, x- and s-derivative tables (grid.n rows, n_ cols)
  Mat val_[2], dx_[2], dxx_[2], val_s_[2], val_ss_[2], dx_s_[2];
};

// Requires both corrections on the same grid. The grid must cover the x
// image of every t the caller will query; queries beyond it throw
// ProfileError.
InnerApprox build_inner(const SplitDomain& sd, const MatchedData& md,
                        const LayerCorrection& phi1, const LayerCorrection& phi2);

// Where a point fell and what the evaluator used there.
struct UapEval {
  double value = 0.0;
  int region = 0;     // 0 layer, 1 band, 2 outer
  int side = +1;      // +1 plus region, -1 minus (hole-side) region
  bool has_chart = false;
  double s = 0.0, t = 0.0;  // valid when has_chart
};

// The assembled global approximation.
struct GlobalApprox {
  DomainSpec domain;
  ClosedCurve gamma;
  FermiChart chart;   // extended to the band reach
  MatchedData data;
  InnerApprox inner;
  OuterPair outer;
  CutoffSpec cut;
  double reach = 0.0;

  UapEval evaluate(const Vector2d& y) const;
  double value(const Vector2d& y) const;

  GlobalApprox(DomainSpec d, ClosedCurve g, FermiChart c, MatchedData m,
               InnerApprox i, OuterPair o, CutoffSpec k, double r)
      : domain(std::move(d)), gamma(std::move(g)), chart(std::move(c)),
        data(std::move(m)), inner(std::move(i)), outer(std::move(o)),
        cut(k), reach(r) {}
};

// Build the evaluator from matched data. m = 0 selects the band multiplier
// automatically (largest feasible up to the rate's m), falling back to the
// fixed-fraction band when no scaled band fits; m > 0 forces that multiplier
// and throws BandError when its band exceeds the reach.
GlobalApprox build_global(const SplitDomain& sd, const MatchedData& md,
                          const LayerCorrection& phi1,
                          const LayerCorrection& phi2, int m = 0);

}  // namespace gelap
