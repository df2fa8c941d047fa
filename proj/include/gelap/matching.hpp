#pragma once

// Interface matching on gamma: the scalar constants and the five harmonic
// correctors that tie the boundary layer to the outer harmonic fields.
//
// Conventions. n is the unit normal of gamma pointing into the minus
// (hole-side) region; it coincides with the Fermi t direction, and every
// normal derivative below is taken along that n from whichever side the
// field lives on. Where a formula carries a sign split, the upper sign
// belongs to the plus side (gamma .. outer boundary). Arc derivatives of
// boundary fields are spectral.

#include <Eigen/Dense>

#include "gelap/laplace.hpp"
#include "gelap/profile.hpp"

namespace gelap {

// Root of 2 ln(sqrt(2)/lambda) + 2 ln G = G above its log-log asymptote.
struct Gamma1Result {
  double gamma1 = 0.0;
  // three-term expansion 2 ln(sqrt2/lambda) + 2 ln ln(sqrt2/lambda) + 2 ln 2
  double asymptote = 0.0;
  double defect = 0.0;  // |2 ln(sqrt2/lambda) + 2 ln gamma1 - gamma1|
  int iterations = 0;
};

// Newton from the initial guess 2 ln(sqrt2/lambda) + 2 ln(2 ln(sqrt2/lambda)),
// which sits in the basin for the admissible range 0 < lambda < 0.05
// (ArgumentError outside it).
Gamma1Result solve_gamma1(double lambda);

// One corrector on the two sides of gamma. trace/dn are tabulated at the
// gamma nodes; dn is along n from both solvers, so the reflection
// identities read as plain sums of the stored vectors.
struct SidePair {
  HarmonicField plus, minus;
  Vec trace_plus, trace_minus;
  Vec dn_plus, dn_minus;
};

// Layer scale field mu: lambda*mu = (gamma1/sqrt2) * (+-dn Wgamma^+-),
// evaluated from both sides and averaged. mu_s, mu_ss are arc derivatives
// of mu itself. Throws MatchingError when either side violates the Hopf
// positivity +-dn Wgamma^+- > 0 at any node.
struct ScaleField {
  Vec mu, mu_s, mu_ss;
  double side_gap = 0.0;  // max relative disagreement of the two sides
};
ScaleField compute_mu(const SplitDomain& sd, double lambda, double gamma1);

// Neumann data dn w0^+- = 2k on gamma; traces come out opposite.
SidePair build_w0(const SplitDomain& sd);

// Dirichlet data w1^+- = 2 ln(+-dn Wgamma^+-); normal derivatives come out
// opposite.
SidePair build_w1(const SplitDomain& sd);

// Dirichlet data w2^+- = (2/gamma1) dn w1^+- / dn Wgamma^+-, the same
// boundary field on both sides (the two side expressions are averaged).
SidePair build_w2(const SplitDomain& sd, double gamma1, const SidePair& w1);

// Neumann data of the displacement closure frozen at f = f1:
//   dn w3^+- = 2 mu''/mu f1 - 2 (mu'/mu)^2 f1 - 2 k^2 f1 + b1 f1''
//            + b2 mu'/mu f1' + b3 (lambda mu)^{-1} k D1(f1) + b4 k^2 f1
//            + b5 (lambda mu)^{-1} (D1 E1)(f1),
// shared by the two sides, where D1(f1), E1(f1) are the first-order layer
// scalars evaluated at f1. One shot, not iterated.
SidePair build_w3(const SplitDomain& sd, double lambda, double gamma1,
                  const ScaleField& scale, const Vec& f1, const SidePair& w1,
                  const LayerFormConstants& table);

// Interface displacement f = -+(1/sqrt2)(lambda mu)^{-1}(w0^+- + w3^+-),
// averaged over the sides.
struct FPair {
  Vec f, f_s, f_ss;
  double side_gap = 0.0;
};
FPair compute_f(const SplitDomain& sd, double lambda, const ScaleField& scale,
                const SidePair& w0, const SidePair& w3);

// First-order layer scalars
//   delta1 = -k lambda mu f -+ (1/sqrt2) dn w1^+-
//   e1     = (1/sqrt2)(lambda mu)^2 k f^2 + sqrt2 delta1 lambda mu f.
// Side disagreement beyond 1e-6 relative -> MatchingError.
struct Delta1E1 {
  Vec delta1, e1;
  double side_gap = 0.0;
};
Delta1E1 compute_delta1_e1(const SplitDomain& sd, double lambda,
                           const ScaleField& scale, const Vec& f,
                           const SidePair& w1);

// Second-order layer scalars
//   delta2 = -(1/2) mu''/mu f^2 + (lambda mu)^{-1} delta1 k f
//            - 2 mu'/mu f' f - f'' f -+ (1/sqrt2)(lambda mu)^{-1} dn w2^+-
// and e2 per the printed display. Same side-gap policy as above.
struct Delta2E2 {
  Vec delta2, e2;
  double side_gap = 0.0;
};
Delta2E2 compute_delta2_e2(const SplitDomain& sd, double lambda,
                           const ScaleField& scale, const FPair& fp,
                           const Delta1E1& first, const SidePair& w2);

// Dirichlet data of the last corrector (sign-free, shared by both sides):
//   w4 = -mu''/mu f^2 + (mu'/mu)^2 f^2 + k^2 f^2 - b1 f'' f - b2 mu'/mu f' f
//        - b3 (lambda mu)^{-1} delta1 k f - b4 k^2 f^2
//        - b5 (lambda mu)^{-1} delta1 e1 f + a1 (f')^2
//        + (lambda mu)^{-2} (a2 mu''/mu + a3 k^2 + a4 delta1^2 + a5 e1^2
//                            + a6 k e1) - 2 delta2.
SidePair build_w4(const SplitDomain& sd, double lambda, const ScaleField& scale,
                  const FPair& fp, const Delta1E1& first, const Delta2E2& second,
                  const LayerFormConstants& table);

// Cubic remainder of the one-shot displacement closure, evaluated at
// h = f - f1 and averaged over the sides.
Vec displacement_remainder(const SplitDomain& sd, double lambda,
                           const ScaleField& scale, const Vec& f, const Vec& f1,
                           const SidePair& w1, const LayerFormConstants& table);

// All interface data produced by one matching pass.
struct MatchedData {
  double lambda = 0.0;
  Gamma1Result gamma1;  // the second-order constant equals the first

  Vec curvature, curvature_s;  // gamma geometry at the nodes
  Vec mu, mu_s, mu_ss;
  Vec f, f_s, f_ss;
  Vec f1;  // leading displacement -(1/sqrt2)(lambda mu)^{-1} (+-w0^+-)
  Vec delta1, e1, delta2, e2;
  Vec r_defect;  // remainder of the one-shot displacement closure

  SidePair w0, w1, w2, w3, w4;

  LayerFormConstants table;

  // recorded relative side gaps of the averaged two-sided expressions
  double mu_gap = 0.0, f_gap = 0.0, delta1_gap = 0.0, delta2_gap = 0.0;
};

// Full pass: gamma1, mu, w0, w1, w2, f1, w3, f, delta1/e1, delta2/e2, w4.
// The overload without a table tabulates the layer form constants on the
// default profile grid first (lambda-independent, reusable across sweeps).
MatchedData build_matching(const SplitDomain& sd, double lambda);
MatchedData build_matching(const SplitDomain& sd, double lambda,
                           const LayerFormConstants& table);

// Composite outer field on one side: gamma2 Wgamma + w0 + w1 + w2 + w3 + w4.
struct OuterField {
  int side = +1;  // +1 plus region, -1 minus region
  double gamma2 = 0.0;
  HarmonicField wgamma;
  std::vector<HarmonicField> parts;  // w0 .. w4
  Vec trace, dn;                     // on gamma, dn along n
  TraceJet jet;                      // t-derivatives on gamma through third
  Vec jet4;                          // fourth t-derivative on gamma

  double value(const Vector2d& p) const;
  Vector2d gradient(const Vector2d& p) const;
};
struct OuterPair {
  OuterField plus, minus;
};
OuterPair assemble_outer(const SplitDomain& sd, const MatchedData& md);

}  // namespace gelap
