#pragma once

// One-dimensional boundary-layer machinery: the leading layer profile, its
// linearized operator psi_xx + e^{V0} psi, variation-of-constants solves on a
// symmetric grid, and the first and second layer corrections together with
// their far-field polynomial data.
//
// Conventions. The leading profile is V0(x) = -2 ln cosh(x/sqrt(2)), the
// solution of v_xx + e^v = 0 with v(0) = v_x(0) = 0. Its linearization has
// the explicit kernel pair
//   y_odd(x)  = (V0)_x        (odd,  tends to -+sqrt(2) as x -> +-inf),
//   y_even(x) = x (V0)_x + 2  (even, tends to -sqrt(2)|x| + 2),
// with constant Wronskian y_odd y_even' - y_odd' y_even = 2. Right-hand
// sides of definite parity and exponential decay are solved by quadrature;
// the far field of every solution is a straight line per side whose slope
// and offset are moments of the data against the kernel pair.

#include <algorithm>

#include <gelap/errors.hpp>
#include <gelap/fourier.hpp>

namespace gelap {

// Leading profile and derived closed forms.
double v0(double x);
double v0_x(double x);
double ev0(double x);  // e^{V0} = sech^2(x/sqrt 2); equals -(V0)_xx
double y_odd(double x);
double y_odd_x(double x);  // = -e^{V0}
double y_even(double x);
double y_even_x(double x);

// Wronskian of (y_odd, y_even), constant in x.
inline constexpr double kKernelWronskian = 2.0;

// Member 2 ln(mu) + V0(mu (x - shift)) of the dilation-translation family;
// every member solves v_xx + e^v = 0.
struct ScaledProfile {
  double mu = 1.0;
  double shift = 0.0;
  double value(double x) const;
  double deriv(double x) const;
  double second(double x) const;
};
ScaledProfile v0_family(double mu, double shift);

// Symmetric uniform grid on [-X, X] with an odd number of nodes, so that the
// origin is a node and x[n-1-i] = -x[i] exactly.
struct ProfileGrid {
  double X = 0.0;
  double h = 0.0;
  int n = 0;
  Vec x;

  int center() const { return (n - 1) / 2; }
  // Half-width covering evaluation window L with tails below roundoff.
  static double default_half_width(double L) { return std::max(40.0, 3.0 * L); }
  static ProfileGrid make(double half_width, double max_spacing = 1.0 / 32.0);
};

// Running integral F with F[0] = 0 and F[j] = integral of f over the first j
// intervals. Each interval uses the degree-7 interpolant through 8 nearby
// samples (one-sided at the ends), so the rule is exact for degree <= 7.
Vec cumulative_integral(const Vec& f, double h);

enum class Parity { Even, Odd };

// Solution of psi_xx + e^{V0} psi = g for data of definite parity, with the
// far field pinned down by one free constant:
//   even: psi -> -sqrt(2) c x + (1/sqrt 2) moment_even - 2 c,   x -> -inf,
//   odd:  psi -> -(1/sqrt 2) moment_odd x - c,                  x -> -inf,
// where c is the free constant and the moments integrate the kernel pair
// against g over (-inf, 0]. The opposite side follows by parity. hom is the
// derivative of psi with respect to the free constant (a kernel multiple),
// so callers can move the free constant without re-solving.
struct LinearProfileSolution {
  Vec psi, psi_x, psi_xx;
  Vec hom, hom_x;
  double moment_odd = 0.0;   // integral of y_odd  * g over (-inf, 0]
  double moment_even = 0.0;  // integral of y_even * g over (-inf, 0]
  double slope = 0.0;        // far-field slope as x -> -inf
  double cnst = 0.0;         // far-field offset as x -> -inf
};
LinearProfileSolution solve_linearized(const ProfileGrid& grid, const Vec& g,
                                       Parity parity, double free_constant);

// Least-squares line through the far-field window of one side after the
// known cubic and quadratic parts are removed. The leftover residual must
// sit at roundoff (at_floor) or decay exponentially with rate >= 1;
// otherwise the grid half-width is too small and the call fails.
struct FarFieldFit {
  double slope = 0.0;
  double cnst = 0.0;
  double fit_residual = 0.0;  // max |samples - cubic - quad - line| in window
  double decay_rate = 0.0;    // measured exponential rate (0 when at floor)
  bool at_floor = false;
  bool certified() const { return at_floor || decay_rate >= 1.0; }
};
FarFieldFit far_field_extract(const ProfileGrid& grid, const Vec& samples,
                              int side, double cubic, double quad,
                              double lo_frac = 0.6, double hi_frac = 0.9);

// A layer correction sampled on the x-grid, one column per interface node.
// far_minus / far_plus hold the far-field polynomial [x^3, x^2, x, 1]
// coefficients on each side: cubic and quadratic entries are the explicit
// formulas, slope and offset are extracted numerically. const_moment and
// slope_moment are the quadrature parts of the far field, i.e. what remains
// of the offset and slope after removing the free-constant contributions.
struct LayerCorrection {
  ProfileGrid grid;
  Mat val, dx, dxx;          // grid.n rows, one column per node
  Mat far_minus, far_plus;   // nodes x 4
  Vec rate_minus, rate_plus; // decay certificate per node (0 = at floor)
  Vec const_moment, slope_moment;

  int nodes() const { return static_cast<int>(val.cols()); }
};

// First correction: per node, phi1 = (lambda mu)^{-1} [ k ((x^2/2) y_odd +
// psi1) - d1 y_even - (e1/sqrt 2) y_odd ] where psi1 solves the linearized
// equation with data 2 x e^{V0}; then phi1_xx + e^{V0} phi1 =
// (lambda mu)^{-1} k y_odd. Far field per side:
//   (lambda mu) phi1 ~ +-(1/sqrt 2) k x^2 + (2k -+ sqrt(2) d1) x - 2 d1 -+ e1.
LayerCorrection build_phi1(const ProfileGrid& grid, const Vec& curvature,
                           const Vec& lambda_mu, const Vec& delta1,
                           const Vec& e1);

// Scalar fields along the interface feeding the second correction. The _s
// suffix means arclength derivative.
struct SecondOrderSources {
  double lambda = 0.0;
  Vec curvature, curvature_s;
  Vec mu, mu_s, mu_ss;
  Vec f, f_s, f_ss;
  Vec delta1, e1;  // first-correction far-field parameters
  Vec delta2, e2;  // second-correction free constants
};

// Second correction. Per node the right-hand side collects the curvature,
// modulation and first-correction feedback terms; the growing part is
// absorbed exactly by a polynomial-times-kernel ansatz and the exponentially
// decaying remainder is solved by parity. The far-field cubic and quadratic
// coefficients are explicit; slope and offset carry the quadrature moments
//   const_moment = (1/sqrt 2) * (even moment of the reduced data),
//   slope_moment = -(1/sqrt 2) * (odd moment of the reduced data),
// entering as slope = -+sqrt(2) d2 + slope_moment (per side) and
// offset = const_moment - 2 d2 -+ e2.
LayerCorrection build_phi2(const ProfileGrid& grid, const LayerCorrection& phi1,
                           const SecondOrderSources& src);

// The quadrature moments of the second correction are a quadratic form in
// the interface sources. Coefficients are named by the source pair they
// multiply; tabulated once by switching on one pair at a time. The muss and
// mus_mus slots vanish identically (their data is absorbed exactly by the
// polynomial ansatz) but are kept as structural checks.
struct LayerFormConstants {
  // even slots: contributions to const_moment
  double fs_fs = 0.0;    // (f')^2
  double muss = 0.0;     // lambda^-2 mu'' mu^-3
  double k_k = 0.0;      // lambda^-2 mu^-2 k^2
  double d1_d1 = 0.0;    // lambda^-2 mu^-2 d1^2
  double e1_e1 = 0.0;    // lambda^-2 mu^-2 e1^2
  double k_e1 = 0.0;     // lambda^-2 mu^-2 k e1
  double mus_mus = 0.0;  // lambda^-2 mu^-4 (mu')^2
  // odd slots: contributions to slope_moment
  double fss = 0.0;      // lambda^-1 mu^-1 f''
  double mus_fs = 0.0;   // lambda^-1 mu^-2 mu' f'
  double k_d1 = 0.0;     // lambda^-2 mu^-2 k d1
  double k2_f = 0.0;     // lambda^-1 mu^-1 k^2 f
  double d1_e1 = 0.0;    // lambda^-2 mu^-2 d1 e1
};
LayerFormConstants tabulate_layer_constants(const ProfileGrid& grid,
                                            double lambda = 1.0);

// Evaluate the two quadratic forms for given sources.
double layer_const_form(const LayerFormConstants& t, double lambda, double mu,
                        double mu_s, double mu_ss, double k, double f_s,
                        double d1, double e1);
double layer_slope_form(const LayerFormConstants& t, double lambda, double mu,
                        double mu_s, double k, double f, double f_s,
                        double f_ss, double d1, double e1);

}  // namespace gelap
