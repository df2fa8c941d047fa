#pragma once

// Periodic spectral utilities on uniform grids.
//
// Sample vectors of even length n live on theta_j = 2*pi*j/n, j = 0..n-1,
// over one period. All real-to-real operations go through the discrete
// Fourier transform.

#include <Eigen/Dense>
#include <complex>

namespace gelap {

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;

// Forward DFT, normalized so that f_j = sum_k c_k exp(+i k theta_j) with
// k running over signed frequencies. Returned vector is indexed by the
// usual FFT layout: k = 0, 1, ..., n/2, -(n/2-1), ..., -1.
CVec spectrum(const Vec& f);

// Inverse of spectrum().
Vec from_spectrum(const CVec& c);

// Signed frequency of FFT bin j for length n.
inline int signed_freq(int j, int n) { return (j <= n / 2) ? j : j - n; }

// d^order/ds^order of a periodic sample vector with period `period`.
// The Nyquist mode is dropped for odd orders (it has no consistent sign).
Vec spectral_derivative(const Vec& f, double period, int order = 1);

// Trigonometric interpolation of the samples onto a refined grid of
// length factor*n (zero-padded spectrum).
Vec upsample(const Vec& f, int factor);

// Integral over one period (trapezoid rule == exact mean times period).
inline double periodic_integral(const Vec& f, double period) {
  return f.mean() * period;
}

// Truncated real trigonometric series in an angle variable,
//   g(theta) = a0 + sum_k ( ac[k-1] cos(k theta) + as[k-1] sin(k theta) ).
struct TrigSeries {
  double a0 = 0.0;
  Vec ac;  // cos coefficients, k = 1..K
  Vec as;  // sin coefficients, k = 1..K

  int modes() const { return static_cast<int>(ac.size()); }
  double eval(double theta) const;
  // Derivative with respect to theta, as a new series.
  TrigSeries derivative() const;
  // Interpolating series through n uniform samples (K = n/2; for even n the
  // Nyquist cosine is kept, its sine partner is identically zero on the grid).
  static TrigSeries fit(const Vec& samples);
  // Fraction of coefficient energy carried by the top quarter of the modes.
  // Near-zero for well-resolved smooth data.
  double tail_energy_fraction() const;
};

}  // namespace gelap
