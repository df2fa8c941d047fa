#include "gelap/fourier.hpp"

#include <unsupported/Eigen/FFT>

#include "gelap/errors.hpp"

namespace gelap {

namespace {

Eigen::FFT<double>& fft_engine() {
  static Eigen::FFT<double> fft;
  return fft;
}

}  // namespace

CVec spectrum(const Vec& f) {
  const int n = static_cast<int>(f.size());
  if (n < 2 || n % 2 != 0) throw ArgumentError("spectrum: need even length >= 2");
  std::vector<std::complex<double>> out;
  std::vector<double> in(f.data(), f.data() + n);
  fft_engine().fwd(out, in);
  CVec c(n);
  for (int j = 0; j < n; ++j) c[j] = out[j] / double(n);
  return c;
}

Vec from_spectrum(const CVec& c) {
  const int n = static_cast<int>(c.size());
  std::vector<std::complex<double>> in(n);
  for (int j = 0; j < n; ++j) in[j] = c[j] * double(n);
  std::vector<std::complex<double>> out;
  fft_engine().inv(out, in);
  Vec f(n);
  for (int j = 0; j < n; ++j) f[j] = out[j].real();
  return f;
}

Vec spectral_derivative(const Vec& f, double period, int order) {
  const int n = static_cast<int>(f.size());
  CVec c = spectrum(f);
  const double w0 = 2.0 * M_PI / period;
  for (int j = 0; j < n; ++j) {
    const int k = signed_freq(j, n);
    if (order % 2 == 1 && 2 * j == n) {
      c[j] = 0.0;  // Nyquist
      continue;
    }
    std::complex<double> ik(0.0, k * w0);
    std::complex<double> m = 1.0;
    for (int p = 0; p < order; ++p) m *= ik;
    c[j] *= m;
  }
  return from_spectrum(c);
}

Vec upsample(const Vec& f, int factor) {
  if (factor <= 1) return f;
  const int n = static_cast<int>(f.size());
  const int m = n * factor;
  CVec c = spectrum(f);
  CVec cz = CVec::Zero(m);
  const int half = n / 2;
  for (int j = 0; j < n; ++j) {
    const int k = signed_freq(j, n);
    if (std::abs(k) < half) {
      cz[(k + m) % m] = c[j];
    } else {
      // split the Nyquist bin symmetrically
      cz[(k + m) % m] += 0.5 * c[j];
      cz[(m - k) % m] += 0.5 * c[j];
    }
  }
  return from_spectrum(cz);
}

double TrigSeries::eval(double theta) const {
  const int K = modes();
  const double c1 = std::cos(theta), s1 = std::sin(theta);
  double ck = c1, sk = s1;
  double acc = a0;
  for (int k = 1; k <= K; ++k) {
    acc += ac[k - 1] * ck + as[k - 1] * sk;
    const double cn = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = cn;
  }
  return acc;
}

TrigSeries TrigSeries::derivative() const {
  TrigSeries d;
  const int K = modes();
  d.ac = Vec(K);
  d.as = Vec(K);
  for (int k = 1; k <= K; ++k) {
    d.ac[k - 1] = k * as[k - 1];
    d.as[k - 1] = -k * ac[k - 1];
  }
  return d;
}

TrigSeries TrigSeries::fit(const Vec& samples) {
  const int n = static_cast<int>(samples.size());
  CVec c = spectrum(samples);
  TrigSeries t;
  const int K = n / 2;
  t.a0 = c[0].real();
  t.ac = Vec::Zero(K);
  t.as = Vec::Zero(K);
  for (int k = 1; k < K; ++k) {
    t.ac[k - 1] = 2.0 * c[k].real();
    t.as[k - 1] = -2.0 * c[k].imag();
  }
  t.ac[K - 1] = c[K].real();  // Nyquist cosine; sine vanishes on the grid
  t.as[K - 1] = 0.0;
  return t;
}

double TrigSeries::tail_energy_fraction() const {
  const int K = modes();
  if (K < 4) return 0.0;
  double total = a0 * a0, tail = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double e = ac[k - 1] * ac[k - 1] + as[k - 1] * as[k - 1];
    total += e;
    if (4 * k > 3 * K) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

}  // namespace gelap
