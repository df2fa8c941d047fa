#include "gelap/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gelap/errors.hpp"
#include "gelap/fourier.hpp"

namespace gelap {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

Cplx to_cplx(const Vector2d& p) { return Cplx(p.x(), p.y()); }

CVec column_to_cplx(const Mat& a, const Mat& b) {
  CVec out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) out[i] = Cplx(a(i, 0), b(i, 0));
  return out;
}

CVec nodes_cplx(const ClosedCurve& c) {
  Mat p = c.nodes();
  CVec out(p.rows());
  for (Eigen::Index i = 0; i < p.rows(); ++i) out[i] = Cplx(p(i, 0), p(i, 1));
  return out;
}

CVec tangents_cplx(const ClosedCurve& c) {
  Mat t = c.tangents();
  CVec out(t.rows());
  for (Eigen::Index i = 0; i < t.rows(); ++i) out[i] = Cplx(t(i, 0), t(i, 1));
  return out;
}

// arc-length derivative of a complex node sequence
CVec spectral_derivative_c(const CVec& f, double period) {
  Vec re(f.size()), im(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    re[i] = f[i].real();
    im[i] = f[i].imag();
  }
  Vec dre = spectral_derivative(re, period);
  Vec dim = spectral_derivative(im, period);
  CVec out(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) out[i] = Cplx(dre[i], dim[i]);
  return out;
}

// double-layer kernel with region-outward normal nu = eps * (-i tau)
inline double dl_kernel(Cplx x, Cplx y, Cplx tau, double eps) {
  Cplx nu = eps * Cplx(0.0, -1.0) * tau;
  return (nu / (x - y)).real() / kTwoPi;
}

}  // namespace

// ---------------------------------------------------------------------------
// RegionSolver

RegionSolver::RegionSolver(ClosedCurve outer, ClosedCurve inner)
    : outer_(std::move(outer)), inner_(std::move(inner)) {
  if (!outer_.encloses(inner_.centroid()) ||
      !outer_.encloses(Vector2d(inner_.nodes()(0, 0), inner_.nodes()(0, 1))))
    throw GeometryError("region solver: inner curve is not enclosed by the outer one");
  if (inner_.encloses(Vector2d(outer_.nodes()(0, 0), outer_.nodes()(0, 1))))
    throw GeometryError("region solver: outer curve lies inside the inner one");
  if (curve_distance(outer_, inner_) <= 0.0)
    throw GeometryError("region solver: boundary curves touch");

  z0_ = to_cplx(inner_.centroid());
  const int n0 = outer_.size(), n1 = inner_.size();
  const int n = n0 + n1;

  CVec y0 = nodes_cplx(outer_), y1 = nodes_cplx(inner_);
  CVec t0 = tangents_cplx(outer_), t1 = tangents_cplx(inner_);
  Vec k0 = outer_.curvature(), k1 = inner_.curvature();
  const double h0 = outer_.node_spacing(), h1 = inner_.node_spacing();

  auto block = [&](const CVec& xs, int row0, const CVec& ys, const CVec& ts, double eps, double h,
                   const Vec& kappa, bool self) {
    for (Eigen::Index i = 0; i < xs.size(); ++i)
      for (Eigen::Index j = 0; j < ys.size(); ++j) {
        double k;
        if (self && i == j)
          k = -eps * kappa[j] / (4.0 * M_PI);  // limit of the kernel along the curve
        else
          k = dl_kernel(xs[i], ys[j], ts[j], eps);
        A_(row0 + i, (&ys == &y1 ? n0 : 0) + j) = h * k;
      }
  };

  A_.resize(n, n);
  block(y0, 0, y0, t0, 1.0, h0, k0, true);
  block(y0, 0, y1, t1, -1.0, h1, k1, false);
  block(y1, n0, y0, t0, 1.0, h0, k0, false);
  block(y1, n0, y1, t1, -1.0, h1, k1, true);

  // interior one-sided limit of the double layer
  for (int i = 0; i < n; ++i) A_(i, i) -= 0.5;

  // rank completion: log source at z0 slaved to the mean density on the hole
  for (int i = 0; i < n; ++i) {
    Cplx x = i < n0 ? y0[i] : y1[i - n0];
    double lg = std::log(std::abs(x - z0_));
    for (int j = 0; j < n1; ++j) A_(i, n0 + j) += h1 * lg;
  }

  lu_.compute(A_);
}

double RegionSolver::condition_estimate() const {
  Vec d = lu_.matrixLU().diagonal().cwiseAbs();
  double lo = d.minCoeff(), hi = d.maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

HarmonicField RegionSolver::solve(const Vec& outer_data, const Vec& inner_data) const {
  const int n0 = outer_.size(), n1 = inner_.size();
  if (outer_data.size() != n0 || inner_data.size() != n1)
    throw ArgumentError("region solver: data size does not match node count");

  Vec g(n0 + n1);
  g.head(n0) = outer_data;
  g.tail(n1) = inner_data;
  Vec sigma = lu_.solve(g);

  HarmonicField f;
  f.z0_ = z0_;
  f.data_ = {outer_data, inner_data};
  f.tables_.resize(2);
  f.fine16_.resize(2);
  f.fine64_.resize(2);
  for (int c = 0; c < 2; ++c) {
    auto& t = f.tables_[c];
    t.curve = c == 0 ? outer_ : inner_;
    t.y = nodes_cplx(t.curve);
    t.tau = tangents_cplx(t.curve);
    t.h = t.curve.node_spacing();
    t.eps = c == 0 ? 1.0 : -1.0;
    t.length = t.curve.length();
    t.sigma = c == 0 ? sigma.head(n0) : sigma.tail(n1);
    t.dsigma = spectral_derivative(t.sigma, t.length);
    t.sigma_series = TrigSeries::fit(t.sigma);
  }
  f.log_amp_ = f.tables_[1].h * f.tables_[1].sigma.sum();
  return f;
}

HarmonicField harmonic_measure(const RegionSolver& region, int curve_with_data) {
  Vec d0 = Vec::Zero(region.nodes(0)), d1 = Vec::Zero(region.nodes(1));
  (curve_with_data == 0 ? d0 : d1).setOnes();
  return region.solve(d0, d1);
}

// ---------------------------------------------------------------------------
// HarmonicField evaluation

const HarmonicField::FineTable& HarmonicField::fine(int c, int factor) const {
  FineTable& ft = factor == 16 ? fine16_[c] : fine64_[c];
  if (!ft.ready) {
    const CurveTable& t = tables_[c];
    Mat p = t.curve.nodes(), tg = t.curve.tangents();
    Vec x = upsample(p.col(0), factor), y = upsample(p.col(1), factor);
    Vec tx = upsample(tg.col(0), factor), ty = upsample(tg.col(1), factor);
    ft.y = column_to_cplx(x, y);
    ft.tau = column_to_cplx(tx, ty);
    for (Eigen::Index i = 0; i < ft.tau.size(); ++i) ft.tau[i] /= std::abs(ft.tau[i]);
    ft.sigma = upsample(t.sigma, factor);
    ft.dsigma = upsample(t.dsigma, factor);
    ft.h = t.h / factor;
    ft.ready = true;
  }
  return ft;
}

int HarmonicField::tier(int c, Cplx x) const {
  const CurveTable& t = tables_[c];
  double d2 = std::numeric_limits<double>::max();
  for (Eigen::Index j = 0; j < t.y.size(); ++j) d2 = std::min(d2, std::norm(x - t.y[j]));
  double d = std::sqrt(d2);
  if (d > 8.0 * t.h) return 1;
  if (d > 8.0 * t.h / 16.0) return 16;
  if (d > 8.0 * t.h / 64.0) return 64;
  throw SolverError("field evaluation too close to a boundary curve");
}

double HarmonicField::layer_sum(const Vector2d& p) const {
  Cplx x = to_cplx(p);
  double v = 0.0;
  for (int c = 0; c < 2; ++c) {
    const CurveTable& t = tables_[c];
    int tr = tier(c, x);
    if (tr == 1) {
      for (Eigen::Index j = 0; j < t.y.size(); ++j)
        v += t.h * dl_kernel(x, t.y[j], t.tau[j], t.eps) * t.sigma[j];
    } else {
      const FineTable& ft = fine(c, tr);
      for (Eigen::Index j = 0; j < ft.y.size(); ++j)
        v += ft.h * dl_kernel(x, ft.y[j], ft.tau[j], t.eps) * ft.sigma[j];
    }
  }
  return v;
}

double HarmonicField::value(const Vector2d& p) const {
  return layer_sum(p) + log_amp_ * std::log(std::abs(to_cplx(p) - z0_));
}

Cplx HarmonicField::hprime(int c, Cplx x) const {
  const CurveTable& t = tables_[c];
  int tr = tier(c, x);
  Cplx s(0.0, 0.0);
  if (tr == 1) {
    for (Eigen::Index j = 0; j < t.y.size(); ++j) s += t.h * t.dsigma[j] / (x - t.y[j]);
  } else {
    const FineTable& ft = fine(c, tr);
    for (Eigen::Index j = 0; j < ft.y.size(); ++j) s += ft.h * ft.dsigma[j] / (x - ft.y[j]);
  }
  return s / kTwoPi;
}

Vector2d HarmonicField::gradient(const Vector2d& p) const {
  Cplx x = to_cplx(p);
  Cplx g(0.0, 0.0);
  for (int c = 0; c < 2; ++c)
    g += tables_[c].eps * Cplx(0.0, 1.0) * std::conj(hprime(c, x));
  g += log_amp_ / std::conj(x - z0_);
  return Vector2d(g.real(), g.imag());
}

double HarmonicField::boundary_value(int curve, double s) const {
  const CurveTable& tc = tables_[curve];
  Cplx x = to_cplx(tc.curve.point(s));
  double v = 0.0;
  for (int c = 0; c < 2; ++c) {
    const CurveTable& t = tables_[c];
    const Vec& kappa = t.curve.curvature();
    for (Eigen::Index j = 0; j < t.y.size(); ++j) {
      double k;
      if (std::abs(x - t.y[j]) < 1e-9 * t.length)
        k = -t.eps * kappa[j] / (4.0 * M_PI);
      else
        k = dl_kernel(x, t.y[j], t.tau[j], t.eps);
      v += t.h * k * t.sigma[j];
    }
  }
  double sig = tc.sigma_series.eval(kTwoPi * s / tc.length);
  return v - 0.5 * sig + log_amp_ * std::log(std::abs(x - z0_));
}

Cplx HarmonicField::hprime_self(int c, int node) const {
  const CurveTable& t = tables_[c];
  const Eigen::Index n = t.y.size();
  // q = dsigma / tau and its arc derivative
  CVec q(n);
  for (Eigen::Index j = 0; j < n; ++j) q[j] = t.dsigma[j] / t.tau[j];
  CVec dq = spectral_derivative_c(q, t.length);

  Cplx x = t.y[node];
  Cplx qm = q[node];
  Cplx sum(0.0, 0.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == node)
      sum += t.h * dq[node];
    else
      sum += t.h * (q[j] - qm) * t.tau[j] / (t.y[j] - x);
  }
  return -(sum + qm * Cplx(0.0, M_PI)) / kTwoPi;
}

Vec HarmonicField::inward_normal_derivative(int curve) const {
  const CurveTable& tc = tables_[curve];
  const Eigen::Index n = tc.y.size();
  Vec out(n);

  // self-curve part needs q and q' once, not per node; inline the loop here
  CVec q(n);
  for (Eigen::Index j = 0; j < n; ++j) q[j] = tc.dsigma[j] / tc.tau[j];
  CVec dq = spectral_derivative_c(q, tc.length);

  const int other = 1 - curve;
  for (Eigen::Index m = 0; m < n; ++m) {
    Cplx x = tc.y[m];
    Cplx nin = Cplx(0.0, 1.0) * tc.tau[m];  // stored inward normal

    Cplx sum(0.0, 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == m)
        sum += tc.h * dq[m];
      else
        sum += tc.h * (q[j] - q[m]) * tc.tau[j] / (tc.y[j] - x);
    }
    Cplx hp_self = -(sum + q[m] * Cplx(0.0, M_PI)) / kTwoPi;

    double v = tc.eps * (nin * hp_self).imag();
    v += tables_[other].eps * (nin * hprime(other, x)).imag();
    v += (std::conj(nin) * (log_amp_ / std::conj(x - z0_))).real();
    out[m] = v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// trace jets and DtN

TraceJet boundary_jet(const ClosedCurve& gamma, const Vec& trace, const Vec& dn_trace) {
  if (trace.size() != gamma.size() || dn_trace.size() != gamma.size())
    throw ArgumentError("boundary jet: trace size does not match node count");
  const double L = gamma.length();
  Vec k = gamma.curvature();
  Vec kp = gamma.curvature_derivative();
  Vec us = spectral_derivative(trace, L);
  Vec uss = spectral_derivative(trace, L, 2);
  Vec utss = spectral_derivative(dn_trace, L, 2);

  TraceJet jet;
  jet.u = trace;
  jet.ut = dn_trace;
  jet.utt = k.cwiseProduct(dn_trace) - uss;
  jet.uttt = -2.0 * k.cwiseProduct(uss) - utss - kp.cwiseProduct(us) +
             k.cwiseProduct(k).cwiseProduct(dn_trace) + k.cwiseProduct(jet.utt);
  return jet;
}

Vec fourth_t_derivative(const ClosedCurve& gamma, const TraceJet& jet) {
  if (jet.u.size() != gamma.size())
    throw ArgumentError("fourth t-derivative: jet size does not match node count");
  const double L = gamma.length();
  Vec k = gamma.curvature();
  Vec kp = gamma.curvature_derivative();
  Vec us = spectral_derivative(jet.u, L);
  Vec uss = spectral_derivative(jet.u, L, 2);
  Vec uts = spectral_derivative(jet.ut, L);
  Vec utss = spectral_derivative(jet.ut, L, 2);
  Vec uttss = spectral_derivative(jet.utt, L, 2);

  const int n = gamma.size();
  Vec out(n);
  for (int i = 0; i < n; ++i) {
    const double k2 = k[i] * k[i];
    out[i] = -6.0 * k2 * uss[i] - 4.0 * k[i] * utss[i] - uttss[i] -
             6.0 * k[i] * kp[i] * us[i] - 2.0 * kp[i] * uts[i] +
             2.0 * k2 * k[i] * jet.ut[i] + 2.0 * k2 * jet.utt[i] +
             k[i] * jet.uttt[i];
  }
  return out;
}

double DtNOperator::symmetry_defect() const {
  // symmetric w.r.t. the L2 pairing; uniform weights cancel up to one factor
  Mat m = map - map.transpose();
  return m.cwiseAbs().maxCoeff() / map.cwiseAbs().maxCoeff();
}

DtNOperator dtn_operator(const RegionSolver& region, int curve) {
  const int n = region.nodes(curve);
  const int n_other = region.nodes(1 - curve);
  Vec zero = Vec::Zero(n_other);

  Mat raw(n, n);
  Vec e = Vec::Zero(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    HarmonicField u = curve == 0 ? region.solve(e, zero) : region.solve(zero, e);
    raw.col(j) = u.inward_normal_derivative(curve);
    e[j] = 0.0;
  }

  // The top grid modes carry no derivative information (the arc derivative
  // of the Nyquist component samples to zero at the nodes), which leaves the
  // raw map singular there. Project onto the resolved modes and give the
  // complement the natural spectral scale with the side's sign, so the map
  // stays invertible; data with spectral decay never sees the difference.
  const int keep = n / 2 - std::max(2, n / 16);
  Mat proj(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double d = M_PI * double(i - j) / n;  // half the node angle gap
      double s = std::sin(d);
      proj(i, j) = (std::abs(s) < 1e-14 ? 2.0 * keep + 1.0
                                        : std::sin((2.0 * keep + 1.0) * d) / s) /
                   n;
    }
  double side = Vec::Ones(n).dot(raw * Vec::Ones(n)) > 0.0 ? 1.0 : -1.0;
  double tail_scale = side * 0.5 * keep;

  DtNOperator op;
  op.map = proj * raw * proj + tail_scale * (Mat::Identity(n, n) - proj);
  op.inv.compute(op.map);
  return op;
}

// ---------------------------------------------------------------------------
// conformal potential and interface extraction

ConformalData conformal_potential(const DomainSpec& domain) {
  ConformalData cd;
  cd.solver = std::make_shared<RegionSolver>(domain.outer, domain.inner);
  cd.h = cd.solver->solve(Vec::Ones(domain.outer.size()), Vec::Zero(domain.inner.size()));
  double flux = cd.h.hole_flux();
  if (flux <= 0.0) throw SolverError("conformal potential: nonpositive flux through the hole");
  cd.modulus = std::exp(kTwoPi / flux);
  return cd;
}

namespace {

Vector2d rot90(const Vector2d& v) { return Vector2d(-v.y(), v.x()); }

// Newton pullback onto {h = level} along the gradient
Vector2d project_to_level(const HarmonicField& h, Vector2d p, double level) {
  for (int it = 0; it < 6; ++it) {
    double v = h.value(p) - level;
    Vector2d g = h.gradient(p);
    double g2 = g.squaredNorm();
    if (g2 <= 0.0) throw SolverError("level curve: vanishing gradient");
    p -= (v / g2) * g;
    if (std::abs(v) < 1e-15) break;
  }
  return p;
}

}  // namespace

ClosedCurve extract_level_curve(const HarmonicField& h, const DomainSpec& domain, double level,
                                int n) {
  // seed on a ray from the hole towards the outer boundary
  Vector2d z0 = domain.inner.centroid();
  Mat onodes = domain.outer.nodes();
  Vector2d pout(onodes(0, 0), onodes(0, 1));

  const int kScan = 400;
  double t_lo = 0.0, t_hi = 0.0;
  bool have_lo = false, have_hi = false;
  for (int i = 1; i < kScan && !have_hi; ++i) {
    double t = double(i) / kScan;
    Vector2d p = z0 + t * (pout - z0);
    if (!domain.contains(p)) continue;
    double v;
    try {
      v = h.value(p) - level;
    } catch (const SolverError&) {
      continue;
    }
    if (v < 0.0) {
      t_lo = t;
      have_lo = true;
    } else if (have_lo) {
      t_hi = t;
      have_hi = true;
    }
  }
  if (!have_lo || !have_hi)
    throw SolverError("level curve: failed to bracket the level along the seed ray");
  for (int it = 0; it < 80; ++it) {
    double tm = 0.5 * (t_lo + t_hi);
    double v = h.value(z0 + tm * (pout - z0)) - level;
    (v < 0.0 ? t_lo : t_hi) = tm;
  }
  Vector2d seed = project_to_level(h, z0 + 0.5 * (t_lo + t_hi) * (pout - z0), level);

  // march around the level set
  const double step = domain.outer.length() / 512.0;
  std::vector<Vector2d> pts;
  pts.push_back(seed);
  Vector2d p = seed;
  const int max_steps = 4096;
  for (int i = 0; i < max_steps; ++i) {
    Vector2d dir = rot90(h.gradient(p)).normalized();
    p = project_to_level(h, p + step * dir, level);
    if (int(pts.size()) > 16 && (p - seed).norm() < 0.6 * step) break;
    pts.push_back(p);
    if (i == max_steps - 1) throw SolverError("level curve: trace failed to close");
  }

  // resample the traced loop at n uniform chord lengths, then refit and
  // project a few times so the nodes settle onto the level set
  const int m = int(pts.size());
  Vec cum(m + 1);
  cum[0] = 0.0;
  for (int i = 0; i < m; ++i) cum[i + 1] = cum[i] + (pts[(i + 1) % m] - pts[i]).norm();
  Mat samples(n, 2);
  for (int i = 0; i < n; ++i) {
    double target = cum[m] * double(i) / n;
    int seg = int(std::upper_bound(cum.data(), cum.data() + m + 1, target) - cum.data()) - 1;
    seg = std::min(seg, m - 1);
    double w = (target - cum[seg]) / (cum[seg + 1] - cum[seg]);
    Vector2d q = (1.0 - w) * pts[seg] + w * pts[(seg + 1) % m];
    q = project_to_level(h, q, level);
    samples.row(i) = q.transpose();
  }

  ClosedCurve curve = ClosedCurve::from_points(samples, n);
  for (int round = 0; round < 3; ++round) {
    Mat nodes = curve.nodes();
    for (int i = 0; i < n; ++i) {
      Vector2d q = project_to_level(h, Vector2d(nodes(i, 0), nodes(i, 1)), level);
      nodes.row(i) = q.transpose();
    }
    curve = ClosedCurve::from_points(nodes, n);
  }

  Mat nodes = curve.nodes();
  for (int i = 0; i < n; ++i) {
    double defect = std::abs(h.value(Vector2d(nodes(i, 0), nodes(i, 1))) - level);
    if (defect > 1e-9) throw SolverError("level curve: nodes failed to settle on the level set");
  }
  return curve;
}

// ---------------------------------------------------------------------------
// SplitDomain

SplitDomain SplitDomain::with_interface(const DomainSpec& domain, ClosedCurve gamma,
                                        bool with_dtn) {
  SplitDomain sd;
  sd.domain = domain;
  sd.conformal = conformal_potential(domain);
  sd.gamma = std::move(gamma);
  sd.delta0 = tube_width(sd.gamma, domain);
  sd.plus = std::make_shared<RegionSolver>(domain.outer, sd.gamma);
  sd.minus = std::make_shared<RegionSolver>(sd.gamma, domain.inner);
  sd.wgamma_plus = harmonic_measure(*sd.plus, kGammaInPlus);
  sd.wgamma_minus = harmonic_measure(*sd.minus, kGammaInMinus);
  sd.dn_wgamma_plus = sd.wgamma_plus.inward_normal_derivative(kGammaInPlus);
  sd.dn_wgamma_minus = sd.wgamma_minus.inward_normal_derivative(kGammaInMinus);
  if (with_dtn) {
    sd.dtn_plus = std::make_shared<DtNOperator>(dtn_operator(*sd.plus, kGammaInPlus));
    sd.dtn_minus = std::make_shared<DtNOperator>(dtn_operator(*sd.minus, kGammaInMinus));
  }
  return sd;
}

SplitDomain SplitDomain::build(const DomainSpec& domain, int n_gamma, bool with_dtn) {
  ConformalData cd = conformal_potential(domain);
  ClosedCurve gamma = extract_level_curve(cd.h, domain, 0.5, n_gamma);
  SplitDomain sd = with_interface(domain, std::move(gamma), with_dtn);
  sd.conformal = std::move(cd);
  return sd;
}

// ---------------------------------------------------------------------------
// reflection battery

namespace {

Vec random_trig(int n, int max_mode, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec f = Vec::Zero(n);
  for (int k = 0; k <= max_mode; ++k) {
    double a = gauss(rng), b = k == 0 ? 0.0 : gauss(rng);
    for (int j = 0; j < n; ++j) {
      double th = kTwoPi * j / n;
      f[j] += a * std::cos(k * th) + b * std::sin(k * th);
    }
  }
  return f / f.cwiseAbs().maxCoeff();
}

}  // namespace

ReflectionReport verify_reflection(const SplitDomain& sd, int trials, std::uint64_t seed) {
  if (!sd.dtn_plus || !sd.dtn_minus)
    throw ArgumentError("reflection battery needs the DtN operators");
  std::mt19937_64 rng(seed);
  const int n = sd.gamma.size();
  const int max_mode = std::min(8, n / 4);

  ReflectionReport rep;
  rep.trials = trials;
  Vec zero_out = Vec::Zero(sd.domain.outer.size());
  Vec zero_in = Vec::Zero(sd.domain.inner.size());

  std::vector<Vec> battery;
  for (int m = 0; m < trials; ++m) battery.push_back(random_trig(n, max_mode, rng));

  for (const Vec& g : battery) {
    HarmonicField up = sd.plus->solve(zero_out, g);
    HarmonicField um = sd.minus->solve(g, zero_in);
    Vec dp = up.inward_normal_derivative(SplitDomain::kGammaInPlus);
    Vec dm = um.inward_normal_derivative(SplitDomain::kGammaInMinus);
    rep.neumann_defect = std::max(rep.neumann_defect, (dp + dm).cwiseAbs().maxCoeff());
    rep.scale = std::max({rep.scale, dp.cwiseAbs().maxCoeff(), dm.cwiseAbs().maxCoeff()});

    Vec q = random_trig(n, max_mode, rng);
    Vec gp = sd.dtn_plus->invert(q);
    Vec gm = sd.dtn_minus->invert(-q);
    rep.trace_defect = std::max(rep.trace_defect, (gp - gm).cwiseAbs().maxCoeff());
  }

  // negative control: the same Dirichlet battery across a bent interface
  {
    Mat nodes = sd.gamma.nodes();
    Mat normals = sd.gamma.normals();
    const double amp = 0.02 * sd.gamma.length() / kTwoPi;
    Mat bent = nodes;
    for (int i = 0; i < n; ++i) {
      double th = kTwoPi * i / n;
      bent.row(i) += amp * std::cos(2.0 * th) * normals.row(i);
    }
    SplitDomain bent_sd =
        SplitDomain::with_interface(sd.domain, ClosedCurve::from_points(bent, n), false);
    for (const Vec& g : battery) {
      HarmonicField up = bent_sd.plus->solve(zero_out, g);
      HarmonicField um = bent_sd.minus->solve(g, zero_in);
      Vec dp = up.inward_normal_derivative(SplitDomain::kGammaInPlus);
      Vec dm = um.inward_normal_derivative(SplitDomain::kGammaInMinus);
      rep.control_neumann_defect =
          std::max(rep.control_neumann_defect, (dp + dm).cwiseAbs().maxCoeff());
    }
  }
  return rep;
}

}  // namespace gelap
