#include "gelap/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "gelap/errors.hpp"

namespace gelap {

namespace {

constexpr double kPi = 3.14159265358979323846;

double bump(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

// 8-point stencil of uniform grid nodes around x with barycentric weights
// (-1)^i C(7,i) / (x - x_i). A hit within 1e-12 h of a node short-circuits
// to that node's value.
struct XStencil {
  int k0 = 0;
  int hit = -1;
  double b[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  double bsum = 0.0;
};

XStencil make_stencil(const ProfileGrid& g, double x) {
  static const double kBin[8] = {1.0, -7.0, 21.0, -35.0, 35.0, -21.0, 7.0, -1.0};
  XStencil st;
  int k0 = static_cast<int>(std::floor((x - g.x[0]) / g.h)) - 3;
  st.k0 = std::clamp(k0, 0, g.n - 8);
  for (int i = 0; i < 8; ++i) {
    double d = x - g.x[st.k0 + i];
    if (std::abs(d) < 1e-12 * g.h) {
      st.hit = i;
      return st;
    }
    st.b[i] = kBin[i] / d;
    st.bsum += st.b[i];
  }
  return st;
}

double bary(const XStencil& st, const double g[8]) {
  if (st.hit >= 0) return g[st.hit];
  double num = 0.0;
  for (int i = 0; i < 8; ++i) num += st.b[i] * g[i];
  return num / st.bsum;
}

}  // namespace

double smooth_step(double tau) {
  if (tau <= 0.0) return 0.0;
  if (tau >= 1.0) return 1.0;
  double a = bump(tau), b = bump(1.0 - tau);
  return a / (a + b);
}

double smooth_step_d(double tau) {
  if (tau <= 0.0 || tau >= 1.0) return 0.0;
  double a = bump(tau), b = bump(1.0 - tau);
  double ad = a / (tau * tau);
  double bd = -b / ((1.0 - tau) * (1.0 - tau));
  double s = a + b;
  return (ad * b - a * bd) / (s * s);
}

double smooth_step_dd(double tau) {
  if (tau <= 0.0 || tau >= 1.0) return 0.0;
  double a = bump(tau), b = bump(1.0 - tau);
  double t2 = tau * tau, t3 = t2 * tau, t4 = t2 * t2;
  double v = 1.0 - tau, v2 = v * v, v3 = v2 * v, v4 = v2 * v2;
  double ad = a / t2, bd = -b / v2;
  double add = a * (1.0 / t4 - 2.0 / t3);
  double bdd = b * (1.0 / v4 - 2.0 / v3);
  double s = a + b;
  return (add * b - a * bdd) / (s * s) -
         2.0 * (ad * b - a * bd) * (ad + bd) / (s * s * s);
}

double CutoffSpec::eta(double t) const {
  return smooth_step((std::abs(t) - r1) / (r2 - r1));
}

double CutoffSpec::eta_t(double t) const {
  double w = r2 - r1;
  double d = smooth_step_d((std::abs(t) - r1) / w) / w;
  return t >= 0.0 ? d : -d;
}

double CutoffSpec::eta_tt(double t) const {
  double w = r2 - r1;
  return smooth_step_dd((std::abs(t) - r1) / w) / (w * w);
}

CutoffSpec scaled_cutoff(double lambda, int m, int m_rate) {
  if (!(lambda > 0.0) || lambda >= 0.05)
    throw ArgumentError("scaled_cutoff needs 0 < lambda < 0.05");
  if (m < 1) throw ArgumentError("scaled_cutoff needs a band multiplier >= 1");
  double big = std::log(1.0 / lambda);
  double q = std::log(big) / big;
  CutoffSpec c;
  c.r1 = m * q;
  c.r2 = 2.0 * c.r1;
  c.m = m;
  c.in_regime = m >= m_rate;
  return c;
}

CutoffSpec fallback_cutoff(double reach, double lambda_mu_min, double f_sup) {
  if (!(reach > 0.0) || !(lambda_mu_min > 0.0))
    throw ArgumentError("fallback_cutoff needs positive reach and scale");
  CutoffSpec c;
  c.r2 = 0.95 * reach;
  double need = f_sup + 2.5 / lambda_mu_min;
  if (need > 0.85 * c.r2) {
    std::ostringstream os;
    os << "no blend band clears the boundary layer: the layer needs |t| up to "
       << need << " but the reach allows r1 <= " << 0.85 * c.r2
       << "; use a smaller lambda";
    throw BandError(os.str());
  }
  c.r1 = std::clamp(need, 0.5 * c.r2, 0.85 * c.r2);
  c.m = 0.0;
  c.in_regime = false;
  return c;
}

double band_reach(const SplitDomain& sd) {
  double kmax = sd.gamma.curvature().cwiseAbs().maxCoeff();
  double focal = kmax > 1e-12 ? 1.0 / kmax : 1e12;
  double gap_plus = curve_distance(sd.gamma, sd.domain.outer);
  double gap_minus = curve_distance(sd.gamma, sd.domain.inner);
  return 0.95 * std::min({focal, gap_plus, gap_minus});
}

BandChoice choose_m(double lambda, double reach, double rate_c) {
  if (!(lambda > 0.0) || lambda >= 0.05)
    throw ArgumentError("choose_m needs 0 < lambda < 0.05");
  if (!(rate_c > 0.0)) throw ArgumentError("choose_m needs a positive decay rate");
  double big = std::log(1.0 / lambda);
  double q = std::log(big) / big;
  BandChoice bc;
  bc.reach = reach;
  bc.m_rate = std::max(4, static_cast<int>(std::ceil(2.0 / rate_c - 1e-12)));
  bc.m_max = static_cast<int>(std::floor(reach / (2.0 * q) + 1e-12));
  if (bc.m_max < 1) {
    std::ostringstream os;
    os << "lambda too large for the interface tube: the smallest scaled band "
          "needs |t| up to "
       << 2.0 * q << " but the reach is " << reach
       << "; use a smaller lambda or the fallback band";
    throw BandError(os.str());
  }
  bc.m = std::min(bc.m_rate, bc.m_max);
  return bc;
}

BandWindow band_window(double lambda, int m) {
  double big = std::log(1.0 / lambda);
  double q = std::log(big) / big;
  return {m * q, 2.0 * m * q};
}

Vec InnerApprox::weights(double s) const {
  double s0 = std::fmod(s, ell_);
  if (s0 < 0.0) s0 += ell_;
  double theta = 2.0 * kPi * s0 / ell_;
  Vec w(n_);
  for (int j = 0; j < n_; ++j) {
    double phi = theta - 2.0 * kPi * j / n_;
    double sp = std::sin(0.5 * phi);
    if (std::abs(sp) < 1e-13) {
      w[j] = 1.0;
    } else {
      w[j] = std::sin(0.5 * n_ * phi) * std::cos(0.5 * phi) / (n_ * sp);
    }
  }
  return w;
}

void InnerApprox::correction_at(int which, const Vec& w, double x, bool with_jet,
                                double out[6]) const {
  XStencil st = make_stencil(grid_, x);
  const Mat* tables[6] = {&val_[which], &dx_[which],    &dxx_[which],
                          &val_s_[which], &val_ss_[which], &dx_s_[which]};
  int nt = with_jet ? 6 : 1;
  for (int m = 0; m < nt; ++m) {
    double g[8];
    if (st.hit >= 0) {
      out[m] = w.dot(tables[m]->col(st.k0 + st.hit));
      continue;
    }
    for (int i = 0; i < 8; ++i) g[i] = w.dot(tables[m]->col(st.k0 + i));
    out[m] = bary(st, g);
  }
}

double InnerApprox::x_of(double s, double t) const {
  Vec w = weights(s);
  double mu = w.dot(mu_);
  double f = w.dot(f_);
  return lambda_ * mu * (t - f);
}

double InnerApprox::t_reach() const {
  double lm_max = lambda_ * mu_.maxCoeff();
  double f_sup = f_.cwiseAbs().maxCoeff();
  return grid_.X / lm_max - f_sup;
}

double InnerApprox::value(double s, double t) const {
  Vec w = weights(s);
  double mu = w.dot(mu_);
  double f = w.dot(f_);
  double x = lambda_ * mu * (t - f);
  if (std::abs(x) > grid_.X) {
    std::ostringstream os;
    os << "layer evaluation at s = " << s << ", t = " << t
       << " maps to |x| = " << std::abs(x)
       << " beyond the tabulated half-width " << grid_.X;
    throw ProfileError(os.str());
  }
  double p1[6], p2[6];
  correction_at(0, w, x, false, p1);
  correction_at(1, w, x, false, p2);
  return 2.0 * std::log(mu) + v0(x) + p1[0] + p2[0];
}

InnerJet InnerApprox::jet(double s, double t) const {
  Vec w = weights(s);
  double mu = w.dot(mu_);
  double mus = w.dot(mu_s_);
  double muss = w.dot(mu_ss_);
  double f = w.dot(f_);
  double fs = w.dot(f_s_);
  double fss = w.dot(f_ss_);
  double lm = lambda_ * mu;
  double x = lm * (t - f);
  if (std::abs(x) > grid_.X) {
    std::ostringstream os;
    os << "layer jet at s = " << s << ", t = " << t << " maps to |x| = "
       << std::abs(x) << " beyond the tabulated half-width " << grid_.X;
    throw ProfileError(os.str());
  }

  double p1[6], p2[6];
  correction_at(0, w, x, true, p1);
  correction_at(1, w, x, true, p2);

  double v = v0(x), vx = v0_x(x), vxx = -ev0(x);
  double F_x = vx + p1[1] + p2[1];
  double F_xx = vxx + p1[2] + p2[2];
  double F_s = p1[3] + p2[3];
  double F_ss = p1[4] + p2[4];
  double F_sx = p1[5] + p2[5];

  double r = mus / mu;
  double xs = r * x - lm * fs;
  double xss = (muss / mu) * x - 2.0 * lambda_ * mus * fs - lm * fss;

  InnerJet j;
  j.x = x;
  j.lambda_mu = lm;
  j.core = v;
  j.corr1 = p1[0];
  j.corr2 = p2[0];
  j.u = 2.0 * std::log(mu) + v + p1[0] + p2[0];
  j.ut = F_x * lm;
  j.utt = F_xx * lm * lm;
  j.us = 2.0 * r + F_s + F_x * xs;
  j.uss = 2.0 * (muss / mu - r * r) + F_ss + 2.0 * F_sx * xs + F_xx * xs * xs +
          F_x * xss;
  return j;
}

InnerApprox build_inner(const SplitDomain& sd, const MatchedData& md,
                        const LayerCorrection& phi1,
                        const LayerCorrection& phi2) {
  if (phi1.grid.n != phi2.grid.n ||
      std::abs(phi1.grid.X - phi2.grid.X) > 1e-12)
    throw ArgumentError("layer corrections live on different grids");
  int n = sd.gamma.size();
  if (phi1.nodes() != n || phi2.nodes() != n ||
      static_cast<int>(md.mu.size()) != n)
    throw ArgumentError("node count mismatch between curve and layer data");

  InnerApprox ia;
  ia.grid_ = phi1.grid;
  ia.ell_ = sd.gamma.length();
  ia.lambda_ = md.lambda;
  ia.n_ = n;
  ia.mu_ = md.mu;
  ia.mu_s_ = md.mu_s;
  ia.mu_ss_ = md.mu_ss;
  ia.f_ = md.f;
  ia.f_s_ = md.f_s;
  ia.f_ss_ = md.f_ss;

  const LayerCorrection* lc[2] = {&phi1, &phi2};
  for (int c = 0; c < 2; ++c) {
    // store node-major so an x-stencil reads contiguous columns
    ia.val_[c] = lc[c]->val.transpose();
    ia.dx_[c] = lc[c]->dx.transpose();
    ia.dxx_[c] = lc[c]->dxx.transpose();
    int gn = ia.grid_.n;
    ia.val_s_[c].resize(n, gn);
    ia.val_ss_[c].resize(n, gn);
    ia.dx_s_[c].resize(n, gn);
    for (int jcol = 0; jcol < gn; ++jcol) {
      Vec col = ia.val_[c].col(jcol);
      ia.val_s_[c].col(jcol) = spectral_derivative(col, ia.ell_, 1);
      ia.val_ss_[c].col(jcol) = spectral_derivative(col, ia.ell_, 2);
      Vec dcol = ia.dx_[c].col(jcol);
      ia.dx_s_[c].col(jcol) = spectral_derivative(dcol, ia.ell_, 1);
    }
  }
  return ia;
}

UapEval GlobalApprox::evaluate(const Vector2d& y) const {
  if (!domain.contains(y))
    throw ArgumentError("approximate solution queried outside the domain");
  auto fp = chart.try_from_point(y);
  if (fp && std::abs(fp->t) < cut.r2) {
    UapEval ev;
    ev.has_chart = true;
    ev.s = fp->s;
    ev.t = fp->t;
    ev.side = fp->t > 0.0 ? -1 : +1;
    if (std::abs(fp->t) <= cut.r1) {
      ev.region = 0;
      ev.value = inner.value(fp->s, fp->t);
      return ev;
    }
    ev.region = 1;
    double u2 = inner.value(fp->s, fp->t);
    const OuterField& of = ev.side > 0 ? outer.plus : outer.minus;
    double e = cut.eta(fp->t);
    ev.value = u2 + e * (of.value(y) - u2);
    return ev;
  }
  UapEval ev;
  ev.region = 2;
  if (fp) {
    ev.has_chart = true;
    ev.s = fp->s;
    ev.t = fp->t;
    ev.side = fp->t > 0.0 ? -1 : +1;
  } else {
    ev.side = gamma.encloses(y) ? -1 : +1;
  }
  ev.value = (ev.side > 0 ? outer.plus : outer.minus).value(y);
  return ev;
}

double GlobalApprox::value(const Vector2d& y) const { return evaluate(y).value; }

GlobalApprox build_global(const SplitDomain& sd, const MatchedData& md,
                          const LayerCorrection& phi1,
                          const LayerCorrection& phi2, int m) {
  double reach = band_reach(sd);
  double big = std::log(1.0 / md.lambda);
  double q = std::log(big) / big;
  CutoffSpec cut;
  if (m > 0) {
    if (2.0 * m * q > reach) {
      std::ostringstream os;
      os << "requested band multiplier " << m << " needs |t| up to "
         << 2.0 * m * q << " but the reach is " << reach;
      throw BandError(os.str());
    }
    cut = scaled_cutoff(md.lambda, m);
  } else {
    try {
      BandChoice bc = choose_m(md.lambda, reach);
      cut = scaled_cutoff(md.lambda, bc.m, bc.m_rate);
    } catch (const BandError&) {
      double lm_min = md.lambda * md.mu.minCoeff();
      double f_sup = md.f.cwiseAbs().maxCoeff();
      cut = fallback_cutoff(reach, lm_min, f_sup);
    }
  }

  InnerApprox inner = build_inner(sd, md, phi1, phi2);
  double lm_max = md.lambda * md.mu.maxCoeff();
  double f_sup = md.f.cwiseAbs().maxCoeff();
  if (lm_max * (cut.r2 + f_sup) > inner.coverage()) {
    std::ostringstream os;
    os << "correction grid half-width " << inner.coverage()
       << " does not cover the blend band (needs "
       << lm_max * (cut.r2 + f_sup) << ")";
    throw ProfileError(os.str());
  }

  OuterPair op = assemble_outer(sd, md);
  FermiChart chart(sd.gamma, reach);
  return GlobalApprox(sd.domain, sd.gamma, std::move(chart), md,
                      std::move(inner), std::move(op), cut, reach);
}

}  // namespace gelap
