#include "gelap/matching.hpp"

#include <cmath>

#include "gelap/errors.hpp"
#include "gelap/fourier.hpp"

namespace gelap {

namespace {

const double kSqrt2 = std::sqrt(2.0);

double rel_gap(const Vec& a, const Vec& b) {
  const double scale =
      std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  if (scale < 1e-300) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

// Dirichlet re-solve of gamma data into real fields on both sides; the zero
// data sits on the remaining boundary component of each region.
SidePair dirichlet_pair(const SplitDomain& sd, const Vec& g_plus,
                        const Vec& g_minus) {
  SidePair p;
  p.plus = sd.plus->solve(Vec::Zero(sd.plus->nodes(0)), g_plus);
  p.minus = sd.minus->solve(g_minus, Vec::Zero(sd.minus->nodes(1)));
  p.trace_plus = g_plus;
  p.trace_minus = g_minus;
  p.dn_plus = p.plus.inward_normal_derivative(SplitDomain::kGammaInPlus);
  p.dn_minus = p.minus.inward_normal_derivative(SplitDomain::kGammaInMinus);
  return p;
}

// Neumann data -> NtD trace -> Dirichlet re-solve. dn_* then reports the
// round trip through the solver, not the prescribed data.
SidePair neumann_pair(const SplitDomain& sd, const Vec& q_plus,
                      const Vec& q_minus) {
  if (!sd.dtn_plus || !sd.dtn_minus)
    throw SolverError("matching needs the DtN operators of the split domain");
  return dirichlet_pair(sd, sd.dtn_plus->invert(q_plus),
                        sd.dtn_minus->invert(q_minus));
}

void check_hopf(const SplitDomain& sd) {
  for (int i = 0; i < sd.gamma.size(); ++i)
    if (!(sd.dn_wgamma_plus[i] > 0.0) || !(-sd.dn_wgamma_minus[i] > 0.0))
      throw MatchingError(
          "harmonic-measure normal derivative violates Hopf positivity on "
          "gamma");
}

// relative side gap beyond which the two +- expressions no longer describe
// one field
constexpr double kSideTol = 1e-6;

}  // namespace

Gamma1Result solve_gamma1(double lambda) {
  if (!(lambda > 0.0) || !(lambda < 0.05))
    throw ArgumentError("gamma1 is defined for 0 < lambda < 0.05");
  const double a = 2.0 * std::log(kSqrt2 / lambda);

  Gamma1Result r;
  r.asymptote = a + 2.0 * std::log(std::log(kSqrt2 / lambda)) +
                2.0 * std::log(2.0);

  double g = a + 2.0 * std::log(2.0 * std::log(kSqrt2 / lambda));
  for (int it = 0; it < 60; ++it) {
    const double res = a + 2.0 * std::log(g) - g;
    const double step = res / (2.0 / g - 1.0);
    g -= step;
    r.iterations = it + 1;
    if (std::abs(step) < 1e-14 * g) break;
  }
  r.gamma1 = g;
  r.defect = std::abs(a + 2.0 * std::log(g) - g);
  return r;
}

ScaleField compute_mu(const SplitDomain& sd, double lambda, double gamma1) {
  check_hopf(sd);
  Vec lm_plus = (gamma1 / kSqrt2) * sd.dn_wgamma_plus;
  Vec lm_minus = -(gamma1 / kSqrt2) * sd.dn_wgamma_minus;

  ScaleField out;
  out.side_gap = rel_gap(lm_plus, lm_minus);
  out.mu = (0.5 / lambda) * (lm_plus + lm_minus);
  const double ell = sd.gamma.length();
  out.mu_s = spectral_derivative(out.mu, ell);
  out.mu_ss = spectral_derivative(out.mu, ell, 2);
  return out;
}

SidePair build_w0(const SplitDomain& sd) {
  Vec q = 2.0 * sd.gamma.curvature();
  return neumann_pair(sd, q, q);
}

SidePair build_w1(const SplitDomain& sd) {
  check_hopf(sd);
  const int n = sd.gamma.size();
  Vec g(n);
  for (int i = 0; i < n; ++i)
    g[i] = std::log(sd.dn_wgamma_plus[i]) + std::log(-sd.dn_wgamma_minus[i]);
  return dirichlet_pair(sd, g, g);
}

SidePair build_w2(const SplitDomain& sd, double gamma1, const SidePair& w1) {
  const int n = sd.gamma.size();
  Vec g(n);
  for (int i = 0; i < n; ++i) {
    const double gp = w1.dn_plus[i] / sd.dn_wgamma_plus[i];
    const double gm = w1.dn_minus[i] / sd.dn_wgamma_minus[i];
    g[i] = (1.0 / gamma1) * (gp + gm);
  }
  return dirichlet_pair(sd, g, g);
}

SidePair build_w3(const SplitDomain& sd, double lambda, double gamma1,
                  const ScaleField& scale, const Vec& f1, const SidePair& w1,
                  const LayerFormConstants& table) {
  (void)gamma1;
  const int n = sd.gamma.size();
  const double ell = sd.gamma.length();
  Vec k = sd.gamma.curvature();
  Vec f1s = spectral_derivative(f1, ell);
  Vec f1ss = spectral_derivative(f1, ell, 2);

  Vec q(n);
  for (int i = 0; i < n; ++i) {
    const double lm = lambda * scale.mu[i];
    const double musr = scale.mu_s[i] / scale.mu[i];
    const double mussr = scale.mu_ss[i] / scale.mu[i];
    const double common = 2.0 * mussr * f1[i] - 2.0 * musr * musr * f1[i] -
                          2.0 * k[i] * k[i] * f1[i] + table.fss * f1ss[i] +
                          table.mus_fs * musr * f1s[i] +
                          table.k2_f * k[i] * k[i] * f1[i];
    const double dp = w1.dn_plus[i];
    const double dm = w1.dn_minus[i];
    const double qp =
        common +
        (table.k_d1 * k[i] / lm) * (-dp / kSqrt2 - k[i] * lm * f1[i]) +
        (table.d1_e1 / lm) *
            (lm * f1[i] * dp * dp / kSqrt2 +
             1.5 * k[i] * lm * lm * f1[i] * f1[i] * dp +
             k[i] * k[i] * lm * lm * lm * f1[i] * f1[i] * f1[i] / kSqrt2);
    const double qm =
        common +
        (table.k_d1 * k[i] / lm) * (dm / kSqrt2 - k[i] * lm * f1[i]) +
        (table.d1_e1 / lm) *
            (lm * f1[i] * dm * dm / kSqrt2 -
             1.5 * k[i] * lm * lm * f1[i] * f1[i] * dm +
             k[i] * k[i] * lm * lm * lm * f1[i] * f1[i] * f1[i] / kSqrt2);
    q[i] = 0.5 * (qp + qm);
  }
  return neumann_pair(sd, q, q);
}

FPair compute_f(const SplitDomain& sd, double lambda, const ScaleField& scale,
                const SidePair& w0, const SidePair& w3) {
  const int n = sd.gamma.size();
  Vec fp(n), fm(n);
  for (int i = 0; i < n; ++i) {
    const double lm = lambda * scale.mu[i];
    fp[i] = -(w0.trace_plus[i] + w3.trace_plus[i]) / (kSqrt2 * lm);
    fm[i] = (w0.trace_minus[i] + w3.trace_minus[i]) / (kSqrt2 * lm);
  }
  FPair out;
  out.side_gap = rel_gap(fp, fm);
  out.f = 0.5 * (fp + fm);
  const double ell = sd.gamma.length();
  out.f_s = spectral_derivative(out.f, ell);
  out.f_ss = spectral_derivative(out.f, ell, 2);
  return out;
}

Delta1E1 compute_delta1_e1(const SplitDomain& sd, double lambda,
                           const ScaleField& scale, const Vec& f,
                           const SidePair& w1) {
  const int n = sd.gamma.size();
  Vec k = sd.gamma.curvature();
  Vec d1p(n), d1m(n);
  for (int i = 0; i < n; ++i) {
    const double lm = lambda * scale.mu[i];
    d1p[i] = -k[i] * lm * f[i] - w1.dn_plus[i] / kSqrt2;
    d1m[i] = -k[i] * lm * f[i] + w1.dn_minus[i] / kSqrt2;
  }
  Delta1E1 out;
  out.side_gap = rel_gap(d1p, d1m);
  if (out.side_gap > kSideTol)
    throw MatchingError("the two sides disagree on delta1");
  out.delta1 = 0.5 * (d1p + d1m);
  out.e1.resize(n);
  for (int i = 0; i < n; ++i) {
    const double lmf = lambda * scale.mu[i] * f[i];
    out.e1[i] = k[i] * lmf * lmf / kSqrt2 + kSqrt2 * out.delta1[i] * lmf;
  }
  return out;
}

Delta2E2 compute_delta2_e2(const SplitDomain& sd, double lambda,
                           const ScaleField& scale, const FPair& fp,
                           const Delta1E1& first, const SidePair& w2) {
  const int n = sd.gamma.size();
  Vec k = sd.gamma.curvature();
  Vec d2p(n), d2m(n);
  for (int i = 0; i < n; ++i) {
    const double lm = lambda * scale.mu[i];
    const double musr = scale.mu_s[i] / scale.mu[i];
    const double mussr = scale.mu_ss[i] / scale.mu[i];
    const double f = fp.f[i];
    const double common = -0.5 * mussr * f * f +
                          first.delta1[i] * k[i] * f / lm -
                          2.0 * musr * fp.f_s[i] * f - fp.f_ss[i] * f;
    d2p[i] = common - w2.dn_plus[i] / (kSqrt2 * lm);
    d2m[i] = common + w2.dn_minus[i] / (kSqrt2 * lm);
  }
  Delta2E2 out;
  out.side_gap = rel_gap(d2p, d2m);
  if (out.side_gap > kSideTol)
    throw MatchingError("the two sides disagree on delta2");
  out.delta2 = 0.5 * (d2p + d2m);
  out.e2.resize(n);
  for (int i = 0; i < n; ++i) {
    const double lm = lambda * scale.mu[i];
    const double f = fp.f[i];
    const double f2 = f * f;
    out.e2[i] = -(kSqrt2 / 3.0) * lm * k[i] * k[i] * f2 * f +
                (kSqrt2 / 6.0) * lambda * scale.mu_ss[i] * f2 * f -
                first.delta1[i] * k[i] * f2 / kSqrt2 +
                kSqrt2 * lambda * scale.mu_s[i] * fp.f_s[i] * f2 +
                lm * fp.f_ss[i] * f2 / kSqrt2 +
                lm * k[i] * k[i] * f2 * f / kSqrt2 +
                kSqrt2 * out.delta2[i] * lm * f;
  }
  return out;
}

SidePair build_w4(const SplitDomain& sd, double lambda, const ScaleField& scale,
                  const FPair& fp, const Delta1E1& first,
                  const Delta2E2& second, const LayerFormConstants& table) {
  const int n = sd.gamma.size();
  Vec k = sd.gamma.curvature();
  Vec g(n);
  for (int i = 0; i < n; ++i) {
    const double lm = lambda * scale.mu[i];
    const double musr = scale.mu_s[i] / scale.mu[i];
    const double mussr = scale.mu_ss[i] / scale.mu[i];
    const double f = fp.f[i];
    const double d1 = first.delta1[i];
    const double e1 = first.e1[i];
    g[i] = -mussr * f * f + musr * musr * f * f + k[i] * k[i] * f * f -
           table.fss * fp.f_ss[i] * f - table.mus_fs * musr * fp.f_s[i] * f -
           table.k_d1 * d1 * k[i] * f / lm - table.k2_f * k[i] * k[i] * f * f -
           table.d1_e1 * d1 * e1 * f / lm + table.fs_fs * fp.f_s[i] * fp.f_s[i] +
           (table.muss * mussr + table.k_k * k[i] * k[i] +
            table.d1_d1 * d1 * d1 + table.e1_e1 * e1 * e1 +
            table.k_e1 * k[i] * e1) /
               (lm * lm) -
           2.0 * second.delta2[i];
  }
  return dirichlet_pair(sd, g, g);
}

Vec displacement_remainder(const SplitDomain& sd, double lambda,
                           const ScaleField& scale, const Vec& f, const Vec& f1,
                           const SidePair& w1, const LayerFormConstants& table) {
  const int n = sd.gamma.size();
  const double ell = sd.gamma.length();
  Vec k = sd.gamma.curvature();
  Vec h = f - f1;
  Vec hs = spectral_derivative(h, ell);
  Vec hss = spectral_derivative(h, ell, 2);

  Vec r(n);
  for (int i = 0; i < n; ++i) {
    const double lm = lambda * scale.mu[i];
    const double musr = scale.mu_s[i] / scale.mu[i];
    const double mussr = scale.mu_ss[i] / scale.mu[i];
    const double k2 = k[i] * k[i];
    const double cubic =
        h[i] * h[i] * h[i] + 3.0 * f1[i] * h[i] * h[i] + 3.0 * f1[i] * f1[i] * h[i];
    const double common =
        (-2.0 * mussr * h[i] + 2.0 * musr * musr * h[i] + 2.0 * k2 * h[i] -
         table.fss * hss[i] - table.mus_fs * musr * hs[i] +
         table.k_d1 * k2 * h[i] - table.k2_f * k2 * h[i]) /
            lm -
        (table.d1_e1 / kSqrt2) * k2 * lm * cubic;
    const double quad = 1.5 * table.d1_e1 * k[i] *
                        (2.0 * f1[i] * h[i] + h[i] * h[i]);
    const double rp = common - quad * w1.dn_plus[i];
    const double rm = common + quad * w1.dn_minus[i];
    r[i] = 0.5 * (rp + rm);
  }
  return r;
}

MatchedData build_matching(const SplitDomain& sd, double lambda) {
  ProfileGrid grid = ProfileGrid::make(ProfileGrid::default_half_width(0.0));
  return build_matching(sd, lambda, tabulate_layer_constants(grid));
}

MatchedData build_matching(const SplitDomain& sd, double lambda,
                           const LayerFormConstants& table) {
  MatchedData md;
  md.lambda = lambda;
  md.table = table;
  md.gamma1 = solve_gamma1(lambda);
  md.curvature = sd.gamma.curvature();
  md.curvature_s = sd.gamma.curvature_derivative();

  ScaleField scale = compute_mu(sd, lambda, md.gamma1.gamma1);
  md.mu = scale.mu;
  md.mu_s = scale.mu_s;
  md.mu_ss = scale.mu_ss;
  md.mu_gap = scale.side_gap;

  md.w0 = build_w0(sd);
  md.w1 = build_w1(sd);
  md.w2 = build_w2(sd, md.gamma1.gamma1, md.w1);

  const int n = sd.gamma.size();
  Vec f1p(n), f1m(n);
  for (int i = 0; i < n; ++i) {
    const double lm = lambda * scale.mu[i];
    f1p[i] = -md.w0.trace_plus[i] / (kSqrt2 * lm);
    f1m[i] = md.w0.trace_minus[i] / (kSqrt2 * lm);
  }
  md.f1 = 0.5 * (f1p + f1m);

  md.w3 = build_w3(sd, lambda, md.gamma1.gamma1, scale, md.f1, md.w1, table);

  FPair fp = compute_f(sd, lambda, scale, md.w0, md.w3);
  md.f = fp.f;
  md.f_s = fp.f_s;
  md.f_ss = fp.f_ss;
  md.f_gap = fp.side_gap;

  Delta1E1 first = compute_delta1_e1(sd, lambda, scale, md.f, md.w1);
  md.delta1 = first.delta1;
  md.e1 = first.e1;
  md.delta1_gap = first.side_gap;

  Delta2E2 second = compute_delta2_e2(sd, lambda, scale, fp, first, md.w2);
  md.delta2 = second.delta2;
  md.e2 = second.e2;
  md.delta2_gap = second.side_gap;

  md.w4 = build_w4(sd, lambda, scale, fp, first, second, table);
  md.r_defect =
      displacement_remainder(sd, lambda, scale, md.f, md.f1, md.w1, table);
  return md;
}

double OuterField::value(const Vector2d& p) const {
  double v = gamma2 * wgamma.value(p);
  for (const auto& part : parts) v += part.value(p);
  return v;
}

Vector2d OuterField::gradient(const Vector2d& p) const {
  Vector2d g = gamma2 * wgamma.gradient(p);
  for (const auto& part : parts) g += part.gradient(p);
  return g;
}

OuterPair assemble_outer(const SplitDomain& sd, const MatchedData& md) {
  OuterPair out;
  const int n = sd.gamma.size();
  const double g2 = md.gamma1.gamma1;

  out.plus.side = +1;
  out.plus.gamma2 = g2;
  out.plus.wgamma = sd.wgamma_plus;
  out.plus.parts = {md.w0.plus, md.w1.plus, md.w2.plus, md.w3.plus,
                    md.w4.plus};
  out.plus.trace = g2 * Vec::Ones(n) + md.w0.trace_plus + md.w1.trace_plus +
                   md.w2.trace_plus + md.w3.trace_plus + md.w4.trace_plus;
  out.plus.dn = g2 * sd.dn_wgamma_plus + md.w0.dn_plus + md.w1.dn_plus +
                md.w2.dn_plus + md.w3.dn_plus + md.w4.dn_plus;
  out.plus.jet = boundary_jet(sd.gamma, out.plus.trace, out.plus.dn);
  out.plus.jet4 = fourth_t_derivative(sd.gamma, out.plus.jet);

  out.minus.side = -1;
  out.minus.gamma2 = g2;
  out.minus.wgamma = sd.wgamma_minus;
  out.minus.parts = {md.w0.minus, md.w1.minus, md.w2.minus, md.w3.minus,
                     md.w4.minus};
  out.minus.trace = g2 * Vec::Ones(n) + md.w0.trace_minus + md.w1.trace_minus +
                    md.w2.trace_minus + md.w3.trace_minus + md.w4.trace_minus;
  out.minus.dn = g2 * sd.dn_wgamma_minus + md.w0.dn_minus + md.w1.dn_minus +
                 md.w2.dn_minus + md.w3.dn_minus + md.w4.dn_minus;
  out.minus.jet = boundary_jet(sd.gamma, out.minus.trace, out.minus.dn);
  out.minus.jet4 = fourth_t_derivative(sd.gamma, out.minus.jet);
  return out;
}

}  // namespace gelap
