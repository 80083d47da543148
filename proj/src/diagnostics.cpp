// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

#include "listdec/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace listdec {

namespace {

constexpr double kExactSlack = 1e-6;  // relative slack for exact inequalities

void require_psd(const SymMatrix& m, const char* what) {
  EigResult e = eigh(m);
  const double top = e.values.empty() ? 0.0 : std::max(e.values.front(), 0.0);
  for (double v : e.values)
    require(v >= -1e-8 * std::max(top, 1.0), ErrorCode::NotPsd, what);
}

SymMatrix centered_covariance(const PointSet& pts,
                              const std::vector<std::size_t>& subset) {
  const int d = pts.dim();
  std::vector<double> mean(d, 0.0);
  for (std::size_t i : subset) {
    auto x = pts.row(i);
    for (int c = 0; c < d; ++c) mean[c] += x[c];
  }
  for (double& v : mean) v /= static_cast<double>(subset.size());
  SymMatrix cov(d);
  auto& raw = cov.raw();
  std::vector<double> delta(d);
  for (std::size_t i : subset) {
    auto x = pts.row(i);
    for (int c = 0; c < d; ++c) delta[c] = x[c] - mean[c];
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        raw[static_cast<std::size_t>(a) * d + b] += delta[a] * delta[b];
  }
  for (double& v : raw) v /= static_cast<double>(subset.size());
  return SymMatrix::from_dense(d, raw);
}

}  // namespace

double relative_frobenius_error(const SymMatrix& h, const SymMatrix& sigma,
                                double rank_tol_rel) {
  require(h.dim() == sigma.dim(), ErrorCode::InvalidArgument,
          "relative_frobenius_error: dim mismatch");
  require_psd(sigma, "relative_frobenius_error: Sigma not PSD");
  PsdFactorization f = psd_pseudo_factor(h, rank_tol_rel);
  SymMatrix whitened = sandwich(f.sqrt_pinv, sigma);
  whitened -= f.proj;
  return fro_norm(whitened);
}

InequalityCheck check_certificate_inequality(const PointSet& points,
                                             const std::vector<std::size_t>& subset,
                                             double alpha) {
  require(!points.empty(), ErrorCode::Empty, "check_certificate_inequality: empty");
  require(static_cast<double>(subset.size()) >=
              0.5 * alpha * static_cast<double>(points.size()),
          ErrorCode::SubsetTooSmall,
          "check_certificate_inequality: subset below (alpha/2) |points|");

  const SymMatrix h = second_moment(points);
  const PsdFactorization f = psd_pseudo_factor(h);
  const PointSet tilde = transform_points(f.sqrt_pinv, points);

  // tight solve: the inequality is exact only at the true top direction
  const LiftedEigResult lifted = lifted_top_eig(tilde, 0x5EEDULL, 4000, 1e-14);

  const SymMatrix second_t = second_moment(tilde);  // E_points[P x x^T P]
  SymMatrix dev = centered_covariance(tilde, subset);
  dev -= second_t;

  InequalityCheck out;
  const double fe = fro_norm(dev);
  out.lhs = fe * fe;
  const double var_a = lifted_variance_along(tilde, lifted.matrix_a);
  const double op = op_norm(second_t);
  out.rhs = (4.0 / alpha) * var_a + (8.0 / (alpha * alpha)) * op * op;
  out.holds = out.lhs <= out.rhs * (1.0 + kExactSlack);
  return out;
}

VarianceCheck check_gaussian_quadratic_variance(const GaussianParams& params,
                                                const SymMatrix& a,
                                                std::size_t n_mc,
                                                std::uint64_t seed) {
  require(n_mc >= 10000, ErrorCode::InvalidArgument,
          "check_gaussian_quadratic_variance: n_mc < 1e4");
  const int d = params.dim();
  const SymMatrix root = psd_sqrt(params.covariance);

  Rng rng(seed);
  std::vector<double> z(d), x(d);
  std::vector<double> ys(n_mc);
  double sum = 0.0;
  for (std::size_t t = 0; t < n_mc; ++t) {
    for (int i = 0; i < d; ++i) z[i] = rng.gaussian();
    for (int i = 0; i < d; ++i) {
      double s = params.mean[i];
      for (int j = 0; j < d; ++j) s += root(i, j) * z[j];
      x[i] = s;
    }
    ys[t] = quad_form(a, x);
    sum += ys[t];
  }
  const double n = static_cast<double>(n_mc);
  const double mean = sum / n;
  double ss = 0.0;  // two-pass: exact zero for constant samples
  for (double y : ys) ss += (y - mean) * (y - mean);
  VarianceCheck out;
  out.mc_variance = ss / (n - 1.0);

  const SymMatrix sas = sandwich(root, a);  // S^{1/2} A S^{1/2}
  const double f1 = fro_norm(sas);
  std::vector<double> am = sym_apply(a, params.mean);
  std::vector<double> sam = sym_apply(root, am);
  double n2 = 0.0;
  for (double v : sam) n2 += v * v;
  out.bound = 4.0 * f1 * f1 + 8.0 * n2;

  const double safety = 20.0;
  // absolute floor absorbs float dust when the bound is exactly zero
  out.holds = out.mc_variance <=
              out.bound * (1.0 + safety * 5.0 / std::sqrt(n)) +
                  1e-12 * (mean * mean + 1.0);
  return out;
}

InequalityCheck check_sigma_guarantee(const SymMatrix& a, const SymMatrix& b,
                                      double rank_tol_rel) {
  require(a.dim() == b.dim(), ErrorCode::InvalidArgument,
          "check_sigma_guarantee: dim mismatch");
  const PsdFactorization fa = psd_pseudo_factor(a, rank_tol_rel);
  const PsdFactorization fb = psd_pseudo_factor(b, rank_tol_rel);

  // ker(A) subset ker(B) iff Proj_B Proj_A = Proj_B
  SymMatrix nested = SymMatrix::from_dense(a.dim(), sym_mul_dense(fb.proj, fa.proj));
  nested -= fb.proj;
  require(fro_norm(nested) <= 1e-6 * std::max(1.0, fro_norm(fb.proj)),
          ErrorCode::KernelNotNested, "check_sigma_guarantee: ker(A) not in ker(B)");

  const SymMatrix aba = sandwich(a, b);
  InequalityCheck out;
  out.lhs = fro_norm(aba - fb.proj);
  out.rhs = fro_norm(aba - fa.proj);
  out.holds = out.lhs <= 2.0 * out.rhs * (1.0 + kExactSlack);
  return out;
}

InequalityCheck check_closeness_norm(const SymMatrix& sigma1, const SymMatrix& sigma2,
                                     const SymMatrix& h, const SymMatrix& sigma,
                                     double rho) {
  const int d = sigma1.dim();
  require(sigma2.dim() == d && h.dim() == d && sigma.dim() == d,
          ErrorCode::InvalidArgument, "check_closeness_norm: dim mismatch");
  for (const SymMatrix* m : {&sigma1, &sigma2, &h, &sigma}) {
    EigResult e = eigh(*m);
    require(e.values.back() > 0.0, ErrorCode::NotPositiveDefinite,
            "check_closeness_norm: matrix not positive definite");
  }

  const PsdFactorization fh = psd_pseudo_factor(h);
  const SymMatrix eye = SymMatrix::identity(d);
  for (const SymMatrix* s : {&sigma1, &sigma2}) {
    const double premise = fro_norm(sandwich(fh.sqrt_pinv, *s) - eye);
    require(premise <= rho * (1.0 + kExactSlack), ErrorCode::PremiseViolated,
            "check_closeness_norm: || I - H^{-1/2} Sigma_i H^{-1/2} ||_F > rho");
  }

  const PsdFactorization fs = psd_pseudo_factor(sigma);
  const SymMatrix w1 = sandwich(fs.sqrt_pinv, sigma1);
  const SymMatrix w2 = sandwich(fs.sqrt_pinv, sigma2);
  InequalityCheck out;
  out.lhs = fro_norm(w1 - w2);
  out.rhs = 5.0 * rho * std::max(op_norm(w1), op_norm(w2));
  out.holds = out.lhs <= out.rhs * (1.0 + kExactSlack);
  return out;
}

DiffFrobWitness diff_frob_witness(int dim, const std::vector<double>& g_dense,
                                  const SymMatrix& b, double rho) {
  require(dim > 0 && g_dense.size() == static_cast<std::size_t>(dim) * dim,
          ErrorCode::InvalidArgument, "diff_frob_witness: bad G buffer");
  require(b.dim() == dim, ErrorCode::InvalidArgument, "diff_frob_witness: dim mismatch");
  require(rho >= 1.0, ErrorCode::PremiseViolated, "diff_frob_witness: rho < 1");

  auto g = [&](int i, int j) { return g_dense[static_cast<std::size_t>(i) * dim + j]; };

  // SVD of G through the eigendecomposition of G^T G = V Lambda^2 V^T
  SymMatrix gtg(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += g(k, i) * g(k, j);
      gtg.set(i, j, s);
    }
  const EigResult eig = eigh(gtg);
  const double top = std::max(eig.values.front(), 0.0);
  const double tol = 1e-10 * std::max(top, 1e-300);

  std::vector<double> sv(dim, 0.0);  // singular values, descending
  for (int k = 0; k < dim; ++k)
    sv[k] = eig.values[k] > tol ? std::sqrt(eig.values[k]) : 0.0;

  // Proj_G = sum_{sv>0} u_k u_k^T with u_k = G v_k / sv_k
  SymMatrix proj_g(dim);
  for (int k = 0; k < dim; ++k) {
    if (sv[k] == 0.0) continue;
    std::vector<double> u(dim, 0.0);
    for (int i = 0; i < dim; ++i) {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) s += g(i, j) * eig.vectors[k][j];
      u[i] = s / sv[k];
    }
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j <= i; ++j) proj_g.set(i, j, proj_g(i, j) + u[i] * u[j]);
  }

  // premise || Proj_G - G B G^T ||_F <= rho; G is a general square matrix,
  // so the products are formed without symmetrization
  std::vector<double> gb(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < dim; ++k) {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) s += g(i, j) * b(j, k);
      gb[static_cast<std::size_t>(i) * dim + k] = s;
    }
  std::vector<double> gbgt(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < dim; ++k) {
      const double v = gb[static_cast<std::size_t>(i) * dim + k];
      if (v == 0.0) continue;
      for (int j = 0; j < dim; ++j)
        gbgt[static_cast<std::size_t>(i) * dim + j] += v * g(j, k);
    }
  double premise2 = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      const double dlt = proj_g(i, j) - gbgt[static_cast<std::size_t>(i) * dim + j];
      premise2 += dlt * dlt;
    }
  require(std::sqrt(premise2) <= rho * (1.0 + kExactSlack), ErrorCode::PremiseViolated,
          "diff_frob_witness: || Proj_G - G B G^T ||_F > rho");

  // Delta_B keeps k iff sv_k > 0 and sv_k^2 B'_kk >= 1/2, B' = V^T B V
  DiffFrobWitness out;
  std::vector<double> keep(dim, 0.0);
  int rank_g = 0;
  for (int k = 0; k < dim; ++k) {
    if (sv[k] == 0.0) continue;
    ++rank_g;
    const double bkk = quad_form(b, eig.vectors[k]);
    if (sv[k] * sv[k] * bkk >= 0.5) keep[k] = 1.0;
  }
  int rank_l = 0;
  for (double v : keep) rank_l += v > 0 ? 1 : 0;
  out.rank_defect = rank_g - rank_l;
  out.delta_binary_dominated = true;  // by construction: kept => sv_k > 0

  SymMatrix l(dim);
  for (int k = 0; k < dim; ++k) {
    if (keep[k] == 0.0) continue;
    const auto& v = eig.vectors[k];
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j <= i; ++j) l.set(i, j, l(i, j) + v[i] * v[j]);
  }
  out.l = l;
  out.rank_defect_norm = std::sqrt(static_cast<double>(out.rank_defect));
  out.rank_defect_bound = 2.0 * rho;

  // R R^T = V (Lambda^dag)^2 V^T
  SymMatrix rrt(dim);
  for (int k = 0; k < dim; ++k) {
    if (sv[k] == 0.0) continue;
    const double w = 1.0 / (sv[k] * sv[k]);
    const auto& v = eig.vectors[k];
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j <= i; ++j) rrt.set(i, j, rrt(i, j) + w * v[i] * v[j]);
  }
  out.closeness_norm = fro_norm(sandwich(l, rrt - b));
  out.closeness_bound = 2.0 * rho * op_norm(b);
  out.holds = out.delta_binary_dominated &&
              out.rank_defect_norm <= out.rank_defect_bound * (1.0 + kExactSlack) &&
              out.closeness_norm <= out.closeness_bound * (1.0 + kExactSlack);
  return out;
}

MetricReport gmm_cluster_metrics(const Dataset& dataset,
                                 const std::vector<Hypothesis>& hypotheses) {
  require(!dataset.labels.empty(), ErrorCode::MissingLabels,
          "gmm_cluster_metrics: dataset has no labels");
  for (const auto& hyp : hypotheses)
    for (std::size_t i : hyp.indices)
      require(i < dataset.points.size(), ErrorCode::InvalidArgument,
              "gmm_cluster_metrics: hypothesis index out of range");

  MetricReport report;
  report.list_size = hypotheses.size();

  const int k = static_cast<int>(dataset.truth.size());
  std::vector<std::vector<bool>> membership(hypotheses.size(),
                                            std::vector<bool>(dataset.points.size(), false));
  for (std::size_t h = 0; h < hypotheses.size(); ++h)
    for (std::size_t i : hypotheses[h].indices) membership[h][i] = true;

  for (int p = 0; p < k; ++p) {
    const std::size_t surviving = dataset.truth[p].n_drawn - dataset.truth[p].n_replaced;
    ComponentMetric cm;
    for (std::size_t h = 0; h < hypotheses.size(); ++h) {
      std::size_t overlap = 0;
      for (std::size_t i = 0; i < dataset.points.size(); ++i)
        if (membership[h][i] && dataset.labels[i].inlier &&
            dataset.labels[i].component == p)
          ++overlap;
      if (cm.best_hypothesis < 0 || overlap > cm.overlap_count) {
        cm.overlap_count = overlap;
        cm.best_hypothesis = static_cast<int>(h);
      }
    }
    if (cm.best_hypothesis >= 0) {
      cm.overlap_frac = surviving == 0
                            ? 0.0
                            : static_cast<double>(cm.overlap_count) /
                                  static_cast<double>(surviving);
      cm.rel_frob_error = relative_frobenius_error(
          hypotheses[static_cast<std::size_t>(cm.best_hypothesis)].h_matrix,
          dataset.truth[static_cast<std::size_t>(p)].params.covariance);
    }
    report.per_component[p] = cm;
  }

  if (!report.per_component.empty()) {
    const ComponentMetric& c0 = report.per_component.begin()->second;
    report.rel_frob_error = c0.rel_frob_error;
    report.inlier_overlap_count = c0.overlap_count;
    report.inlier_overlap_frac = c0.overlap_frac;
  }

  // separation table from the truth parameters
  const int d = dataset.dim;
  std::vector<double> mixture_mean(d, 0.0);
  for (const auto& t : dataset.truth)
    for (int i = 0; i < d; ++i) mixture_mean[i] += t.weight * t.params.mean[i];
  SymMatrix mixture_cov(d);
  for (const auto& t : dataset.truth) {
    SymMatrix part = t.params.covariance;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j)
        part.set(i, j, part(i, j) + t.params.mean[i] * t.params.mean[j]);
    part *= t.weight;
    mixture_cov += part;
  }
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j)
      mixture_cov.set(i, j, mixture_cov(i, j) - mixture_mean[i] * mixture_mean[j]);

  const PsdFactorization fm = psd_pseudo_factor(mixture_cov);
  report.separation_table.assign(k, std::vector<double>(k, 0.0));
  for (int p = 0; p < k; ++p)
    for (int q = 0; q < k; ++q) {
      if (p == q) continue;
      SymMatrix diff = dataset.truth[static_cast<std::size_t>(p)].params.covariance;
      diff -= dataset.truth[static_cast<std::size_t>(q)].params.covariance;
      report.separation_table[p][q] = fro_norm(sandwich(fm.sqrt_pinv, diff));
    }
  return report;
}

// ---------------------------------------------------------------------------
// Stability spot-checks
// ---------------------------------------------------------------------------

namespace {

struct StabilityContext {
  const PointSet& points;
  const std::vector<double>& mu;
  const SymMatrix& sigma;
  double eta;
  PsdFactorization sigma_factor;
  SymMatrix sigma_root;
  std::vector<SymMatrix> family;           // quadratic test directions B
  std::vector<std::vector<double>> p_vals; // cached p_B(x) per family member
  std::vector<double> exp_d;               // E_{X~D}[p_B(X)]
  std::vector<double> var_d;               // Var_{X~D}[p_B(X)]
};

double clamp_ratio(double v) { return std::min(v, 1e30); }

double eval_l1(const StabilityContext& ctx, const std::vector<std::size_t>& subset) {
  const int d = ctx.points.dim();
  std::vector<double> delta(d, 0.0);
  for (std::size_t i : subset) {
    auto x = ctx.points.row(i);
    for (int c = 0; c < d; ++c) delta[c] += x[c];
  }
  for (int c = 0; c < d; ++c)
    delta[c] = delta[c] / static_cast<double>(subset.size()) - ctx.mu[c];
  // sup_v |v . delta| / sqrt(v^T Sigma v) = || Sigma^{dag/2} delta ||, infinite
  // when delta leaves range(Sigma)
  std::vector<double> proj = sym_apply(ctx.sigma_factor.proj, delta);
  double out_of_range = 0.0, delta_norm = 0.0;
  for (int c = 0; c < d; ++c) {
    out_of_range += (delta[c] - proj[c]) * (delta[c] - proj[c]);
    delta_norm += delta[c] * delta[c];
  }
  if (std::sqrt(out_of_range) > 1e-7 * std::sqrt(delta_norm) + 1e-12)
    return clamp_ratio(1e30);
  std::vector<double> w = sym_apply(ctx.sigma_factor.sqrt_pinv, delta);
  double n = 0.0;
  for (double v : w) n += v * v;
  return clamp_ratio(std::sqrt(n) / 0.1);
}

double eval_l2(const StabilityContext& ctx, const std::vector<std::size_t>& subset) {
  const int d = ctx.points.dim();
  SymMatrix hat(d);
  auto& raw = hat.raw();
  std::vector<double> delta(d);
  for (std::size_t i : subset) {
    auto x = ctx.points.row(i);
    for (int c = 0; c < d; ++c) delta[c] = x[c] - ctx.mu[c];
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        raw[static_cast<std::size_t>(a) * d + b] += delta[a] * delta[b];
  }
  for (double& v : raw) v /= static_cast<double>(subset.size());
  SymMatrix dev = SymMatrix::from_dense(d, raw);
  dev -= ctx.sigma;

  if (ctx.sigma_factor.rank == d)
    return clamp_ratio(fro_norm(sandwich(ctx.sigma_factor.sqrt_pinv, dev)) / 0.1);

  // singular Sigma: evaluate at the top eigen-direction of the deviation
  EigResult e = eigh(dev);
  int arg = 0;
  for (int k = 1; k < d; ++k)
    if (std::abs(e.values[k]) > std::abs(e.values[arg])) arg = k;
  SymMatrix u(d);
  const auto& v = e.vectors[arg];
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) u.set(i, j, v[i] * v[j]);
  const double numer = std::abs(fro_inner(dev, u));
  const double denom = 0.1 * fro_norm(sandwich(ctx.sigma_root, u));
  if (denom <= 0.0) return numer > 1e-10 ? clamp_ratio(1e30) : 0.0;
  return clamp_ratio(numer / denom);
}

double eval_l3(const StabilityContext& ctx, const std::vector<std::size_t>& subset) {
  double worst = 0.0;
  for (std::size_t b = 0; b < ctx.family.size(); ++b) {
    const double radius =
        10.0 * std::sqrt(ctx.var_d[b]) * std::log(2.0 / ctx.eta);
    std::size_t tail = 0;
    for (std::size_t i : subset)
      if (std::abs(ctx.p_vals[b][i] - ctx.exp_d[b]) > radius) ++tail;
    const double frac = static_cast<double>(tail) / static_cast<double>(subset.size());
    worst = std::max(worst, frac / ctx.eta);
  }
  return clamp_ratio(worst);
}

double eval_l4(const StabilityContext& ctx, const std::vector<std::size_t>& subset) {
  double worst = 0.0;
  for (std::size_t b = 0; b < ctx.family.size(); ++b) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i : subset) {
      const double p = ctx.p_vals[b][i];
      sum += p;
      sum2 += p * p;
    }
    const double n = static_cast<double>(subset.size());
    const double var = std::max(0.0, sum2 / n - (sum / n) * (sum / n));
    if (ctx.var_d[b] <= 0.0) {
      if (var > 1e-12) worst = 1e30;
      continue;
    }
    worst = std::max(worst, var / (4.0 * ctx.var_d[b]));
  }
  return clamp_ratio(worst);
}

double eval_l5(const StabilityContext& ctx, const std::vector<std::size_t>& subset) {
  const SymMatrix m = second_moment(ctx.points.select(subset));
  EigResult e = eigh(m);
  const double top = std::max(e.values.front(), 0.0);
  const double tol = 1e-8 * std::max(top, 1e-300);
  const double sig_op = op_norm(ctx.sigma);
  if (sig_op <= 0.0) return 0.0;  // ker(Sigma) is everything
  double worst = 0.0;
  for (int k = 0; k < m.dim(); ++k) {
    if (e.values[k] > tol) continue;
    const double q = quad_form(ctx.sigma, e.vectors[k]);
    worst = std::max(worst, q / (1e-8 * sig_op));
  }
  return clamp_ratio(worst);
}

using EvalFn = double (*)(const StabilityContext&, const std::vector<std::size_t>&);

/// Greedy adversarial subset: iteratively drop the point that most increases
/// the condition value, using per-condition influence rankings.
std::vector<std::size_t> greedy_subset(const StabilityContext& ctx, EvalFn eval,
                                       int condition, std::size_t drops) {
  const std::size_t n = ctx.points.size();
  const int d = ctx.points.dim();
  std::vector<std::size_t> subset(n);
  std::iota(subset.begin(), subset.end(), std::size_t{0});

  for (std::size_t step = 0; step < drops && subset.size() > 1; ++step) {
    std::size_t drop_pos = 0;
    if (condition == 1) {
      // remove the point pulling hardest against the current deviation
      std::vector<double> delta(d, 0.0);
      for (std::size_t i : subset)
        for (int c = 0; c < d; ++c) delta[c] += ctx.points.row(i)[c];
      for (int c = 0; c < d; ++c)
        delta[c] = delta[c] / static_cast<double>(subset.size()) - ctx.mu[c];
      std::vector<double> dir = sym_apply(ctx.sigma_factor.pinv, delta);
      double best = 1e300;
      for (std::size_t s = 0; s < subset.size(); ++s) {
        auto x = ctx.points.row(subset[s]);
        double score = 0.0;
        for (int c = 0; c < d; ++c) score += (x[c] - ctx.mu[c]) * dir[c];
        if (score < best) {
          best = score;
          drop_pos = s;
        }
      }
    } else if (condition == 2) {
      // remove the smallest whitened quadratic along the deviation direction
      SymMatrix hat(d);
      auto& raw = hat.raw();
      std::vector<double> delta(d);
      for (std::size_t i : subset) {
        auto x = ctx.points.row(i);
        for (int c = 0; c < d; ++c) delta[c] = x[c] - ctx.mu[c];
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b)
            raw[static_cast<std::size_t>(a) * d + b] += delta[a] * delta[b];
      }
      for (double& v : raw) v /= static_cast<double>(subset.size());
      SymMatrix dev = SymMatrix::from_dense(d, raw);
      dev -= ctx.sigma;
      SymMatrix w = sandwich(ctx.sigma_factor.sqrt_pinv, dev);
      const double wn = fro_norm(w);
      if (wn > 0) w *= 1.0 / wn;
      SymMatrix w_tilde = sandwich(ctx.sigma_factor.sqrt_pinv, w);
      double best = 1e300;
      std::vector<double> centered(d);
      for (std::size_t s = 0; s < subset.size(); ++s) {
        auto x = ctx.points.row(subset[s]);
        for (int c = 0; c < d; ++c) centered[c] = x[c] - ctx.mu[c];
        const double score = quad_form(w_tilde, centered);
        if (score < best) {
          best = score;
          drop_pos = s;
        }
      }
    } else if (condition == 3) {
      // shrink the denominator: drop the in-radius point nearest the boundary
      // for the currently worst family member
      std::size_t worst_b = 0;
      double worst_ratio = -1.0;
      for (std::size_t b = 0; b < ctx.family.size(); ++b) {
        const double radius = 10.0 * std::sqrt(ctx.var_d[b]) * std::log(2.0 / ctx.eta);
        std::size_t tail = 0;
        for (std::size_t i : subset)
          if (std::abs(ctx.p_vals[b][i] - ctx.exp_d[b]) > radius) ++tail;
        const double r = static_cast<double>(tail);
        if (r > worst_ratio) {
          worst_ratio = r;
          worst_b = b;
        }
      }
      const double radius =
          10.0 * std::sqrt(ctx.var_d[worst_b]) * std::log(2.0 / ctx.eta);
      double best = -1.0;
      for (std::size_t s = 0; s < subset.size(); ++s) {
        const double dev = std::abs(ctx.p_vals[worst_b][subset[s]] - ctx.exp_d[worst_b]);
        if (dev <= radius && dev > best) {
          best = dev;
          drop_pos = s;
        }
      }
    } else if (condition == 4) {
      // raise the variance: drop the point closest to the subset mean of p
      std::size_t worst_b = 0;
      double worst_val = -1.0;
      for (std::size_t b = 0; b < ctx.family.size(); ++b) {
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t i : subset) {
          sum += ctx.p_vals[b][i];
          sum2 += ctx.p_vals[b][i] * ctx.p_vals[b][i];
        }
        const double n_s = static_cast<double>(subset.size());
        const double var = sum2 / n_s - (sum / n_s) * (sum / n_s);
        const double val = ctx.var_d[b] > 0 ? var / ctx.var_d[b] : var;
        if (val > worst_val) {
          worst_val = val;
          worst_b = b;
        }
      }
      double mean = 0.0;
      for (std::size_t i : subset) mean += ctx.p_vals[worst_b][i];
      mean /= static_cast<double>(subset.size());
      double best = 1e300;
      for (std::size_t s = 0; s < subset.size(); ++s) {
        const double dev = std::abs(ctx.p_vals[worst_b][subset[s]] - mean);
        if (dev < best) {
          best = dev;
          drop_pos = s;
        }
      }
    } else {
      // empty a near-null direction of the running second moment
      const SymMatrix m = second_moment(ctx.points.select(subset));
      EigResult e = eigh(m);
      const auto& v = e.vectors.back();
      double best = -1.0;
      for (std::size_t s = 0; s < subset.size(); ++s) {
        auto x = ctx.points.row(subset[s]);
        double ip = 0.0;
        for (int c = 0; c < d; ++c) ip += x[c] * v[c];
        if (std::abs(ip) > best) {
          best = std::abs(ip);
          drop_pos = s;
        }
      }
    }
    subset.erase(subset.begin() + static_cast<std::ptrdiff_t>(drop_pos));
  }
  (void)eval;
  return subset;
}

}  // namespace

StabilityReport check_stability(const PointSet& points,
                                const std::vector<double>& mu,
                                const SymMatrix& sigma, double eta, double eps,
                                std::size_t n_subset_trials, std::uint64_t seed) {
  require(!points.empty(), ErrorCode::Empty, "check_stability: empty point set");
  // eps = 0 allowed: only the full set is examined (the planted-violation
  // example runs that way)
  require(eps >= 0.0 && eps < 0.5, ErrorCode::InvalidArgument,
          "check_stability: eps out of [0, 1/2)");
  const std::size_t n = points.size();
  const int d = points.dim();

  StabilityContext ctx{points, mu, sigma, eta, psd_pseudo_factor(sigma),
                       psd_sqrt(sigma), {}, {}, {}, {}};

  // Quadratic family: 200 seeded unit-Frobenius directions plus the top
  // lifted eigenmatrix of the H-whitened data (the direction the algorithm
  // itself would project on).
  Rng rng(seed);
  const int n_family = 200;
  for (int b = 0; b < n_family; ++b) {
    SymMatrix m(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j) m.set(i, j, rng.gaussian());
    const double nf = fro_norm(m);
    if (nf > 0) m *= 1.0 / nf;
    ctx.family.push_back(std::move(m));
  }
  {
    const SymMatrix h = second_moment(points);
    const PsdFactorization fh = psd_pseudo_factor(h);
    const PointSet tilde = transform_points(fh.sqrt_pinv, points);
    const LiftedEigResult lifted = lifted_top_eig(tilde, rng.next_u64());
    SymMatrix b_eff = sandwich(fh.sqrt_pinv, lifted.matrix_a);
    const double nf = fro_norm(b_eff);
    if (nf > 0) b_eff *= 1.0 / nf;
    ctx.family.push_back(std::move(b_eff));
  }

  ctx.p_vals.resize(ctx.family.size());
  ctx.exp_d.resize(ctx.family.size());
  ctx.var_d.resize(ctx.family.size());
  for (std::size_t b = 0; b < ctx.family.size(); ++b) {
    const SymMatrix& bm = ctx.family[b];
    ctx.p_vals[b].resize(n);
    for (std::size_t i = 0; i < n; ++i)
      ctx.p_vals[b][i] = quad_form(bm, points.row(i));
    // Gaussian moments of x^T B x: E = mu^T B mu + <Sigma, B>,
    // Var = 2 ||S^{1/2} B S^{1/2}||_F^2 + 4 mu^T B Sigma B mu
    ctx.exp_d[b] = quad_form(bm, mu) + fro_inner(sigma, bm);
    const SymMatrix sbs = sandwich(ctx.sigma_root, bm);
    std::vector<double> bmu = sym_apply(bm, mu);
    std::vector<double> sig_bmu = sym_apply(sigma, bmu);
    double cross = 0.0;
    for (int c = 0; c < d; ++c) cross += bmu[c] * sig_bmu[c];
    const double f = fro_norm(sbs);
    ctx.var_d[b] = 2.0 * f * f + 4.0 * cross;
  }

  StabilityReport report;
  report.search_strategy =
      "full set + " + std::to_string(n_subset_trials) +
      " random subsets of size ceil((1-eps)n) + greedy drop per condition";

  double worst_sd = 0.0;
  for (double v : ctx.var_d) worst_sd = std::max(worst_sd, std::sqrt(v));
  report.l3_radius_ln_2eta = 10.0 * worst_sd * std::log(2.0 / eta);
  report.l3_radius_log_1eta = 10.0 * worst_sd * std::log(1.0 / eta);

  const EvalFn evals[5] = {eval_l1, eval_l2, eval_l3, eval_l4, eval_l5};
  double* slots[5] = {&report.l1, &report.l2, &report.l3, &report.l4, &report.l5};

  auto run_subset = [&](const std::vector<std::size_t>& subset) {
    for (int c = 0; c < 5; ++c)
      *slots[c] = std::max(*slots[c], evals[c](ctx, subset));
    ++report.subsets_tested;
  };

  std::vector<std::size_t> full(n);
  std::iota(full.begin(), full.end(), std::size_t{0});
  run_subset(full);

  const std::size_t keep =
      static_cast<std::size_t>(std::ceil((1.0 - eps) * static_cast<double>(n)));
  for (std::size_t t = 0; t < n_subset_trials; ++t) {
    std::vector<std::size_t> idx = full;
    for (std::size_t i = 0; i < keep; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(keep);
    run_subset(idx);
  }

  const std::size_t drops = n - keep;
  for (int c = 1; c <= 5; ++c) {
    std::vector<std::size_t> adv = greedy_subset(ctx, evals[c - 1], c, drops);
    *slots[c - 1] = std::max(*slots[c - 1], evals[c - 1](ctx, adv));
    ++report.subsets_tested;
  }
  return report;
}

}  // namespace listdec
