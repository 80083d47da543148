// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

#include "listdec/matlin.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace listdec {

SymMatrix::SymMatrix(int dim) : dim_(dim) {
  require(dim > 0, ErrorCode::InvalidArgument, "SymMatrix: dim must be positive");
  a_.assign(static_cast<std::size_t>(dim) * dim, 0.0);
}

SymMatrix SymMatrix::identity(int dim) {
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
  return m;
}

SymMatrix SymMatrix::diag(std::span<const double> entries) {
  SymMatrix m(static_cast<int>(entries.size()));
  for (int i = 0; i < m.dim(); ++i) m.set(i, i, entries[i]);
  return m;
}

SymMatrix SymMatrix::from_dense(int dim, std::span<const double> dense) {
  require(dense.size() == static_cast<std::size_t>(dim) * dim,
          ErrorCode::InvalidArgument, "from_dense: wrong buffer size");
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double v = 0.5 * (dense[static_cast<std::size_t>(i) * dim + j] +
                              dense[static_cast<std::size_t>(j) * dim + i]);
      m.set(i, j, v);
    }
  }
  require(m.all_finite(), ErrorCode::NonFinite, "from_dense: non-finite entry");
  return m;
}

bool SymMatrix::all_finite() const {
  for (double v : a_)
    if (!std::isfinite(v)) return false;
  return true;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  require(dim_ == o.dim_, ErrorCode::InvalidArgument, "SymMatrix: dim mismatch");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
  require(dim_ == o.dim_, ErrorCode::InvalidArgument, "SymMatrix: dim mismatch");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (double& v : a_) v *= s;
  return *this;
}

// ---------------------------------------------------------------------------
// Jacobi eigensolver
// ---------------------------------------------------------------------------

EigResult eigh(const SymMatrix& m) {
  require(m.all_finite(), ErrorCode::NonFinite, "eigh: non-finite entry");
  const int d = m.dim();
  std::vector<double> a = m.data();  // working copy, row-major
  std::vector<double> v(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i) * d + i] = 1.0;

  auto at = [&](std::vector<double>& x, int i, int j) -> double& {
    return x[static_cast<std::size_t>(i) * d + j];
  };

  double norm = 0.0;
  for (double x : a) norm += x * x;
  norm = std::sqrt(norm);
  const double stop = (norm > 0 ? norm : 1.0) * 1e-15;

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) off += 2.0 * at(a, i, j) * at(a, i, j);
    if (std::sqrt(off) <= stop) break;

    for (int p = 0; p < d - 1; ++p) {
      for (int q = p + 1; q < d; ++q) {
        const double apq = at(a, p, q);
        if (std::abs(apq) <= stop / (d * d + 1.0)) continue;
        const double app = at(a, p, p);
        const double aqq = at(a, q, q);
        const double theta = 0.5 * (aqq - app) / apq;
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (int k = 0; k < d; ++k) {
          const double akp = at(a, k, p);
          const double akq = at(a, k, q);
          at(a, k, p) = c * akp - s * akq;
          at(a, k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          const double apk = at(a, p, k);
          const double aqk = at(a, q, k);
          at(a, p, k) = c * apk - s * aqk;
          at(a, q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < d; ++k) {
          const double vkp = at(v, k, p);
          const double vkq = at(v, k, q);
          at(v, k, p) = c * vkp - s * vkq;
          at(v, k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(d);
  for (int i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return at(a, i, i) > at(a, j, j);
  });

  EigResult r;
  r.values.resize(d);
  r.vectors.resize(d);
  for (int k = 0; k < d; ++k) {
    const int src = order[k];
    r.values[k] = at(a, src, src);
    r.vectors[k].resize(d);
    for (int i = 0; i < d; ++i) r.vectors[k][i] = at(v, i, src);
    // deterministic sign: largest-magnitude coordinate made positive
    int arg = 0;
    for (int i = 1; i < d; ++i)
      if (std::abs(r.vectors[k][i]) > std::abs(r.vectors[k][arg])) arg = i;
    if (r.vectors[k][arg] < 0)
      for (double& x : r.vectors[k]) x = -x;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Pseudo-inverse factorization
// ---------------------------------------------------------------------------

namespace {

SymMatrix from_eigpairs(int d, const std::vector<double>& weights,
                        const std::vector<std::vector<double>>& vecs) {
  SymMatrix out(d);
  auto& raw = out.raw();
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] == 0.0) continue;
    const auto& u = vecs[k];
    for (int i = 0; i < d; ++i) {
      const double wi = weights[k] * u[i];
      for (int j = 0; j < d; ++j) raw[static_cast<std::size_t>(i) * d + j] += wi * u[j];
    }
  }
  // exact symmetry despite float round-off in the accumulation
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < i; ++j) {
      const double v = 0.5 * (out(i, j) + out(j, i));
      out.set(i, j, v);
    }
  return out;
}

}  // namespace

PsdFactorization psd_pseudo_factor(const SymMatrix& m, double rank_tol_rel) {
  require(m.all_finite(), ErrorCode::NonFinite, "psd_pseudo_factor: non-finite");
  require(rank_tol_rel > 0 && rank_tol_rel < 1e-2, ErrorCode::InvalidArgument,
          "psd_pseudo_factor: rank_tol_rel out of (0, 1e-2)");
  EigResult eig = eigh(m);
  const int d = m.dim();
  const double lam_max = eig.values.empty() ? 0.0 : std::max(eig.values.front(), 0.0);
  const double tol = rank_tol_rel * lam_max;

  PsdFactorization f;
  f.source = m;
  f.rank_tol = tol;
  f.eigvals.resize(d);

  std::vector<double> w_pinv(d, 0.0), w_sqrt_pinv(d, 0.0), w_proj(d, 0.0);
  for (int k = 0; k < d; ++k) {
    double lam = eig.values[k];
    if (lam < -tol)
      fail(ErrorCode::NotPsd, "psd_pseudo_factor: eigenvalue " +
                                  std::to_string(lam) + " below -tol");
    if (lam <= tol) lam = 0.0;
    f.eigvals[k] = lam;
    if (lam > 0.0) {
      ++f.rank;
      w_pinv[k] = 1.0 / lam;
      w_sqrt_pinv[k] = 1.0 / std::sqrt(lam);
      w_proj[k] = 1.0;
    }
  }
  f.pinv = from_eigpairs(d, w_pinv, eig.vectors);
  f.sqrt_pinv = from_eigpairs(d, w_sqrt_pinv, eig.vectors);
  f.proj = from_eigpairs(d, w_proj, eig.vectors);
  return f;
}

SymMatrix psd_sqrt(const SymMatrix& m, double rank_tol_rel) {
  require(m.all_finite(), ErrorCode::NonFinite, "psd_sqrt: non-finite");
  EigResult eig = eigh(m);
  const int d = m.dim();
  const double lam_max = eig.values.empty() ? 0.0 : std::max(eig.values.front(), 0.0);
  const double tol = rank_tol_rel * lam_max;
  std::vector<double> w(d, 0.0);
  for (int k = 0; k < d; ++k) {
    double lam = eig.values[k];
    if (lam < -tol)
      fail(ErrorCode::NotPsd, "psd_sqrt: matrix not PSD");
    w[k] = lam > tol ? std::sqrt(lam) : 0.0;
  }
  return from_eigpairs(d, w, eig.vectors);
}

double fro_norm(const SymMatrix& m) {
  require(m.all_finite(), ErrorCode::NonFinite, "fro_norm: non-finite");
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

double op_norm(const SymMatrix& m) {
  EigResult eig = eigh(m);
  double s = 0.0;
  for (double v : eig.values) s = std::max(s, std::abs(v));
  return s;
}

SymMatrix second_moment(const PointSet& points) {
  require(!points.empty(), ErrorCode::Empty, "second_moment: empty point set");
  require(points.all_finite(), ErrorCode::NonFinite, "second_moment: non-finite");
  const int d = points.dim();
  const std::size_t n = points.size();
  SymMatrix h(d);
  auto& raw = h.raw();
  for (std::size_t t = 0; t < n; ++t) {
    auto x = points.row(t);
    for (int i = 0; i < d; ++i) {
      const double xi = x[i];
      double* row = raw.data() + static_cast<std::size_t>(i) * d;
      for (int j = 0; j < d; ++j) row[j] += xi * x[j];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& v : raw) v *= inv_n;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < i; ++j) h.set(i, j, 0.5 * (h(i, j) + h(j, i)));
  return h;
}

std::vector<double> sym_apply(const SymMatrix& m, std::span<const double> x) {
  const int d = m.dim();
  std::vector<double> y(d, 0.0);
  for (int i = 0; i < d; ++i) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double quad_form(const SymMatrix& m, std::span<const double> x) {
  const int d = m.dim();
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double xi = x[i];
    for (int j = 0; j < d; ++j) s += xi * m(i, j) * x[j];
  }
  return s;
}

PointSet transform_points(const SymMatrix& p, const PointSet& points) {
  const int d = points.dim();
  require(p.dim() == d, ErrorCode::InvalidArgument, "transform_points: dim mismatch");
  std::vector<double> out(points.data().size());
  for (std::size_t t = 0; t < points.size(); ++t) {
    auto x = points.row(t);
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += p(i, j) * x[j];
      out[t * static_cast<std::size_t>(d) + i] = s;
    }
  }
  return PointSet(d, std::move(out));
}

double fro_inner(const SymMatrix& a, const SymMatrix& b) {
  double s = 0.0;
  const auto& x = a.data();
  const auto& y = b.data();
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

std::vector<double> sym_mul_dense(const SymMatrix& a, const SymMatrix& b) {
  const int d = a.dim();
  std::vector<double> c(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < d; ++j)
        c[static_cast<std::size_t>(i) * d + j] += aik * b(k, j);
    }
  return c;
}

SymMatrix sandwich(const SymMatrix& a, const SymMatrix& b) {
  const int d = a.dim();
  std::vector<double> ab = sym_mul_dense(a, b);
  std::vector<double> aba(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      const double v = ab[static_cast<std::size_t>(i) * d + k];
      if (v == 0.0) continue;
      for (int j = 0; j < d; ++j)
        aba[static_cast<std::size_t>(i) * d + j] += v * a(k, j);
    }
  return SymMatrix::from_dense(d, aba);
}

// ---------------------------------------------------------------------------
// Implicit lifted power iteration
// ---------------------------------------------------------------------------

SymMatrix lifted_cov_apply(const PointSet& points, const SymMatrix& mean_lift,
                           const SymMatrix& v) {
  const int d = points.dim();
  const std::size_t n = points.size();
  SymMatrix w(d);
  auto& raw = w.raw();
  for (std::size_t t = 0; t < n; ++t) {
    auto x = points.row(t);
    const double s = quad_form(v, x);  // <x x^T, V>
    for (int i = 0; i < d; ++i) {
      const double si = s * x[i];
      double* row = raw.data() + static_cast<std::size_t>(i) * d;
      for (int j = 0; j < d; ++j) row[j] += si * x[j];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& x : raw) x *= inv_n;
  const double m_dot_v = fro_inner(mean_lift, v);
  w -= m_dot_v * mean_lift;
  // restore exact symmetry
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < i; ++j) w.set(i, j, 0.5 * (w(i, j) + w(j, i)));
  return w;
}

double lifted_variance_along(const PointSet& points, const SymMatrix& a) {
  const std::size_t n = points.size();
  require(n > 0, ErrorCode::Empty, "lifted_variance_along: empty");
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double y = quad_form(a, points.row(t));
    sum += y;
    sum2 += y * y;
  }
  const double mean = sum / static_cast<double>(n);
  return std::max(0.0, sum2 / static_cast<double>(n) - mean * mean);
}

namespace {

void normalize_fro(SymMatrix& m) {
  const double nf = fro_norm(m);
  if (nf > 0) m *= 1.0 / nf;
}

struct PowerRun {
  SymMatrix a;
  double rayleigh = 0.0;
  int iterations = 0;
  bool stalled = false;
};

PowerRun run_power(const PointSet& points, const SymMatrix& mean_lift,
                   SymMatrix v, int iters, double rel_tol) {
  normalize_fro(v);
  PowerRun run;
  double prev = -1.0;
  for (int t = 0; t < iters; ++t) {
    SymMatrix w = lifted_cov_apply(points, mean_lift, v);
    const double rayleigh = fro_inner(v, w);
    run.iterations = t + 1;
    run.rayleigh = rayleigh;
    run.a = v;
    const double wn = fro_norm(w);
    if (wn <= 0.0) {
      run.stalled = true;  // operator annihilated the iterate
      break;
    }
    w *= 1.0 / wn;
    v = w;
    if (prev >= 0.0 &&
        std::abs(rayleigh - prev) <= rel_tol * std::max(std::abs(rayleigh), 1e-300)) {
      run.stalled = true;
      break;
    }
    prev = rayleigh;
  }
  return run;
}

}  // namespace

LiftedEigResult lifted_top_eig(const PointSet& points, std::uint64_t seed,
                               int max_iters, double rel_tol) {
  require(!points.empty(), ErrorCode::Empty, "lifted_top_eig: empty point set");
  require(points.all_finite(), ErrorCode::NonFinite, "lifted_top_eig: non-finite");
  const int d = points.dim();
  const std::size_t n = points.size();

  SymMatrix mean_lift = second_moment(points);

  // trace of the lifted covariance = (1/n) sum ||x||^4 - ||mean_lift||_F^2
  double sum4 = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    auto x = points.row(t);
    double s = 0.0;
    for (double xi : x) s += xi * xi;
    sum4 += s * s;
  }
  const double lifted_trace = sum4 / static_cast<double>(n) -
                              fro_inner(mean_lift, mean_lift);
  const double trace_scale = sum4 / static_cast<double>(n);

  LiftedEigResult res;
  if (lifted_trace <= 1e-12 * std::max(trace_scale, 1e-300)) {
    // all lifted points identical (zero covariance)
    res.matrix_a = SymMatrix(d);
    res.matrix_a.set(0, 0, 1.0);
    res.eigenvalue = 0.0;
    res.iterations = 0;
    res.converged = true;
    return res;
  }

  const int schedule =
      static_cast<int>(std::ceil(10.0 * std::log2(static_cast<double>(d) * d + 1.0)));
  const int iters = std::max(max_iters, schedule);

  Rng rng(seed);
  SymMatrix start(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) start.set(i, j, rng.gaussian());
  PowerRun best = run_power(points, mean_lift, start, iters, rel_tol);

  // deterministic restart from a fixed generic direction
  SymMatrix det_start(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) det_start.set(i, j, 1.0 / (1.0 + i + j));
  PowerRun second = run_power(points, mean_lift, det_start, iters, rel_tol);
  if (second.rayleigh > best.rayleigh) best = second;

  SymMatrix a = best.a;
  // reshaped eigenvector projected to the symmetric subspace, unit Frobenius
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < i; ++j) a.set(i, j, 0.5 * (a(i, j) + a(j, i)));
  normalize_fro(a);
  // deterministic sign convention
  int arg = 0;
  const auto& raw = a.data();
  for (std::size_t k = 1; k < raw.size(); ++k)
    if (std::abs(raw[k]) > std::abs(raw[arg])) arg = static_cast<int>(k);
  if (raw[arg] < 0) a *= -1.0;

  res.matrix_a = a;
  res.eigenvalue = std::max(0.0, lifted_variance_along(points, a));
  res.iterations = best.iterations;
  res.converged = best.stalled;
  return res;
}

}  // namespace listdec
