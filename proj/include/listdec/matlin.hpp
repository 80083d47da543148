// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

#ifndef LISTDEC_MATLIN_HPP
#define LISTDEC_MATLIN_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "listdec/common.hpp"

namespace listdec {

/// Dense symmetric d x d matrix, row-major. Symmetry is enforced at every
/// construction point by averaging (M + M^T)/2, so downstream code may rely
/// on entries(i,j) == entries(j,i) exactly.
class SymMatrix {
 public:
  SymMatrix() : dim_(0) {}
  explicit SymMatrix(int dim);

  static SymMatrix identity(int dim);
  static SymMatrix diag(std::span<const double> entries);
  /// Builds from a dense row-major buffer, symmetrizing as (M + M^T)/2.
  static SymMatrix from_dense(int dim, std::span<const double> dense);

  int dim() const { return dim_; }
  double operator()(int i, int j) const {
    return a_[static_cast<std::size_t>(i) * dim_ + j];
  }
  /// Sets both (i, j) and (j, i).
  void set(int i, int j, double v) {
    a_[static_cast<std::size_t>(i) * dim_ + j] = v;
    a_[static_cast<std::size_t>(j) * dim_ + i] = v;
  }

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& raw() { return a_; }

  bool all_finite() const;

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double s);
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

 private:
  int dim_;
  std::vector<double> a_;
};

/// Eigendecomposition of a symmetric matrix: values descending, vectors
/// orthonormal, vectors[k] is the eigenvector for values[k].
struct EigResult {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;
};

/// Cyclic Jacobi eigensolver. O(d^3) per sweep; deterministic.
EigResult eigh(const SymMatrix& m);

/// PSD pseudo-inverse factorization: H^dagger, H^{dagger/2} and the range
/// projection, built from the eigenpairs above rank_tol.
struct PsdFactorization {
  SymMatrix source;
  int rank = 0;
  SymMatrix sqrt_pinv;  // H^{dagger/2}
  SymMatrix pinv;       // H^dagger
  SymMatrix proj;       // projection onto range(H)
  std::vector<double> eigvals;  // descending, clamped at 0
  double rank_tol = 0.0;        // absolute threshold used
};

/// Eigen-decomposes M, zeroes eigenvalues <= rank_tol_rel * max eigenvalue,
/// and builds the pseudo-inverse family. Negative eigenvalues within the
/// tolerance are clamped to zero; larger negatives raise NotPsd.
PsdFactorization psd_pseudo_factor(const SymMatrix& m, double rank_tol_rel = 1e-8);

/// PSD square root (for sampling); same clamping rules as psd_pseudo_factor.
SymMatrix psd_sqrt(const SymMatrix& m, double rank_tol_rel = 1e-8);

double fro_norm(const SymMatrix& m);
double op_norm(const SymMatrix& m);

/// Uncentered second moment (1/n) sum x x^T, accumulated in index order.
SymMatrix second_moment(const PointSet& points);

/// y = M x for symmetric M.
std::vector<double> sym_apply(const SymMatrix& m, std::span<const double> x);

/// x^T M x.
double quad_form(const SymMatrix& m, std::span<const double> x);

/// Applies a symmetric transform to every point: {P x : x in points}.
PointSet transform_points(const SymMatrix& p, const PointSet& points);

/// Frobenius inner product <A, B>.
double fro_inner(const SymMatrix& a, const SymMatrix& b);

/// Plain dense product A * B (result not symmetric in general).
std::vector<double> sym_mul_dense(const SymMatrix& a, const SymMatrix& b);

/// Symmetrized product (A B A) for symmetric A, B.
SymMatrix sandwich(const SymMatrix& a, const SymMatrix& b);

/// Top eigenpair of the lifted covariance Cov[x^{(x)2}] computed by implicit
/// power iteration on d x d workspace; never materializes a d^2 x d^2 matrix.
struct LiftedEigResult {
  SymMatrix matrix_a;  // unit Frobenius norm when eigenvalue > 0
  double eigenvalue = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Power-iteration schedule: at most max(max_iters, ceil(10*log2(d^2+1)))
/// steps from a seeded random symmetric start, stopping early once successive
/// Rayleigh quotients change by less than rel_tol; then one restart from a
/// fixed deterministic start, keeping whichever run reached the larger
/// quotient. Zero lifted covariance returns eigenvalue 0 with A = e1 e1^T.
LiftedEigResult lifted_top_eig(const PointSet& points, std::uint64_t seed,
                               int max_iters = 0, double rel_tol = 1e-6);

/// One application of the lifted covariance operator V -> Cov[x^{(x)2}] V,
/// exposed for diagnostics and tests. O(n d^2).
SymMatrix lifted_cov_apply(const PointSet& points, const SymMatrix& mean_lift,
                           const SymMatrix& v);

/// Variance of the 1-D projection <x x^T, A> over the point set (equals the
/// Rayleigh quotient of the lifted covariance at A when ||A||_F = 1).
double lifted_variance_along(const PointSet& points, const SymMatrix& a);

}  // namespace listdec

#endif  // LISTDEC_MATLIN_HPP
