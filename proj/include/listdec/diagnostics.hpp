// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

#ifndef LISTDEC_DIAGNOSTICS_HPP
#define LISTDEC_DIAGNOSTICS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "listdec/common.hpp"
#include "listdec/datagen.hpp"
#include "listdec/estimator.hpp"
#include "listdec/matlin.hpp"

namespace listdec {

/// || H^{dagger/2} Sigma H^{dagger/2} - Proj_H ||_F, the hypothesis error
/// metric (reduces to || H^{-1/2} Sigma H^{-1/2} - I ||_F when H is full
/// rank).
double relative_frobenius_error(const SymMatrix& h, const SymMatrix& sigma,
                                double rank_tol_rel = 1e-8);

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Certificate inequality with the explicit 4/alpha and 8/alpha^2 constants:
///   || Cov_subset[P x] - E_points[P x x^T P] ||_F^2
///     <= (4/alpha) Var_points[x^T P A P x] + (8/alpha^2) || E_points[P x x^T P] ||_op^2
/// where P = H^{dagger/2} for H the second moment of `points` and A the top
/// lifted eigenmatrix of {P x}.
InequalityCheck check_certificate_inequality(const PointSet& points,
                                             const std::vector<std::size_t>& subset,
                                             double alpha);

struct VarianceCheck {
  double mc_variance = 0.0;
  double bound = 0.0;
  bool holds = false;
};

/// Monte Carlo check of Var[X^T A X] <= 4 ||S^{1/2} A S^{1/2}||_F^2
/// + 8 ||S^{1/2} A mu||_2^2 for X ~ N(mu, S).
VarianceCheck check_gaussian_quadratic_variance(const GaussianParams& params,
                                                const SymMatrix& a,
                                                std::size_t n_mc,
                                                std::uint64_t seed);

/// || A B A - Proj_B ||_F <= 2 || A B A - Proj_A ||_F for PSD A, B with
/// nested kernels. `rhs` stores the inner norm (before the factor 2).
InequalityCheck check_sigma_guarantee(const SymMatrix& a, const SymMatrix& b,
                                      double rank_tol_rel = 1e-8);

/// || S^{-1/2}(S1 - S2) S^{-1/2} ||_F <= 5 rho max_i || S^{-1/2} S_i S^{-1/2} ||_op
/// under the premise || I - H^{-1/2} S_i H^{-1/2} ||_F <= rho. All four
/// matrices must be positive definite.
InequalityCheck check_closeness_norm(const SymMatrix& sigma1, const SymMatrix& sigma2,
                                     const SymMatrix& h, const SymMatrix& sigma,
                                     double rho);

struct DiffFrobWitness {
  SymMatrix l;              // V Delta_B V^T
  int rank_defect = 0;      // dropped directions |rank(Proj) - rank(L)|
  bool delta_binary_dominated = false;  // property 1
  double rank_defect_norm = 0.0;        // || Lambda Lambda^dag - Delta_B ||_F
  double rank_defect_bound = 0.0;       // 2 rho
  double closeness_norm = 0.0;          // || L (R R^T - B) L^T ||_F
  double closeness_bound = 0.0;         // 2 rho ||B||_op
  bool holds = false;                   // all three properties
};

/// Witness construction for the closeness of G^dagger G^{dagger T} and B
/// along a binary projection L = V Delta_B V^T built from the SVD of G.
/// Premise: || Proj_G - G B G^T ||_F <= rho with rho >= 1.
DiffFrobWitness diff_frob_witness(int dim, const std::vector<double>& g_dense,
                                  const SymMatrix& b, double rho);

struct ComponentMetric {
  int best_hypothesis = -1;
  std::size_t overlap_count = 0;
  double overlap_frac = 0.0;  // of the surviving inliers n_p - l_p
  double rel_frob_error = 0.0;
};

struct MetricReport {
  double rel_frob_error = 0.0;        // component 0's best hypothesis
  std::size_t inlier_overlap_count = 0;
  double inlier_overlap_frac = 0.0;
  std::size_t list_size = 0;
  std::map<int, ComponentMetric> per_component;
  std::vector<std::vector<double>> separation_table;
};

/// Per-component best-overlap hypotheses and relative Frobenius errors, plus
/// the pairwise mixture-whitened covariance separations.
MetricReport gmm_cluster_metrics(const Dataset& dataset,
                                 const std::vector<Hypothesis>& hypotheses);

struct StabilityReport {
  // worst observed violation ratios (value / allowed bound); <= 1 means the
  // condition held on every subset tested
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double l4 = 0.0;
  double l5 = 0.0;
  double l3_radius_ln_2eta = 0.0;   // 10 sqrt(Var) ln(2/eta), as checked
  double l3_radius_log_1eta = 0.0;  // 10 sqrt(Var) log(1/eta), recorded only
  std::size_t subsets_tested = 0;
  std::string search_strategy;
};

/// Spot-checks the five stability conditions on the full set, seeded random
/// subsets of size ceil((1-eps)|A|), and one greedy-adversarial subset per
/// condition. Report-only; never throws on a violation.
StabilityReport check_stability(const PointSet& points,
                                const std::vector<double>& mu,
                                const SymMatrix& sigma, double eta, double eps,
                                std::size_t n_subset_trials, std::uint64_t seed);

}  // namespace listdec

#endif  // LISTDEC_DIAGNOSTICS_HPP
