// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

#include "selftest.hpp"

#include <cmath>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <sstream>

#include "listdec/datagen.hpp"
#include "listdec/diagnostics.hpp"
#include "listdec/estimator.hpp"
#include "listdec/matlin.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

namespace listdec::selftest {

namespace {

struct Counter {
  int pass = 0;
  int total = 0;
  void tally(bool ok) {
    ++total;
    if (ok) ++pass;
  }
  bool all() const { return pass == total && total > 0; }
  std::string str() const {
    return std::to_string(pass) + "/" + std::to_string(total);
  }
};

SymMatrix random_sym(int d, Rng& rng) {
  SymMatrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) m.set(i, j, rng.gaussian());
  return m;
}

SymMatrix random_psd(int d, int rank, Rng& rng) {
  // B B^T with B of size d x rank
  std::vector<double> b(static_cast<std::size_t>(d) * rank);
  for (double& v : b) v = rng.gaussian();
  SymMatrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = 0.0;
      for (int k = 0; k < rank; ++k)
        s += b[static_cast<std::size_t>(i) * rank + k] *
             b[static_cast<std::size_t>(j) * rank + k];
      m.set(i, j, s);
    }
  return m;
}

PointSet random_points(int d, std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> flat(n * static_cast<std::size_t>(d));
  for (double& v : flat) v = scale * rng.gaussian();
  return PointSet(d, std::move(flat));
}

// ---------------------------------------------------------------------------
// matlin checks
// ---------------------------------------------------------------------------

CheckResult check_psd_factorization(int instances, std::uint64_t seed) {
  Rng rng(seed);
  Counter c;
  for (int t = 0; t < instances; ++t) {
    const int d = 2 + static_cast<int>(rng.below(7));
    const int rank = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
    const SymMatrix m = random_psd(d, rank, rng);
    const PsdFactorization f = psd_pseudo_factor(m);
    const double op = op_norm(m);

    bool ok = true;
    // Proj = H H^dagger entrywise
    const std::vector<double> hhd = sym_mul_dense(m, f.pinv);
    for (int i = 0; i < d && ok; ++i)
      for (int j = 0; j < d; ++j)
        if (std::abs(hhd[static_cast<std::size_t>(i) * d + j] - f.proj(i, j)) >
            1e-7 * std::max(op, 1e-300)) {
          ok = false;
          break;
        }
    // idempotent projection
    SymMatrix pp = SymMatrix::from_dense(d, sym_mul_dense(f.proj, f.proj));
    pp -= f.proj;
    if (fro_norm(pp) > 1e-8 * d) ok = false;
    // sqrt_pinv * M * sqrt_pinv == proj
    SymMatrix mid = sandwich(f.sqrt_pinv, m);
    mid -= f.proj;
    double max_abs = 0.0;
    for (double v : mid.data()) max_abs = std::max(max_abs, std::abs(v));
    if (max_abs > 1e-7 * std::max(op, 1e-300)) ok = false;
    // rank bookkeeping
    if (f.rank != rank) ok = false;
    c.tally(ok);
  }
  return {"matlin.psd_factorization_identities", c.all(), c.str()};
}

CheckResult check_lifted_rayleigh(int instances, std::uint64_t seed) {
  Rng rng(seed);
  Counter c;
  for (int t = 0; t < instances; ++t) {
    const int d = 1 + static_cast<int>(rng.below(6));
    const std::size_t n = 5 + rng.below(46);
    const PointSet pts = random_points(d, n, rng, 1.0 + 3.0 * rng.uniform01());
    const SymMatrix lifted_cov = oracles::materialized_lifted_covariance(pts);
    const EigResult eig = eigh(lifted_cov);
    const double lam_max = std::max(eig.values.front(), 0.0);

    const LiftedEigResult fast = lifted_top_eig(pts, rng.next_u64());
    const double r_fast = oracles::lifted_rayleigh(lifted_cov, fast.matrix_a);
    bool ok = lam_max <= 1e-12 || r_fast >= 0.5 * lam_max;

    const LiftedEigResult tight = lifted_top_eig(pts, rng.next_u64(), 2000, 1e-12);
    const double r_tight = oracles::lifted_rayleigh(lifted_cov, tight.matrix_a);
    if (lam_max > 1e-12 && r_tight < 0.99 * lam_max) ok = false;
    c.tally(ok);
  }
  return {"matlin.lifted_rayleigh_vs_materialized", c.all(), c.str()};
}

CheckResult check_full_rank_inverse_sqrt(int instances, std::uint64_t seed) {
  Rng rng(seed);
  Counter c;
  for (int t = 0; t < instances; ++t) {
    const int d = 2 + static_cast<int>(rng.below(7));
    SymMatrix m = random_psd(d, d, rng);
    m += 0.1 * SymMatrix::identity(d);  // comfortably full rank
    const PsdFactorization f = psd_pseudo_factor(m);
    SymMatrix mid = sandwich(f.sqrt_pinv, m);
    mid -= SymMatrix::identity(d);
    c.tally(fro_norm(mid) <= 1e-7 * d);
  }
  return {"matlin.full_rank_inverse_sqrt", c.all(), c.str()};
}

CheckResult check_fro_submultiplicative(int instances, std::uint64_t seed) {
  Rng rng(seed);
  Counter c;
  for (int t = 0; t < instances; ++t) {
    const int d = 2 + static_cast<int>(rng.below(6));
    const SymMatrix r = random_sym(d, rng);
    const SymMatrix m = random_sym(d, rng);
    const std::vector<double> rm = sym_mul_dense(r, m);
    double f2 = 0.0;
    for (double v : rm) f2 += v * v;
    const double lhs = std::sqrt(f2);
    const double bound =
        std::min(fro_norm(r) * op_norm(m), op_norm(r) * fro_norm(m));
    c.tally(lhs <= bound * (1.0 + 1e-9));
  }
  return {"matlin.fro_norm_submultiplicative", c.all(), c.str()};
}

// ---------------------------------------------------------------------------
// datagen checks
// ---------------------------------------------------------------------------

CheckResult check_label_arithmetic(int instances, std::uint64_t seed) {
  Counter c;
  for (int t = 0; t < instances; ++t) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(t));
    // list model
    {
      const int d = 3;
      const std::size_t m = 400;
      const std::size_t n = 200 + 20 * static_cast<std::size_t>(t % 5);
      const double eps = (t % 3) * 0.04;
      GaussianParams truth = GaussianParams::standard(d);
      PointSet inliers = sample_gaussian(truth, n, derive_seed(s, 0));
      CorruptionSpec spec;
      spec.model = CorruptionModel::ListDecoding;
      spec.alpha = 0.5;
      spec.epsilon = eps;
      spec.m = m;
      spec.adversary.id = (t % 2) ? "second-gaussian" : "point-mass";
      Dataset ds = corrupt_list_model(inliers, truth, spec, derive_seed(s, 1));
      const std::size_t l = static_cast<std::size_t>(
          std::floor(eps * static_cast<double>(n)));
      bool ok = ds.points.size() == m;
      ok = ok && ds.inlier_count(0) == n - l;
      ok = ok && ds.outlier_count() == m - n + l;
      c.tally(ok);
    }
    // GMM model
    {
      const int d = 2;
      std::vector<ComponentTruth> comps(2);
      comps[0].weight = 0.5;
      comps[0].params = GaussianParams::standard(d);
      comps[1].weight = 0.5;
      comps[1].params = GaussianParams::scaled_identity(d, 9.0);
      CorruptionSpec spec;
      spec.model = CorruptionModel::GmmContamination;
      spec.alpha = 0.5;
      spec.epsilon = 0.04;
      spec.m = 1000;
      spec.adversary.id = "point-mass";
      Dataset ds = corrupt_gmm_model(comps, spec, derive_seed(s, 2));
      std::size_t replaced = 0, drawn = 0;
      for (const auto& tr : ds.truth) {
        replaced += tr.n_replaced;
        drawn += tr.n_drawn;
      }
      bool ok = drawn == 1000;
      ok = ok && replaced == static_cast<std::size_t>(
                                 std::floor(0.04 * 0.5 * 1000.0));
      ok = ok && ds.outlier_count() == replaced;
      c.tally(ok);
    }
  }
  return {"datagen.label_arithmetic", c.all(), c.str()};
}

CheckResult check_generation_determinism(std::uint64_t seed) {
  Counter c;
  GaussianParams truth = GaussianParams::standard(3);
  PointSet inliers = sample_gaussian(truth, 150, seed);
  CorruptionSpec spec;
  spec.model = CorruptionModel::ListDecoding;
  spec.alpha = 0.5;
  spec.epsilon = 0.05;
  spec.m = 300;
  spec.adversary.id = "mixture-of-k";
  spec.adversary.params = {{"k", 3.0}};
  const Dataset a = corrupt_list_model(inliers, truth, spec, derive_seed(seed, 7));
  const Dataset b = corrupt_list_model(inliers, truth, spec, derive_seed(seed, 7));
  bool same = a.points.data() == b.points.data() && a.labels.size() == b.labels.size();
  for (std::size_t i = 0; same && i < a.labels.size(); ++i)
    same = a.labels[i] == b.labels[i];
  c.tally(same);
  // same seed twice for the sampler too
  const PointSet s1 = sample_gaussian(truth, 50, derive_seed(seed, 9));
  const PointSet s2 = sample_gaussian(truth, 50, derive_seed(seed, 9));
  c.tally(s1.data() == s2.data());
  return {"datagen.determinism", c.all(), c.str()};
}

CheckResult check_adversary_contracts(std::uint64_t seed) {
  Counter c;
  const auto registry = adversary_registry();
  for (const char* id :
       {"second-gaussian", "point-mass", "thin-direction", "mixture-of-k",
        "replace-extreme"})
    c.tally(std::find(registry.begin(), registry.end(), id) != registry.end());

  Rng rng(seed);
  AdversarySpec pm{"point-mass", {{"radius", 0.0}}};
  const PointSet zeros =
      adversary_generate(pm, 37, 3, GaussianParams::standard(3), rng);
  bool all_zero = zeros.size() == 37;
  for (double v : zeros.data()) all_zero = all_zero && v == 0.0;
  c.tally(all_zero);

  AdversarySpec mix{"mixture-of-k", {{"k", 3.0}}};
  const PointSet pts =
      adversary_generate(mix, 100, 2, GaussianParams::standard(2), rng);
  c.tally(pts.size() == 100);
  bool threw = false;
  try {
    Rng r2(1);
    adversary_generate(AdversarySpec{"nope", {}}, 5, 2,
                       GaussianParams::standard(2), r2);
  } catch (const Error& e) {
    threw = e.code() == ErrorCode::UnknownAdversary;
  }
  c.tally(threw);
  return {"datagen.adversary_contracts", c.all(), c.str()};
}

// ---------------------------------------------------------------------------
// estimator checks
// ---------------------------------------------------------------------------

CheckResult check_divider_oracle(int instances, std::uint64_t seed) {
  Rng rng(seed);
  Counter c;
  for (int t = 0; t < instances; ++t) {
    const std::size_t m = 20 + rng.below(400);
    std::vector<double> values(m);
    const int pattern = static_cast<int>(rng.below(3));
    for (std::size_t i = 0; i < m; ++i) {
      if (pattern == 0)
        values[i] = rng.uniform01() < 0.5 ? rng.gaussian() : 40.0 + rng.gaussian();
      else if (pattern == 1)
        values[i] = 100.0 * rng.uniform01();
      else
        values[i] = rng.gaussian();
    }
    const std::size_t m1 = 1 + rng.below(m / 4 + 1);
    const std::size_t n_prime = 1 + rng.below(m / 2 + 1);
    const auto expect = oracles::brute_force_divider(values, n_prime, m1);
    bool ok = true;
    try {
      const double tau = find_divider(values, n_prime, m1);
      ok = expect.has_value() && tau == *expect;
      if (ok) {
        std::size_t below = 0;
        for (double v : values)
          if (v <= tau) ++below;
        ok = below >= m1 && (m - below) >= m1;
      }
    } catch (const Error& e) {
      ok = !expect.has_value() && (e.code() == ErrorCode::NoSparseSubinterval ||
                                   e.code() == ErrorCode::DegenerateRange ||
                                   e.code() == ErrorCode::BadRank);
    }
    c.tally(ok);
  }
  return {"estimator.find_divider_oracle", c.all(), c.str()};
}

CheckResult check_score_stats_oracle(int instances, std::uint64_t seed) {
  Rng rng(seed);
  Counter c;
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 10 + rng.below(1000);
    std::vector<double> values(n);
    for (double& v : values) v = rng.uniform01();
    const std::size_t m1 = 1 + rng.below(n / 2);
    const ScoreStats s = score_stats(values, m1);
    const auto q = oracles::sorted_quantiles(values, m1);
    c.tally(s.q_left == q.q_left && s.q_right == q.q_right && s.median == q.median);
  }
  return {"estimator.score_stats_sort_oracle", c.all(), c.str()};
}

CheckResult check_filter_frequencies(std::uint64_t seed) {
  Counter c;
  {
    Rng rng(seed);
    const std::vector<double> scores{1.0, 3.0};
    std::size_t hits0 = 0;
    const int draws = 10000;
    for (int t = 0; t < draws; ++t)
      if (filter_step(scores, rng) == 0) ++hits0;
    const double f0 = static_cast<double>(hits0) / draws;
    c.tally(std::abs(f0 - 0.25) <= 0.02);
  }
  {
    Rng rng(derive_seed(seed, 1));
    const std::vector<double> scores{2.0, 2.0, 2.0, 2.0};
    std::vector<int> hits(4, 0);
    const int draws = 10000;
    for (int t = 0; t < draws; ++t) ++hits[filter_step(scores, rng)];
    bool ok = true;
    for (int h : hits)
      ok = ok && std::abs(static_cast<double>(h) / draws - 0.25) <= 0.02;
    c.tally(ok);
  }
  {
    Rng rng(derive_seed(seed, 2));
    c.tally(filter_step({0.0, 7.0, 0.0}, rng) == 1);
  }
  return {"estimator.filter_step_frequencies", c.all(), c.str()};
}

CheckResult check_structural_invariants(int runs, std::uint64_t seed) {
  Counter c;
  for (int t = 0; t < runs; ++t) {
    const auto run = scenarios::run_two_cluster(derive_seed(seed, static_cast<std::uint64_t>(t)),
                                                2000);
    c.tally(scenarios::check_structure(run).ok());
  }
  // determinism: identical (points, config) -> identical output and trace
  const auto a = scenarios::run_two_cluster(derive_seed(seed, 101), 2000);
  const auto b = scenarios::run_two_cluster(derive_seed(seed, 101), 2000);
  bool same = a.result.hypotheses.size() == b.result.hypotheses.size() &&
              a.result.trace.nodes.size() == b.result.trace.nodes.size();
  for (std::size_t i = 0; same && i < a.result.hypotheses.size(); ++i)
    same = a.result.hypotheses[i].indices == b.result.hypotheses[i].indices &&
           a.result.hypotheses[i].h_matrix.data() == b.result.hypotheses[i].h_matrix.data();
  for (std::size_t i = 0; same && i < a.result.trace.nodes.size(); ++i) {
    same = a.result.trace.nodes[i].filter_removals ==
               b.result.trace.nodes[i].filter_removals &&
           a.result.trace.nodes[i].input_indices ==
               b.result.trace.nodes[i].input_indices;
  }
  c.tally(same);
  return {"estimator.structural_invariants", c.all(), c.str()};
}

CheckResult check_certificate_at_root(std::uint64_t seed) {
  Counter c;
  const auto run = scenarios::run_pure_gaussian(seed);
  c.tally(run.result.hypotheses.size() == 1);
  c.tally(run.result.trace.total_removals() == 0);
  c.tally(run.result.trace.nodes.size() == 1);
  c.tally(run.result.trace.nodes.front().termination == Termination::Certificate);
  return {"estimator.certificate_at_root", c.all(), c.str()};
}

/// Filter-score ratio: on instances meeting the filter preconditions (tight
/// quantile range, mean score above threshold, concentrated inliers), the
/// total score dominates the inlier score by (40/eps0) / alpha^3.
CheckResult check_filter_score_ratio(int instances, std::uint64_t seed) {
  Counter c;
  for (int t = 0; t < instances; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    const double alpha = 0.5;
    const std::size_t m = 1000;
    const std::size_t n_in = 500;
    EstimatorConfig cfg = EstimatorConfig::calibrated(alpha, 1);
    const EffectiveConstants k = effective_constants(cfg, m);

    // 1-D projected values: inliers tightly packed at 0, outliers one-sided
    // just inside the quantile window with large scores
    const double spread = 1e-3;
    const double outlier_pos = 0.9 * k.r_eff;
    std::vector<double> values(m);
    std::vector<bool> is_inlier(m, false);
    for (std::size_t i = 0; i < n_in; ++i) {
      values[i] = spread * rng.gaussian();
      is_inlier[i] = true;
    }
    for (std::size_t i = n_in; i < m; ++i)
      values[i] = outlier_pos * (1.0 + 0.01 * rng.uniform01());

    const ScoreStats stats = score_stats(values, k.m1);
    const bool preconditions =
        (stats.q_right - stats.q_left) <= k.r_eff && stats.mean_f > k.threshold_eff;
    double total = 0.0, inlier_part = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double f = (values[i] - stats.median) * (values[i] - stats.median);
      total += f;
      if (is_inlier[i]) inlier_part += f;
    }
    const double needed = (40.0 / cfg.eps0) / (alpha * alpha * alpha);
    c.tally(preconditions && inlier_part > 0 && total / inlier_part > needed);
  }
  return {"estimator.filter_score_ratio", c.all(), c.str()};
}

CheckResult check_loop_cost_scaling(std::uint64_t seed) {
  const double t_m_lo = scenarios::time_single_loop(4, 1000, derive_seed(seed, 0), 5);
  const double t_m_hi = scenarios::time_single_loop(4, 4000, derive_seed(seed, 1), 5);
  const double t_d_lo = scenarios::time_single_loop(4, 2000, derive_seed(seed, 2), 5);
  const double t_d_hi = scenarios::time_single_loop(16, 2000, derive_seed(seed, 3), 5);
  const double m_ratio = t_m_hi / t_m_lo;
  const double d_ratio = t_d_hi / t_d_lo;
  std::ostringstream detail;
  detail << "m-ratio " << m_ratio << ", d-ratio " << d_ratio;
  const bool pass =
      m_ratio >= 2.5 && m_ratio <= 6.0 && d_ratio >= 8.0 && d_ratio <= 32.0;
  return {"estimator.loop_cost_scaling", pass, detail.str()};
}

CheckResult check_effective_constants(std::uint64_t) {
  Counter c;
  EstimatorConfig cfg;
  cfg.alpha = 0.5;
  cfg.constant_mode = ConstantMode::PaperFaithful;
  const EffectiveConstants k = effective_constants(cfg, 90);
  const double expect_r =
      (6000.0 * std::sqrt(8.0) + 1.0) * 4.0 * std::log(200.0);
  c.tally(std::abs(k.r_paper - expect_r) <= 1e-9 * expect_r);
  c.tally(std::abs(k.r_paper - 3.596e5) <= 0.02e5);
  c.tally(k.m1 == 5);
  EstimatorConfig c2 = cfg;
  c2.alpha = 0.1;
  c.tally(effective_constants(c2, 1000).max_depth == 91);
  return {"estimator.effective_constants", c.all(), c.str()};
}

// ---------------------------------------------------------------------------
// diagnostics checks
// ---------------------------------------------------------------------------

CheckResult check_certificate_inequality_sweep(int instances, std::uint64_t seed) {
  Rng rng(seed);
  Counter c;
  for (int t = 0; t < instances; ++t) {
    const int d = 1 + static_cast<int>(rng.below(5));
    const std::size_t m = 10 + rng.below(51);
    const double alpha = 0.2 + 0.3 * rng.uniform01();
    PointSet pts = random_points(d, m, rng, 1.0 + rng.uniform01());
    // random subset of at least (alpha/2) m points
    const std::size_t lo =
        static_cast<std::size_t>(std::ceil(0.5 * alpha * static_cast<double>(m)));
    const std::size_t size = lo + rng.below(m - lo + 1);
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < size; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.below(m - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(size);
    const InequalityCheck r = check_certificate_inequality(pts, idx, alpha);
    c.tally(r.holds);
  }
  return {"diagnostics.certificate_inequality_sweep", c.all(), c.str()};
}

CheckResult check_sigma_guarantee_sweep(int instances, std::uint64_t seed) {
  Rng rng(seed);
  Counter c;
  for (int t = 0; t < instances; ++t) {
    const int d = 2 + static_cast<int>(rng.below(5));
    const int rank_a = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
    const SymMatrix a = random_psd(d, rank_a, rng);
    // B = A M A^T has ker(A) inside ker(B)
    const SymMatrix m = random_psd(d, d, rng);
    const SymMatrix b = sandwich(a, m);
    const InequalityCheck r = check_sigma_guarantee(a, b);
    c.tally(r.holds);
  }
  return {"diagnostics.sigma_guarantee_sweep", c.all(), c.str()};
}

CheckResult check_closeness_norm_sweep(int instances, std::uint64_t seed) {
  Rng rng(seed);
  Counter c;
  for (int t = 0; t < instances; ++t) {
    const int d = 2 + static_cast<int>(rng.below(5));
    SymMatrix h = random_psd(d, d, rng);
    h += 0.5 * SymMatrix::identity(d);
    const SymMatrix h_root = psd_sqrt(h);
    const double rho = 0.05 + 0.45 * rng.uniform01();
    // Sigma_i = H^{1/2} (I + E_i) H^{1/2} with ||E_i||_F = rho
    SymMatrix sigmas[2] = {SymMatrix(d), SymMatrix(d)};
    for (auto& s : sigmas) {
      SymMatrix e = random_sym(d, rng);
      e *= rho / fro_norm(e);
      s = sandwich(h_root, SymMatrix::identity(d) + e);
    }
    SymMatrix sigma = random_psd(d, d, rng);
    sigma += 0.2 * SymMatrix::identity(d);
    const InequalityCheck r =
        check_closeness_norm(sigmas[0], sigmas[1], h, sigma, rho);
    c.tally(r.holds);
  }
  return {"diagnostics.closeness_norm_sweep", c.all(), c.str()};
}

CheckResult check_diff_frob_sweep(int instances, std::uint64_t seed) {
  Rng rng(seed);
  Counter c;
  for (int t = 0; t < instances; ++t) {
    const int d = 2 + static_cast<int>(rng.below(5));
    std::vector<double> g(static_cast<std::size_t>(d) * d);
    for (double& v : g) v = rng.gaussian() * (1.0 + 2.0 * rng.uniform01());
    if (rng.uniform01() < 0.3) {
      // zero out a column: rank-deficient G
      const int col = static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
      for (int i = 0; i < d; ++i) g[static_cast<std::size_t>(i) * d + col] = 0.0;
    }
    const SymMatrix b = random_psd(d, d, rng);
    const double rho_used =
        std::max(1.0, oracles::proj_minus_gbg_norm(d, g, b) * 1.001);
    const DiffFrobWitness w = diff_frob_witness(d, g, b, rho_used);
    c.tally(w.holds);
  }
  return {"diagnostics.diff_frob_sweep", c.all(), c.str()};
}

CheckResult check_fact22_mc(int trials, std::size_t n_mc, std::uint64_t seed) {
  Rng rng(seed);
  Counter c;
  int held = 0;
  for (int t = 0; t < trials; ++t) {
    const int d = 4;
    GaussianParams p;
    p.mean.resize(d);
    for (double& v : p.mean) v = rng.gaussian();
    p.covariance = random_psd(d, d, rng);
    SymMatrix a = random_sym(d, rng);
    a *= 1.0 / fro_norm(a);
    const VarianceCheck r =
        check_gaussian_quadratic_variance(p, a, n_mc, rng.next_u64());
    if (r.holds) ++held;
  }
  c.tally(static_cast<double>(held) >= 0.99 * trials);

  // closed form: mu = 0, Sigma = I, A = I/sqrt(d) has Var = 2, bound = 4
  const int d = 4;
  GaussianParams p = GaussianParams::standard(d);
  SymMatrix a = SymMatrix::identity(d);
  a *= 1.0 / std::sqrt(static_cast<double>(d));
  const VarianceCheck r = check_gaussian_quadratic_variance(p, a, n_mc, seed);
  c.tally(std::abs(r.mc_variance - 2.0) <= 0.03 * 2.0 || n_mc < 100000);
  c.tally(std::abs(r.bound - 4.0) <= 1e-12);
  c.tally(r.holds);
  std::ostringstream detail;
  detail << held << "/" << trials << " bound held; closed-form var "
         << r.mc_variance;
  return {"diagnostics.fact22_monte_carlo", c.all(), detail.str()};
}

CheckResult check_stability_clean(std::size_t n, double eps, std::size_t trials,
                                  std::uint64_t seed) {
  const int d = 5;
  GaussianParams p = GaussianParams::standard(d);
  const PointSet pts = sample_gaussian(p, n, seed);
  const StabilityReport r =
      check_stability(pts, p.mean, p.covariance, 0.01, eps, trials, seed);
  const bool ok = r.l1 <= 1.0 && r.l2 <= 1.0 && r.l3 <= 1.0 && r.l4 <= 1.0 &&
                  r.l5 <= 1.0;
  std::ostringstream detail;
  detail << "ratios " << r.l1 << ' ' << r.l2 << ' ' << r.l3 << ' ' << r.l4
         << ' ' << r.l5 << " on " << r.subsets_tested << " subsets";
  return {"diagnostics.stability_clean_gaussian", ok, detail.str()};
}

CheckResult check_stability_detects_violation(std::uint64_t seed) {
  const int d = 4;
  GaussianParams p = GaussianParams::standard(d);
  PointSet pts = sample_gaussian(p, 4000, seed);
  // plant 1% far points
  Rng rng(derive_seed(seed, 3));
  std::vector<double> far(d, 0.0);
  for (int i = 0; i < 40; ++i) {
    far[0] = 60.0 + rng.uniform01();
    pts.push_back(far);
  }
  const StabilityReport r =
      check_stability(pts, p.mean, p.covariance, 0.01, 0.0, 0, seed);
  return {"diagnostics.stability_detects_violation", r.l2 > 1.0,
          "l2 ratio " + std::to_string(r.l2)};
}

CheckResult check_inlier_removal_budget(int runs, std::uint64_t seed) {
  Counter c;
  int within = 0;
  for (int t = 0; t < runs; ++t) {
    const auto run =
        scenarios::run_two_cluster(derive_seed(seed, static_cast<std::uint64_t>(t)));
    bool ok = true;
    for (int p = 0; p < 2; ++p) {
      const auto& tr = run.dataset.truth[static_cast<std::size_t>(p)];
      const double budget = 0.01 * run.config.alpha *
                            static_cast<double>(tr.n_drawn - tr.n_replaced);
      if (static_cast<double>(scenarios::premise_qualified_removals(run, p)) > budget)
        ok = false;
    }
    if (ok) ++within;
    c.tally(true);
  }
  const bool pass = within >= static_cast<int>(std::ceil(0.96 * runs));
  return {"diagnostics.inlier_removal_budget", pass,
          std::to_string(within) + "/" + std::to_string(runs) + " within budget"};
}

CheckResult check_gmm_metrics_contracts(std::uint64_t seed) {
  Counter c;
  // k = 1: single hypothesis holding everything -> overlap fraction 1
  {
    const auto run = scenarios::run_pure_gaussian(seed);
    const MetricReport r = gmm_cluster_metrics(run.dataset, run.result.hypotheses);
    c.tally(r.list_size == 1 && r.inlier_overlap_frac >= 0.99);
    std::size_t total = 0;
    for (const auto& h : run.result.hypotheses) total += h.indices.size();
    c.tally(total <= run.dataset.points.size());
  }
  // two far components: best-match hypotheses are distinct
  {
    const auto run = scenarios::run_two_cluster(derive_seed(seed, 5));
    const MetricReport r = gmm_cluster_metrics(run.dataset, run.result.hypotheses);
    if (r.list_size >= 2) {
      c.tally(r.per_component.at(0).best_hypothesis !=
              r.per_component.at(1).best_hypothesis);
    } else {
      c.tally(false);
    }
    c.tally(r.separation_table[0][1] > 0.0);
  }
  return {"diagnostics.gmm_metrics_contracts", c.all(), c.str()};
}

}  // namespace

std::vector<CheckResult> run_all(const std::string& suite, std::uint64_t seed) {
  const bool full = suite == "full";
  std::vector<CheckResult> out;

  out.push_back(check_psd_factorization(full ? 200 : 50, derive_seed(seed, 1)));
  out.push_back(check_lifted_rayleigh(full ? 100 : 30, derive_seed(seed, 2)));
  out.push_back(check_full_rank_inverse_sqrt(full ? 100 : 25, derive_seed(seed, 3)));
  out.push_back(check_fro_submultiplicative(full ? 200 : 50, derive_seed(seed, 4)));

  out.push_back(check_label_arithmetic(full ? 20 : 6, derive_seed(seed, 5)));
  out.push_back(check_generation_determinism(derive_seed(seed, 6)));
  out.push_back(check_adversary_contracts(derive_seed(seed, 7)));

  out.push_back(check_divider_oracle(full ? 1000 : 200, derive_seed(seed, 8)));
  out.push_back(check_score_stats_oracle(full ? 500 : 100, derive_seed(seed, 9)));
  out.push_back(check_filter_frequencies(derive_seed(seed, 10)));
  out.push_back(check_structural_invariants(full ? 6 : 2, derive_seed(seed, 11)));
  out.push_back(check_certificate_at_root(derive_seed(seed, 12)));
  out.push_back(check_filter_score_ratio(20, derive_seed(seed, 13)));
  out.push_back(check_effective_constants(derive_seed(seed, 14)));
  if (full) out.push_back(check_loop_cost_scaling(derive_seed(seed, 24)));

  out.push_back(
      check_certificate_inequality_sweep(full ? 500 : 100, derive_seed(seed, 15)));
  out.push_back(check_sigma_guarantee_sweep(full ? 200 : 50, derive_seed(seed, 16)));
  out.push_back(check_closeness_norm_sweep(full ? 200 : 50, derive_seed(seed, 17)));
  out.push_back(check_diff_frob_sweep(full ? 200 : 50, derive_seed(seed, 18)));
  out.push_back(check_fact22_mc(full ? 50 : 10, full ? 100000 : 20000,
                                derive_seed(seed, 19)));
  out.push_back(check_stability_clean(full ? 100000 : 20000, full ? 0.01 : 0.005,
                                      full ? 10 : 3, derive_seed(seed, 20)));
  out.push_back(check_stability_detects_violation(derive_seed(seed, 21)));
  out.push_back(
      check_inlier_removal_budget(full ? 50 : 10, derive_seed(seed, 22)));
  out.push_back(check_gmm_metrics_contracts(derive_seed(seed, 23)));

  if (std::getenv("LISTDEC_SELFTEST_INJECT_FAIL") != nullptr &&
      std::string(std::getenv("LISTDEC_SELFTEST_INJECT_FAIL")) == "1")
    out.push_back({"injected_failure", false, "test-only hook"});
  return out;
}

}  // namespace listdec::selftest
