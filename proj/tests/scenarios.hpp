// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Shared end-to-end scenarios for the acceptance suite, the selftest command
// and the calibration tool.

#ifndef LISTDEC_TESTS_SCENARIOS_HPP
#define LISTDEC_TESTS_SCENARIOS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "listdec/datagen.hpp"
#include "listdec/diagnostics.hpp"
#include "listdec/estimator.hpp"

namespace listdec::scenarios {

struct RunOutcome {
  Dataset dataset;
  DecodingResult result;
  EstimatorConfig config;
};

// --- scenario (a): pure inliers N(0, I_4), m = 5000, alpha = 0.5 -----------

inline RunOutcome run_pure_gaussian(std::uint64_t seed) {
  RunOutcome out;
  const int d = 4;
  const std::size_t m = 5000;
  GaussianParams truth = GaussianParams::standard(d);
  PointSet inliers = sample_gaussian(truth, m, derive_seed(seed, 0));
  CorruptionSpec spec;
  spec.model = CorruptionModel::ListDecoding;
  spec.alpha = 0.5;
  spec.epsilon = 0.0;
  spec.m = m;
  spec.adversary.id = "point-mass";
  out.dataset = corrupt_list_model(inliers, truth, spec, derive_seed(seed, 1));
  out.config = EstimatorConfig::calibrated(0.5, derive_seed(seed, 2));
  out.result = covariance_list_decoding(out.dataset.estimator_input(), out.config);
  return out;
}

// --- scenario (b): two equal clusters N(0, I) vs N(0, 1e4 I), d = 3 --------

inline RunOutcome run_two_cluster(std::uint64_t seed, std::size_t m = 5000) {
  RunOutcome out;
  const int d = 3;
  std::vector<ComponentTruth> comps(2);
  comps[0].weight = 0.5;
  comps[0].params = GaussianParams::standard(d);
  comps[1].weight = 0.5;
  comps[1].params = GaussianParams::scaled_identity(d, 1e4);
  CorruptionSpec spec;
  spec.model = CorruptionModel::GmmContamination;
  spec.alpha = 0.5;
  spec.epsilon = 0.0;
  spec.m = m;
  out.dataset = corrupt_gmm_model(comps, spec, derive_seed(seed, 0));
  out.config = EstimatorConfig::calibrated(0.5, derive_seed(seed, 1));
  out.result = covariance_list_decoding(out.dataset.estimator_input(), out.config);
  return out;
}

// --- scenario (c): minority inliers vs three scale-separated Gaussians ------

inline RunOutcome run_minority(std::uint64_t seed) {
  RunOutcome out;
  const int d = 16;
  const std::size_t m = 8000;
  const std::size_t n = 3700;
  GaussianParams truth = GaussianParams::standard(d);
  PointSet inliers = sample_gaussian(truth, n, derive_seed(seed, 0));
  CorruptionSpec spec;
  spec.model = CorruptionModel::ListDecoding;
  spec.alpha = 0.25;
  spec.epsilon = 0.0;
  spec.m = m;
  spec.adversary.id = "mixture-of-k";
  spec.adversary.params = {{"k", 3.0}, {"scale_base", 1e3}, {"scale_ratio", 1e3}};
  out.dataset = corrupt_list_model(inliers, truth, spec, derive_seed(seed, 1));
  out.config = EstimatorConfig::calibrated(0.25, derive_seed(seed, 2));
  out.result = covariance_list_decoding(out.dataset.estimator_input(), out.config);
  return out;
}

// --- scenario (gmm): k = 2, eps = 0.02, point-mass replacements, d = 16 ----

inline RunOutcome run_gmm_contaminated(std::uint64_t seed) {
  RunOutcome out;
  const int d = 16;
  const std::size_t m = 4000;
  std::vector<ComponentTruth> comps(2);
  comps[0].weight = 0.5;
  comps[0].params = GaussianParams::standard(d);
  comps[1].weight = 0.5;
  comps[1].params = GaussianParams::scaled_identity(d, 1e4);
  CorruptionSpec spec;
  spec.model = CorruptionModel::GmmContamination;
  spec.alpha = 0.5;
  spec.epsilon = 0.02;
  spec.m = m;
  spec.adversary.id = "point-mass";
  spec.adversary.params = {{"radius", 60.0}};
  out.dataset = corrupt_gmm_model(comps, spec, derive_seed(seed, 0));
  out.config = EstimatorConfig::calibrated(0.5, derive_seed(seed, 1));
  out.result = covariance_list_decoding(out.dataset.estimator_input(), out.config);
  return out;
}

// --- structural invariants (disjointness, sizes, depth, conservation) ------

struct StructuralCheck {
  bool disjoint = false;
  bool sizes_ok = false;
  bool depth_ok = false;
  bool conserved = false;
  bool partitions_ok = false;
  bool ok() const {
    return disjoint && sizes_ok && depth_ok && conserved && partitions_ok;
  }
};

inline StructuralCheck check_structure(const RunOutcome& run) {
  StructuralCheck c;
  const std::size_t m = run.dataset.points.size();
  const EffectiveConstants k = effective_constants(run.config, m);

  // pairwise disjoint hypothesis index sets
  std::vector<char> seen(m, 0);
  c.disjoint = true;
  for (const auto& h : run.result.hypotheses)
    for (std::size_t i : h.indices) {
      if (i >= m || seen[i]) c.disjoint = false;
      else seen[i] = 1;
    }

  // every hypothesis holds at least min_output_frac * alpha * m points
  c.sizes_ok = true;
  const double floor_size =
      run.config.min_output_frac * run.config.alpha * static_cast<double>(m);
  for (const auto& h : run.result.hypotheses)
    if (static_cast<double>(h.indices.size()) < floor_size) c.sizes_ok = false;

  c.depth_ok = run.result.trace.depth() <= k.max_depth;

  // conservation: hypotheses + removals + discarded sets = root set, each
  // index exactly once
  std::vector<int> count(m, 0);
  for (const auto& h : run.result.hypotheses)
    for (std::size_t i : h.indices) ++count[i];
  for (const auto& n : run.result.trace.nodes) {
    for (const auto& [idx, score] : n.filter_removals) ++count[idx];
    if (n.termination == Termination::TooSmall)
      for (std::size_t i : n.discarded) ++count[i];
  }
  c.conserved = std::all_of(count.begin(), count.end(), [](int v) { return v == 1; });

  // split children partition the parent set at the time of splitting
  c.partitions_ok = true;
  for (std::size_t ni = 0; ni < run.result.trace.nodes.size(); ++ni) {
    const TraceNode& n = run.result.trace.nodes[ni];
    if (n.termination != Termination::Split) continue;
    if (n.left_size + n.right_size + n.filter_removals.size() != n.input_size)
      c.partitions_ok = false;
    std::set<std::size_t> parent(n.input_indices.begin(), n.input_indices.end());
    for (const auto& [idx, score] : n.filter_removals) parent.erase(idx);
    // children appear later in DFS order with matching node ids
    std::size_t found = 0;
    for (const auto& child : run.result.trace.nodes) {
      if (child.id.level != n.id.level + 1) continue;
      if (child.id.position != 2 * n.id.position &&
          child.id.position != 2 * n.id.position + 1)
        continue;
      ++found;
      for (std::size_t i : child.input_indices)
        if (parent.erase(i) == 0) c.partitions_ok = false;
    }
    if (found != 2 || !parent.empty()) c.partitions_ok = false;
  }
  return c;
}

// --- per-component audits ---------------------------------------------------

/// Fraction of component p's surviving inliers captured by hypothesis h.
inline double component_capture(const Dataset& ds, const Hypothesis& h, int p) {
  const std::size_t surviving =
      ds.truth[static_cast<std::size_t>(p)].n_drawn -
      ds.truth[static_cast<std::size_t>(p)].n_replaced;
  if (surviving == 0) return 0.0;
  std::size_t overlap = 0;
  for (std::size_t i : h.indices)
    if (ds.labels[i].inlier && ds.labels[i].component == p) ++overlap;
  return static_cast<double>(overlap) / static_cast<double>(surviving);
}

/// One estimator loop at (d, m): second moment, factorization, whitening,
/// lifted eigensolve, quantiles. Median of `reps` timings, in milliseconds.
inline double time_single_loop(int d, std::size_t m, std::uint64_t seed, int reps);

/// Filter removals of component p's points, counted only in nodes whose
/// working set still holds at least (1 - 2 eps0) of p's surviving inliers
/// (the premise under which the martingale bound applies).
inline std::size_t premise_qualified_removals(const RunOutcome& run, int p,
                                              double eps0 = 0.01) {
  const Dataset& ds = run.dataset;
  const std::size_t surviving =
      ds.truth[static_cast<std::size_t>(p)].n_drawn -
      ds.truth[static_cast<std::size_t>(p)].n_replaced;
  const double premise = (1.0 - 2.0 * eps0) * static_cast<double>(surviving);
  std::size_t removed = 0;
  for (const auto& node : run.result.trace.nodes) {
    std::size_t members = 0;
    for (std::size_t i : node.input_indices)
      if (ds.labels[i].inlier && ds.labels[i].component == p) ++members;
    if (static_cast<double>(members) < premise) continue;
    for (const auto& [idx, score] : node.filter_removals)
      if (ds.labels[idx].inlier && ds.labels[idx].component == p) ++removed;
  }
  return removed;
}

inline double time_single_loop(int d, std::size_t m, std::uint64_t seed, int reps) {
  GaussianParams p = GaussianParams::standard(d);
  const PointSet pts = sample_gaussian(p, m, seed);
  std::vector<double> times;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const SymMatrix h = second_moment(pts);
    const PsdFactorization f = psd_pseudo_factor(h);
    const PointSet tilde = transform_points(f.sqrt_pinv, pts);
    const LiftedEigResult lifted =
        lifted_top_eig(tilde, derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::vector<double> values(m);
    for (std::size_t i = 0; i < m; ++i)
      values[i] = quad_form(lifted.matrix_a, tilde.row(i));
    const std::size_t m1 = std::max<std::size_t>(1, m / 18);
    (void)score_stats(values, m1);
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

}  // namespace listdec::scenarios

#endif  // LISTDEC_TESTS_SCENARIOS_HPP
