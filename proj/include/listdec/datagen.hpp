// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

#ifndef LISTDEC_DATAGEN_HPP
#define LISTDEC_DATAGEN_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "listdec/common.hpp"
#include "listdec/matlin.hpp"

namespace listdec {

struct GaussianParams {
  std::vector<double> mean;
  SymMatrix covariance;

  int dim() const { return static_cast<int>(mean.size()); }
  static GaussianParams standard(int dim);
  static GaussianParams scaled_identity(int dim, double sigma2);
};

enum class CorruptionModel { ListDecoding, GmmContamination };

/// Adversary identity plus a flat parameter map. Parameters not set fall back
/// to per-adversary defaults; see adversary_registry() for the known ids.
struct AdversarySpec {
  std::string id = "second-gaussian";
  std::map<std::string, double> params;

  double get(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

struct CorruptionSpec {
  CorruptionModel model = CorruptionModel::ListDecoding;
  double alpha = 0.5;    // inlier fraction (list model) / minimum weight (GMM)
  double epsilon = 0.0;  // inlier-replacement fraction
  AdversarySpec adversary;
  std::size_t m = 0;  // total sample count handed to the estimator
};

struct Label {
  bool inlier = false;
  int component = -1;  // valid when inlier

  static Label make_inlier(int component) { return {true, component}; }
  static Label make_outlier() { return {false, -1}; }
  bool operator==(const Label& o) const {
    return inlier == o.inlier && (!inlier || component == o.component);
  }
};

struct ComponentTruth {
  double weight = 1.0;
  GaussianParams params;
  std::size_t n_drawn = 0;     // inliers sampled for this component
  std::size_t n_replaced = 0;  // of those, replaced by the adversary
};

/// Labeled synthetic dataset. Ground truth (labels, truth) is carried for
/// evaluation only; estimator_input() strips it.
struct Dataset {
  int dim = 0;
  PointSet points;
  std::vector<Label> labels;
  std::vector<ComponentTruth> truth;
  CorruptionSpec spec;
  std::uint64_t seed = 0;

  /// Label-free view handed to the estimator.
  const PointSet& estimator_input() const { return points; }

  std::size_t inlier_count(int component) const;
  std::size_t outlier_count() const;

  /// Asserts the Definition 1.1 / 1.3 label arithmetic; throws BadCounts.
  void validate() const;
};

/// x = mu + Sigma^{1/2} z with z drawn from the seeded stream.
PointSet sample_gaussian(const GaussianParams& params, std::size_t n,
                         std::uint64_t seed);

/// List-decoding corruption (Definition 1.1): replaces floor(epsilon * n)
/// inliers and adds m - n adversary points, then shuffles.
Dataset corrupt_list_model(const PointSet& inliers, const GaussianParams& truth,
                           const CorruptionSpec& spec, std::uint64_t seed);

/// GMM contamination (Definition 1.3): draws spec.m mixture samples with
/// origin labels, then lets the adversary replace up to
/// floor(epsilon * alpha * m) of them in total.
Dataset corrupt_gmm_model(const std::vector<ComponentTruth>& components,
                          const CorruptionSpec& spec, std::uint64_t seed);

/// Registered adversary ids.
std::vector<std::string> adversary_registry();

/// Generates `count` outlier points for the given adversary id. Exposed for
/// tests; UnknownAdversary on an unregistered id.
PointSet adversary_generate(const AdversarySpec& spec, std::size_t count,
                            int dim, const GaussianParams& reference, Rng& rng);

}  // namespace listdec

#endif  // LISTDEC_DATAGEN_HPP
