// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

#include "listdec/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace listdec {

GaussianParams GaussianParams::standard(int dim) {
  return {std::vector<double>(dim, 0.0), SymMatrix::identity(dim)};
}

GaussianParams GaussianParams::scaled_identity(int dim, double sigma2) {
  GaussianParams p = standard(dim);
  p.covariance *= sigma2;
  return p;
}

std::size_t Dataset::inlier_count(int component) const {
  std::size_t c = 0;
  for (const Label& l : labels)
    if (l.inlier && l.component == component) ++c;
  return c;
}

std::size_t Dataset::outlier_count() const {
  std::size_t c = 0;
  for (const Label& l : labels)
    if (!l.inlier) ++c;
  return c;
}

void Dataset::validate() const {
  require(labels.size() == points.size(), ErrorCode::BadCounts,
          "Dataset: label/point count mismatch");
  for (std::size_t p = 0; p < truth.size(); ++p) {
    const auto& t = truth[p];
    require(inlier_count(static_cast<int>(p)) == t.n_drawn - t.n_replaced,
            ErrorCode::BadCounts, "Dataset: inlier label count != n_p - l_p");
  }
  if (spec.model == CorruptionModel::ListDecoding) {
    const auto& t = truth.at(0);
    require(static_cast<double>(t.n_drawn) >= spec.alpha * static_cast<double>(spec.m) - 1e-9,
            ErrorCode::BadCounts, "Dataset: n < alpha * m");
    require(static_cast<double>(t.n_replaced) <=
                spec.epsilon * static_cast<double>(t.n_drawn) + 1e-9,
            ErrorCode::BadCounts, "Dataset: l > epsilon * n");
  } else {
    std::size_t total_replaced = 0;
    for (const auto& t : truth) total_replaced += t.n_replaced;
    require(static_cast<double>(total_replaced) <=
                spec.epsilon * spec.alpha * static_cast<double>(spec.m) + 1e-9,
            ErrorCode::BadCounts, "Dataset: sum l_p > epsilon * alpha * m");
  }
}

PointSet sample_gaussian(const GaussianParams& params, std::size_t n,
                         std::uint64_t seed) {
  require(n >= 1, ErrorCode::InvalidArgument, "sample_gaussian: n must be >= 1");
  const int d = params.dim();
  require(params.covariance.dim() == d, ErrorCode::InvalidArgument,
          "sample_gaussian: mean/covariance dim mismatch");
  const SymMatrix root = psd_sqrt(params.covariance);  // throws NotPsd

  Rng rng(seed);
  std::vector<double> out(n * static_cast<std::size_t>(d));
  std::vector<double> z(d);
  for (std::size_t t = 0; t < n; ++t) {
    for (int i = 0; i < d; ++i) z[i] = rng.gaussian();
    for (int i = 0; i < d; ++i) {
      double s = params.mean[i];
      for (int j = 0; j < d; ++j) s += root(i, j) * z[j];
      out[t * static_cast<std::size_t>(d) + i] = s;
    }
  }
  return PointSet(d, std::move(out));
}

// ---------------------------------------------------------------------------
// Adversaries
// ---------------------------------------------------------------------------

namespace {

double reference_scale(const GaussianParams& reference) {
  double s = 0.0;
  for (int i = 0; i < reference.dim(); ++i)
    s = std::max(s, reference.covariance(i, i));
  return s > 0 ? s : 1.0;
}

PointSet gen_second_gaussian(const AdversarySpec& spec, std::size_t count,
                             int dim, const GaussianParams& reference, Rng& rng) {
  const double sigma2 = spec.get("sigma2", 100.0 * reference_scale(reference));
  const double mean_radius = spec.get("mean_radius", 0.0);
  GaussianParams p = GaussianParams::scaled_identity(dim, sigma2);
  p.mean[0] = mean_radius;
  return sample_gaussian(p, count, rng.next_u64());
}

PointSet gen_point_mass(const AdversarySpec& spec, std::size_t count, int dim,
                        const GaussianParams&, Rng&) {
  const double radius = spec.get("radius", 0.0);
  std::vector<double> flat(count * static_cast<std::size_t>(dim), 0.0);
  for (std::size_t t = 0; t < count; ++t)
    flat[t * static_cast<std::size_t>(dim)] = radius;
  return PointSet(dim, std::move(flat));
}

PointSet gen_thin_direction(const AdversarySpec& spec, std::size_t count,
                            int dim, const GaussianParams& reference, Rng& rng) {
  const double sigma2 = spec.get("sigma2", 4.0 * reference_scale(reference));
  const double thin = spec.get("thin", 1e-4);
  // unit direction from the stream
  std::vector<double> u(dim);
  double norm = 0.0;
  for (double& v : u) {
    v = rng.gaussian();
    norm += v * v;
  }
  norm = std::sqrt(std::max(norm, 1e-300));
  for (double& v : u) v /= norm;

  SymMatrix cov = SymMatrix::identity(dim);
  cov *= sigma2;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j <= i; ++j)
      cov.set(i, j, cov(i, j) - sigma2 * (1.0 - thin) * u[i] * u[j]);
  GaussianParams p{std::vector<double>(dim, 0.0), cov};
  return sample_gaussian(p, count, rng.next_u64());
}

PointSet gen_mixture_of_k(const AdversarySpec& spec, std::size_t count, int dim,
                          const GaussianParams& reference, Rng& rng) {
  const int k = std::max(1, static_cast<int>(spec.get("k", 3)));
  const double base = spec.get("scale_base", 100.0 * reference_scale(reference));
  const double ratio = spec.get("scale_ratio", 100.0);
  const double mean_radius = spec.get("mean_radius", 0.0);

  PointSet out(dim, {});
  // near-equal split: first (count mod k) groups get one extra
  std::size_t done = 0;
  for (int g = 0; g < k; ++g) {
    std::size_t share = count / static_cast<std::size_t>(k) +
                        (static_cast<std::size_t>(g) < count % static_cast<std::size_t>(k) ? 1 : 0);
    if (share == 0) continue;
    GaussianParams p = GaussianParams::scaled_identity(dim, base * std::pow(ratio, g));
    p.mean[0] = mean_radius * (g + 1);
    PointSet part = sample_gaussian(p, share, rng.next_u64());
    for (std::size_t t = 0; t < part.size(); ++t) out.push_back(part.row(t));
    done += share;
  }
  require(done == count, ErrorCode::BadCounts, "mixture-of-k: split mismatch");
  return out;
}

bool removal_is_extreme(const AdversarySpec& spec) {
  if (spec.id == "replace-extreme") return true;
  return spec.get("removal_extreme", 0.0) != 0.0;
}

/// Indices of the l inliers the adversary replaces. The extreme strategy
/// targets the points farthest from mu in Sigma-whitened norm; the default
/// picks a seeded random subset.
std::vector<std::size_t> pick_replacements(const AdversarySpec& spec,
                                           const PointSet& inliers,
                                           const GaussianParams& truth,
                                           std::size_t l, Rng& rng) {
  const std::size_t n = inliers.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (l == 0) return {};
  if (removal_is_extreme(spec)) {
    PsdFactorization f = psd_pseudo_factor(truth.covariance);
    std::vector<double> dist(n);
    std::vector<double> centered(truth.dim());
    for (std::size_t t = 0; t < n; ++t) {
      auto x = inliers.row(t);
      for (int i = 0; i < truth.dim(); ++i) centered[i] = x[i] - truth.mean[i];
      dist[t] = quad_form(f.pinv, centered);
    }
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return dist[a] > dist[b]; });
    idx.resize(l);
    std::sort(idx.begin(), idx.end());
    return idx;
  }
  // seeded partial Fisher-Yates
  for (std::size_t i = 0; i < l; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(l);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

std::vector<std::string> adversary_registry() {
  return {"second-gaussian", "point-mass", "thin-direction", "mixture-of-k",
          "replace-extreme"};
}

PointSet adversary_generate(const AdversarySpec& spec, std::size_t count,
                            int dim, const GaussianParams& reference, Rng& rng) {
  if (count == 0) return PointSet(dim, {});
  if (spec.id == "second-gaussian" || spec.id == "replace-extreme")
    return gen_second_gaussian(spec, count, dim, reference, rng);
  if (spec.id == "point-mass") return gen_point_mass(spec, count, dim, reference, rng);
  if (spec.id == "thin-direction")
    return gen_thin_direction(spec, count, dim, reference, rng);
  if (spec.id == "mixture-of-k")
    return gen_mixture_of_k(spec, count, dim, reference, rng);
  fail(ErrorCode::UnknownAdversary, "unknown adversary id: " + spec.id);
}

// ---------------------------------------------------------------------------
// Corruption models
// ---------------------------------------------------------------------------

namespace {

void shuffle_dataset(PointSet& points, std::vector<Label>& labels, Rng& rng) {
  const std::size_t n = points.size();
  const int d = points.dim();
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    if (j == i - 1) continue;
    for (int c = 0; c < d; ++c)
      std::swap(points.row(i - 1)[c], points.row(j)[c]);
    std::swap(labels[i - 1], labels[j]);
  }
}

}  // namespace

Dataset corrupt_list_model(const PointSet& inliers, const GaussianParams& truth,
                           const CorruptionSpec& spec, std::uint64_t seed) {
  require(spec.model == CorruptionModel::ListDecoding, ErrorCode::InvalidArgument,
          "corrupt_list_model: wrong model");
  const std::size_t n = inliers.size();
  const std::size_t m = spec.m;
  require(static_cast<double>(n) >= spec.alpha * static_cast<double>(m),
          ErrorCode::BadCounts, "corrupt_list_model: n < alpha * m");
  require(n <= m, ErrorCode::BadCounts, "corrupt_list_model: n > m");
  const std::size_t l =
      static_cast<std::size_t>(std::floor(spec.epsilon * static_cast<double>(n)));

  Rng rng(seed);
  std::vector<std::size_t> removed =
      pick_replacements(spec.adversary, inliers, truth, l, rng);
  std::vector<bool> is_removed(n, false);
  for (std::size_t i : removed) is_removed[i] = true;

  const std::size_t n_outliers = l + (m - n);
  PointSet outliers =
      adversary_generate(spec.adversary, n_outliers, inliers.dim(), truth, rng);

  PointSet points(inliers.dim(), {});
  std::vector<Label> labels;
  labels.reserve(m);
  for (std::size_t t = 0; t < n; ++t) {
    if (is_removed[t]) continue;
    points.push_back(inliers.row(t));
    labels.push_back(Label::make_inlier(0));
  }
  for (std::size_t t = 0; t < outliers.size(); ++t) {
    points.push_back(outliers.row(t));
    labels.push_back(Label::make_outlier());
  }
  shuffle_dataset(points, labels, rng);

  Dataset ds;
  ds.dim = inliers.dim();
  ds.points = std::move(points);
  ds.labels = std::move(labels);
  ds.truth = {{1.0, truth, n, l}};
  ds.spec = spec;
  ds.seed = seed;
  ds.validate();
  return ds;
}

Dataset corrupt_gmm_model(const std::vector<ComponentTruth>& components,
                          const CorruptionSpec& spec, std::uint64_t seed) {
  require(spec.model == CorruptionModel::GmmContamination, ErrorCode::InvalidArgument,
          "corrupt_gmm_model: wrong model");
  require(!components.empty(), ErrorCode::BadWeights, "corrupt_gmm_model: no components");
  double wsum = 0.0;
  double wmin = 1.0;
  for (const auto& c : components) {
    require(c.weight > 0.0, ErrorCode::BadWeights, "corrupt_gmm_model: weight <= 0");
    wsum += c.weight;
    wmin = std::min(wmin, c.weight);
  }
  require(std::abs(wsum - 1.0) <= 1e-9, ErrorCode::BadWeights,
          "corrupt_gmm_model: weights must sum to 1");
  require(spec.alpha <= wmin + 1e-12, ErrorCode::BadWeights,
          "corrupt_gmm_model: alpha above minimum weight");

  const std::size_t m = spec.m;
  const int d = components.front().params.dim();
  Rng rng(seed);

  // component roots once; mixture draws consume one uniform + d gaussians each
  std::vector<SymMatrix> roots;
  roots.reserve(components.size());
  for (const auto& c : components) roots.push_back(psd_sqrt(c.params.covariance));

  PointSet points(d, {});
  std::vector<Label> labels;
  labels.reserve(m);
  std::vector<ComponentTruth> truth = components;
  for (auto& t : truth) {
    t.n_drawn = 0;
    t.n_replaced = 0;
  }

  std::vector<double> z(d), x(d);
  for (std::size_t t = 0; t < m; ++t) {
    const double u = rng.uniform01();
    double acc = 0.0;
    std::size_t p = components.size() - 1;
    for (std::size_t c = 0; c < components.size(); ++c) {
      acc += components[c].weight;
      if (u < acc) {
        p = c;
        break;
      }
    }
    for (int i = 0; i < d; ++i) z[i] = rng.gaussian();
    const auto& comp = components[p];
    for (int i = 0; i < d; ++i) {
      double s = comp.params.mean[i];
      for (int j = 0; j < d; ++j) s += roots[p](i, j) * z[j];
      x[i] = s;
    }
    points.push_back(x);
    labels.push_back(Label::make_inlier(static_cast<int>(p)));
    ++truth[p].n_drawn;
  }

  const std::size_t budget = static_cast<std::size_t>(
      std::floor(spec.epsilon * spec.alpha * static_cast<double>(m)));
  if (budget > 0) {
    std::vector<std::size_t> victims(m);
    std::iota(victims.begin(), victims.end(), std::size_t{0});
    if (removal_is_extreme(spec.adversary)) {
      // farthest points in their own component's whitened norm
      std::vector<PsdFactorization> factors;
      factors.reserve(components.size());
      for (const auto& c : components)
        factors.push_back(psd_pseudo_factor(c.params.covariance));
      std::vector<double> dist(m);
      std::vector<double> centered(d);
      for (std::size_t i = 0; i < m; ++i) {
        const auto& comp = components[static_cast<std::size_t>(labels[i].component)];
        auto x = points.row(i);
        for (int c = 0; c < d; ++c) centered[c] = x[c] - comp.params.mean[c];
        dist[i] =
            quad_form(factors[static_cast<std::size_t>(labels[i].component)].pinv,
                      centered);
      }
      std::stable_sort(victims.begin(), victims.end(), [&](std::size_t a, std::size_t b) {
        return dist[a] > dist[b];
      });
    } else {
      for (std::size_t i = 0; i < budget; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(m - i));
        std::swap(victims[i], victims[j]);
      }
    }
    victims.resize(budget);
    PointSet replacements = adversary_generate(spec.adversary, budget, d,
                                               components.front().params, rng);
    for (std::size_t i = 0; i < budget; ++i) {
      const std::size_t v = victims[i];
      ++truth[static_cast<std::size_t>(labels[v].component)].n_replaced;
      auto dst = points.row(v);
      auto src = replacements.row(i);
      std::copy(src.begin(), src.end(), dst.begin());
      labels[v] = Label::make_outlier();
    }
  }
  shuffle_dataset(points, labels, rng);

  Dataset ds;
  ds.dim = d;
  ds.points = std::move(points);
  ds.labels = std::move(labels);
  ds.truth = std::move(truth);
  ds.spec = spec;
  ds.seed = seed;
  ds.validate();
  return ds;
}

}  // namespace listdec
