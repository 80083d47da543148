// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "listdec/datagen.hpp"

using namespace listdec;

TEST_CASE("sample_gaussian: zero covariance returns copies of the mean") {
  GaussianParams p{{3.0, 3.0}, SymMatrix(2)};
  const PointSet pts = sample_gaussian(p, 5, 99);
  REQUIRE(pts.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(pts.row(i)[0] == doctest::Approx(3.0));
    CHECK(pts.row(i)[1] == doctest::Approx(3.0));
  }
}

TEST_CASE("sample_gaussian: deterministic for fixed seed") {
  GaussianParams p = GaussianParams::standard(3);
  const PointSet a = sample_gaussian(p, 64, 1234);
  const PointSet b = sample_gaussian(p, 64, 1234);
  CHECK(a.data() == b.data());
}

TEST_CASE("sample_gaussian: sample covariance concentrates") {
  GaussianParams p = GaussianParams::standard(2);
  const PointSet pts = sample_gaussian(p, 100000, 5);
  const SymMatrix h = second_moment(pts);
  CHECK(std::abs(h(0, 0) - 1.0) <= 0.05);
  CHECK(std::abs(h(1, 1) - 1.0) <= 0.05);
  CHECK(std::abs(h(0, 1)) <= 0.05);
}

TEST_CASE("corrupt_list_model: no corruption keeps every inlier") {
  GaussianParams truth = GaussianParams::standard(2);
  const PointSet inliers = sample_gaussian(truth, 100, 3);
  CorruptionSpec spec;
  spec.model = CorruptionModel::ListDecoding;
  spec.alpha = 0.5;
  spec.epsilon = 0.0;
  spec.m = 100;
  const Dataset ds = corrupt_list_model(inliers, truth, spec, 17);
  CHECK(ds.points.size() == 100);
  CHECK(ds.inlier_count(0) == 100);
  CHECK(ds.outlier_count() == 0);
  CHECK(ds.truth[0].n_replaced == 0);
}

TEST_CASE("corrupt_list_model: Definition 1.1 counting") {
  GaussianParams truth = GaussianParams::standard(2);
  const PointSet inliers = sample_gaussian(truth, 100, 4);
  CorruptionSpec spec;
  spec.model = CorruptionModel::ListDecoding;
  spec.alpha = 0.5;
  spec.epsilon = 0.05;
  spec.m = 200;
  const Dataset ds = corrupt_list_model(inliers, truth, spec, 18);
  CHECK(ds.points.size() == 200);
  CHECK(ds.inlier_count(0) == 95);   // n - l = 100 - 5
  CHECK(ds.outlier_count() == 105);  // l + (m - n)
}

TEST_CASE("corrupt_list_model: rejects undersized inlier sets") {
  GaussianParams truth = GaussianParams::standard(2);
  const PointSet inliers = sample_gaussian(truth, 40, 5);
  CorruptionSpec spec;
  spec.model = CorruptionModel::ListDecoding;
  spec.alpha = 0.5;
  spec.epsilon = 0.0;
  spec.m = 100;  // alpha m = 50 > 40
  CHECK_THROWS_AS((void)corrupt_list_model(inliers, truth, spec, 6), Error);
}

TEST_CASE("corrupt_list_model: second-gaussian outliers separate in scale") {
  const int d = 3;
  GaussianParams truth = GaussianParams::standard(d);
  const PointSet inliers = sample_gaussian(truth, 500, 7);
  CorruptionSpec spec;
  spec.model = CorruptionModel::ListDecoding;
  spec.alpha = 0.5;
  spec.epsilon = 0.0;
  spec.m = 1000;
  spec.adversary.id = "second-gaussian";
  spec.adversary.params = {{"sigma2", 100.0}};
  const Dataset ds = corrupt_list_model(inliers, truth, spec, 8);

  PointSet in_pts(d, {}), out_pts(d, {});
  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    if (ds.labels[i].inlier)
      in_pts.push_back(ds.points.row(i));
    else
      out_pts.push_back(ds.points.row(i));
  }
  CHECK(op_norm(second_moment(out_pts)) > 50.0);
  CHECK(op_norm(second_moment(in_pts)) < 5.0);
}

TEST_CASE("corrupt_gmm_model: counting") {
  const int d = 2;
  std::vector<ComponentTruth> comps(2);
  comps[0].weight = 0.5;
  comps[0].params = GaussianParams::standard(d);
  comps[1].weight = 0.5;
  comps[1].params = GaussianParams::scaled_identity(d, 4.0);

  CorruptionSpec spec;
  spec.model = CorruptionModel::GmmContamination;
  spec.alpha = 0.5;
  spec.epsilon = 0.0;
  spec.m = 1000;
  const Dataset clean = corrupt_gmm_model(comps, spec, 9);
  CHECK(clean.truth[0].n_drawn + clean.truth[1].n_drawn == 1000);
  CHECK(clean.truth[0].n_replaced == 0);
  CHECK(clean.truth[1].n_replaced == 0);

  spec.epsilon = 0.04;
  const Dataset dirty = corrupt_gmm_model(comps, spec, 10);
  CHECK(dirty.outlier_count() == 20);  // floor(0.04 * 0.5 * 1000)
  CHECK(dirty.truth[0].n_replaced + dirty.truth[1].n_replaced == 20);
}

TEST_CASE("corrupt_gmm_model: single clean component is plain sampling") {
  std::vector<ComponentTruth> comps(1);
  comps[0].weight = 1.0;
  comps[0].params = GaussianParams::standard(2);
  CorruptionSpec spec;
  spec.model = CorruptionModel::GmmContamination;
  spec.alpha = 1.0;
  spec.epsilon = 0.0;
  spec.m = 250;
  const Dataset ds = corrupt_gmm_model(comps, spec, 33);
  CHECK(ds.inlier_count(0) == 250);
  CHECK(ds.outlier_count() == 0);
  CHECK(ds.truth[0].n_drawn == 250);
}

TEST_CASE("corrupt_gmm_model: bad weights rejected") {
  std::vector<ComponentTruth> comps(2);
  comps[0].weight = 0.6;
  comps[0].params = GaussianParams::standard(2);
  comps[1].weight = 0.6;
  comps[1].params = GaussianParams::standard(2);
  CorruptionSpec spec;
  spec.model = CorruptionModel::GmmContamination;
  spec.alpha = 0.5;
  spec.m = 100;
  CHECK_THROWS_AS((void)corrupt_gmm_model(comps, spec, 1), Error);
}

TEST_CASE("adversary registry and generators") {
  const auto ids = adversary_registry();
  CHECK(std::find(ids.begin(), ids.end(), "point-mass") != ids.end());
  CHECK(std::find(ids.begin(), ids.end(), "replace-extreme") != ids.end());

  Rng rng(11);
  const PointSet zeros = adversary_generate({"point-mass", {{"radius", 0.0}}}, 37, 2,
                                            GaussianParams::standard(2), rng);
  REQUIRE(zeros.size() == 37);
  for (double v : zeros.data()) CHECK(v == 0.0);

  // mixture-of-k splits the outliers into near-equal groups (+-1); with
  // widely separated scales each point is attributable to its group by norm
  const PointSet mix = adversary_generate(
      {"mixture-of-k", {{"k", 3.0}, {"scale_base", 1.0}, {"scale_ratio", 1e4}}},
      100, 2, GaussianParams::standard(2), rng);
  REQUIRE(mix.size() == 100);
  std::size_t band[3] = {0, 0, 0};
  for (std::size_t i = 0; i < mix.size(); ++i) {
    const double n2 = mix.row(i)[0] * mix.row(i)[0] + mix.row(i)[1] * mix.row(i)[1];
    if (n2 < 1e2)
      ++band[0];
    else if (n2 < 1e6)
      ++band[1];
    else
      ++band[2];
  }
  for (std::size_t b : band) CHECK(std::abs(static_cast<long>(b) - 33L) <= 1);

  Rng rng2(12);
  CHECK_THROWS_AS((void)adversary_generate({"not-an-adversary", {}}, 3, 2,
                                           GaussianParams::standard(2), rng2),
                  Error);
}

TEST_CASE("thin-direction outliers are crushed along one direction") {
  Rng rng(27);
  const AdversarySpec spec{"thin-direction",
                           {{"sigma2", 100.0}, {"thin", 1e-6}}};
  const PointSet pts =
      adversary_generate(spec, 3000, 4, GaussianParams::standard(4), rng);
  const EigResult e = eigh(second_moment(pts));
  CHECK(e.values.front() > 50.0);           // wide directions near sigma2
  CHECK(e.values.back() < 0.05 * e.values.front());  // one crushed direction
}

TEST_CASE("replace-extreme removes the farthest inliers") {
  const int d = 2;
  GaussianParams truth = GaussianParams::standard(d);
  PointSet inliers = sample_gaussian(truth, 99, 13);
  std::vector<double> far{50.0, 0.0};
  inliers.push_back(far);  // one far point that must be replaced first

  CorruptionSpec spec;
  spec.model = CorruptionModel::ListDecoding;
  spec.alpha = 0.5;
  spec.epsilon = 0.01;  // l = 1
  spec.m = 100;
  spec.adversary.id = "replace-extreme";
  spec.adversary.params = {{"sigma2", 1.0}};
  const Dataset ds = corrupt_list_model(inliers, truth, spec, 14);
  // the planted far inlier is gone
  for (std::size_t i = 0; i < ds.points.size(); ++i)
    if (ds.labels[i].inlier) CHECK(std::abs(ds.points.row(i)[0]) < 50.0);
}

TEST_CASE("gmm extreme-removal strategy targets the farthest points") {
  const int d = 2;
  std::vector<ComponentTruth> comps(1);
  comps[0].weight = 1.0;
  comps[0].params = GaussianParams::standard(d);
  CorruptionSpec spec;
  spec.model = CorruptionModel::GmmContamination;
  spec.alpha = 1.0;
  spec.epsilon = 0.01;
  spec.m = 500;
  spec.adversary.id = "point-mass";
  spec.adversary.params = {{"radius", 0.0}, {"removal_extreme", 1.0}};
  const Dataset ds = corrupt_gmm_model(comps, spec, 61);
  REQUIRE(ds.outlier_count() == 5);
  // every replaced slot is a zero point; every survivor is closer to the mean
  // than the most extreme survivor bound implied by 5 removed extremes
  double max_inlier = 0.0;
  for (std::size_t i = 0; i < ds.points.size(); ++i) {
    const double n2 = ds.points.row(i)[0] * ds.points.row(i)[0] +
                      ds.points.row(i)[1] * ds.points.row(i)[1];
    if (ds.labels[i].inlier) max_inlier = std::max(max_inlier, n2);
    else CHECK(n2 == 0.0);
  }
  // regenerate the same draws without corruption to find the true extremes
  CorruptionSpec clean = spec;
  clean.epsilon = 0.0;
  clean.adversary.params = {{"radius", 0.0}};
  const Dataset base = corrupt_gmm_model(comps, clean, 61);
  std::vector<double> norms;
  for (std::size_t i = 0; i < base.points.size(); ++i)
    norms.push_back(base.points.row(i)[0] * base.points.row(i)[0] +
                    base.points.row(i)[1] * base.points.row(i)[1]);
  std::sort(norms.begin(), norms.end());
  // the 5 largest draws are gone, so the surviving max equals the 6th largest
  CHECK(max_inlier == doctest::Approx(norms[norms.size() - 6]));
}

TEST_CASE("dataset generation is bit-deterministic") {
  GaussianParams truth = GaussianParams::standard(3);
  const PointSet inliers = sample_gaussian(truth, 120, 21);
  CorruptionSpec spec;
  spec.model = CorruptionModel::ListDecoding;
  spec.alpha = 0.4;
  spec.epsilon = 0.05;
  spec.m = 300;
  spec.adversary.id = "thin-direction";
  const Dataset a = corrupt_list_model(inliers, truth, spec, 22);
  const Dataset b = corrupt_list_model(inliers, truth, spec, 22);
  CHECK(a.points.data() == b.points.data());
  REQUIRE(a.labels.size() == b.labels.size());
  for (std::size_t i = 0; i < a.labels.size(); ++i) CHECK(a.labels[i] == b.labels[i]);
}
