// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "listdec/io.hpp"
#include "scenarios.hpp"

using namespace listdec;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "listdec_io_test";
  std::filesystem::create_directories(dir);
  return dir;
}

Dataset small_dataset(std::uint64_t seed) {
  GaussianParams truth = GaussianParams::standard(3);
  const PointSet inliers = sample_gaussian(truth, 60, seed);
  CorruptionSpec spec;
  spec.model = CorruptionModel::ListDecoding;
  spec.alpha = 0.5;
  spec.epsilon = 0.05;
  spec.m = 100;
  spec.adversary.id = "second-gaussian";
  spec.adversary.params = {{"sigma2", 25.0}};
  return corrupt_list_model(inliers, truth, spec, derive_seed(seed, 1));
}

}  // namespace

TEST_CASE("dataset triplet round-trips bit-exactly") {
  const Dataset ds = small_dataset(90);
  const auto stem = temp_dir() / "roundtrip";
  dataset_write(stem, ds);

  const Dataset back = dataset_read(stem);
  CHECK(back.points.data() == ds.points.data());
  REQUIRE(back.labels.size() == ds.labels.size());
  for (std::size_t i = 0; i < ds.labels.size(); ++i)
    CHECK(back.labels[i] == ds.labels[i]);

  // writing the read-back dataset reproduces every byte
  const auto stem2 = temp_dir() / "roundtrip2";
  dataset_write(stem2, back);
  for (const char* ext : {".json", ".f64", ".labels.csv"})
    CHECK(slurp(stem.string() + ext) == slurp(stem2.string() + ext));
}

TEST_CASE("dataset header m matches the binary size") {
  const Dataset ds = small_dataset(91);
  const auto stem = temp_dir() / "sizes";
  dataset_write(stem, ds);
  const json header = json::parse(slurp(stem.string() + ".json"));
  const auto bytes = std::filesystem::file_size(stem.string() + ".f64");
  CHECK(header.at("m").get<std::size_t>() ==
        bytes / (8 * static_cast<std::size_t>(header.at("dim").get<int>())));
}

TEST_CASE("results JSON round-trips hypotheses") {
  const auto run = scenarios::run_two_cluster(92, 2000);
  const json j = results_to_json(run.result, run.config, 12.5, true);
  const auto hyps = hypotheses_from_results_json(j);
  REQUIRE(hyps.size() == run.result.hypotheses.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    CHECK(hyps[i].indices == run.result.hypotheses[i].indices);
    CHECK(hyps[i].node_id.level == run.result.hypotheses[i].node_id.level);
  }
  CHECK(j.at("schema_version").get<int>() == kSchemaVersion);
  CHECK(j.contains("trace"));
}

TEST_CASE("experiment config: strict schema") {
  json good{{"generation",
             json{{"model", "list"},
                  {"alpha", 0.5},
                  {"epsilon", 0.0},
                  {"m", 200},
                  {"dim", 2},
                  {"n", 120},
                  {"adversary", json{{"id", "point-mass"}}},
                  {"components", json::array({json{{"weight", 1.0}, {"sigma2", 1.0}}})}}},
            {"estimator", json{{"alpha", 0.5}}},
            {"trials", 2},
            {"master_seed", 7},
            {"output_dir", "out"},
            {"emit", json{{"trace", false}, {"metrics", true}, {"csv", true}}}};
  const ExperimentConfig cfg = experiment_config_from_json(good);
  CHECK(cfg.trials == 2);
  CHECK(cfg.dim == 2);
  CHECK(cfg.estimator.alpha == 0.5);

  json bad = good;
  bad["surprise"] = 1;
  CHECK_THROWS_AS((void)experiment_config_from_json(bad), Error);

  json bad2 = good;
  bad2["generation"]["typo_field"] = 3;
  CHECK_THROWS_AS((void)experiment_config_from_json(bad2), Error);

  json bad3 = good;
  bad3["generation"]["adversary"]["id"] = "not-registered";
  try {
    (void)experiment_config_from_json(bad3);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownAdversary);
  }

  json bad4 = good;
  bad4["generation"]["n"] = 50;  // below alpha * m = 100
  CHECK_THROWS_AS((void)experiment_config_from_json(bad4), Error);
}

TEST_CASE("estimator config JSON: calibrated scales filled from the table") {
  const json j{{"alpha", 0.25}};
  const EstimatorConfig cfg = estimator_config_from_json(j);
  const CalibratedScales s = calibrated_scales(0.25);
  CHECK(cfg.r_scale == s.r_scale);
  CHECK(cfg.thresh_scale == s.thresh_scale);

  const json paper{{"alpha", 0.5}, {"constant_mode", "paper"}, {"r_scale", 2.0}};
  CHECK_THROWS_AS((void)estimator_config_from_json(paper), Error);
}

TEST_CASE("generate_trial: derived seeds give distinct but stable datasets") {
  json j{{"generation",
          json{{"model", "list"},
               {"alpha", 0.5},
               {"epsilon", 0.0},
               {"m", 120},
               {"dim", 2},
               {"n", 80},
               {"adversary", json{{"id", "point-mass"}, {"params", json{{"radius", 9.0}}}}},
               {"components", json::array({json{{"weight", 1.0}, {"sigma2", 1.0}}})}}},
         {"estimator", json{{"alpha", 0.5}}},
         {"trials", 3},
         {"master_seed", 99}};
  const ExperimentConfig cfg = experiment_config_from_json(j);
  const Dataset t0a = generate_trial(cfg, 0);
  const Dataset t0b = generate_trial(cfg, 0);
  const Dataset t1 = generate_trial(cfg, 1);
  CHECK(t0a.points.data() == t0b.points.data());
  CHECK(t0a.points.data() != t1.points.data());
}

TEST_CASE("metrics CSV row has the documented column count") {
  const auto run = scenarios::run_pure_gaussian(93);
  const MetricReport report = gmm_cluster_metrics(run.dataset, run.result.hypotheses);
  const std::string row = metrics_csv_row(1, 4, 5000, 0.5, 0.0, "point-mass",
                                          report, 10.0);
  const std::string header(kMetricsCsvHeader);
  const auto count_commas = [](const std::string& s) {
    return std::count(s.begin(), s.end(), ',');
  };
  CHECK(count_commas(row) == count_commas(header));
  CHECK(header ==
        "seed,d,m,alpha,eps,adversary,list_size,best_overlap_frac,best_rel_frob,wall_ms");
}

TEST_CASE("write_atomic leaves no temp file behind") {
  const auto p = temp_dir() / "atomic.txt";
  write_atomic(p, "hello");
  CHECK(slurp(p) == "hello");
  CHECK(!std::filesystem::exists(p.string() + ".tmp"));
}

TEST_CASE("metric and stability reports serialize with schema versions") {
  const auto run = scenarios::run_pure_gaussian(94);
  const MetricReport r = gmm_cluster_metrics(run.dataset, run.result.hypotheses);
  CHECK(to_json(r).at("schema_version").get<int>() == kSchemaVersion);
  StabilityReport s;
  CHECK(to_json(s).at("schema_version").get<int>() == kSchemaVersion);
}
