// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

#ifndef LISTDEC_IO_HPP
#define LISTDEC_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "listdec/datagen.hpp"
#include "listdec/diagnostics.hpp"
#include "listdec/estimator.hpp"

namespace listdec {

inline constexpr int kSchemaVersion = 1;

/// write-temp-then-rename; directories are created as needed.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// JSON conversions -----------------------------------------------------------

nlohmann::json to_json(const SymMatrix& m);
SymMatrix sym_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GaussianParams& p);
GaussianParams gaussian_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CorruptionSpec& s);
CorruptionSpec corruption_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EstimatorConfig& c);
EstimatorConfig estimator_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MetricReport& r);
nlohmann::json to_json(const StabilityReport& r);
nlohmann::json to_json(const RecursionTrace& t);

nlohmann::json results_to_json(const DecodingResult& result,
                               const EstimatorConfig& config, double wall_ms,
                               bool include_trace);
std::vector<Hypothesis> hypotheses_from_results_json(const nlohmann::json& j);

/// Rejects documents containing keys outside `allowed`; used for the strict
/// experiment-config schema.
void reject_unknown_keys(const nlohmann::json& j,
                         const std::vector<std::string>& allowed,
                         const std::string& context);

// Dataset triplet -------------------------------------------------------------
//
// stem.json        header: {schema_version, dim, m, model, spec, seed, truth}
// stem.f64         m*d little-endian doubles, row-major
// stem.labels.csv  "index,label" rows; label is "inlier:<component>" or
//                  "outlier"

void dataset_write(const std::filesystem::path& stem, const Dataset& ds);
Dataset dataset_read(const std::filesystem::path& stem);

// Experiment configuration -----------------------------------------------------

struct ExperimentConfig {
  CorruptionSpec generation;
  std::vector<ComponentTruth> components;  // truth parameters
  std::size_t n_inliers = 0;               // list model: inliers drawn
  int dim = 0;
  EstimatorConfig estimator;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  std::filesystem::path output_dir = ".";
  bool emit_trace = false;
  bool emit_metrics = true;
  bool emit_csv = true;
};

/// Parses and validates against the published schema; unknown fields reject.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Generates the dataset for one trial of the experiment (derived seed).
Dataset generate_trial(const ExperimentConfig& cfg, std::size_t trial);

inline const char* kMetricsCsvHeader =
    "seed,d,m,alpha,eps,adversary,list_size,best_overlap_frac,best_rel_frob,wall_ms";

std::string metrics_csv_row(std::uint64_t seed, int d, std::size_t m, double alpha,
                            double eps, const std::string& adversary,
                            const MetricReport& report, double wall_ms);

}  // namespace listdec

#endif  // LISTDEC_IO_HPP
