// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "listdec/io.hpp"
#include "scenarios.hpp"
#include "selftest.hpp"

namespace {

using namespace listdec;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitSelftest = 4;

int thread_budget() {
  if (const char* env = std::getenv("LISTDEC_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

/// Runs fn(trial) for every trial, at most `threads` concurrently.
void for_each_trial(std::size_t trials, int threads,
                    const std::function<void(std::size_t)>& fn) {
  if (threads <= 1) {
    for (std::size_t t = 0; t < trials; ++t) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const int n_workers = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(threads), trials));
  for (int w = 0; w < n_workers; ++w)
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t t = next.fetch_add(1);
        if (t >= trials) return;
        try {
          fn(t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::filesystem::path trial_stem(const std::filesystem::path& dir, std::size_t t) {
  return dir / ("trial_" + std::to_string(t));
}

int cmd_generate(const std::string& config_path) {
  const ExperimentConfig cfg = load_experiment_config(config_path);
  for_each_trial(cfg.trials, thread_budget(), [&](std::size_t t) {
    const Dataset ds = generate_trial(cfg, t);
    dataset_write(trial_stem(cfg.output_dir, t), ds);
  });
  std::cout << "wrote " << cfg.trials << " dataset triplet(s) under "
            << cfg.output_dir.string() << "\n";
  return kExitOk;
}

int cmd_estimate(const std::string& config_path, const std::string& dataset_stem,
                 const std::string& out_path) {
  const ExperimentConfig cfg = load_experiment_config(config_path);
  const Dataset ds = dataset_read(dataset_stem);

  const auto t0 = std::chrono::steady_clock::now();
  const DecodingResult result =
      covariance_list_decoding(ds.estimator_input(), cfg.estimator);
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();

  const json j = results_to_json(result, cfg.estimator, wall_ms, cfg.emit_trace);
  const std::filesystem::path out =
      out_path.empty() ? std::filesystem::path(dataset_stem + ".results.json")
                       : std::filesystem::path(out_path);
  write_atomic(out, j.dump(2) + "\n");
  std::cout << "hypotheses: " << result.hypotheses.size() << ", results: "
            << out.string() << "\n";
  return kExitOk;
}

int cmd_evaluate(const std::string& results_path, const std::string& dataset_stem,
                 const std::string& out_path) {
  std::ifstream in(results_path);
  require(in.good(), ErrorCode::Io, "cannot open " + results_path);
  json results_json;
  in >> results_json;
  const Dataset ds = dataset_read(dataset_stem);
  const std::vector<Hypothesis> hyps = hypotheses_from_results_json(results_json);

  const auto t0 = std::chrono::steady_clock::now();
  const MetricReport report = gmm_cluster_metrics(ds, hyps);
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();

  const std::filesystem::path out =
      out_path.empty() ? std::filesystem::path(results_path + ".metrics.json")
                       : std::filesystem::path(out_path);
  write_atomic(out, to_json(report).dump(2) + "\n");

  // one CSV row per trial, appended next to the metrics file
  const std::filesystem::path csv = out.parent_path() / "metrics.csv";
  const bool fresh = !std::filesystem::exists(csv);
  std::ofstream csv_out(csv, std::ios::app);
  require(csv_out.good(), ErrorCode::Io, "cannot append " + csv.string());
  if (fresh) csv_out << kMetricsCsvHeader << "\n";
  csv_out << metrics_csv_row(ds.seed, ds.dim, ds.points.size(), ds.spec.alpha,
                             ds.spec.epsilon, ds.spec.adversary.id, report, wall_ms)
          << "\n";
  std::cout << "metrics: " << out.string() << " (csv row appended)\n";
  return kExitOk;
}

int cmd_selftest(const std::string& suite, std::uint64_t seed) {
  require(suite == "fast" || suite == "full", ErrorCode::InvalidArgument,
          "--suite must be fast or full");
  const auto results = selftest::run_all(suite, seed);
  int failed = 0;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
    std::cout << "\n";
    if (!r.passed) ++failed;
  }
  std::cout << results.size() - static_cast<std::size_t>(failed) << "/"
            << results.size() << " checks passed\n";
  return failed == 0 ? kExitOk : kExitSelftest;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  require(!out.empty(), ErrorCode::InvalidArgument, "empty list: " + csv);
  return out;
}

int cmd_bench(const std::string& d_csv, const std::string& m_csv,
              std::uint64_t seed, const std::string& out_path) {
  const std::vector<int> d_list = parse_int_list(d_csv);
  const std::vector<int> m_list = parse_int_list(m_csv);

  struct Row {
    int d;
    std::size_t m;
    double ms;
  };
  std::vector<Row> rows;
  for (int d : d_list)
    for (int m : m_list)
      rows.push_back({d, static_cast<std::size_t>(m),
                      scenarios::time_single_loop(d, static_cast<std::size_t>(m),
                                                  derive_seed(seed, rows.size()), 5)});

  // fit loop_ms ~ c * m * d^2 and report per-row residual ratios
  double c_fit = 0.0;
  for (const auto& r : rows)
    c_fit += r.ms / (static_cast<double>(r.m) * r.d * r.d);
  c_fit /= static_cast<double>(rows.size());

  std::ostringstream csv;
  csv << "d,m,loop_ms,fit_residual\n";
  for (const auto& r : rows)
    csv << r.d << ',' << r.m << ',' << r.ms << ','
        << r.ms / (c_fit * static_cast<double>(r.m) * r.d * r.d) << "\n";
  if (out_path.empty())
    std::cout << csv.str();
  else {
    write_atomic(out_path, csv.str());
    std::cout << "bench csv: " << out_path << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"list-decodable covariance estimation experiments"};
  app.require_subcommand(1);

  std::string config_path, dataset_path, results_path, out_path, suite = "fast";
  std::string d_list = "4,16", m_list = "1000,4000";
  std::uint64_t seed = 0;

  auto* gen = app.add_subcommand("generate", "write dataset triplets per trial");
  gen->add_option("--config", config_path, "experiment config JSON")->required();

  auto* est = app.add_subcommand("estimate", "run the estimator on a dataset");
  est->add_option("--config", config_path, "experiment config JSON")->required();
  est->add_option("--dataset", dataset_path, "dataset stem (no extension)")
      ->required();
  est->add_option("--out", out_path, "results JSON path");

  auto* eva = app.add_subcommand("evaluate", "score results against the labels");
  eva->add_option("--results", results_path, "results JSON")->required();
  eva->add_option("--dataset", dataset_path, "dataset stem (no extension)")
      ->required();
  eva->add_option("--out", out_path, "metrics JSON path");

  auto* st = app.add_subcommand("selftest", "run module invariant sweeps");
  st->add_option("--suite", suite, "fast|full");
  st->add_option("--seed", seed, "sweep seed");

  auto* bench = app.add_subcommand("bench", "single-loop timing grid");
  bench->add_option("--d", d_list, "comma-separated dimensions");
  bench->add_option("--m", m_list, "comma-separated sample counts");
  bench->add_option("--seed", seed, "data seed");
  bench->add_option("--out", out_path, "timing CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (gen->parsed()) return cmd_generate(config_path);
    if (est->parsed()) return cmd_estimate(config_path, dataset_path, out_path);
    if (eva->parsed()) return cmd_evaluate(results_path, dataset_path, out_path);
    if (st->parsed()) return cmd_selftest(suite, seed);
    if (bench->parsed()) return cmd_bench(d_list, m_list, seed, out_path);
  } catch (const Error& e) {
    const json err{{"error", e.what()}};
    std::cerr << err.dump() << "\n";
    switch (e.code()) {
      case ErrorCode::InvalidArgument:
      case ErrorCode::Io:
      case ErrorCode::BadWeights:
      case ErrorCode::UnknownAdversary:
        return kExitValidation;
      default:
        return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
