// Copyright 2026 The listdec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0

#include "listdec/io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

namespace listdec {

using nlohmann::json;

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::Io, "write_atomic: cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    require(out.good(), ErrorCode::Io, "write_atomic: write failed " + tmp.string());
  }
  fs::rename(tmp, path);
}

static std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// JSON conversions
// ---------------------------------------------------------------------------

json to_json(const SymMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.dim(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

SymMatrix sym_from_json(const json& j) {
  require(j.is_array() && !j.empty(), ErrorCode::InvalidArgument,
          "sym_from_json: expected non-empty array");
  const int d = static_cast<int>(j.size());
  std::vector<double> dense;
  dense.reserve(static_cast<std::size_t>(d) * d);
  for (const auto& row : j) {
    require(row.is_array() && static_cast<int>(row.size()) == d,
            ErrorCode::InvalidArgument, "sym_from_json: ragged matrix");
    for (const auto& v : row) dense.push_back(v.get<double>());
  }
  return SymMatrix::from_dense(d, dense);
}

json to_json(const GaussianParams& p) {
  return json{{"mean", p.mean}, {"cov", to_json(p.covariance)}};
}

GaussianParams gaussian_from_json(const json& j) {
  GaussianParams p;
  p.mean = j.at("mean").get<std::vector<double>>();
  p.covariance = sym_from_json(j.at("cov"));
  require(p.covariance.dim() == p.dim(), ErrorCode::InvalidArgument,
          "gaussian_from_json: mean/cov dim mismatch");
  return p;
}

json to_json(const CorruptionSpec& s) {
  return json{
      {"model", s.model == CorruptionModel::ListDecoding ? "list" : "gmm"},
      {"alpha", s.alpha},
      {"epsilon", s.epsilon},
      {"m", s.m},
      {"adversary", json{{"id", s.adversary.id}, {"params", s.adversary.params}}}};
}

CorruptionSpec corruption_from_json(const json& j) {
  reject_unknown_keys(j, {"model", "alpha", "epsilon", "m", "adversary"}, "spec");
  CorruptionSpec s;
  const std::string model = j.at("model").get<std::string>();
  if (model == "list")
    s.model = CorruptionModel::ListDecoding;
  else if (model == "gmm")
    s.model = CorruptionModel::GmmContamination;
  else
    fail(ErrorCode::InvalidArgument, "spec.model must be 'list' or 'gmm'");
  s.alpha = j.at("alpha").get<double>();
  s.epsilon = j.at("epsilon").get<double>();
  s.m = j.at("m").get<std::size_t>();
  require(s.alpha > 0.0 && s.alpha <= 1.0, ErrorCode::InvalidArgument,
          "spec.alpha out of (0, 1]");
  require(s.epsilon >= 0.0 && s.epsilon < 0.5, ErrorCode::InvalidArgument,
          "spec.epsilon out of [0, 0.5)");
  require(s.m >= 1, ErrorCode::InvalidArgument, "spec.m must be >= 1");
  if (j.contains("adversary")) {
    const auto& a = j.at("adversary");
    reject_unknown_keys(a, {"id", "params"}, "spec.adversary");
    s.adversary.id = a.at("id").get<std::string>();
    if (a.contains("params"))
      s.adversary.params = a.at("params").get<std::map<std::string, double>>();
  }
  const auto registry = adversary_registry();
  require(std::find(registry.begin(), registry.end(), s.adversary.id) !=
              registry.end(),
          ErrorCode::UnknownAdversary,
          "spec.adversary.id '" + s.adversary.id + "' is not registered");
  return s;
}

json to_json(const EstimatorConfig& c) {
  json j{{"alpha", c.alpha},
         {"delta", c.delta},
         {"c1", c.c1},
         {"eps0", c.eps0},
         {"constant_mode",
          c.constant_mode == ConstantMode::PaperFaithful ? "paper" : "calibrated"},
         {"r_scale", c.r_scale},
         {"thresh_scale", c.thresh_scale},
         {"quantile_index_mode",
          c.quantile_index_mode == QuantileIndexMode::RootM ? "root_m" : "current_t"},
         {"rank_tol_rel", c.rank_tol_rel},
         {"seed", c.seed},
         {"min_output_frac", c.min_output_frac}};
  if (c.max_depth_override) j["max_depth_override"] = *c.max_depth_override;
  return j;
}

EstimatorConfig estimator_config_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"alpha", "delta", "c1", "eps0", "constant_mode", "r_scale",
                       "thresh_scale", "quantile_index_mode", "rank_tol_rel", "seed",
                       "min_output_frac", "max_depth_override"},
                      "estimator");
  EstimatorConfig c;
  c.alpha = j.at("alpha").get<double>();
  if (j.contains("delta")) c.delta = j.at("delta").get<double>();
  if (j.contains("c1")) c.c1 = j.at("c1").get<double>();
  if (j.contains("eps0")) c.eps0 = j.at("eps0").get<double>();
  if (j.contains("constant_mode")) {
    const std::string mode = j.at("constant_mode").get<std::string>();
    if (mode == "paper")
      c.constant_mode = ConstantMode::PaperFaithful;
    else if (mode == "calibrated")
      c.constant_mode = ConstantMode::Calibrated;
    else
      fail(ErrorCode::InvalidArgument, "estimator.constant_mode must be paper|calibrated");
  }
  if (c.constant_mode == ConstantMode::Calibrated) {
    const CalibratedScales s = calibrated_scales(c.alpha);
    c.r_scale = s.r_scale;
    c.thresh_scale = s.thresh_scale;
  }
  if (j.contains("r_scale")) c.r_scale = j.at("r_scale").get<double>();
  if (j.contains("thresh_scale")) c.thresh_scale = j.at("thresh_scale").get<double>();
  if (j.contains("quantile_index_mode")) {
    const std::string mode = j.at("quantile_index_mode").get<std::string>();
    if (mode == "root_m")
      c.quantile_index_mode = QuantileIndexMode::RootM;
    else if (mode == "current_t")
      c.quantile_index_mode = QuantileIndexMode::CurrentT;
    else
      fail(ErrorCode::InvalidArgument,
           "estimator.quantile_index_mode must be root_m|current_t");
  }
  if (j.contains("rank_tol_rel")) c.rank_tol_rel = j.at("rank_tol_rel").get<double>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("min_output_frac"))
    c.min_output_frac = j.at("min_output_frac").get<double>();
  if (j.contains("max_depth_override") && !j.at("max_depth_override").is_null())
    c.max_depth_override = j.at("max_depth_override").get<int>();
  c.validate();
  return c;
}

json to_json(const MetricReport& r) {
  json per_comp = json::object();
  for (const auto& [comp, cm] : r.per_component)
    per_comp[std::to_string(comp)] = json{{"best_hypothesis", cm.best_hypothesis},
                                          {"overlap_count", cm.overlap_count},
                                          {"overlap_frac", cm.overlap_frac},
                                          {"rel_frob_error", cm.rel_frob_error}};
  return json{{"schema_version", kSchemaVersion},
              {"rel_frob_error", r.rel_frob_error},
              {"inlier_overlap",
               json{{"count", r.inlier_overlap_count}, {"frac", r.inlier_overlap_frac}}},
              {"list_size", r.list_size},
              {"per_component", per_comp},
              {"separation_table", r.separation_table}};
}

json to_json(const StabilityReport& r) {
  return json{{"schema_version", kSchemaVersion},
              {"l1", r.l1},
              {"l2", r.l2},
              {"l3", r.l3},
              {"l4", r.l4},
              {"l5", r.l5},
              {"l3_radius_ln_2eta", r.l3_radius_ln_2eta},
              {"l3_radius_log_1eta", r.l3_radius_log_1eta},
              {"subsets_tested", r.subsets_tested},
              {"search_strategy", r.search_strategy}};
}

json to_json(const RecursionTrace& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    json loops = json::array();
    for (const auto& l : n.loops)
      loops.push_back(json{{"q_left", l.q_left},
                           {"q_right", l.q_right},
                           {"median", l.median},
                           {"mean_score", l.mean_score}});
    json removals = json::array();
    for (const auto& [idx, score] : n.filter_removals)
      removals.push_back(json{{"index", idx}, {"score", score}});
    json node{{"level", n.id.level},
              {"position", n.id.position},
              {"input_size", n.input_size},
              {"loop_count", n.loop_count()},
              {"loops", std::move(loops)},
              {"filter_removals", std::move(removals)}};
    switch (n.termination) {
      case Termination::Certificate:
        node["termination"] = "certificate";
        break;
      case Termination::TooSmall:
        node["termination"] = "too_small";
        node["discarded"] = n.discarded;
        break;
      case Termination::Split:
        node["termination"] = "split";
        node["tau"] = n.split_tau;
        node["a_eigenvalue"] = n.split_eigenvalue;
        node["left_size"] = n.left_size;
        node["right_size"] = n.right_size;
        break;
    }
    nodes.push_back(std::move(node));
  }
  return json{{"schema_version", kSchemaVersion}, {"nodes", std::move(nodes)}};
}

json results_to_json(const DecodingResult& result, const EstimatorConfig& config,
                     double wall_ms, bool include_trace) {
  json hyps = json::array();
  for (const auto& h : result.hypotheses)
    hyps.push_back(json{{"node_id", json{{"level", h.node_id.level},
                                         {"position", h.node_id.position}}},
                        {"indices", h.indices},
                        {"h", to_json(h.h_matrix)}});
  json j{{"schema_version", kSchemaVersion},
         {"config", to_json(config)},
         {"hypotheses", std::move(hyps)},
         {"wall_ms", wall_ms}};
  if (include_trace) j["trace"] = to_json(result.trace);
  return j;
}

std::vector<Hypothesis> hypotheses_from_results_json(const json& j) {
  std::vector<Hypothesis> out;
  for (const auto& h : j.at("hypotheses")) {
    Hypothesis hyp;
    hyp.node_id.level = h.at("node_id").at("level").get<int>();
    hyp.node_id.position = h.at("node_id").at("position").get<int>();
    hyp.indices = h.at("indices").get<std::vector<std::size_t>>();
    hyp.h_matrix = sym_from_json(h.at("h"));
    hyp.h_factor = psd_pseudo_factor(hyp.h_matrix);
    out.push_back(std::move(hyp));
  }
  return out;
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& context) {
  require(j.is_object(), ErrorCode::InvalidArgument, context + ": expected object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const auto& a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    require(ok, ErrorCode::InvalidArgument, context + ": unknown field '" + key + "'");
  }
}

// ---------------------------------------------------------------------------
// Dataset triplet
// ---------------------------------------------------------------------------

void dataset_write(const std::filesystem::path& stem, const Dataset& ds) {
  json truth = json::array();
  for (const auto& t : ds.truth)
    truth.push_back(json{{"weight", t.weight},
                         {"params", to_json(t.params)},
                         {"n_drawn", t.n_drawn},
                         {"n_replaced", t.n_replaced}});
  json header{{"schema_version", kSchemaVersion},
              {"dim", ds.dim},
              {"m", ds.points.size()},
              {"model",
               ds.spec.model == CorruptionModel::ListDecoding ? "list" : "gmm"},
              {"spec", to_json(ds.spec)},
              {"seed", ds.seed},
              {"truth", std::move(truth)}};
  write_atomic(std::filesystem::path(stem.string() + ".json"), header.dump(2) + "\n");

  std::string raw(ds.points.data().size() * sizeof(double), '\0');
  std::memcpy(raw.data(), ds.points.data().data(), raw.size());
  write_atomic(std::filesystem::path(stem.string() + ".f64"), raw);

  std::ostringstream csv;
  csv << "index,label\n";
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    csv << i << ',';
    if (ds.labels[i].inlier)
      csv << "inlier:" << ds.labels[i].component << '\n';
    else
      csv << "outlier\n";
  }
  write_atomic(std::filesystem::path(stem.string() + ".labels.csv"), csv.str());
}

Dataset dataset_read(const std::filesystem::path& stem) {
  const json header = json::parse(read_file(stem.string() + ".json"));
  Dataset ds;
  ds.dim = header.at("dim").get<int>();
  const std::size_t m = header.at("m").get<std::size_t>();
  ds.spec = corruption_from_json(header.at("spec"));
  ds.seed = header.at("seed").get<std::uint64_t>();
  for (const auto& t : header.at("truth")) {
    ComponentTruth ct;
    ct.weight = t.at("weight").get<double>();
    ct.params = gaussian_from_json(t.at("params"));
    ct.n_drawn = t.at("n_drawn").get<std::size_t>();
    ct.n_replaced = t.at("n_replaced").get<std::size_t>();
    ds.truth.push_back(std::move(ct));
  }

  const std::string raw = read_file(stem.string() + ".f64");
  require(raw.size() == m * static_cast<std::size_t>(ds.dim) * sizeof(double),
          ErrorCode::Io, "dataset_read: binary size does not match header m*d");
  std::vector<double> flat(m * static_cast<std::size_t>(ds.dim));
  std::memcpy(flat.data(), raw.data(), raw.size());
  ds.points = PointSet(ds.dim, std::move(flat));

  std::istringstream csv(read_file(stem.string() + ".labels.csv"));
  std::string line;
  require(static_cast<bool>(std::getline(csv, line)) && line == "index,label",
          ErrorCode::Io, "dataset_read: bad labels header");
  ds.labels.resize(m);
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, ErrorCode::Io, "dataset_read: bad label row");
    const std::size_t idx = std::stoull(line.substr(0, comma));
    require(idx < m, ErrorCode::Io, "dataset_read: label index out of range");
    const std::string label = line.substr(comma + 1);
    if (label == "outlier")
      ds.labels[idx] = Label::make_outlier();
    else if (label.rfind("inlier:", 0) == 0)
      ds.labels[idx] = Label::make_inlier(std::stoi(label.substr(7)));
    else
      fail(ErrorCode::Io, "dataset_read: bad label '" + label + "'");
    ++rows;
  }
  require(rows == m, ErrorCode::Io, "dataset_read: label row count mismatch");
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

ExperimentConfig experiment_config_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"generation", "estimator", "trials", "master_seed",
                       "output_dir", "emit"},
                      "config");
  ExperimentConfig cfg;

  const json& g = j.at("generation");
  reject_unknown_keys(
      g, {"model", "alpha", "epsilon", "m", "adversary", "dim", "n", "components"},
      "generation");
  json spec_fields = g;
  spec_fields.erase("dim");
  if (spec_fields.contains("n")) spec_fields.erase("n");
  if (spec_fields.contains("components")) spec_fields.erase("components");
  cfg.generation = corruption_from_json(spec_fields);
  cfg.dim = g.at("dim").get<int>();
  require(cfg.dim > 0, ErrorCode::InvalidArgument, "generation.dim must be positive");

  for (const auto& c : g.at("components")) {
    reject_unknown_keys(c, {"weight", "mean", "sigma2", "cov"}, "component");
    ComponentTruth t;
    t.weight = c.value("weight", 1.0);
    if (c.contains("cov")) {
      require(!c.contains("sigma2"), ErrorCode::InvalidArgument,
              "component: give either cov or sigma2");
      t.params.covariance = sym_from_json(c.at("cov"));
    } else {
      t.params = GaussianParams::scaled_identity(cfg.dim, c.value("sigma2", 1.0));
    }
    t.params.mean = c.contains("mean") ? c.at("mean").get<std::vector<double>>()
                                       : std::vector<double>(cfg.dim, 0.0);
    require(t.params.dim() == cfg.dim &&
                t.params.covariance.dim() == cfg.dim,
            ErrorCode::InvalidArgument, "component: dim mismatch");
    cfg.components.push_back(std::move(t));
  }
  require(!cfg.components.empty(), ErrorCode::InvalidArgument,
          "generation.components must be non-empty");

  if (cfg.generation.model == CorruptionModel::ListDecoding) {
    require(g.contains("n"), ErrorCode::InvalidArgument,
            "generation.n required for the list model");
    cfg.n_inliers = g.at("n").get<std::size_t>();
    require(cfg.n_inliers <= cfg.generation.m, ErrorCode::InvalidArgument,
            "generation.n exceeds m");
    require(static_cast<double>(cfg.n_inliers) >=
                cfg.generation.alpha * static_cast<double>(cfg.generation.m),
            ErrorCode::InvalidArgument, "generation.n below alpha * m");
  }

  cfg.estimator = estimator_config_from_json(j.at("estimator"));
  cfg.trials = j.value("trials", std::size_t{1});
  require(cfg.trials >= 1, ErrorCode::InvalidArgument, "trials must be >= 1");
  cfg.master_seed = j.value("master_seed", std::uint64_t{0});
  if (j.contains("output_dir"))
    cfg.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("emit")) {
    const json& e = j.at("emit");
    reject_unknown_keys(e, {"trace", "metrics", "csv"}, "emit");
    cfg.emit_trace = e.value("trace", false);
    cfg.emit_metrics = e.value("metrics", true);
    cfg.emit_csv = e.value("csv", true);
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return experiment_config_from_json(json::parse(read_file(path)));
}

Dataset generate_trial(const ExperimentConfig& cfg, std::size_t trial) {
  const std::uint64_t seed = derive_seed(cfg.master_seed, trial);
  if (cfg.generation.model == CorruptionModel::ListDecoding) {
    const GaussianParams& truth = cfg.components.front().params;
    const PointSet inliers =
        sample_gaussian(truth, cfg.n_inliers, derive_seed(seed, 0));
    return corrupt_list_model(inliers, truth, cfg.generation, derive_seed(seed, 1));
  }
  return corrupt_gmm_model(cfg.components, cfg.generation, seed);
}

std::string metrics_csv_row(std::uint64_t seed, int d, std::size_t m, double alpha,
                            double eps, const std::string& adversary,
                            const MetricReport& report, double wall_ms) {
  double best_overlap = 0.0;
  double best_rel_frob = 0.0;
  for (const auto& [comp, cm] : report.per_component)
    if (cm.overlap_frac > best_overlap) {
      best_overlap = cm.overlap_frac;
      best_rel_frob = cm.rel_frob_error;
    }
  std::ostringstream row;
  row << seed << ',' << d << ',' << m << ',' << alpha << ',' << eps << ','
      << adversary << ',' << report.list_size << ',' << best_overlap << ','
      << best_rel_frob << ',' << wall_ms;
  return row.str();
}

}  // namespace listdec
