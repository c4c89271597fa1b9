#include "scatterid/sweep.hpp"

#include <limits>
#include <set>
#include <stdexcept>

#include "scatterid/io.hpp"

namespace scatterid {

namespace {

using Json = nlohmann::json;

SweepRow row_from_cv(const CrossValidationReport& cv) {
  SweepRow row;
  row.accuracy = cv.accuracy;
  row.tpr = cv.tpr;
  row.fpr = cv.fpr;
  row.auroc = cv.auroc;
  row.roc = cv.pooled_roc;
  return row;
}

std::vector<RunSignatures> extract_all(const std::vector<ScenarioRun>& runs,
                                       const PipelineConfig& pipeline) {
  std::vector<RunSignatures> out;
  out.reserve(runs.size());
  for (const auto& run : runs) out.push_back(extract_run_signatures(run, pipeline));
  return out;
}

template <typename T>
void read_list(const Json& j, const char* name, std::vector<T>& target) {
  if (!j.contains(name)) return;
  try {
    target = j.at(name).get<std::vector<T>>();
  } catch (const Json::exception& e) {
    throw ConfigError(name, std::string("expected a list: ") + e.what());
  }
  if (target.empty()) throw ConfigError(name, "must not be empty");
}

template <typename T>
void read_scalar(const Json& j, const char* name, T& target) {
  if (!j.contains(name)) return;
  try {
    target = j.at(name).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(name, std::string("wrong type: ") + e.what());
  }
}

}  // namespace

std::string_view to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::kProfileSize:
      return "profile_size";
    case SweepKind::kMetric:
      return "metric";
    case SweepKind::kTrees:
      return "trees";
  }
  return "profile_size";
}

SweepKind parse_sweep_kind(std::string_view text) {
  if (text == "profile_size") return SweepKind::kProfileSize;
  if (text == "metric") return SweepKind::kMetric;
  if (text == "trees") return SweepKind::kTrees;
  throw ConfigError("kind", "expected profile_size, metric or trees");
}

SweepSpec sweep_spec_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "sweep spec must be a JSON object");
  static const std::set<std::string> known = {
      "kind",    "name",       "scenario",        "runs_per_variant", "corpus_b_runs",
      "folds",   "pipeline",   "forest",          "tag_counts",       "profile_lengths",
      "metrics", "power_scaling", "tree_counts", "sort_options"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(key, "unknown sweep field");
  }
  SweepSpec spec;
  if (!j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError("kind", "required string field");
  spec.kind = parse_sweep_kind(j.at("kind").get<std::string>());
  spec.name = std::string(to_string(spec.kind));
  read_scalar(j, "name", spec.name);
  if (j.contains("scenario")) spec.scenario = io::scenario_from_json(j.at("scenario"));
  if (j.contains("pipeline")) spec.pipeline = io::pipeline_from_json(j.at("pipeline"));
  if (j.contains("forest")) spec.forest = io::forest_from_json(j.at("forest"));
  read_scalar(j, "runs_per_variant", spec.runs_per_variant);
  read_scalar(j, "corpus_b_runs", spec.corpus_b_runs);
  int folds = static_cast<int>(spec.folds);
  read_scalar(j, "folds", folds);
  if (folds < 2) throw ConfigError("folds", "must be at least 2");
  spec.folds = static_cast<std::size_t>(folds);
  read_list(j, "tag_counts", spec.tag_counts);
  read_list(j, "profile_lengths", spec.profile_lengths);
  read_list(j, "power_scaling", spec.power_scaling);
  read_list(j, "tree_counts", spec.tree_counts);
  read_list(j, "sort_options", spec.sort_options);
  if (j.contains("metrics")) {
    std::vector<std::string> names;
    read_list(j, "metrics", names);
    spec.metrics.clear();
    for (const auto& n : names) {
      try {
        spec.metrics.push_back(parse_metric(n));
      } catch (const std::exception& e) {
        throw ConfigError("metrics", e.what());
      }
    }
  }
  if (spec.runs_per_variant < 1) throw ConfigError("runs_per_variant", "must be at least 1");
  if (spec.corpus_b_runs < 1) throw ConfigError("corpus_b_runs", "must be at least 1");
  for (int k : spec.tag_counts) {
    if (k < 1) throw ConfigError("tag_counts", "entries must be positive");
  }
  for (auto l : spec.profile_lengths) {
    if (l < 1) throw ConfigError("profile_lengths", "entries must be positive");
  }
  for (auto h : spec.tree_counts) {
    if (h < 1) throw ConfigError("tree_counts", "entries must be positive");
  }
  return spec;
}

Json sweep_spec_to_json(const SweepSpec& spec) {
  Json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["name"] = spec.name;
  j["scenario"] = io::scenario_to_json(spec.scenario);
  j["runs_per_variant"] = spec.runs_per_variant;
  j["corpus_b_runs"] = spec.corpus_b_runs;
  j["folds"] = spec.folds;
  j["pipeline"] = io::pipeline_to_json(spec.pipeline);
  j["forest"] = io::forest_to_json(spec.forest);
  j["tag_counts"] = spec.tag_counts;
  j["profile_lengths"] = spec.profile_lengths;
  std::vector<std::string> metrics;
  for (Metric m : spec.metrics) metrics.emplace_back(to_string(m));
  j["metrics"] = metrics;
  j["power_scaling"] = spec.power_scaling;
  j["tree_counts"] = spec.tree_counts;
  j["sort_options"] = spec.sort_options;
  return j;
}

SweepTable run_sweep(const SweepSpec& spec, std::uint64_t seed) {
  SweepTable table;
  table.kind = spec.kind;
  ForestOptions forest = spec.forest;
  forest.seed = seed;

  switch (spec.kind) {
    case SweepKind::kProfileSize: {
      for (int k : spec.tag_counts) {
        ScenarioConfig base = spec.scenario;
        base.num_tags = k;
        base.tag_offsets.clear();
        const auto signatures =
            extract_all(corpus_a_runs(base, spec.runs_per_variant, seed), spec.pipeline);
        for (std::size_t l : spec.profile_lengths) {
          PipelineConfig pipeline = spec.pipeline;
          pipeline.profile_length = l;
          const auto dataset = dataset_from_signatures(signatures, pipeline);
          SweepRow row = row_from_cv(cross_validate(dataset, spec.folds, forest, seed));
          row.parameters = {{"K", std::to_string(k)}, {"L", std::to_string(l)}};
          table.rows.push_back(std::move(row));
        }
      }
      break;
    }
    case SweepKind::kMetric: {
      for (bool scaling : spec.power_scaling) {
        const AttackMode mode = scaling ? AttackMode::kPowerScaling : AttackMode::kBasic;
        const auto signatures =
            extract_all(corpus_a_runs(spec.scenario, spec.runs_per_variant, seed, mode),
                        spec.pipeline);
        for (Metric metric : spec.metrics) {
          PipelineConfig pipeline = spec.pipeline;
          pipeline.metric = metric;
          const auto dataset = dataset_from_signatures(signatures, pipeline);
          SweepRow row = row_from_cv(cross_validate(dataset, spec.folds, forest, seed));
          row.parameters = {{"metric", std::string(to_string(metric))},
                            {"power_scaling", scaling ? "1" : "0"}};
          table.rows.push_back(std::move(row));
        }
      }
      break;
    }
    case SweepKind::kTrees: {
      const auto train =
          build_dataset(corpus_a_runs(spec.scenario, spec.runs_per_variant, seed), spec.pipeline);
      // Corpus B is test-only.
      const auto test =
          build_dataset(corpus_b_runs(spec.scenario, spec.corpus_b_runs, seed), spec.pipeline);
      for (bool sort : spec.sort_options) {
        for (std::size_t h : spec.tree_counts) {
          ForestOptions opts = forest;
          opts.num_trees = h;
          opts.sort_enabled = sort;
          const auto ev = evaluate(train_forest(train.samples, opts), test);
          SweepRow row;
          row.parameters = {{"H", std::to_string(h)}, {"sort", sort ? "1" : "0"}};
          row.accuracy = ev.report.accuracy;
          row.tpr = ev.report.tpr;
          row.fpr = ev.report.fpr;
          row.auroc = ev.report.auroc.value_or(std::numeric_limits<double>::quiet_NaN());
          row.roc = ev.report.roc;
          table.rows.push_back(std::move(row));
        }
      }
      break;
    }
  }
  return table;
}

std::string sweep_csv(const SweepTable& table) {
  std::string out;
  if (table.rows.empty()) return "accuracy,tpr,fpr,auroc\n";
  for (const auto& [name, value] : table.rows.front().parameters) out += name + ",";
  out += "accuracy,tpr,fpr,auroc\n";
  for (const auto& row : table.rows) {
    for (const auto& [name, value] : row.parameters) out += value + ",";
    out += io::format_fixed(row.accuracy) + "," + io::format_fixed(row.tpr) + "," +
           io::format_fixed(row.fpr) + "," + io::format_fixed(row.auroc) + "\n";
  }
  return out;
}

std::string sweep_roc_csv(const SweepTable& table) {
  std::string out = "cell,";
  if (!table.rows.empty()) {
    for (const auto& [name, value] : table.rows.front().parameters) out += name + ",";
  }
  out += "fpr,tpr\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    std::string prefix = std::to_string(i) + ",";
    for (const auto& [name, value] : table.rows[i].parameters) prefix += value + ",";
    for (const auto& p : table.rows[i].roc)
      out += prefix + io::format_fixed(p.fpr) + "," + io::format_fixed(p.tpr) + "\n";
  }
  return out;
}

Json sweep_to_json(const SweepTable& table) {
  Json j;
  j["kind"] = std::string(to_string(table.kind));
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json r;
    for (const auto& [name, value] : row.parameters) r[name] = value;
    r["accuracy"] = row.accuracy;
    r["tpr"] = row.tpr;
    r["fpr"] = row.fpr;
    r["auroc"] = row.auroc;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

}  // namespace scatterid
