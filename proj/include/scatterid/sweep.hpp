#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "scatterid/eval.hpp"

namespace scatterid {

enum class SweepKind {
  kProfileSize,  // (K, L) grid, cross-validated AUROC on corpus A
  kMetric,       // distance metric x {with, without} power scaling
  kTrees,        // H x sort on/off, trained on corpus A, tested on corpus B
};

std::string_view to_string(SweepKind kind);
SweepKind parse_sweep_kind(std::string_view text);

struct SweepSpec {
  SweepKind kind = SweepKind::kProfileSize;
  std::string name;
  ScenarioConfig scenario;
  int runs_per_variant = 3;
  int corpus_b_runs = 6;
  std::size_t folds = 3;
  PipelineConfig pipeline;
  ForestOptions forest;

  std::vector<int> tag_counts{2, 3, 4};
  std::vector<std::size_t> profile_lengths{2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16};
  std::vector<Metric> metrics{Metric::kCosine, Metric::kEuclidean, Metric::kChebyshev,
                              Metric::kManhattan};
  std::vector<bool> power_scaling{true, false};
  std::vector<std::size_t> tree_counts{5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
  std::vector<bool> sort_options{true, false};
};

/// Reads a sweep spec; "scenario", "pipeline" and "forest" objects use the
/// same field names as the standalone config files.
SweepSpec sweep_spec_from_json(const nlohmann::json& j);
nlohmann::json sweep_spec_to_json(const SweepSpec& spec);

struct SweepRow {
  std::vector<std::pair<std::string, std::string>> parameters;
  double accuracy = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double auroc = 0.0;
  std::vector<RocPoint> roc;
};

struct SweepTable {
  SweepKind kind = SweepKind::kProfileSize;
  std::vector<SweepRow> rows;
};

/// One train/evaluate cycle per grid cell. All cells share the simulation
/// seeds derived from `seed`, so differences between cells come from the
/// swept parameter alone.
SweepTable run_sweep(const SweepSpec& spec, std::uint64_t seed);

std::string sweep_csv(const SweepTable& table);
std::string sweep_roc_csv(const SweepTable& table);
nlohmann::json sweep_to_json(const SweepTable& table);

}  // namespace scatterid
