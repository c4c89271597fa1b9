#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "scatterid/forest.hpp"
#include "scatterid/scene.hpp"
#include "scatterid/sigproc.hpp"
#include "scatterid/similarity.hpp"

namespace scatterid {

struct PipelineConfig {
  std::size_t profile_length = 10;  // L
  Metric metric = Metric::kCosine;
  PeerReduction reduction = PeerReduction::kColumnMin;
  std::size_t smoothing_window = 0;  // 0: default_smoothing_window(samples_per_bit)

  std::size_t window_for(const ScenarioConfig& config) const;
};

/// Corpus A holds basic and power-scaling runs (train and test); corpus B
/// holds colluding runs and is only ever used for testing.
enum class Corpus { kA, kB };

std::string_view to_string(Corpus corpus);
Corpus corpus_of(AttackMode mode);

struct ScenarioRun {
  int scenario_id = 0;
  ScenarioConfig config;
};

struct Provenance {
  Corpus corpus = Corpus::kA;
  int scenario_id = 0;
  int window = 0;
  IdentityId claimed_id;
};

struct LabeledDataset {
  std::vector<LabeledSample> samples;
  std::vector<Provenance> provenance;  // parallel to samples

  std::size_t size() const { return samples.size(); }
  std::size_t feature_length() const {
    return samples.empty() ? 0 : samples.front().features.size();
  }
  std::size_t positives() const;
  std::vector<int> labels() const;
  void append(const LabeledDataset& other);
};

struct DatasetStats {
  std::size_t failed_traces = 0;       // segmentation or simulation errors
  std::size_t discarded_profiles = 0;  // ID windows with a missing slot
  std::size_t dropped_windows = 0;     // windows lost to zero-norm rows
};

/// Called with every synthesized trace when trace dumping is requested.
using TraceSink = std::function<void(int scenario_id, const TransmissionEvent&,
                                     const SampleTrace&)>;

struct RunSignatures {
  ScenarioRun run;
  std::vector<SignatureRecord> records;
  std::size_t failed_traces = 0;
};

/// Simulates every slot of the run and extracts one signature per event.
RunSignatures extract_run_signatures(const ScenarioRun& run, const PipelineConfig& pipeline,
                                     const TraceSink& sink = {});

/// Profiles, distance tensors and similarity vectors for already extracted
/// signature streams; one labeled sample per (ID, window).
LabeledDataset dataset_from_signatures(std::span<const RunSignatures> runs,
                                       const PipelineConfig& pipeline,
                                       DatasetStats* stats = nullptr);

LabeledDataset build_dataset(std::span<const ScenarioRun> runs, const PipelineConfig& pipeline,
                             DatasetStats* stats = nullptr, const TraceSink& sink = {});

/// Corpus A: compositions (2 legit, 1 attacker, 3 fake IDs) and (2, 2, 4),
/// each under basic and power-scaling attacks. `only_mode` restricts to one
/// of the two modes.
std::vector<ScenarioRun> corpus_a_runs(const ScenarioConfig& base, int runs_per_variant,
                                       std::uint64_t seed,
                                       std::optional<AttackMode> only_mode = std::nullopt);

/// Corpus B: two attackers colluding over four fake IDs next to two
/// legitimate robots.
std::vector<ScenarioRun> corpus_b_runs(const ScenarioConfig& base, int runs, std::uint64_t seed);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct MetricsReport {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t true_negatives = 0;
  std::size_t false_negatives = 0;
  double accuracy = 0.0;
  double tpr = 0.0;  // NaN without positives
  double fpr = 0.0;  // NaN without negatives
  std::vector<RocPoint> roc;    // empty when undefined
  std::optional<double> auroc;  // unset for single-class labels
};

MetricsReport compute_metrics(std::span<const int> predictions, std::span<const double> scores,
                              std::span<const int> labels);

/// Threshold sweep over the distinct scores, predicting fake when
/// score >= threshold; starts at (0,0) and ends at (1,1).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

double trapezoid_area(std::span<const RocPoint> roc);

struct Evaluation {
  std::vector<int> predictions;
  std::vector<double> scores;
  MetricsReport report;
};

Evaluation evaluate(const ForestModel& model, const LabeledDataset& dataset);

/// Stratified assignment of samples to folds; sizes differ by at most one
/// and each class is spread evenly. Throws if a class has fewer samples
/// than folds.
std::vector<std::size_t> assign_folds(std::span<const int> labels, std::size_t folds,
                                      std::uint64_t seed);

struct CrossValidationReport {
  std::vector<MetricsReport> folds;
  double accuracy = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double auroc = 0.0;
  std::vector<RocPoint> pooled_roc;  // from out-of-fold scores
};

CrossValidationReport cross_validate(const LabeledDataset& dataset, std::size_t folds,
                                     const ForestOptions& forest, std::uint64_t seed);

}  // namespace scatterid
