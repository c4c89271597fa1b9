#include "scatterid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace scatterid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Composition {
  int legit;
  int attackers;
  int fakes;
};

constexpr Composition kCorpusACompositions[] = {{2, 1, 3}, {2, 2, 4}};
constexpr Composition kCorpusBComposition{2, 2, 4};
constexpr std::uint64_t kCorpusBVariantBase = 100;

ScenarioRun make_run(const ScenarioConfig& base, Composition comp, AttackMode mode,
                     std::uint64_t seed, std::uint64_t variant, int replicate, int scenario_id) {
  ScenarioRun run;
  run.scenario_id = scenario_id;
  run.config = base;
  run.config.num_legit = comp.legit;
  run.config.num_attackers = comp.attackers;
  run.config.num_fake_ids = comp.fakes;
  run.config.attack_mode = mode;
  run.config.rng_seed =
      derive_seed(seed, StreamPurpose::kRun, {variant, static_cast<std::uint64_t>(replicate)});
  return run;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? kNaN : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::size_t PipelineConfig::window_for(const ScenarioConfig& config) const {
  if (smoothing_window > 0) return smoothing_window;
  return default_smoothing_window(static_cast<std::size_t>(config.samples_per_bit));
}

std::string_view to_string(Corpus corpus) { return corpus == Corpus::kA ? "A" : "B"; }

Corpus corpus_of(AttackMode mode) {
  return mode == AttackMode::kColluding ? Corpus::kB : Corpus::kA;
}

std::size_t LabeledDataset::positives() const {
  return static_cast<std::size_t>(std::count_if(
      samples.begin(), samples.end(), [](const LabeledSample& s) { return s.label == 1; }));
}

std::vector<int> LabeledDataset::labels() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

void LabeledDataset::append(const LabeledDataset& other) {
  samples.insert(samples.end(), other.samples.begin(), other.samples.end());
  provenance.insert(provenance.end(), other.provenance.begin(), other.provenance.end());
}

RunSignatures extract_run_signatures(const ScenarioRun& run, const PipelineConfig& pipeline,
                                     const TraceSink& sink) {
  const ScenarioConfig& config = run.config;
  config.validate();
  RunSignatures out;
  out.run = run;
  const auto trajectories = generate_trajectories(config);
  const BitTemplate tmpl = config.bit_template();
  const std::size_t window = pipeline.window_for(config);
  out.records.reserve(static_cast<std::size_t>(config.num_slots * config.num_ids()));

  for (int slot = 0; slot < config.num_slots; ++slot) {
    for (const auto& event : schedule_transmissions(config, slot)) {
      try {
        Rng rng = trace_stream(config, slot, event.claimed_id);
        const Point2 pos =
            trajectories[static_cast<std::size_t>(event.emitter)].positions[static_cast<std::size_t>(slot)];
        const SampleTrace trace = synthesize_received_signal(event, pos, config, tmpl, rng);
        if (sink) sink(run.scenario_id, event, trace);
        const auto segment = segment_backscatter(trace.samples, tmpl, window);
        out.records.push_back({slot, event.claimed_id, extract_signature(segment.tag_segments, tmpl)});
      } catch (const std::invalid_argument&) {
        ++out.failed_traces;
      } catch (const SingularityError&) {
        ++out.failed_traces;
      }
    }
  }
  return out;
}

LabeledDataset dataset_from_signatures(std::span<const RunSignatures> runs,
                                       const PipelineConfig& pipeline, DatasetStats* stats) {
  DatasetStats local;
  LabeledDataset dataset;
  for (const auto& rs : runs) {
    local.failed_traces += rs.failed_traces;
    const ScenarioConfig& config = rs.run.config;
    const auto set = build_profiles(rs.records, pipeline.profile_length);
    local.discarded_profiles += set.discarded.size();

    auto begin = set.profiles.begin();
    while (begin != set.profiles.end()) {
      auto end = std::find_if(begin, set.profiles.end(),
                              [w = begin->window](const SignalProfile& p) { return p.window != w; });
      const std::span<const SignalProfile> window(&*begin, static_cast<std::size_t>(end - begin));
      begin = end;
      if (window.size() < 2) {
        ++local.dropped_windows;
        continue;
      }
      DistanceTensor tensor;
      try {
        tensor = distance_tensor(window, pipeline.metric);
      } catch (const ZeroNormError&) {
        ++local.dropped_windows;
        continue;
      }
      for (std::size_t n = 0; n < window.size(); ++n) {
        auto sv = reduce_peers(tensor, n, pipeline.reduction);
        dataset.samples.push_back({std::move(sv.values), is_fake(config, sv.claimed_id) ? 1 : 0});
        dataset.provenance.push_back(
            {corpus_of(config.attack_mode), rs.run.scenario_id, window[n].window, sv.claimed_id});
      }
    }
  }
  if (stats) *stats = local;
  return dataset;
}

LabeledDataset build_dataset(std::span<const ScenarioRun> runs, const PipelineConfig& pipeline,
                             DatasetStats* stats, const TraceSink& sink) {
  std::vector<RunSignatures> signatures;
  signatures.reserve(runs.size());
  for (const auto& run : runs) signatures.push_back(extract_run_signatures(run, pipeline, sink));
  return dataset_from_signatures(signatures, pipeline, stats);
}

std::vector<ScenarioRun> corpus_a_runs(const ScenarioConfig& base, int runs_per_variant,
                                       std::uint64_t seed, std::optional<AttackMode> only_mode) {
  std::vector<ScenarioRun> runs;
  std::uint64_t variant = 0;
  int scenario_id = 0;
  for (const auto& comp : kCorpusACompositions) {
    for (AttackMode mode : {AttackMode::kBasic, AttackMode::kPowerScaling}) {
      if (!only_mode || *only_mode == mode) {
        for (int r = 0; r < runs_per_variant; ++r)
          runs.push_back(make_run(base, comp, mode, seed, variant, r, scenario_id++));
      }
      ++variant;
    }
  }
  return runs;
}

std::vector<ScenarioRun> corpus_b_runs(const ScenarioConfig& base, int runs, std::uint64_t seed) {
  std::vector<ScenarioRun> out;
  for (int r = 0; r < runs; ++r)
    out.push_back(make_run(base, kCorpusBComposition, AttackMode::kColluding, seed,
                           kCorpusBVariantBase, r, 1000 + r));
  return out;
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores/labels length mismatch");
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) return {};

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> roc{{0.0, 0.0}};
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    roc.push_back({ratio(fp, negatives), ratio(tp, positives)});
  }
  if (roc.back().fpr != 1.0 || roc.back().tpr != 1.0) roc.push_back({1.0, 1.0});
  return roc;
}

double trapezoid_area(std::span<const RocPoint> roc) {
  double area = 0.0;
  for (std::size_t i = 1; i < roc.size(); ++i)
    area += (roc[i].fpr - roc[i - 1].fpr) * (roc[i].tpr + roc[i - 1].tpr) / 2.0;
  return area;
}

MetricsReport compute_metrics(std::span<const int> predictions, std::span<const double> scores,
                              std::span<const int> labels) {
  if (predictions.size() != labels.size() || scores.size() != labels.size())
    throw std::invalid_argument("predictions, scores and labels must have equal length");
  MetricsReport report;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool fake = labels[i] == 1;
    const bool flagged = predictions[i] == 1;
    if (fake && flagged) ++report.true_positives;
    if (fake && !flagged) ++report.false_negatives;
    if (!fake && flagged) ++report.false_positives;
    if (!fake && !flagged) ++report.true_negatives;
  }
  report.accuracy = ratio(report.true_positives + report.true_negatives, labels.size());
  report.tpr = ratio(report.true_positives, report.true_positives + report.false_negatives);
  report.fpr = ratio(report.false_positives, report.false_positives + report.true_negatives);
  report.roc = roc_curve(scores, labels);
  if (!report.roc.empty()) report.auroc = trapezoid_area(report.roc);
  return report;
}

Evaluation evaluate(const ForestModel& model, const LabeledDataset& dataset) {
  Evaluation ev;
  ev.predictions.reserve(dataset.size());
  ev.scores.reserve(dataset.size());
  for (const auto& s : dataset.samples) {
    const double score = model.predict_score(s.features);
    ev.scores.push_back(score);
    ev.predictions.push_back(score >= 0.5 ? 1 : 0);
  }
  const auto labels = dataset.labels();
  ev.report = compute_metrics(ev.predictions, ev.scores, labels);
  return ev;
}

std::vector<std::size_t> assign_folds(std::span<const int> labels, std::size_t folds,
                                      std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  if (pos.size() < folds || neg.size() < folds)
    throw std::invalid_argument("cannot stratify: need at least " + std::to_string(folds) +
                                " samples of each class, have " + std::to_string(pos.size()) +
                                " fake and " + std::to_string(neg.size()) + " legitimate");
  Rng rng = make_stream(seed, StreamPurpose::kFolds);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<std::size_t> fold(labels.size());
  std::size_t dealt = 0;
  for (std::size_t i : pos) fold[i] = dealt++ % folds;
  for (std::size_t i : neg) fold[i] = dealt++ % folds;
  return fold;
}

CrossValidationReport cross_validate(const LabeledDataset& dataset, std::size_t folds,
                                     const ForestOptions& forest, std::uint64_t seed) {
  const auto labels = dataset.labels();
  const auto assignment = assign_folds(labels, folds, seed);
  CrossValidationReport out;
  std::vector<double> pooled_scores(dataset.size());
  for (std::size_t f = 0; f < folds; ++f) {
    LabeledDataset train;
    LabeledDataset test;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      auto& dst = assignment[i] == f ? test : train;
      dst.samples.push_back(dataset.samples[i]);
      dst.provenance.push_back(dataset.provenance[i]);
    }
    ForestOptions opts = forest;
    opts.seed = derive_seed(forest.seed, StreamPurpose::kTree, {1000 + f});
    const auto model = train_forest(train.samples, opts);
    auto ev = evaluate(model, test);
    std::size_t k = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (assignment[i] == f) pooled_scores[i] = ev.scores[k++];
    }
    out.folds.push_back(std::move(ev.report));
  }
  const double n = static_cast<double>(folds);
  for (const auto& r : out.folds) {
    out.accuracy += r.accuracy / n;
    out.tpr += r.tpr / n;
    out.fpr += r.fpr / n;
    out.auroc += r.auroc.value_or(kNaN) / n;
  }
  out.pooled_roc = roc_curve(pooled_scores, labels);
  return out;
}

}  // namespace scatterid
