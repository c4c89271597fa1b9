#include "scatterid/commands.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <stdexcept>

#include "scatterid/eval.hpp"
#include "scatterid/io.hpp"
#include "scatterid/rng.hpp"
#include "scatterid/sweep.hpp"

namespace scatterid::cli {

namespace {

// Scenario ids for plain (non-corpus) simulations start here.
constexpr std::uint64_t kPlainVariant = 300;

std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path absolute_path(const fs::path& p) { return fs::absolute(p).lexically_normal(); }

Json new_manifest(const char* command, const fs::path& out, std::uint64_t seed) {
  Json m;
  m["tool"] = kToolName;
  m["version"] = kToolVersion;
  m["command"] = command;
  m["seed"] = seed;
  m["out"] = absolute_path(out).string();
  m["arguments"] = Json::object();
  m["inputs"] = Json::object();
  m["outputs"] = Json::object();
  return m;
}

void emit(Json& manifest, const std::string& key, const fs::path& path, const std::string& text) {
  io::write_text(path, text);
  manifest["outputs"][key] = absolute_path(path).string();
}

Json finish(Json manifest, const fs::path& out) {
  manifest["timestamp"] = timestamp_utc();
  io::write_text(out / "manifest.json", manifest.dump(2) + "\n");
  return manifest;
}

void record_input(Json& manifest, const std::string& key, const fs::path& path) {
  manifest["inputs"][key] = {{"path", absolute_path(path).string()}, {"digest", file_digest(path)}};
}

struct SimulationPlan {
  ScenarioConfig scenario;
  PipelineConfig pipeline;
  int runs = 1;
  std::optional<Corpus> corpus;
};

SimulationPlan plan_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  SimulationPlan plan;
  Json scenario = j;
  if (j.contains("pipeline")) {
    plan.pipeline = io::pipeline_from_json(j.at("pipeline"));
    scenario.erase("pipeline");
  }
  if (j.contains("runs")) {
    if (!j.at("runs").is_number_integer()) throw ConfigError("runs", "expected an integer");
    plan.runs = j.at("runs").get<int>();
    if (plan.runs < 1) throw ConfigError("runs", "must be at least 1");
    scenario.erase("runs");
  }
  if (j.contains("corpus")) {
    const auto& c = j.at("corpus");
    if (c == "A") {
      plan.corpus = Corpus::kA;
    } else if (c == "B") {
      plan.corpus = Corpus::kB;
    } else {
      throw ConfigError("corpus", "expected \"A\" or \"B\"");
    }
    scenario.erase("corpus");
  }
  plan.scenario = io::scenario_from_json(scenario);
  return plan;
}

std::vector<ScenarioRun> plan_runs(const SimulationPlan& plan, std::uint64_t seed) {
  if (plan.corpus == Corpus::kA) return corpus_a_runs(plan.scenario, plan.runs, seed);
  if (plan.corpus == Corpus::kB) return corpus_b_runs(plan.scenario, plan.runs, seed);
  std::vector<ScenarioRun> runs;
  for (int r = 0; r < plan.runs; ++r) {
    ScenarioRun run;
    run.scenario_id = r;
    run.config = plan.scenario;
    run.config.rng_seed = plan.runs == 1
                              ? seed
                              : derive_seed(seed, StreamPurpose::kRun,
                                            {kPlainVariant, static_cast<std::uint64_t>(r)});
    runs.push_back(std::move(run));
  }
  return runs;
}

std::string trace_header() { return "scenario,slot,id,ground_truth_start,index,value\n"; }

Json simulate_from(const Json& config, std::uint64_t seed, const fs::path& out, bool dump_traces,
                   std::ostream& log) {
  const SimulationPlan plan = plan_from_json(config);
  const auto runs = plan_runs(plan, seed);

  std::string traces;
  TraceSink sink;
  if (dump_traces) {
    traces = trace_header();
    sink = [&traces](int scenario, const TransmissionEvent& ev, const SampleTrace& trace) {
      const std::string prefix = std::to_string(scenario) + "," + std::to_string(ev.slot) + "," +
                                 std::to_string(ev.claimed_id.value) + "," +
                                 std::to_string(trace.ground_truth_start) + ",";
      for (std::size_t i = 0; i < trace.samples.size(); ++i)
        traces += prefix + std::to_string(i) + "," + io::format_exact(trace.samples[i]) + "\n";
    };
  }

  std::vector<RunSignatures> signatures;
  for (const auto& run : runs) signatures.push_back(extract_run_signatures(run, plan.pipeline, sink));
  DatasetStats stats;
  const auto dataset = dataset_from_signatures(signatures, plan.pipeline, &stats);
  for (const auto& s : signatures) stats.failed_traces += s.failed_traces;

  Json m = new_manifest("simulate", out, seed);
  m["arguments"] = {{"dump_traces", dump_traces}};
  m["config"] = config;
  emit(m, "dataset", out / "dataset.csv", io::dataset_csv(dataset));
  emit(m, "provenance", out / "provenance.csv", io::provenance_csv(dataset));
  emit(m, "signatures", out / "signatures.csv", io::signatures_csv(signatures));
  emit(m, "similarity", out / "similarity.csv", io::similarity_csv(dataset));
  if (dump_traces) emit(m, "traces", out / "traces.csv", traces);
  m["summary"] = {{"runs", runs.size()},
                  {"samples", dataset.size()},
                  {"positives", dataset.positives()},
                  {"feature_length", dataset.feature_length()},
                  {"failed_traces", stats.failed_traces},
                  {"discarded_profiles", stats.discarded_profiles},
                  {"dropped_windows", stats.dropped_windows}};
  log << "simulate: " << runs.size() << " run(s), " << dataset.size() << " samples ("
      << dataset.positives() << " fake), L=" << dataset.feature_length() << ", "
      << stats.failed_traces << " failed traces\n";
  return finish(std::move(m), out);
}

Json train_from(const fs::path& dataset_path, const ForestOptions& options, const fs::path& model_path,
                const fs::path& out, std::ostream& log) {
  const auto dataset = io::parse_dataset_csv(io::read_text(dataset_path));
  const std::size_t pos = dataset.positives();
  if (pos == 0 || pos == dataset.size())
    throw std::invalid_argument("training dataset " + dataset_path.string() +
                                " must contain both classes (" + std::to_string(pos) + " fake of " +
                                std::to_string(dataset.size()) + ")");
  const ForestModel model = train_forest(dataset.samples, options);

  Json m = new_manifest("train", out, options.seed);
  m["arguments"] = {{"forest", io::forest_to_json(options)},
                    {"model", absolute_path(model_path).string()}};
  record_input(m, "dataset", dataset_path);
  emit(m, "model", model_path, model.serialize());

  std::size_t correct = 0;
  for (const auto& s : dataset.samples) correct += model.predict(s.features) == s.label;
  const double acc = static_cast<double>(correct) / static_cast<double>(dataset.size());
  m["summary"] = {{"samples", dataset.size()},
                  {"num_trees", model.num_trees()},
                  {"features_per_split", model.features_per_split()},
                  {"feature_length", model.feature_length()},
                  {"training_accuracy", acc}};
  log << "train: " << model.num_trees() << " trees, z=" << model.features_per_split()
      << ", L=" << model.feature_length() << ", training accuracy " << io::format_fixed(acc)
      << "\n";
  return finish(std::move(m), out);
}

Json eval_from(const fs::path& model_path, const fs::path& dataset_path, const fs::path& out,
               std::ostream& log) {
  const ForestModel model = ForestModel::deserialize(io::read_text(model_path));
  const auto dataset = io::parse_dataset_csv(io::read_text(dataset_path));
  if (dataset.feature_length() != model.feature_length())
    throw std::invalid_argument("dimension mismatch: model expects " +
                                std::to_string(model.feature_length()) +
                                " features, dataset has " +
                                std::to_string(dataset.feature_length()));
  const Evaluation ev = evaluate(model, dataset);

  Json m = new_manifest("eval", out, 0);
  record_input(m, "model", model_path);
  record_input(m, "dataset", dataset_path);
  emit(m, "metrics_csv", out / "metrics.csv", io::metrics_csv(ev.report));
  emit(m, "metrics_json", out / "metrics.json", io::metrics_to_json(ev.report).dump(2) + "\n");
  emit(m, "predictions", out / "predictions.csv", io::predictions_csv(ev, dataset.labels()));
  emit(m, "roc", out / "roc.csv", io::roc_csv(ev.report.roc));
  log << "eval: " << dataset.size() << " samples, accuracy " << io::format_fixed(ev.report.accuracy)
      << ", TPR " << io::format_fixed(ev.report.tpr) << ", FPR " << io::format_fixed(ev.report.fpr)
      << ", AUROC " << (ev.report.auroc ? io::format_fixed(*ev.report.auroc) : "nan") << "\n";
  return finish(std::move(m), out);
}

Json sweep_from(const Json& spec_json, std::uint64_t seed, const fs::path& out, std::ostream& log) {
  const SweepSpec spec = sweep_spec_from_json(spec_json);
  const SweepTable table = run_sweep(spec, seed);
  Json m = new_manifest("sweep", out, seed);
  m["sweep_spec"] = spec_json;
  emit(m, "results_csv", out / "results.csv", sweep_csv(table));
  emit(m, "results_json", out / "results.json", sweep_to_json(table).dump(2) + "\n");
  emit(m, "roc", out / "roc.csv", sweep_roc_csv(table));
  log << "sweep " << to_string(spec.kind) << ": " << table.rows.size() << " rows\n";
  return finish(std::move(m), out);
}

void check_input(const Json& manifest, const std::string& key) {
  const auto& in = manifest.at("inputs").at(key);
  const fs::path path = in.at("path").get<std::string>();
  if (file_digest(path) != in.at("digest").get<std::string>())
    throw std::runtime_error("input '" + key + "' (" + path.string() +
                             ") changed since the manifest was written");
}

}  // namespace

std::string file_digest(const fs::path& path) {
  const std::string bytes = io::read_text(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json cmd_simulate(const SimulateArgs& args, std::ostream& log) {
  const Json config = io::read_json(args.config);
  // Parse once up front so that the fallback seed comes from a validated config.
  const SimulationPlan plan = plan_from_json(config);
  const std::uint64_t seed = args.seed.value_or(plan.scenario.rng_seed);
  return simulate_from(config, seed, args.out, args.dump_traces, log);
}

Json cmd_train(const TrainArgs& args, std::ostream& log) {
  ForestOptions options;
  if (args.config) options = io::forest_from_json(io::read_json(*args.config));
  if (args.trees) {
    if (*args.trees < 1) throw ConfigError("trees", "must be at least 1");
    options.num_trees = *args.trees;
  }
  if (args.no_sort) options.sort_enabled = false;
  options.seed = args.seed;
  return train_from(args.dataset, options, args.model.value_or(args.out / "model.json"), args.out,
                    log);
}

Json cmd_eval(const EvalArgs& args, std::ostream& log) {
  return eval_from(args.model, args.dataset, args.out, log);
}

Json cmd_sweep(const SweepArgs& args, std::ostream& log) {
  return sweep_from(io::read_json(args.sweep_spec), args.seed, args.out, log);
}

Json cmd_replay(const ReplayArgs& args, std::ostream& log) {
  const Json m = io::read_json(args.manifest);
  if (m.value("tool", "") != kToolName) throw std::runtime_error("not a scatterid manifest");
  const std::string command = m.at("command").get<std::string>();
  const fs::path recorded_out = m.at("out").get<std::string>();
  const fs::path out = args.out.value_or(recorded_out);
  const std::uint64_t seed = m.at("seed").get<std::uint64_t>();

  // Outputs keep their recorded names relative to the output directory.
  const auto relocated = [&](const std::string& key) {
    const fs::path p = m.at("outputs").at(key).get<std::string>();
    return args.out ? out / p.lexically_relative(recorded_out) : p;
  };

  if (command == "simulate")
    return simulate_from(m.at("config"), seed, out, m.at("arguments").value("dump_traces", false),
                         log);
  if (command == "train") {
    check_input(m, "dataset");
    const ForestOptions options = io::forest_from_json(m.at("arguments").at("forest"));
    return train_from(m.at("inputs").at("dataset").at("path").get<std::string>(), options,
                      relocated("model"), out, log);
  }
  if (command == "eval") {
    check_input(m, "model");
    check_input(m, "dataset");
    return eval_from(m.at("inputs").at("model").at("path").get<std::string>(),
                     m.at("inputs").at("dataset").at("path").get<std::string>(), out, log);
  }
  if (command == "sweep") return sweep_from(m.at("sweep_spec"), seed, out, log);
  throw std::runtime_error("manifest names unknown command '" + command + "'");
}

}  // namespace scatterid::cli
