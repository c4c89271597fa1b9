#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "scatterid/eval.hpp"
#include "scatterid/forest.hpp"
#include "scatterid/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scatterid;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("scatterid_cli_test") / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return io::read_text(p); }

struct Outcome {
  int code;
  std::string err;
};

Outcome run(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(SCATTERID_CLI) + " " + args + " > " +
                          (dir / "stdout.txt").string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {status, fs::exists(err) ? slurp(err) : ""};
}

void write_json(const fs::path& p, const json& j) { io::write_text(p, j.dump(2)); }

json small_config() {
  return {{"preset", "office"}, {"num_slots", 30}, {"num_fake_ids", 3}, {"runs", 2}};
}

std::size_t columns(const std::string& line) {
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

}  // namespace

TEST_CASE("cli: simulate writes an L+1 column dataset deterministically") {
  const auto dir = scratch("simulate");
  write_json(dir / "cfg.json", small_config());
  REQUIRE(run("simulate --config " + (dir / "cfg.json").string() + " --seed 3 --out " +
                  (dir / "a").string(), dir).code == 0);
  REQUIRE(run("simulate --config " + (dir / "cfg.json").string() + " --seed 3 --out " +
                  (dir / "b").string(), dir).code == 0);
  std::istringstream in(slurp(dir / "a" / "dataset.csv"));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    CHECK(columns(line) == 11);
    ++rows;
  }
  CHECK(rows == 1 + 2 * 3 * 5);
  for (const char* f : {"dataset.csv", "provenance.csv", "signatures.csv", "similarity.csv"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  const auto manifest = io::read_json(dir / "a" / "manifest.json");
  CHECK(manifest["command"] == "simulate");
  CHECK(manifest["seed"] == 3);
  CHECK(manifest.contains("timestamp"));
  CHECK(manifest["outputs"].contains("dataset"));
  CHECK_FALSE(fs::exists(dir / "a" / "traces.csv"));

  REQUIRE(run("simulate --config " + (dir / "cfg.json").string() + " --seed 4 --out " +
                  (dir / "c").string(), dir).code == 0);
  CHECK(slurp(dir / "a" / "dataset.csv") != slurp(dir / "c" / "dataset.csv"));
}

TEST_CASE("cli: trace dump") {
  const auto dir = scratch("traces");
  write_json(dir / "cfg.json", {{"num_slots", 2}, {"num_fake_ids", 1}});
  REQUIRE(run("simulate --config " + (dir / "cfg.json").string() + " --out " +
                  (dir / "o").string() + " --dump-traces", dir).code == 0);
  const auto text = slurp(dir / "o" / "traces.csv");
  CHECK(text.rfind("scenario,slot,id,ground_truth_start,index,value\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') > 2 * 3 * 3200);
}

TEST_CASE("cli: colluding preset is marked as corpus B") {
  const auto dir = scratch("colluding");
  REQUIRE(run("simulate --config " + std::string(SCATTERID_CONFIGS) + "/colluding.json --out " +
                  (dir / "o").string(), dir).code == 0);
  std::istringstream in(slurp(dir / "o" / "provenance.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "row,corpus,scenario,window,claimed_id");
  int rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.find(",B,") != std::string::npos);
    ++rows;
  }
  CHECK(rows > 0);
}

TEST_CASE("cli: invalid configs fail with the field named") {
  const auto dir = scratch("invalid");
  write_json(dir / "bad.json", {{"num_tags", 0}});
  auto o = run("simulate --config " + (dir / "bad.json").string() + " --out " +
                   (dir / "o").string(), dir);
  CHECK(o.code != 0);
  CHECK(o.err.find("num_tags") != std::string::npos);

  write_json(dir / "typo.json", {{"num_slot", 10}});
  o = run("simulate --config " + (dir / "typo.json").string() + " --out " + (dir / "o").string(),
          dir);
  CHECK(o.code != 0);
  CHECK(o.err.find("num_slot") != std::string::npos);

  io::write_text(dir / "broken.json", "{\"num_slots\": ");
  CHECK(run("simulate --config " + (dir / "broken.json").string() + " --out " +
                (dir / "o").string(), dir).code != 0);
  CHECK(run("simulate --out " + (dir / "o").string(), dir).code != 0);
}

TEST_CASE("cli: train, eval and the fused pipeline agree") {
  const auto dir = scratch("chain");
  write_json(dir / "cfg.json", small_config());
  REQUIRE(run("simulate --config " + (dir / "cfg.json").string() + " --seed 1 --out " +
                  (dir / "sim").string(), dir).code == 0);
  const auto ds_path = (dir / "sim" / "dataset.csv").string();
  REQUIRE(run("train --dataset " + ds_path + " --out " + (dir / "train").string(), dir).code == 0);
  const auto model_text = slurp(dir / "train" / "model.json");
  const auto model = ForestModel::deserialize(model_text);
  CHECK(model.num_trees() == 30);
  CHECK(model.features_per_split() == 3);
  CHECK(model.serialize() == model_text);

  REQUIRE(run("eval --model " + (dir / "train" / "model.json").string() + " --dataset " + ds_path +
                  " --out " + (dir / "eval").string(), dir).code == 0);
  for (const char* f : {"metrics.csv", "metrics.json", "predictions.csv", "roc.csv"})
    CHECK(fs::exists(dir / "eval" / f));
  CHECK(slurp(dir / "eval" / "roc.csv").rfind("fpr,tpr\n0.000000,0.000000\n", 0) == 0);

  // Same steps in-process.
  const auto plan = io::read_json(dir / "cfg.json");
  std::vector<ScenarioRun> runs;
  for (int r = 0; r < 2; ++r) {
    ScenarioRun run;
    run.scenario_id = r;
    json scen = plan;
    scen.erase("runs");
    run.config = io::scenario_from_json(scen);
    run.config.rng_seed = derive_seed(1, StreamPurpose::kRun, {300, static_cast<std::uint64_t>(r)});
    runs.push_back(run);
  }
  const auto ds = build_dataset(runs, {});
  CHECK(io::dataset_csv(ds) == slurp(ds_path));
  const auto fused = train_forest(ds.samples, {});
  CHECK(fused.serialize() == model_text);
  const auto ev = evaluate(fused, ds);
  CHECK(io::metrics_csv(ev.report) == slurp(dir / "eval" / "metrics.csv"));
}

TEST_CASE("cli: single tree, no-sort and custom model path") {
  const auto dir = scratch("single");
  write_json(dir / "cfg.json", small_config());
  REQUIRE(run("simulate --config " + (dir / "cfg.json").string() + " --out " +
                  (dir / "sim").string(), dir).code == 0);
  const auto ds = (dir / "sim" / "dataset.csv").string();
  REQUIRE(run("train --dataset " + ds + " --trees 1 --no-sort --model " +
                  (dir / "m1.json").string() + " --out " + (dir / "t").string(), dir).code == 0);
  const auto m = ForestModel::deserialize(slurp(dir / "m1.json"));
  CHECK(m.num_trees() == 1);
  CHECK_FALSE(m.sort_enabled());
  CHECK(run("eval --model " + (dir / "m1.json").string() + " --dataset " + ds + " --out " +
                (dir / "e").string(), dir).code == 0);
}

TEST_CASE("cli: perfect synthetic dataset evaluates to accuracy 1") {
  const auto dir = scratch("perfect");
  std::string csv = "f1,f2,label\n";
  for (int i = 0; i < 20; ++i) csv += i % 2 ? "0.01,0.02,1\n" : "0.5,0.6,0\n";
  io::write_text(dir / "ds.csv", csv);
  REQUIRE(run("train --dataset " + (dir / "ds.csv").string() + " --out " + (dir / "t").string(),
              dir).code == 0);
  REQUIRE(run("eval --model " + (dir / "t" / "model.json").string() + " --dataset " +
                  (dir / "ds.csv").string() + " --out " + (dir / "e").string(), dir).code == 0);
  const auto metrics = io::read_json(dir / "e" / "metrics.json");
  CHECK(metrics["accuracy"] == 1.0);
  CHECK(metrics["auroc"] == 1.0);
}

TEST_CASE("cli: train rejects single-class data, eval names mismatched widths") {
  const auto dir = scratch("errors");
  io::write_text(dir / "one.csv", "f1,label\n0.1,1\n0.2,1\n");
  auto o = run("train --dataset " + (dir / "one.csv").string() + " --out " + (dir / "t").string(),
               dir);
  CHECK(o.code != 0);
  CHECK(o.err.find("both classes") != std::string::npos);

  io::write_text(dir / "two.csv", "f1,f2,label\n0.1,0.2,1\n0.5,0.6,0\n");
  io::write_text(dir / "three.csv", "f1,f2,f3,label\n0.1,0.2,0.3,1\n0.5,0.6,0.7,0\n");
  REQUIRE(run("train --dataset " + (dir / "two.csv").string() + " --out " + (dir / "t").string(),
              dir).code == 0);
  o = run("eval --model " + (dir / "t" / "model.json").string() + " --dataset " +
              (dir / "three.csv").string() + " --out " + (dir / "e").string(), dir);
  CHECK(o.code != 0);
  CHECK(o.err.find("2") != std::string::npos);
  CHECK(o.err.find("3") != std::string::npos);
}

TEST_CASE("cli: sweep writes one row per grid cell") {
  const auto dir = scratch("sweep");
  write_json(dir / "spec.json", {{"kind", "trees"},
                                 {"scenario", {{"num_slots", 20}}},
                                 {"pipeline", {{"profile_length", 5}}},
                                 {"runs_per_variant", 1},
                                 {"corpus_b_runs", 1},
                                 {"tree_counts", {5, 10, 15, 20, 25, 30, 35, 40, 45, 50}}});
  REQUIRE(run("sweep --sweep-spec " + (dir / "spec.json").string() + " --out " +
                  (dir / "o").string(), dir).code == 0);
  const auto csv = slurp(dir / "o" / "results.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);
  CHECK(csv.rfind("H,sort,accuracy,tpr,fpr,auroc\n", 0) == 0);
  CHECK(io::read_json(dir / "o" / "results.json")["rows"].size() == 20);
  CHECK(fs::exists(dir / "o" / "roc.csv"));
}

TEST_CASE("cli: replay reproduces every output byte for byte") {
  const auto dir = scratch("replay");
  write_json(dir / "cfg.json", small_config());
  REQUIRE(run("simulate --config " + (dir / "cfg.json").string() + " --seed 9 --out " +
                  (dir / "sim").string(), dir).code == 0);
  REQUIRE(run("train --dataset " + (dir / "sim" / "dataset.csv").string() + " --seed 2 --out " +
                  (dir / "train").string(), dir).code == 0);
  REQUIRE(run("eval --model " + (dir / "train" / "model.json").string() + " --dataset " +
                  (dir / "sim" / "dataset.csv").string() + " --out " + (dir / "eval").string(),
              dir).code == 0);
  for (const char* stage : {"sim", "train", "eval"}) {
    const fs::path original = dir / stage;
    const fs::path again = dir / (std::string(stage) + "_replay");
    REQUIRE(run("replay --manifest " + (original / "manifest.json").string() + " --out " +
                    again.string(), dir).code == 0);
    for (const auto& entry : fs::directory_iterator(original)) {
      if (entry.path().filename() == "manifest.json") continue;
      CHECK_MESSAGE(slurp(entry.path()) == slurp(again / entry.path().filename()),
                    entry.path().string());
    }
  }
  // A changed input is detected instead of silently producing different bytes.
  io::write_text(dir / "sim" / "dataset.csv", "f1,label\n0.1,1\n0.2,0\n");
  CHECK(run("replay --manifest " + (dir / "train" / "manifest.json").string() + " --out " +
                (dir / "x").string(), dir).code != 0);
}
