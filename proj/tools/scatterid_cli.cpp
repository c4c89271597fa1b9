#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "scatterid/commands.hpp"
#include "scatterid/scene.hpp"

namespace cli = scatterid::cli;

int main(int argc, char** argv) {
  CLI::App app{"Sybil detection from backscatter multipath signatures"};
  app.require_subcommand(1);

  cli::SimulateArgs sim;
  std::optional<std::uint64_t> sim_seed;
  auto* simulate = app.add_subcommand("simulate", "simulate scenarios and build a dataset");
  simulate->add_option("--config", sim.config, "scenario config (JSON)")->required();
  simulate->add_option("--seed", sim_seed, "master seed (default: the config's rng_seed)");
  simulate->add_option("--out", sim.out, "output directory")->required();
  simulate->add_flag("--dump-traces", sim.dump_traces, "also write raw sample traces");

  cli::TrainArgs train;
  std::optional<std::string> train_config, train_model;
  std::optional<std::size_t> trees;
  auto* train_cmd = app.add_subcommand("train", "train a forest on a dataset CSV");
  train_cmd->add_option("--dataset", train.dataset, "dataset CSV")->required();
  train_cmd->add_option("--config", train_config, "forest options (JSON)");
  train_cmd->add_option("--model", train_model, "model path (default: <out>/model.json)");
  train_cmd->add_option("--out", train.out, "output directory")->required();
  train_cmd->add_option("--seed", train.seed, "forest seed")->default_val(0);
  train_cmd->add_option("--trees", trees, "number of trees");
  train_cmd->add_flag("--no-sort", train.no_sort, "disable sorting of similarity vectors");

  cli::EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a dataset CSV");
  eval_cmd->add_option("--model", eval.model, "model file")->required();
  eval_cmd->add_option("--dataset", eval.dataset, "dataset CSV")->required();
  eval_cmd->add_option("--out", eval.out, "output directory")->required();

  cli::SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep");
  sweep_cmd->add_option("--sweep-spec", sweep.sweep_spec, "sweep spec (JSON)")->required();
  sweep_cmd->add_option("--seed", sweep.seed, "master seed")->default_val(0);
  sweep_cmd->add_option("--out", sweep.out, "output directory")->required();

  cli::ReplayArgs replay;
  std::optional<std::string> replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "re-run a command from its manifest");
  replay_cmd->add_option("--manifest", replay.manifest, "manifest.json")->required();
  replay_cmd->add_option("--out", replay_out, "output directory (default: as recorded)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      sim.seed = sim_seed;
      cli::cmd_simulate(sim, std::cout);
    } else if (train_cmd->parsed()) {
      if (train_config) train.config = *train_config;
      if (train_model) train.model = *train_model;
      train.trees = trees;
      cli::cmd_train(train, std::cout);
    } else if (eval_cmd->parsed()) {
      cli::cmd_eval(eval, std::cout);
    } else if (sweep_cmd->parsed()) {
      cli::cmd_sweep(sweep, std::cout);
    } else if (replay_cmd->parsed()) {
      if (replay_out) replay.out = *replay_out;
      cli::cmd_replay(replay, std::cout);
    }
  } catch (const scatterid::ConfigError& e) {
    std::cerr << "config error in field '" << e.field() << "': " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
