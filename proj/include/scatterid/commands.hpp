#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

namespace scatterid::cli {

namespace fs = std::filesystem;
using Json = nlohmann::json;

inline constexpr const char* kToolName = "scatterid";
inline constexpr const char* kToolVersion = "1.0.0";

/// Every command writes `manifest.json` into its output directory and
/// returns the same document. Paths inside are absolute.
struct SimulateArgs {
  fs::path config;
  std::optional<std::uint64_t> seed;  // falls back to the config's rng_seed
  fs::path out;
  bool dump_traces = false;
};

struct TrainArgs {
  fs::path dataset;
  std::optional<fs::path> config;  // forest options
  std::optional<fs::path> model;   // defaults to <out>/model.json
  fs::path out;
  std::uint64_t seed = 0;
  std::optional<std::size_t> trees;
  bool no_sort = false;
};

struct EvalArgs {
  fs::path model;
  fs::path dataset;
  fs::path out;
};

struct SweepArgs {
  fs::path sweep_spec;
  std::uint64_t seed = 0;
  fs::path out;
};

struct ReplayArgs {
  fs::path manifest;
  std::optional<fs::path> out;  // defaults to the recorded output directory
};

Json cmd_simulate(const SimulateArgs& args, std::ostream& log);
Json cmd_train(const TrainArgs& args, std::ostream& log);
Json cmd_eval(const EvalArgs& args, std::ostream& log);
Json cmd_sweep(const SweepArgs& args, std::ostream& log);
Json cmd_replay(const ReplayArgs& args, std::ostream& log);


/// FNV-1a over file bytes, hex encoded; recorded for file inputs so a
/// replay can detect that an input changed.
std::string file_digest(const fs::path& path);

}  // namespace scatterid::cli
