#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "scatterid/eval.hpp"
#include "scatterid/scene.hpp"

namespace scatterid::io {

using Json = nlohmann::json;

/// Fields use the ScenarioConfig member names. An optional "preset"
/// ("office" or "rooftop") seeds the defaults; unknown keys are rejected.
ScenarioConfig scenario_from_json(const Json& j);
Json scenario_to_json(const ScenarioConfig& config);

PipelineConfig pipeline_from_json(const Json& j);
Json pipeline_to_json(const PipelineConfig& pipeline);

ForestOptions forest_from_json(const Json& j);
Json forest_to_json(const ForestOptions& forest);

Json metrics_to_json(const MetricsReport& report);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);

/// "%.17g": exact round trip.
std::string format_exact(double value);
/// "%.6f" for report tables.
std::string format_fixed(double value);

/// f_1..f_L,label; features at full precision.
std::string dataset_csv(const LabeledDataset& dataset);
LabeledDataset parse_dataset_csv(const std::string& text);

/// row,corpus,scenario,window,claimed_id
std::string provenance_csv(const LabeledDataset& dataset);

/// scenario,slot,id,p_1..p_K
std::string signatures_csv(std::span<const RunSignatures> runs);

/// scenario,window,id,l,value
std::string similarity_csv(const LabeledDataset& dataset);

/// accuracy,tpr,fpr,auroc,tp,fp,tn,fn
std::string metrics_csv(const MetricsReport& report);

/// fpr,tpr
std::string roc_csv(std::span<const RocPoint> roc);

/// index,label,prediction,score
std::string predictions_csv(const Evaluation& evaluation, std::span<const int> labels);

}  // namespace scatterid::io
