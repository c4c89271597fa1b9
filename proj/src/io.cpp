#include "scatterid/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace scatterid::io {

namespace {

template <typename T>
void read_field(const Json& j, const char* name, T& target) {
  const auto it = j.find(name);
  if (it == j.end()) return;
  try {
    target = it->template get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(name, std::string("wrong type: ") + e.what());
  }
}

void reject_unknown(const Json& j, const std::set<std::string>& known, const char* what) {
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(key, std::string("unknown ") + what + " field");
  }
}

Point2 point_from_json(const Json& j, const char* field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(field, "expected a [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& text, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("dataset line " + std::to_string(line) + ": bad number '" + text +
                             "'");
  }
}

}  // namespace

ScenarioConfig scenario_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "scenario config must be a JSON object");
  static const std::set<std::string> known = {
      "preset",           "arena_width",     "arena_height",         "num_legit",
      "num_attackers",    "num_fake_ids",    "attack_mode",          "robot_speed",
      "slot_interval",    "num_slots",       "num_tags",             "tag_offsets",
      "tag_gain",         "noise_sigma",     "power_scale_set",      "rng_seed",
      "receiver_position", "tag_ring_radius", "receiver_keepout",    "min_start_separation",
      "direct_amplitude", "multipath_jitter", "multipath_wavelength", "samples_per_bit",
      "bits_per_tag",     "min_padding",     "max_padding"};
  reject_unknown(j, known, "scenario");

  ScenarioConfig c;
  if (j.contains("preset")) {
    const std::string preset = j.at("preset").is_string() ? j.at("preset").get<std::string>() : "";
    if (preset == "office") {
      c = office_preset();
    } else if (preset == "rooftop") {
      c = rooftop_preset();
    } else {
      throw ConfigError("preset", "expected \"office\" or \"rooftop\"");
    }
  }
  read_field(j, "arena_width", c.arena_width);
  read_field(j, "arena_height", c.arena_height);
  read_field(j, "num_legit", c.num_legit);
  read_field(j, "num_attackers", c.num_attackers);
  read_field(j, "num_fake_ids", c.num_fake_ids);
  if (j.contains("attack_mode")) {
    if (!j.at("attack_mode").is_string()) throw ConfigError("attack_mode", "expected a string");
    c.attack_mode = parse_attack_mode(j.at("attack_mode").get<std::string>());
  }
  read_field(j, "robot_speed", c.robot_speed);
  read_field(j, "slot_interval", c.slot_interval);
  read_field(j, "num_slots", c.num_slots);
  read_field(j, "num_tags", c.num_tags);
  if (j.contains("tag_offsets")) {
    const auto& arr = j.at("tag_offsets");
    if (!arr.is_array()) throw ConfigError("tag_offsets", "expected a list of [x, y] pairs");
    c.tag_offsets.clear();
    for (const auto& p : arr) c.tag_offsets.push_back(point_from_json(p, "tag_offsets"));
  }
  read_field(j, "tag_gain", c.tag_gain);
  read_field(j, "noise_sigma", c.noise_sigma);
  read_field(j, "power_scale_set", c.power_scale_set);
  read_field(j, "rng_seed", c.rng_seed);
  if (j.contains("receiver_position"))
    c.receiver_position = point_from_json(j.at("receiver_position"), "receiver_position");
  read_field(j, "tag_ring_radius", c.tag_ring_radius);
  read_field(j, "receiver_keepout", c.receiver_keepout);
  read_field(j, "min_start_separation", c.min_start_separation);
  read_field(j, "direct_amplitude", c.direct_amplitude);
  read_field(j, "multipath_jitter", c.multipath_jitter);
  read_field(j, "multipath_wavelength", c.multipath_wavelength);
  read_field(j, "samples_per_bit", c.samples_per_bit);
  read_field(j, "bits_per_tag", c.bits_per_tag);
  read_field(j, "min_padding", c.min_padding);
  read_field(j, "max_padding", c.max_padding);
  c.validate();
  return c;
}

Json scenario_to_json(const ScenarioConfig& c) {
  Json j;
  j["arena_width"] = c.arena_width;
  j["arena_height"] = c.arena_height;
  j["num_legit"] = c.num_legit;
  j["num_attackers"] = c.num_attackers;
  j["num_fake_ids"] = c.num_fake_ids;
  j["attack_mode"] = std::string(to_string(c.attack_mode));
  j["robot_speed"] = c.robot_speed;
  j["slot_interval"] = c.slot_interval;
  j["num_slots"] = c.num_slots;
  j["num_tags"] = c.num_tags;
  Json offsets = Json::array();
  for (Point2 p : c.effective_tag_offsets()) offsets.push_back({p.x, p.y});
  j["tag_offsets"] = offsets;
  j["tag_gain"] = c.tag_gain;
  j["noise_sigma"] = c.noise_sigma;
  j["power_scale_set"] = c.power_scale_set;
  j["rng_seed"] = c.rng_seed;
  const Point2 rx = c.receiver();
  j["receiver_position"] = {rx.x, rx.y};
  j["tag_ring_radius"] = c.tag_ring_radius;
  j["receiver_keepout"] = c.receiver_keepout;
  j["min_start_separation"] = c.min_start_separation;
  j["direct_amplitude"] = c.direct_amplitude;
  j["multipath_jitter"] = c.multipath_jitter;
  j["multipath_wavelength"] = c.multipath_wavelength;
  j["samples_per_bit"] = c.samples_per_bit;
  j["bits_per_tag"] = c.bits_per_tag;
  j["min_padding"] = c.min_padding;
  j["max_padding"] = c.max_padding;
  return j;
}

PipelineConfig pipeline_from_json(const Json& j) {
  reject_unknown(j, {"profile_length", "metric", "reduction", "smoothing_window"}, "pipeline");
  PipelineConfig p;
  read_field(j, "profile_length", p.profile_length);
  read_field(j, "smoothing_window", p.smoothing_window);
  if (j.contains("metric")) {
    try {
      p.metric = parse_metric(j.at("metric").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError("metric", e.what());
    }
  }
  if (j.contains("reduction")) {
    try {
      p.reduction = parse_peer_reduction(j.at("reduction").get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError("reduction", e.what());
    }
  }
  if (p.profile_length < 1) throw ConfigError("profile_length", "must be at least 1");
  return p;
}

Json pipeline_to_json(const PipelineConfig& p) {
  return {{"profile_length", p.profile_length},
          {"metric", std::string(to_string(p.metric))},
          {"reduction", std::string(to_string(p.reduction))},
          {"smoothing_window", p.smoothing_window}};
}

ForestOptions forest_from_json(const Json& j) {
  reject_unknown(j, {"num_trees", "sort_enabled", "seed", "max_depth", "min_node_size"}, "forest");
  ForestOptions f;
  read_field(j, "num_trees", f.num_trees);
  read_field(j, "sort_enabled", f.sort_enabled);
  read_field(j, "seed", f.seed);
  read_field(j, "max_depth", f.max_depth);
  read_field(j, "min_node_size", f.min_node_size);
  if (f.num_trees < 1) throw ConfigError("num_trees", "must be at least 1");
  return f;
}

Json forest_to_json(const ForestOptions& f) {
  return {{"num_trees", f.num_trees},
          {"sort_enabled", f.sort_enabled},
          {"seed", f.seed},
          {"max_depth", f.max_depth},
          {"min_node_size", f.min_node_size}};
}

Json metrics_to_json(const MetricsReport& r) {
  Json j;
  j["accuracy"] = r.accuracy;
  j["tpr"] = r.tpr;
  j["fpr"] = r.fpr;
  j["auroc"] = r.auroc ? Json(*r.auroc) : Json(nullptr);
  j["true_positives"] = r.true_positives;
  j["false_positives"] = r.false_positives;
  j["true_negatives"] = r.true_negatives;
  j["false_negatives"] = r.false_negatives;
  Json roc = Json::array();
  for (const auto& p : r.roc) roc.push_back({p.fpr, p.tpr});
  j["roc"] = roc;
  return j;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string(), std::string("malformed JSON: ") + e.what());
  }
}

std::string format_exact(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_fixed(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string dataset_csv(const LabeledDataset& dataset) {
  std::string out;
  const std::size_t length = dataset.feature_length();
  for (std::size_t l = 0; l < length; ++l) out += "f" + std::to_string(l + 1) + ",";
  out += "label\n";
  for (const auto& s : dataset.samples) {
    for (double v : s.features) out += format_exact(v) + ",";
    out += std::to_string(s.label) + "\n";
  }
  return out;
}

LabeledDataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset is empty");
  const auto header = split(line, ',');
  if (header.size() < 2 || header.back() != "label")
    throw std::runtime_error("dataset header must end with a 'label' column");
  const std::size_t length = header.size() - 1;
  LabeledDataset ds;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != length + 1)
      throw std::runtime_error("dataset line " + std::to_string(number) + ": expected " +
                               std::to_string(length + 1) + " columns, got " +
                               std::to_string(cells.size()));
    LabeledSample s;
    for (std::size_t l = 0; l < length; ++l) s.features.push_back(parse_double(cells[l], number));
    if (cells.back() != "0" && cells.back() != "1")
      throw std::runtime_error("dataset line " + std::to_string(number) + ": label must be 0 or 1");
    s.label = cells.back() == "1" ? 1 : 0;
    ds.samples.push_back(std::move(s));
    ds.provenance.push_back({});
  }
  return ds;
}

std::string provenance_csv(const LabeledDataset& dataset) {
  std::string out = "row,corpus,scenario,window,claimed_id\n";
  for (std::size_t i = 0; i < dataset.provenance.size(); ++i) {
    const auto& p = dataset.provenance[i];
    out += std::to_string(i) + "," + std::string(to_string(p.corpus)) + "," +
           std::to_string(p.scenario_id) + "," + std::to_string(p.window) + "," +
           std::to_string(p.claimed_id.value) + "\n";
  }
  return out;
}

std::string signatures_csv(std::span<const RunSignatures> runs) {
  std::size_t tags = 0;
  for (const auto& r : runs) {
    if (!r.records.empty()) {
      tags = r.records.front().signature.reflections.size();
      break;
    }
  }
  std::string out = "scenario,slot,id";
  for (std::size_t k = 0; k < tags; ++k) out += ",p_" + std::to_string(k + 1);
  out += "\n";
  for (const auto& r : runs) {
    for (const auto& rec : r.records) {
      out += std::to_string(r.run.scenario_id) + "," + std::to_string(rec.slot) + "," +
             std::to_string(rec.claimed_id.value);
      for (double p : rec.signature.reflections) out += "," + format_exact(p);
      out += "\n";
    }
  }
  return out;
}

std::string similarity_csv(const LabeledDataset& dataset) {
  std::string out = "scenario,window,id,l,value\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& p = dataset.provenance[i];
    const auto& f = dataset.samples[i].features;
    for (std::size_t l = 0; l < f.size(); ++l) {
      out += std::to_string(p.scenario_id) + "," + std::to_string(p.window) + "," +
             std::to_string(p.claimed_id.value) + "," + std::to_string(l + 1) + "," +
             format_exact(f[l]) + "\n";
    }
  }
  return out;
}

std::string metrics_csv(const MetricsReport& r) {
  return "accuracy,tpr,fpr,auroc,tp,fp,tn,fn\n" + format_fixed(r.accuracy) + "," +
         format_fixed(r.tpr) + "," + format_fixed(r.fpr) + "," +
         (r.auroc ? format_fixed(*r.auroc) : std::string("nan")) + "," +
         std::to_string(r.true_positives) + "," + std::to_string(r.false_positives) + "," +
         std::to_string(r.true_negatives) + "," + std::to_string(r.false_negatives) + "\n";
}

std::string roc_csv(std::span<const RocPoint> roc) {
  std::string out = "fpr,tpr\n";
  for (const auto& p : roc) out += format_fixed(p.fpr) + "," + format_fixed(p.tpr) + "\n";
  return out;
}

std::string predictions_csv(const Evaluation& evaluation, std::span<const int> labels) {
  std::string out = "index,label,prediction,score\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(labels[i]) + "," +
           std::to_string(evaluation.predictions[i]) + "," + format_fixed(evaluation.scores[i]) +
           "\n";
  }
  return out;
}

}  // namespace scatterid::io
