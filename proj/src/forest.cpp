#include "scatterid/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "json.hpp"

namespace scatterid {

namespace {

using Json = nlohmann::json;

constexpr const char* kModelFormat = "scatterid-forest";
constexpr int kModelVersion = 1;

class TreeBuilder {
 public:
  TreeBuilder(std::span<const LabeledSample> data, const TreeOptions& options, Rng& rng)
      : data_(data), options_(options), rng_(rng) {
    length_ = data.front().features.size();
    feature_pool_.resize(length_);
  }

  std::vector<TreeNode> build() {
    std::vector<std::size_t> rows(data_.size());
    std::iota(rows.begin(), rows.end(), 0);
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  int grow(std::vector<std::size_t>& rows, std::size_t depth) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::array<std::size_t, 2> counts{0, 0};
    for (std::size_t r : rows) ++counts[data_[r].label == 1 ? 1 : 0];
    nodes_[index].counts = counts;
    nodes_[index].label = counts[1] >= counts[0] ? 1 : 0;

    const bool pure = counts[0] == 0 || counts[1] == 0;
    const bool depth_capped = options_.max_depth > 0 && depth >= options_.max_depth;
    if (pure || depth_capped || rows.size() < std::max<std::size_t>(2, options_.min_node_size))
      return index;

    const double parent = gini(counts[0], counts[1]);
    const Split split = best_split(rows, counts);
    if (split.feature < 0 || !(split.impurity < parent - kMinImpurityDecrease)) return index;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) {
      if (data_[r].features[static_cast<std::size_t>(split.feature)] <= split.threshold) {
        left.push_back(r);
      } else {
        right.push_back(r);
      }
    }
    rows.clear();
    rows.shrink_to_fit();

    nodes_[index].feature = split.feature;
    nodes_[index].threshold = split.threshold;
    const int l = grow(left, depth + 1);
    nodes_[index].left = l;
    const int r = grow(right, depth + 1);
    nodes_[index].right = r;
    return index;
  }

  Split best_split(const std::vector<std::size_t>& rows, std::array<std::size_t, 2> counts) {
    // Partial Fisher-Yates: the first z entries are this node's features.
    std::iota(feature_pool_.begin(), feature_pool_.end(), 0);
    const std::size_t z = std::min(options_.features_per_split, length_);
    for (std::size_t i = 0; i < z; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, length_ - 1);
      std::swap(feature_pool_[i], feature_pool_[pick(rng_)]);
    }

    Split best;
    best.impurity = std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(rows.size());
    std::vector<std::pair<double, int>> column(rows.size());
    for (std::size_t k = 0; k < z; ++k) {
      const std::size_t f = feature_pool_[k];
      for (std::size_t i = 0; i < rows.size(); ++i)
        column[i] = {data_[rows[i]].features[f], data_[rows[i]].label == 1 ? 1 : 0};
      std::sort(column.begin(), column.end());

      std::array<std::size_t, 2> left{0, 0};
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        ++left[static_cast<std::size_t>(column[i].second)];
        const double a = column[i].first;
        const double b = column[i + 1].first;
        if (!(a < b)) continue;
        const std::size_t nl = left[0] + left[1];
        const std::size_t nr = rows.size() - nl;
        const double impurity = (static_cast<double>(nl) * gini(left[0], left[1]) +
                                 static_cast<double>(nr) *
                                     gini(counts[0] - left[0], counts[1] - left[1])) /
                                n;
        if (impurity < best.impurity) {
          double t = a + (b - a) / 2.0;
          if (!(t < b)) t = a;
          best = {static_cast<int>(f), t, impurity};
        }
      }
    }
    return best;
  }

  std::span<const LabeledSample> data_;
  const TreeOptions& options_;
  Rng& rng_;
  std::size_t length_ = 0;
  std::vector<std::size_t> feature_pool_;
  std::vector<TreeNode> nodes_;
};

Json node_to_json(const std::vector<TreeNode>& nodes, int index) {
  const TreeNode& node = nodes[static_cast<std::size_t>(index)];
  Json j;
  j["counts"] = {node.counts[0], node.counts[1]};
  if (node.is_leaf()) {
    j["label"] = node.label;
    return j;
  }
  j["feature"] = node.feature;
  j["threshold"] = node.threshold;
  j["label"] = node.label;
  j["left"] = node_to_json(nodes, node.left);
  j["right"] = node_to_json(nodes, node.right);
  return j;
}

int node_from_json(const Json& j, std::vector<TreeNode>& nodes, std::size_t feature_length) {
  const int index = static_cast<int>(nodes.size());
  nodes.emplace_back();
  TreeNode node;
  node.counts = {j.at("counts").at(0).get<std::size_t>(), j.at("counts").at(1).get<std::size_t>()};
  node.label = j.at("label").get<int>();
  if (node.label != 0 && node.label != 1) throw std::runtime_error("model: leaf label not 0/1");
  if (j.contains("feature")) {
    node.feature = j.at("feature").get<int>();
    if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= feature_length)
      throw std::runtime_error("model: split feature index out of range");
    node.threshold = j.at("threshold").get<double>();
    node.left = node_from_json(j.at("left"), nodes, feature_length);
    node.right = node_from_json(j.at("right"), nodes, feature_length);
  }
  nodes[static_cast<std::size_t>(index)] = node;
  return index;
}

}  // namespace

std::vector<double> sort_vector(std::span<const double> values) {
  std::vector<double> out(values.begin(), values.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t features_per_split(std::size_t feature_length) {
  if (feature_length == 0) throw std::invalid_argument("feature length must be >= 1");
  std::size_t z = 0;
  while ((std::size_t{2} << z) <= feature_length) ++z;  // floor(log2 L)
  return std::max<std::size_t>(1, z);
}

std::vector<std::size_t> bootstrap_indices(std::size_t size, Rng& rng) {
  if (size == 0) throw std::invalid_argument("cannot bootstrap an empty dataset");
  std::uniform_int_distribution<std::size_t> pick(0, size - 1);
  std::vector<std::size_t> out(size);
  for (auto& i : out) i = pick(rng);
  return out;
}

std::vector<LabeledSample> bootstrap_sample(std::span<const LabeledSample> dataset, Rng& rng) {
  const auto idx = bootstrap_indices(dataset.size(), rng);
  std::vector<LabeledSample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(dataset[i]);
  return out;
}

double gini(std::size_t negatives, std::size_t positives) {
  const double n = static_cast<double>(negatives + positives);
  if (n == 0.0) return 0.0;
  const double p0 = static_cast<double>(negatives) / n;
  const double p1 = static_cast<double>(positives) / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw std::invalid_argument("decision tree needs a root");
}

DecisionTree DecisionTree::constant(int label) {
  TreeNode leaf;
  leaf.label = label;
  return DecisionTree({leaf});
}

int DecisionTree::predict(std::span<const double> features) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const TreeNode& node = nodes_[i];
    i = static_cast<std::size_t>(
        features[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                             : node.right);
  }
  return nodes_[i].label;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes_[i].is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].right), d + 1);
    }
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

DecisionTree train_tree(std::span<const LabeledSample> subset, const TreeOptions& options,
                        Rng& rng) {
  if (subset.empty()) throw std::invalid_argument("cannot train a tree on an empty subset");
  const std::size_t length = subset.front().features.size();
  if (length == 0) throw std::invalid_argument("samples need at least one feature");
  for (const auto& s : subset) {
    if (s.features.size() != length)
      throw std::invalid_argument("samples disagree on feature length");
  }
  if (options.features_per_split < 1 || options.features_per_split > length)
    throw std::invalid_argument("features_per_split must lie in [1, L]");
  TreeBuilder builder(subset, options, rng);
  return DecisionTree(builder.build());
}

ForestModel::ForestModel(std::vector<DecisionTree> trees, std::size_t features_per_split,
                         std::size_t feature_length, bool sort_enabled)
    : trees_(std::move(trees)),
      z_(features_per_split),
      length_(feature_length),
      sort_enabled_(sort_enabled) {
  if (trees_.empty()) throw std::invalid_argument("forest needs at least one tree");
  if (z_ < 1 || z_ > length_) throw std::invalid_argument("forest needs 1 <= z <= L");
}

std::vector<double> ForestModel::prepare(std::span<const double> features) const {
  if (features.size() != length_)
    throw std::invalid_argument("feature length " + std::to_string(features.size()) +
                                " does not match model length " + std::to_string(length_));
  if (sort_enabled_) return sort_vector(features);
  return {features.begin(), features.end()};
}

std::vector<int> ForestModel::votes(std::span<const double> features) const {
  const auto x = prepare(features);
  std::vector<int> out;
  out.reserve(trees_.size());
  for (const auto& tree : trees_) out.push_back(tree.predict(x));
  return out;
}

double ForestModel::predict_score(std::span<const double> features) const {
  const auto v = votes(features);
  const auto fakes = std::count(v.begin(), v.end(), 1);
  return static_cast<double>(fakes) / static_cast<double>(v.size());
}

int ForestModel::predict(std::span<const double> features) const {
  return predict_score(features) >= 0.5 ? 1 : 0;
}

std::string ForestModel::serialize() const {
  Json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["num_trees"] = trees_.size();
  j["features_per_split"] = z_;
  j["feature_length"] = length_;
  j["sort_enabled"] = sort_enabled_;
  Json trees = Json::array();
  for (const auto& tree : trees_) trees.push_back(node_to_json(tree.nodes(), 0));
  j["trees"] = std::move(trees);
  return j.dump() + "\n";
}

ForestModel ForestModel::deserialize(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(std::string("model: malformed file: ") + e.what());
  }
  if (j.value("format", "") != kModelFormat) throw std::runtime_error("model: unknown format");
  if (j.value("version", 0) != kModelVersion)
    throw std::runtime_error("model: unsupported version");
  const auto length = j.at("feature_length").get<std::size_t>();
  std::vector<DecisionTree> trees;
  for (const auto& t : j.at("trees")) {
    std::vector<TreeNode> nodes;
    node_from_json(t, nodes, length);
    trees.emplace_back(std::move(nodes));
  }
  if (trees.size() != j.at("num_trees").get<std::size_t>())
    throw std::runtime_error("model: tree count does not match num_trees");
  return ForestModel(std::move(trees), j.at("features_per_split").get<std::size_t>(), length,
                     j.at("sort_enabled").get<bool>());
}

ForestModel train_forest(std::span<const LabeledSample> dataset, const ForestOptions& options) {
  if (dataset.empty()) throw std::invalid_argument("cannot train a forest on an empty dataset");
  if (options.num_trees < 1) throw std::invalid_argument("forest needs H >= 1 trees");
  const std::size_t length = dataset.front().features.size();

  std::vector<LabeledSample> prepared(dataset.begin(), dataset.end());
  if (options.sort_enabled) {
    for (auto& s : prepared) s.features = sort_vector(s.features);
  }

  TreeOptions tree_options;
  tree_options.features_per_split = features_per_split(length);
  tree_options.max_depth = options.max_depth;
  tree_options.min_node_size = options.min_node_size;

  std::vector<DecisionTree> trees;
  trees.reserve(options.num_trees);
  for (std::size_t h = 0; h < options.num_trees; ++h) {
    Rng rng = make_stream(options.seed, StreamPurpose::kTree, {h});
    const auto resample = bootstrap_sample(prepared, rng);
    trees.push_back(train_tree(resample, tree_options, rng));
  }
  return ForestModel(std::move(trees), tree_options.features_per_split, length,
                     options.sort_enabled);
}

}  // namespace scatterid
