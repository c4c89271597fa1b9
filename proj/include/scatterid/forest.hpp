#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scatterid/rng.hpp"

namespace scatterid {

/// One similarity vector with its ground truth (1 = fake, 0 = legitimate).
struct LabeledSample {
  std::vector<double> features;
  int label = 0;
};

/// Ascending copy of the input.
std::vector<double> sort_vector(std::span<const double> values);

/// z = max(1, floor(log2 L)).
std::size_t features_per_split(std::size_t feature_length);

/// M indices drawn uniformly with replacement from [0, M).
std::vector<std::size_t> bootstrap_indices(std::size_t size, Rng& rng);

std::vector<LabeledSample> bootstrap_sample(std::span<const LabeledSample> dataset, Rng& rng);

/// Gini impurity 1 - sum_c p_c^2 from class counts.
double gini(std::size_t negatives, std::size_t positives);

/// Minimum impurity decrease a split must achieve to be taken.
inline constexpr double kMinImpurityDecrease = 1e-12;

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // feature value <= threshold
  int right = -1;
  int label = 0;
  std::array<std::size_t, 2> counts{0, 0};  // training (negatives, positives)
  bool is_leaf() const { return feature < 0; }
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes);

  /// A tree that always answers `label`.
  static DecisionTree constant(int label);

  int predict(std::span<const double> features) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

 private:
  std::vector<TreeNode> nodes_;  // nodes_[0] is the root
};

struct TreeOptions {
  std::size_t features_per_split = 1;
  std::size_t max_depth = 0;      // 0: unlimited
  std::size_t min_node_size = 1;  // nodes smaller than this become leaves
};

/// Unpruned CART tree with Gini splits. Each node draws a fresh subset of
/// `features_per_split` features without replacement; thresholds are
/// midpoints of consecutive distinct values. Leaf ties go to label 1.
DecisionTree train_tree(std::span<const LabeledSample> subset, const TreeOptions& options,
                        Rng& rng);

struct ForestOptions {
  std::size_t num_trees = 30;
  bool sort_enabled = true;
  std::uint64_t seed = 0;
  std::size_t max_depth = 0;
  std::size_t min_node_size = 1;
};

class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(std::vector<DecisionTree> trees, std::size_t features_per_split,
              std::size_t feature_length, bool sort_enabled);

  /// Fraction of trees voting fake.
  double predict_score(std::span<const double> features) const;
  /// 1 iff the vote fraction is >= 0.5.
  int predict(std::span<const double> features) const;
  /// Individual tree votes after the optional sort.
  std::vector<int> votes(std::span<const double> features) const;

  const std::vector<DecisionTree>& trees() const { return trees_; }
  std::size_t num_trees() const { return trees_.size(); }
  std::size_t features_per_split() const { return z_; }
  std::size_t feature_length() const { return length_; }
  bool sort_enabled() const { return sort_enabled_; }

  /// Text model file: JSON with H, z, L, sort_enabled and nested trees.
  std::string serialize() const;
  static ForestModel deserialize(const std::string& text);

 private:
  std::vector<double> prepare(std::span<const double> features) const;

  std::vector<DecisionTree> trees_;
  std::size_t z_ = 1;
  std::size_t length_ = 0;
  bool sort_enabled_ = true;
};

/// Sorts features when requested, then trains H trees on independent
/// bootstrap resamples. Tree h draws from the stream keyed (seed, h).
ForestModel train_forest(std::span<const LabeledSample> dataset, const ForestOptions& options);

}  // namespace scatterid
