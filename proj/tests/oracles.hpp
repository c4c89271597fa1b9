// Independent brute-force reference implementations for the test suites.
// Nothing here calls into the library beyond its plain data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "scatterid/bit_template.hpp"
#include "scatterid/forest.hpp"
#include "scatterid/similarity.hpp"

namespace oracle {

inline std::vector<double> naive_moving_average(const std::vector<double>& s, std::size_t w) {
  std::vector<double> out;
  for (std::size_t n = 0; n + w <= s.size(); ++n) {
    long double acc = 0.0L;
    for (std::size_t t = 0; t < w; ++t) acc += s[n + t];
    out.push_back(static_cast<double>(acc / static_cast<long double>(w)));
  }
  return out;
}

/// argmax_n sum_t s(n+t) i(t), first index on ties, by direct O(N*T) loop.
inline std::size_t naive_template_argmax(const std::vector<double>& s,
                                         const scatterid::BitTemplate& tmpl) {
  const std::size_t length = tmpl.bits.size() * tmpl.samples_per_bit;
  std::size_t best_n = 0;
  long double best = -std::numeric_limits<long double>::infinity();
  for (std::size_t n = 0; n + length <= s.size(); ++n) {
    long double acc = 0.0L;
    for (std::size_t t = 0; t < length; ++t) {
      const bool on = tmpl.bits[t / tmpl.samples_per_bit] != 0;
      acc += on ? static_cast<long double>(s[n + t]) : 0.0L;
    }
    if (acc > best) {
      best = acc;
      best_n = n;
    }
  }
  return best_n;
}

/// Per-slot minimum over every other row of the tensor column.
inline std::vector<double> brute_column_min(const scatterid::DistanceTensor& t, std::size_t n) {
  std::vector<double> out;
  for (std::size_t l = 0; l < t.length(); ++l) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i == n) continue;
      if (t.at(i, n, l) < best) best = t.at(i, n, l);
    }
    out.push_back(best);
  }
  return out;
}

/// Fraction of (positive, negative) pairs ranked correctly, ties count half.
inline double mann_whitney(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

/// Exhaustive greedy CART: every feature, every midpoint, weighted child
/// Gini; splits only on a strict impurity decrease; ties at leaves go to 1.
class CartOracle {
 public:
  explicit CartOracle(const std::vector<scatterid::LabeledSample>& data) : data_(data) {
    std::vector<std::size_t> all(data.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    root_ = grow(all);
  }

  int predict(const std::vector<double>& x) const {
    int i = root_;
    while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
      const Node& nd = nodes_[static_cast<std::size_t>(i)];
      i = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes_[static_cast<std::size_t>(i)].label;
  }

  double training_accuracy() const {
    std::size_t ok = 0;
    for (const auto& s : data_) ok += predict(s.features) == s.label;
    return static_cast<double>(ok) / static_cast<double>(data_.size());
  }

 private:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;
  };

  static double impurity(double pos, double total) {
    if (total == 0.0) return 0.0;
    const double p = pos / total;
    return 2.0 * p * (1.0 - p);
  }

  int grow(const std::vector<std::size_t>& idx) {
    double pos = 0.0;
    for (auto i : idx) pos += data_[i].label;
    const double total = static_cast<double>(idx.size());
    const double parent = impurity(pos, total);
    Node leaf;
    leaf.label = 2.0 * pos >= total ? 1 : 0;

    double best = parent - 1e-12;
    int best_f = -1;
    double best_thr = 0.0;
    const std::size_t length = data_[idx[0]].features.size();
    for (std::size_t f = 0; f < length; ++f) {
      std::vector<double> values;
      for (auto i : idx) values.push_back(data_[i].features[f]);
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      for (std::size_t v = 0; v + 1 < values.size(); ++v) {
        const double thr = values[v] + (values[v + 1] - values[v]) / 2.0;
        double lp = 0, lt = 0, rp = 0, rt = 0;
        for (auto i : idx) {
          if (data_[i].features[f] <= thr) {
            lt += 1;
            lp += data_[i].label;
          } else {
            rt += 1;
            rp += data_[i].label;
          }
        }
        const double child = (lt * impurity(lp, lt) + rt * impurity(rp, rt)) / total;
        if (child < best) {
          best = child;
          best_f = static_cast<int>(f);
          best_thr = thr;
        }
      }
    }
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(leaf);
    if (best_f < 0) return self;
    std::vector<std::size_t> l, r;
    for (auto i : idx) {
      (data_[i].features[static_cast<std::size_t>(best_f)] <= best_thr ? l : r).push_back(i);
    }
    const int li = grow(l);
    const int ri = grow(r);
    Node& me = nodes_[static_cast<std::size_t>(self)];
    me.feature = best_f;
    me.threshold = best_thr;
    me.left = li;
    me.right = ri;
    return self;
  }

  const std::vector<scatterid::LabeledSample>& data_;
  std::vector<Node> nodes_;
  int root_ = 0;
};

/// Walks each tree's node table by hand and counts fake votes.
inline int vote_oracle(const scatterid::ForestModel& model, std::vector<double> x) {
  if (model.sort_enabled()) std::sort(x.begin(), x.end());
  std::size_t fake = 0;
  for (const auto& tree : model.trees()) {
    const auto& nodes = tree.nodes();
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <=
                                           nodes[i].threshold
                                       ? nodes[i].left
                                       : nodes[i].right);
    }
    fake += nodes[i].label == 1;
  }
  return 2 * fake >= model.num_trees() ? 1 : 0;
}

}  // namespace oracle
