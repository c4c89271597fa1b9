#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "scatterid/forest.hpp"

using namespace scatterid;

namespace {

std::vector<LabeledSample> random_dataset(std::mt19937_64& rng, std::size_t m, std::size_t l) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<LabeledSample> out(m);
  for (auto& s : out) {
    s.features.resize(l);
    for (auto& v : s.features) v = u(rng);
    // Noisy but learnable: fakes tend to have a small first feature.
    s.label = (s.features[0] + 0.3 * u(rng)) < 0.5 ? 1 : 0;
  }
  return out;
}

ForestModel fixed_votes(std::vector<int> labels) {
  std::vector<DecisionTree> trees;
  for (int v : labels) trees.push_back(DecisionTree::constant(v));
  return ForestModel(std::move(trees), 1, 2, false);
}

}  // namespace

TEST_CASE("sort_vector") {
  CHECK(sort_vector(std::vector<double>{3, 1, 2}) == std::vector<double>{1, 2, 3});
  const std::vector<double> sorted{0.1, 0.2, 0.2, 0.9};
  CHECK(sort_vector(sorted) == sorted);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> v(1 + i % 17);
    for (auto& x : v) x = u(rng);
    auto s = sort_vector(v);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(std::is_permutation(s.begin(), s.end(), v.begin()));
  }
}

TEST_CASE("features per split") {
  CHECK(features_per_split(10) == 3);
  CHECK(features_per_split(1) == 1);
  CHECK(features_per_split(2) == 1);
  CHECK(features_per_split(16) == 4);
  CHECK(features_per_split(15) == 3);
}

TEST_CASE("bootstrap") {
  Rng a(5);
  std::vector<LabeledSample> one{{{0.5}, 1}};
  const auto single = bootstrap_sample(one, a);
  REQUIRE(single.size() == 1);
  CHECK(single[0].features == one[0].features);
  Rng c(6), d(6);
  CHECK(bootstrap_indices(100, c) == bootstrap_indices(100, d));
  CHECK_THROWS_AS(bootstrap_sample(std::vector<LabeledSample>{}, a), std::invalid_argument);

  Rng rng(17);
  double total = 0.0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    const auto idx = bootstrap_indices(1000, rng);
    CHECK(idx.size() == 1000);
    total += static_cast<double>(std::set<std::size_t>(idx.begin(), idx.end()).size()) / 1000.0;
  }
  CHECK(std::abs(total / trials - (1.0 - std::exp(-1.0))) < 0.02);
}

TEST_CASE("gini") {
  CHECK(gini(5, 0) == 0.0);
  CHECK(gini(0, 5) == 0.0);
  CHECK(gini(3, 3) == 0.5);
  CHECK(gini(1, 3) == doctest::Approx(0.375));
}

TEST_CASE("tree: separable pair and pure data") {
  Rng rng(1);
  const std::vector<LabeledSample> pair{{{0.1}, 1}, {{0.9}, 0}};
  const auto tree = train_tree(pair, {1, 0, 1}, rng);
  CHECK(tree.nodes().size() == 3);
  CHECK(tree.nodes()[0].threshold == 0.5);
  CHECK(tree.predict(std::vector<double>{0.1}) == 1);
  CHECK(tree.predict(std::vector<double>{0.9}) == 0);

  const std::vector<LabeledSample> pure{{{0.1, 0.2}, 0}, {{0.5, 0.4}, 0}, {{0.9, 0.3}, 0}};
  const auto leaf = train_tree(pure, {2, 0, 1}, rng);
  CHECK(leaf.nodes().size() == 1);
  CHECK(leaf.leaf_count() == 1);
  CHECK(leaf.depth() == 0);
}

TEST_CASE("tree: leaf ties go to fake") {
  Rng rng(1);
  const std::vector<LabeledSample> clash{{{0.4}, 0}, {{0.4}, 1}};
  const auto tree = train_tree(clash, {1, 0, 1}, rng);
  CHECK(tree.nodes().size() == 1);
  CHECK(tree.predict(std::vector<double>{0.4}) == 1);
}

TEST_CASE("tree: depth and node-size caps") {
  std::mt19937_64 gen(2);
  const auto data = random_dataset(gen, 200, 4);
  Rng rng(3);
  CHECK(train_tree(data, {4, 2, 1}, rng).depth() <= 2);
  const auto small = train_tree(data, {4, 0, 50}, rng);
  for (const auto& n : small.nodes())
    if (!n.is_leaf()) CHECK(n.counts[0] + n.counts[1] >= 50);
  CHECK_THROWS_AS(train_tree(data, {5, 0, 1}, rng), std::invalid_argument);
  CHECK_THROWS_AS(train_tree(data, {0, 0, 1}, rng), std::invalid_argument);
}

TEST_CASE("tree: matches exhaustive CART oracle on small instances") {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto data = random_dataset(gen, 20, 4);
    Rng rng(static_cast<std::uint64_t>(trial));
    const auto tree = train_tree(data, {4, 0, 1}, rng);
    const oracle::CartOracle cart(data);
    std::size_t ok = 0;
    for (const auto& s : data) {
      CHECK(tree.predict(s.features) == cart.predict(s.features));
      ok += tree.predict(s.features) == s.label;
    }
    CHECK(static_cast<double>(ok) / 20.0 == cart.training_accuracy());
    CHECK(cart.training_accuracy() == 1.0);  // distinct continuous inputs
  }
}

TEST_CASE("tree invariants: features in range, finite paths") {
  std::mt19937_64 gen(5);
  const auto data = random_dataset(gen, 300, 10);
  Rng rng(6);
  const auto tree = train_tree(data, {3, 0, 1}, rng);
  for (const auto& n : tree.nodes()) {
    if (n.is_leaf()) continue;
    CHECK(n.feature < 10);
    CHECK(n.left > 0);
    CHECK(n.right > 0);
    CHECK(static_cast<std::size_t>(n.left) < tree.nodes().size());
    CHECK(static_cast<std::size_t>(n.right) < tree.nodes().size());
  }
  CHECK(tree.depth() < tree.nodes().size());
}

TEST_CASE("forest: votes, score and tie rule") {
  CHECK(fixed_votes({1, 1, 0}).predict(std::vector<double>{0, 0}) == 1);
  CHECK(fixed_votes({1, 1, 0}).predict_score(std::vector<double>{0, 0}) == 2.0 / 3.0);
  CHECK(fixed_votes({1, 0}).predict(std::vector<double>{0, 0}) == 1);
  CHECK(fixed_votes({0, 0, 0}).predict(std::vector<double>{0, 0}) == 0);
  CHECK(fixed_votes(std::vector<int>(30, 1)).predict_score(std::vector<double>{0, 0}) == 1.0);
  CHECK_THROWS_AS(fixed_votes({1}).predict(std::vector<double>{0, 0, 0}), std::invalid_argument);
}

TEST_CASE("forest: defaults, determinism and single-tree equivalence") {
  std::mt19937_64 gen(7);
  const auto data = random_dataset(gen, 120, 10);
  const auto model = train_forest(data, {});
  CHECK(model.num_trees() == 30);
  CHECK(model.features_per_split() == 3);
  CHECK(model.feature_length() == 10);
  CHECK(train_forest(data, {}).serialize() == model.serialize());
  ForestOptions other;
  other.seed = 1;
  CHECK(train_forest(data, other).serialize() != model.serialize());

  ForestOptions one;
  one.num_trees = 1;
  const auto single = train_forest(data, one);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(10);
    for (auto& v : x) v = u(gen);
    CHECK(single.predict(x) == single.trees()[0].predict(sort_vector(x)));
  }
}

TEST_CASE("forest: score consistent with predict and with vote oracle") {
  std::mt19937_64 gen(8);
  const auto data = random_dataset(gen, 150, 6);
  for (bool sort : {true, false}) {
    ForestOptions o;
    o.num_trees = 8;  // even count exercises exact ties
    o.sort_enabled = sort;
    const auto model = train_forest(data, o);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 1000; ++i) {
      std::vector<double> x(6);
      for (auto& v : x) v = u(gen);
      const double s = model.predict_score(x);
      CHECK(model.predict(x) == (s >= 0.5 ? 1 : 0));
      CHECK(model.predict(x) == oracle::vote_oracle(model, x));
    }
  }
}

TEST_CASE("forest: small-instance vote oracle") {
  std::mt19937_64 gen(9);
  const auto data = random_dataset(gen, 8, 2);
  ForestOptions o;
  o.num_trees = 3;
  const auto model = train_forest(data, o);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> x{u(gen), u(gen)};
    CHECK(model.predict(x) == oracle::vote_oracle(model, x));
  }
}

TEST_CASE("forest: sorted model is permutation invariant") {
  std::mt19937_64 gen(10);
  const auto data = random_dataset(gen, 200, 10);
  const auto model = train_forest(data, {});
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(10);
    for (auto& v : x) v = u(gen);
    auto y = x;
    std::shuffle(y.begin(), y.end(), gen);
    CHECK(model.predict(x) == model.predict(y));
    CHECK(model.predict_score(x) == model.predict_score(y));
  }
}

TEST_CASE("forest: common positive rescaling leaves predictions unchanged") {
  std::mt19937_64 gen(11);
  auto data = random_dataset(gen, 100, 5);
  auto scaled = data;
  for (auto& s : scaled)
    for (auto& v : s.features) v *= 4.0;  // power of two keeps midpoints exact
  const auto a = train_forest(data, {});
  const auto b = train_forest(scaled, {});
  for (std::size_t i = 0; i < data.size(); ++i)
    CHECK(a.predict(data[i].features) == b.predict(scaled[i].features));
  for (std::size_t h = 0; h < a.num_trees(); ++h) {
    const auto& na = a.trees()[h].nodes();
    const auto& nb = b.trees()[h].nodes();
    REQUIRE(na.size() == nb.size());
    for (std::size_t k = 0; k < na.size(); ++k) {
      CHECK(na[k].feature == nb[k].feature);
      CHECK(na[k].threshold * 4.0 == nb[k].threshold);
    }
  }
}

TEST_CASE("forest: serialization round-trips exactly") {
  std::mt19937_64 gen(12);
  const auto data = random_dataset(gen, 80, 7);
  ForestOptions o;
  o.num_trees = 5;
  o.sort_enabled = false;
  const auto model = train_forest(data, o);
  const auto text = model.serialize();
  const auto back = ForestModel::deserialize(text);
  CHECK(back.serialize() == text);
  CHECK(back.num_trees() == 5);
  CHECK_FALSE(back.sort_enabled());
  for (const auto& s : data) CHECK(back.predict_score(s.features) == model.predict_score(s.features));
  CHECK_THROWS(ForestModel::deserialize("{not json"));
  CHECK_THROWS(ForestModel::deserialize(R"({"format":"other"})"));
}
