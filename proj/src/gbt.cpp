// Gradient boosting on the logistic loss with exact greedy regression trees.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mortem/error.hpp"
#include "mortem/models.hpp"

namespace mortem {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logistic_loss(double y, double f) {
  // -[y log p + (1 - y) log(1 - p)] with p = sigmoid(f)
  const double softplus = f > 0.0 ? f + std::log1p(std::exp(-f)) : std::log1p(std::exp(f));
  return softplus - y * f;
}

struct Entry {
  double value;
  int row;
};

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

constexpr double kMinGain = 1e-12;

}  // namespace

double RegressionTree::evaluate(const FeatureVector& x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(node)];
    if (static_cast<std::size_t>(n.feature) >= x.dimension) throw Error("tree feature outside vector dimension");
    node = x.at(static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

double BoostedTrees::raw_score(const FeatureVector& x) const {
  double f = base_score;
  for (const auto& tree : trees) f += tree.evaluate(x);
  return f;
}

Prediction predict(const BoostedTrees& model, const FeatureVector& x) {
  const double p = sigmoid(model.raw_score(x));
  return {p >= 0.5 ? Label::post : Label::pre, p};
}

BoostedTrees train_gbt(std::span<const FeatureVector> vectors, std::span<const Label> labels, int depth,
                       int rounds, double learning_rate) {
  if (depth < 1) throw Error("train_gbt: depth must be at least 1");
  if (rounds < 1) throw Error("train_gbt: rounds must be at least 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw Error("train_gbt: learning_rate must lie in (0, 1]");
  if (vectors.size() != labels.size()) throw Error("train_gbt: vectors and labels differ in length");
  const std::size_t n = vectors.size();
  std::vector<double> y(n);
  double positives = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = labels[i] == Label::post ? 1.0 : 0.0;
    positives += y[i];
  }
  if (positives == 0.0 || positives == static_cast<double>(n)) {
    throw Error("train_gbt: both classes must be present (single-class input)");
  }
  const std::size_t dim = vectors.front().dimension;

  // Presorted nonzero entries per column; zeros are implicit and sort first
  // because features are nonnegative.
  std::vector<std::vector<Entry>> columns(dim);
  for (std::size_t i = 0; i < n; ++i) {
    if (vectors[i].dimension != dim) throw Error("train_gbt: inconsistent vector dimensions");
    for (const auto& e : vectors[i].entries) {
      if (e.value < 0.0) throw Error("train_gbt: negative feature value");
      if (e.value != 0.0) columns[e.index].push_back({e.value, static_cast<int>(i)});
    }
  }
  for (auto& col : columns) {
    std::sort(col.begin(), col.end(), [](const Entry& a, const Entry& b) {
      return a.value != b.value ? a.value < b.value : a.row < b.row;
    });
  }

  BoostedTrees model;
  model.learning_rate = learning_rate;
  model.depth = depth;
  const double prior = positives / static_cast<double>(n);
  model.base_score = std::log(prior / (1.0 - prior));
  std::vector<double> f(n, model.base_score);
  std::vector<double> residual(n);
  std::vector<double> hessian(n);
  std::vector<int> node_of(n);

  for (int round = 0; round < rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(f[i]);
      residual[i] = y[i] - p;
      hessian[i] = p * (1.0 - p);
    }
    RegressionTree tree;
    tree.nodes.push_back({});
    std::fill(node_of.begin(), node_of.end(), 0);
    std::vector<int> frontier = {0};

    for (int level = 0; level < depth && !frontier.empty(); ++level) {
      // Local slot per frontier node.
      std::vector<int> slot_of(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < frontier.size(); ++s) slot_of[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);
      const std::size_t slots = frontier.size();
      std::vector<double> node_sum(slots, 0.0);
      std::vector<double> node_count(slots, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const int s = slot_of[static_cast<std::size_t>(node_of[i])];
        if (s < 0) continue;
        node_sum[static_cast<std::size_t>(s)] += residual[i];
        node_count[static_cast<std::size_t>(s)] += 1.0;
      }
      std::vector<SplitCandidate> best(slots);

      std::vector<double> nz_sum(slots);
      std::vector<double> nz_count(slots);
      std::vector<double> left_sum(slots);
      std::vector<double> left_count(slots);
      std::vector<double> last_value(slots);
      for (std::size_t d = 0; d < dim; ++d) {
        const auto& col = columns[d];
        if (col.empty()) continue;
        std::fill(nz_sum.begin(), nz_sum.end(), 0.0);
        std::fill(nz_count.begin(), nz_count.end(), 0.0);
        for (const auto& e : col) {
          const int s = slot_of[static_cast<std::size_t>(node_of[static_cast<std::size_t>(e.row)])];
          if (s < 0) continue;
          nz_sum[static_cast<std::size_t>(s)] += residual[static_cast<std::size_t>(e.row)];
          nz_count[static_cast<std::size_t>(s)] += 1.0;
        }
        // The zero group opens every node's scan.
        for (std::size_t s = 0; s < slots; ++s) {
          left_count[s] = node_count[s] - nz_count[s];
          left_sum[s] = node_sum[s] - nz_sum[s];
          last_value[s] = 0.0;
        }
        const auto consider = [&](std::size_t s, double next_value) {
          const double nl = left_count[s];
          const double nr = node_count[s] - nl;
          if (nl <= 0.0 || nr <= 0.0 || next_value <= last_value[s]) return;
          const double sl = left_sum[s];
          const double sr = node_sum[s] - sl;
          const double gain = sl * sl / nl + sr * sr / nr - node_sum[s] * node_sum[s] / node_count[s];
          if (gain > best[s].gain + kMinGain) {
            best[s] = {gain, static_cast<int>(d), 0.5 * (last_value[s] + next_value)};
          }
        };
        for (const auto& e : col) {
          const int si = slot_of[static_cast<std::size_t>(node_of[static_cast<std::size_t>(e.row)])];
          if (si < 0) continue;
          const auto s = static_cast<std::size_t>(si);
          consider(s, e.value);
          left_sum[s] += residual[static_cast<std::size_t>(e.row)];
          left_count[s] += 1.0;
          last_value[s] = e.value;
        }
      }

      std::vector<int> next_frontier;
      for (std::size_t s = 0; s < slots; ++s) {
        if (best[s].feature < 0) continue;
        const int parent = frontier[s];
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        auto& node = tree.nodes[static_cast<std::size_t>(parent)];
        node.feature = best[s].feature;
        node.threshold = best[s].threshold;
        node.gain = best[s].gain;
        node.left = left;
        node.right = left + 1;
        next_frontier.push_back(left);
        next_frontier.push_back(left + 1);
      }
      // Route rows of split nodes to their children.
      for (std::size_t i = 0; i < n; ++i) {
        const auto& node = tree.nodes[static_cast<std::size_t>(node_of[i])];
        if (node.feature < 0) continue;
        node_of[i] = vectors[i].at(static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left : node.right;
      }
      frontier = std::move(next_frontier);
    }

    // Damped Newton leaf values: shrink until the leaf's loss does not rise.
    std::vector<std::vector<std::size_t>> members(tree.nodes.size());
    for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(node_of[i])].push_back(i);
    for (std::size_t leaf = 0; leaf < tree.nodes.size(); ++leaf) {
      if (tree.nodes[leaf].feature >= 0 || members[leaf].empty()) continue;
      double g = 0.0;
      double h = 0.0;
      double before = 0.0;
      for (const auto i : members[leaf]) {
        g += residual[i];
        h += hessian[i];
        before += logistic_loss(y[i], f[i]);
      }
      double value = learning_rate * g / std::max(h, 1e-12);
      for (int attempt = 0; attempt < 60; ++attempt) {
        double after = 0.0;
        for (const auto i : members[leaf]) after += logistic_loss(y[i], f[i] + value);
        if (after <= before) break;
        value *= 0.5;
        if (attempt == 59) value = 0.0;
      }
      tree.nodes[leaf].value = value;
    }
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      f[i] += tree.nodes[static_cast<std::size_t>(node_of[i])].value;
      loss += logistic_loss(y[i], f[i]);
    }
    model.training_loss.push_back(loss / static_cast<double>(n));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace mortem
