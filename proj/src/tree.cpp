#include <algorithm>
#include <numeric>
#include <utility>

#include "tcm/classify.hpp"

namespace tcm {

namespace {

struct Split {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = 0.0;  // sum over children of (c0^2 + c1^2) / n_child; larger is purer
};

// Midpoint between consecutive distinct values; falls back to the lower value
// when the two doubles are adjacent and the midpoint rounds up.
double midpoint(double lo, double hi) {
  const double m = lo + (hi - lo) / 2.0;
  return (m >= hi) ? lo : m;
}

Split best_split(const Matrix& x, std::span<const int> y, const std::vector<std::size_t>& idx) {
  Split best;
  std::size_t total1 = 0;
  for (std::size_t i : idx) total1 += static_cast<std::size_t>(y[i]);
  const std::size_t total0 = idx.size() - total1;

  std::vector<std::size_t> order(idx);
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return x(a, f) < x(b, f) || (x(a, f) == x(b, f) && a < b);
    });
    std::size_t l0 = 0, l1 = 0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      if (y[order[k]] == 1) ++l1; else ++l0;
      const double v = x(order[k], f);
      const double next = x(order[k + 1], f);
      if (!(next > v)) continue;
      const double nl = static_cast<double>(l0 + l1);
      const double r0 = static_cast<double>(total0 - l0);
      const double r1 = static_cast<double>(total1 - l1);
      const double nr = r0 + r1;
      const double score = (static_cast<double>(l0 * l0 + l1 * l1)) / nl + (r0 * r0 + r1 * r1) / nr;
      // strictly better (beyond rounding) wins; features and thresholds are
      // visited in ascending order, so ties keep the lowest of both
      if (!best.found || score > best.score * (1.0 + 1e-12)) {
        best.found = true;
        best.feature = f;
        best.threshold = midpoint(v, next);
        best.score = score;
      }
    }
  }
  return best;
}

}  // namespace

std::size_t TreeModel::depth() const {
  if (nodes.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [n, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[static_cast<std::size_t>(n)].is_leaf()) {
      stack.push_back({nodes[static_cast<std::size_t>(n)].left, d + 1});
      stack.push_back({nodes[static_cast<std::size_t>(n)].right, d + 1});
    }
  }
  return deepest;
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

TreeModel train_tree(const Matrix& x, std::span<const int> y, const TreeConfig& cfg) {
  if (x.empty() || x.cols() == 0) throw ParameterError("train_tree: empty training matrix");
  if (y.size() != x.rows()) throw ShapeError("train_tree: label count differs from row count");
  for (int v : y)
    if (v != 0 && v != 1) throw ParameterError("train_tree: labels must be 0 or 1");
  if (cfg.min_samples_split < 2) throw ParameterError("min_samples_split must be >= 2");

  TreeModel model;
  model.n_features = x.cols();
  model.config = cfg;

  struct Pending {
    int node;
    std::vector<std::size_t> idx;
  };
  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), 0);
  model.nodes.emplace_back();
  std::vector<Pending> stack;
  stack.push_back({0, std::move(all)});

  while (!stack.empty()) {
    Pending p = std::move(stack.back());
    stack.pop_back();
    std::size_t c1 = 0;
    for (std::size_t i : p.idx) c1 += static_cast<std::size_t>(y[i]);
    const std::size_t c0 = p.idx.size() - c1;
    {
      TreeNode& node = model.nodes[static_cast<std::size_t>(p.node)];
      node.count0 = c0;
      node.count1 = c1;
      node.label = c1 >= c0 ? 1 : 0;  // ties go to Worn
    }
    if (c0 == 0 || c1 == 0 || p.idx.size() < cfg.min_samples_split) continue;
    const Split s = best_split(x, y, p.idx);
    if (!s.found) continue;  // identical rows with conflicting labels

    std::vector<std::size_t> left, right;
    for (std::size_t i : p.idx) (x(i, s.feature) <= s.threshold ? left : right).push_back(i);
    const int li = static_cast<int>(model.nodes.size());
    model.nodes.emplace_back();
    const int ri = static_cast<int>(model.nodes.size());
    model.nodes.emplace_back();
    TreeNode& node = model.nodes[static_cast<std::size_t>(p.node)];
    node.feature = static_cast<int>(s.feature);
    node.threshold = s.threshold;
    node.left = li;
    node.right = ri;
    // pushed right first so the left subtree is grown first
    stack.push_back({ri, std::move(right)});
    stack.push_back({li, std::move(left)});
  }
  return model;
}

int predict_one(const TreeModel& model, std::span<const double> x) {
  if (x.size() != model.n_features) throw ShapeError("tree: feature dimension mismatch");
  if (model.nodes.empty()) throw ParameterError("tree: empty model");
  std::size_t n = 0;
  while (!model.nodes[n].is_leaf()) {
    const TreeNode& node = model.nodes[n];
    n = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                     ? node.left
                                     : node.right);
  }
  return model.nodes[n].label;
}

std::vector<int> predict(const TreeModel& model, const Matrix& x) {
  std::vector<int> out;
  out.reserve(x.rows());
  if (!x.empty() && x.cols() != model.n_features)
    throw ShapeError("tree: feature dimension mismatch");
  for (std::size_t r = 0; r < x.rows(); ++r) out.push_back(predict_one(model, x.row(r)));
  return out;
}

}  // namespace tcm
