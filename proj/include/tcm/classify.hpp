#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tcm/matrix.hpp"

namespace tcm {

/// Binary tool state; the numeric value is the class index.
enum class ToolState : int { NotWorn = 0, Worn = 1 };

inline int to_label(ToolState s) { return static_cast<int>(s); }
ToolState to_state(int label);  // throws ParameterError outside {0, 1}

struct Prediction {
  ToolState label = ToolState::NotWorn;
  double timestamp = 0.0;  // seconds
  std::string cycle_id;
};

// --- standardization -------------------------------------------------------

struct StandardizationParams {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<bool> constant;  // SD <= 1e-12 * abs(mean): passed through (mean 0, scale 1)

  std::size_t dims() const noexcept { return mean.size(); }
  bool any_constant() const;
};

/// Per-column mean and population SD of the training rows (>= 2 rows).
StandardizationParams fit_standardizer(const Matrix& x);
Matrix apply_standardizer(const StandardizationParams& p, const Matrix& x);
void apply_standardizer_row(const StandardizationParams& p, std::span<const double> in,
                            std::span<double> out);

// --- decision tree ---------------------------------------------------------

struct TreeNode {
  // internal node: feature/threshold/left/right; leaf: left == right == -1
  int feature = -1;
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  int label = 0;
  std::size_t count0 = 0;
  std::size_t count1 = 0;

  bool is_leaf() const noexcept { return left < 0; }
};

struct TreeConfig {
  std::size_t min_samples_split = 2;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t n_features = 0;
  std::string criterion = "gini";
  TreeConfig config;
  std::vector<std::string> feature_names;

  std::size_t depth() const;
  std::size_t leaf_count() const;
};

/// CART growth on Gini impurity without a depth limit. Nodes split until pure
/// or unsplittable (fewer than min_samples_split rows, or all rows equal).
/// Ties break on lowest feature index, then lowest threshold.
TreeModel train_tree(const Matrix& x, std::span<const int> y, const TreeConfig& cfg = {});

// --- support vector classifier ----------------------------------------------

struct SvcConfig {
  double c = 1.0;
  double gamma = 0.0;  // <= 0: 1 / (n_features * variance of the standardized X)
  double tolerance = 1e-3;  // max KKT violation at convergence
  std::size_t max_iter = 1'000'000;
  std::uint64_t seed = 0;  // permutes the working-set scan order for ties
  bool record_objective = false;
  std::size_t cache_rows = 0;  // kernel rows kept in memory, 0 = auto
};

struct SvcModel {
  std::vector<std::vector<double>> support_vectors;  // standardized space
  std::vector<double> dual_coef;                      // alpha_i * y_i
  double bias = 0.0;
  double gamma = 0.0;
  double c = 1.0;
  StandardizationParams standardizer;  // empty dims() => raw input
  std::vector<std::string> feature_names;

  std::size_t n_features() const noexcept {
    return standardizer.dims() ? standardizer.dims()
                               : (support_vectors.empty() ? 0 : support_vectors.front().size());
  }
};

struct SvcTrainingInfo {
  std::size_t iterations = 0;
  double kkt_violation = 0.0;
  double objective = 0.0;                // dual objective at convergence
  std::vector<double> objective_trace;   // per iteration, when recorded
  std::size_t n_support = 0;
  std::size_t n_bounded = 0;
};

/// Standardizes X internally, then solves the soft-margin RBF dual by SMO
/// with second-order working-set selection.
SvcModel train_svc(const Matrix& x, std::span<const int> y, const SvcConfig& cfg = {},
                   SvcTrainingInfo* info = nullptr);

/// Same dual solver on X as given (no standardization). gamma must be > 0.
SvcModel train_svc_raw(const Matrix& x, std::span<const int> y, const SvcConfig& cfg,
                       SvcTrainingInfo* info = nullptr);

/// sum_i alpha_i y_i K(x_i, x) + b.
double svc_decision(const SvcModel& model, std::span<const double> x);

// --- prediction --------------------------------------------------------------

int predict_one(const TreeModel& model, std::span<const double> x);
/// decision >= 0 maps to Worn.
int predict_one(const SvcModel& model, std::span<const double> x);
std::vector<int> predict(const TreeModel& model, const Matrix& x);
std::vector<int> predict(const SvcModel& model, const Matrix& x);

// --- temporal filter -----------------------------------------------------

/// Replaces every maximal run shorter than min_run that is flanked on both
/// sides by the opposite label with that label, repeated to a fixpoint.
/// Runs touching either end of the sequence are left untouched.
std::vector<int> temporal_filter(std::span<const int> labels, std::size_t min_run);
std::vector<Prediction> temporal_filter(const std::vector<Prediction>& preds,
                                        std::size_t min_run);

}  // namespace tcm
