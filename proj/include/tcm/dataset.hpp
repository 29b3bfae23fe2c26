#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tcm/classify.hpp"
#include "tcm/features.hpp"
#include "tcm/model_io.hpp"
#include "tcm/signal.hpp"
#include "tcm/spectral.hpp"

namespace tcm {

// --- labels ------------------------------------------------------------------

/// Piecewise-constant tool state over a recording: each change point
/// (t_start_s, state) holds until the next one. File form: CSV
/// `t_start_s,tool_state` with tool_state in {0, 1}.
struct LabelSeries {
  std::vector<std::pair<double, int>> changes;  // sorted by time

  /// State at time t; NotWorn before the first change point.
  int at(double t) const;
  void validate() const;
};

void write_label_csv(const std::filesystem::path& path, const LabelSeries& labels);
LabelSeries read_label_csv(const std::filesystem::path& path);

// --- cycles ---------------------------------------------------------------

/// One tool from new to worn: time-ordered feature windows with labels.
struct ToolLifeCycle {
  std::string cycle_id;
  std::string machine_id;
  std::vector<FeatureVector> windows;
  std::vector<int> labels;  // 0/1 per window, -1 when unknown

  std::size_t size() const noexcept { return windows.size(); }
  /// Index of the first Worn window, if any.
  std::optional<std::size_t> transition_index() const;
  /// Throws unless labels are NotWorn* Worn* and sized like windows.
  void validate() const;
};

struct Dataset {
  std::vector<ToolLifeCycle> cycles;

  std::vector<std::string> cycle_ids() const;
  std::size_t window_count() const;
  const ToolLifeCycle& find(const std::string& cycle_id) const;
  Dataset subset(std::span<const std::string> ids) const;
};

/// Canonical feature names as strings, in column order.
std::vector<std::string> canonical_feature_names();

/// Feature CSV: the 18 canonical feature columns then cycle_id,t_start_s,label.
void write_feature_csv(std::ostream& out, const Dataset& data);
void write_feature_csv(const std::filesystem::path& path, const Dataset& data);
/// Windows are grouped by cycle_id in order of first appearance. A header
/// that is not exactly the canonical one raises SchemaError.
Dataset read_feature_csv(const std::filesystem::path& path);

/// Stacks every window of the given cycles (row order = cycle, then time).
Matrix feature_matrix(std::span<const ToolLifeCycle> cycles);
std::vector<int> label_vector(std::span<const ToolLifeCycle> cycles);

// --- manifest -------------------------------------------------------------

struct ManifestEntry {
  std::string cycle_id;
  std::string machine_id;
  std::string trace;     // path relative to the manifest directory
  std::string labels;    // label CSV
  std::string segments;  // ground-truth segment CSV, may be empty
  std::uint64_t seed = 0;
  double wear_transition = 0.0;  // fraction of cycle duration, 0 if unknown
};

/// JSON: {"format":"tcm.manifest","version":1,"machine_id":..,
///        "sample_interval":..,"spindle_rpm":..,"flutes":..,"cycles":[entry..]}
struct Manifest {
  std::string machine_id;
  double sample_interval = kDefaultSampleInterval;
  double spindle_rpm = 11540.0;
  unsigned flutes = 4;
  std::vector<ManifestEntry> cycles;
};

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

// --- pipeline: trace -> segments -> feature windows -------------------------

struct PipelineConfig {
  SegmentationParams segmentation;
  WindowConfig spectral;
  FeatureWindowConfig features;
  double spindle_rpm = 11540.0;
  unsigned flutes = 4;
  std::size_t n_harmonics = 10;
  double tolerance_bins = 1.5;

  ProcessFrequencies process_frequencies(double sample_interval) const;
  void validate() const;
};

struct CycleBuildReport {
  std::vector<Segment> segments;
  std::size_t skipped_segments = 0;  // shorter than one feature window
};

/// Segments the trace, extracts feature windows from every segment long
/// enough, and labels each window by the state at its start time.
ToolLifeCycle build_cycle(const Trace& trace, const LabelSeries& labels,
                          const std::string& cycle_id, const std::string& machine_id,
                          const PipelineConfig& cfg, CycleBuildReport* report = nullptr);

// --- splitting --------------------------------------------------------------

struct SplitPlan {
  double train_fraction = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> validation;
};

/// Shuffles the cycle ids with `seed` and puts the first
/// round_half_up(fraction * count), clamped to [1, count - 1], into train.
SplitPlan split_by_cycles(std::span<const std::string> cycle_ids, double train_fraction,
                          std::uint64_t seed);

std::string split_to_json(const SplitPlan& plan);
SplitPlan split_from_json(const std::string& text);

// --- models ------------------------------------------------------------------

struct ModelSpec {
  std::string kind = "svc";  // "svc" or "tree"
  SvcConfig svc;
  TreeConfig tree;
};

/// Throws ParameterError for an unknown kind.
ModelSpec model_spec(const std::string& kind);
AnyModel train_model(const ModelSpec& spec, const Matrix& x, std::span<const int> y,
                     std::uint64_t seed, const std::vector<std::string>& feature_names);

// --- evaluation --------------------------------------------------------------

struct FilterConfig {
  std::size_t min_run = 3;
};

struct Confusion {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;  // positive = Worn
  std::size_t total() const noexcept { return tp + tn + fp + fn; }
};

struct CycleEvaluation {
  std::string cycle_id;
  std::vector<double> t_s;
  std::vector<int> raw, filtered, truth;
  std::optional<std::size_t> true_transition;       // first NotWorn -> Worn window
  std::optional<std::size_t> predicted_transition;  // same, on filtered labels
  /// predicted - true in windows (negative = early warning), when both exist.
  std::optional<long long> delay;
  double accuracy = 0.0;
};

struct EvalReport {
  double accuracy = 0.0;      // on filtered labels
  double raw_accuracy = 0.0;  // before the temporal filter
  Confusion confusion;        // filtered labels
  std::vector<CycleEvaluation> cycles;
};

/// Index of the first i >= 1 with labels[i-1] == 0 and labels[i] == 1.
std::optional<std::size_t> first_rising_edge(std::span<const int> labels);

using WindowPredictor = std::function<std::vector<int>(const ToolLifeCycle&)>;

EvalReport evaluate(const WindowPredictor& predictor, std::span<const ToolLifeCycle> cycles,
                    const FilterConfig& filter);
/// Checks the model's feature schema, then evaluates it.
EvalReport evaluate(const AnyModel& model, std::span<const ToolLifeCycle> cycles,
                    const FilterConfig& filter);

/// CSV outputs of an evaluation.
///  predictions: cycle_id,t_s,raw_label,filtered_label,true_label
///  delays:      cycle_id,true_transition,predicted_transition,delay (empty = undefined)
///  summary:     metric,value
void write_predictions_csv(const std::filesystem::path& path, const EvalReport& report);
void write_delays_csv(const std::filesystem::path& path, const EvalReport& report);
void write_summary_csv(const std::filesystem::path& path, const EvalReport& report);

// --- sweep -------------------------------------------------------------------

struct SweepConfig {
  std::vector<ModelSpec> models{model_spec("tree"), model_spec("svc")};
  std::vector<double> fractions{0.2, 0.4, 0.6, 0.8};
  std::size_t n_seeds = 5;
  std::uint64_t root_seed = 0;
  FilterConfig filter;
  std::size_t jobs = 1;
};

/// Replicate k uses seed derive_seed(root_seed, "sweep", k) for both the
/// split and the model, so `train --seed <that> --train-fraction f`
/// reproduces a cell.
std::uint64_t sweep_seed(std::uint64_t root_seed, std::size_t replicate);

struct SweepCell {
  std::string model;
  double train_fraction = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> accuracy;  // empty when training/evaluation failed
  std::string error;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // ordered model, fraction, replicate
  /// Mean accuracy over successful replicates, [model][fraction].
  std::vector<std::vector<std::optional<double>>> grid;
  std::vector<std::string> model_names;
  std::vector<double> fractions;
};

/// Trains every model on every fraction for n_seeds replicates. Validation
/// uses the held-out cycles of `data`, or every cycle of `eval_data` when
/// given (cross-machine evaluation).
SweepResult sweep(const Dataset& data, const SweepConfig& cfg,
                  const Dataset* eval_data = nullptr);

/// `model,train_fraction,seed,accuracy` ("failed" for failed cells).
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result);
/// `model,train_fraction,mean_accuracy,n_ok`.
void write_grid_csv(const std::filesystem::path& path, const SweepResult& result);

}  // namespace tcm
