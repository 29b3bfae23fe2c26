#include "tcm/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "tcm/error.hpp"
#include "tcm/rng.hpp"

namespace tcm {

int LabelSeries::at(double t) const {
  int state = 0;
  for (const auto& [start, s] : changes) {
    if (start > t) break;
    state = s;
  }
  return state;
}

void LabelSeries::validate() const {
  for (std::size_t i = 0; i < changes.size(); ++i) {
    const auto& [t, s] = changes[i];
    if (!std::isfinite(t)) throw FormatError("labels: non-finite change time");
    if (s != 0 && s != 1) throw FormatError("labels: tool_state must be 0 or 1");
    if (i > 0 && !(t > changes[i - 1].first))
      throw FormatError("labels: change times must be strictly increasing");
  }
}

std::optional<std::size_t> ToolLifeCycle::transition_index() const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == 1) return i;
  return std::nullopt;
}

void ToolLifeCycle::validate() const {
  if (labels.size() != windows.size())
    throw ShapeError("cycle " + cycle_id + ": label count differs from window count");
  bool worn = false;
  for (int l : labels) {
    if (l == -1) continue;
    if (l != 0 && l != 1) throw ParameterError("cycle " + cycle_id + ": label outside {0, 1}");
    if (worn && l == 0)
      throw ParameterError("cycle " + cycle_id + ": labels return from Worn to NotWorn");
    worn = worn || l == 1;
  }
}

std::vector<std::string> Dataset::cycle_ids() const {
  std::vector<std::string> ids;
  ids.reserve(cycles.size());
  for (const auto& c : cycles) ids.push_back(c.cycle_id);
  return ids;
}

std::size_t Dataset::window_count() const {
  std::size_t n = 0;
  for (const auto& c : cycles) n += c.size();
  return n;
}

const ToolLifeCycle& Dataset::find(const std::string& cycle_id) const {
  for (const auto& c : cycles)
    if (c.cycle_id == cycle_id) return c;
  throw ParameterError("no cycle '" + cycle_id + "' in dataset");
}

Dataset Dataset::subset(std::span<const std::string> ids) const {
  Dataset out;
  for (const auto& id : ids) out.cycles.push_back(find(id));
  return out;
}

std::vector<std::string> canonical_feature_names() {
  std::vector<std::string> names;
  for (auto n : feature_names()) names.emplace_back(n);
  return names;
}

Matrix feature_matrix(std::span<const ToolLifeCycle> cycles) {
  Matrix x;
  for (const auto& c : cycles)
    for (const auto& w : c.windows) x.append_row(w.values);
  return x;
}

std::vector<int> label_vector(std::span<const ToolLifeCycle> cycles) {
  std::vector<int> y;
  for (const auto& c : cycles) y.insert(y.end(), c.labels.begin(), c.labels.end());
  return y;
}

// --- pipeline ---------------------------------------------------------------

ProcessFrequencies PipelineConfig::process_frequencies(double sample_interval) const {
  const double bin_hz = 1.0 / (sample_interval * static_cast<double>(spectral.frame_len));
  return ProcessFrequencies::from_process(spindle_rpm, flutes, bin_hz, n_harmonics,
                                          tolerance_bins);
}

void PipelineConfig::validate() const {
  segmentation.validate();
  spectral.validate();
  features.validate();
  if (!(spindle_rpm > 0.0)) throw ParameterError("spindle_rpm must be > 0");
  if (flutes < 1) throw ParameterError("flutes must be >= 1");
  if (n_harmonics < 1) throw ParameterError("n_harmonics must be >= 1");
  if (!(tolerance_bins > 0.0)) throw ParameterError("tolerance_bins must be > 0");
}

ToolLifeCycle build_cycle(const Trace& trace, const LabelSeries& labels,
                          const std::string& cycle_id, const std::string& machine_id,
                          const PipelineConfig& cfg, CycleBuildReport* report) {
  cfg.validate();
  const ProcessFrequencies pf = cfg.process_frequencies(trace.sample_interval());
  const FeatureWindowConfig fcfg = cfg.features.resolved(trace.sample_rate(), pf);
  CycleBuildReport local;
  CycleBuildReport& rep = report ? *report : local;
  rep = CycleBuildReport{};
  rep.segments = segment(trace, cfg.segmentation);

  ToolLifeCycle cycle;
  cycle.cycle_id = cycle_id;
  cycle.machine_id = machine_id;
  for (const Segment& seg : rep.segments) {
    if (seg.length() < fcfg.window_len) {
      ++rep.skipped_segments;
      continue;
    }
    for (auto& w : extract(trace, seg, fcfg, cfg.spectral, pf, cycle_id)) {
      cycle.labels.push_back(labels.changes.empty() ? -1 : labels.at(w.t_start_s));
      cycle.windows.push_back(std::move(w));
    }
  }
  return cycle;
}

// --- splitting --------------------------------------------------------------

SplitPlan split_by_cycles(std::span<const std::string> cycle_ids, double train_fraction,
                          std::uint64_t seed) {
  const std::size_t count = cycle_ids.size();
  if (count < 2) throw ParameterError("split: need at least 2 cycles");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ParameterError("split: train_fraction must lie in (0, 1)");
  {
    std::vector<std::string> sorted(cycle_ids.begin(), cycle_ids.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ParameterError("split: duplicate cycle ids");
  }
  auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(count) + 0.5));
  n_train = std::clamp<std::size_t>(n_train, 1, count - 1);

  std::vector<std::string> ids(cycle_ids.begin(), cycle_ids.end());
  Rng rng(derive_seed(seed, "split"));
  shuffle(ids, rng);

  SplitPlan plan;
  plan.train_fraction = train_fraction;
  plan.seed = seed;
  plan.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  plan.validation.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  return plan;
}

// --- models -------------------------------------------------------------------

ModelSpec model_spec(const std::string& kind) {
  if (kind != "svc" && kind != "tree")
    throw ParameterError("unknown model '" + kind + "' (expected svc or tree)");
  ModelSpec spec;
  spec.kind = kind;
  return spec;
}

AnyModel train_model(const ModelSpec& spec, const Matrix& x, std::span<const int> y,
                     std::uint64_t seed, const std::vector<std::string>& feature_names) {
  for (int l : y)
    if (l != 0 && l != 1) throw ParameterError("training labels must be 0 or 1");
  if (spec.kind == "tree") {
    TreeModel m = train_tree(x, y, spec.tree);
    m.feature_names = feature_names;
    return m;
  }
  if (spec.kind == "svc") {
    SvcConfig cfg = spec.svc;
    cfg.seed = seed;
    SvcModel m = train_svc(x, y, cfg);
    m.feature_names = feature_names;
    return m;
  }
  throw ParameterError("unknown model '" + spec.kind + "'");
}

// --- evaluation ---------------------------------------------------------------

std::optional<std::size_t> first_rising_edge(std::span<const int> labels) {
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (labels[i - 1] == 0 && labels[i] == 1) return i;
  return std::nullopt;
}

EvalReport evaluate(const WindowPredictor& predictor, std::span<const ToolLifeCycle> cycles,
                    const FilterConfig& filter) {
  if (filter.min_run < 1) throw ParameterError("filter min_run must be >= 1");
  EvalReport report;
  std::size_t correct_raw = 0;
  for (const auto& cycle : cycles) {
    cycle.validate();
    for (int l : cycle.labels)
      if (l == -1) throw ParameterError("cycle " + cycle.cycle_id + " has unlabelled windows");
    CycleEvaluation ce;
    ce.cycle_id = cycle.cycle_id;
    ce.truth = cycle.labels;
    ce.raw = predictor(cycle);
    if (ce.raw.size() != cycle.size())
      throw ShapeError("predictor returned the wrong number of labels");
    ce.filtered = temporal_filter(ce.raw, filter.min_run);
    for (const auto& w : cycle.windows) ce.t_s.push_back(w.t_start_s);
    ce.true_transition = first_rising_edge(ce.truth);
    ce.predicted_transition = first_rising_edge(ce.filtered);
    if (ce.true_transition && ce.predicted_transition)
      ce.delay = static_cast<long long>(*ce.predicted_transition) -
                 static_cast<long long>(*ce.true_transition);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      const int p = ce.filtered[i];
      const int t = ce.truth[i];
      correct += p == t ? 1 : 0;
      correct_raw += ce.raw[i] == t ? 1 : 0;
      if (p == 1 && t == 1) ++report.confusion.tp;
      else if (p == 0 && t == 0) ++report.confusion.tn;
      else if (p == 1) ++report.confusion.fp;
      else ++report.confusion.fn;
    }
    ce.accuracy = cycle.size() ? static_cast<double>(correct) / static_cast<double>(cycle.size()) : 0.0;
    report.cycles.push_back(std::move(ce));
  }
  const std::size_t total = report.confusion.total();
  if (total == 0) throw ParameterError("evaluate: no validation windows");
  report.accuracy =
      static_cast<double>(report.confusion.tp + report.confusion.tn) / static_cast<double>(total);
  report.raw_accuracy = static_cast<double>(correct_raw) / static_cast<double>(total);
  return report;
}

EvalReport evaluate(const AnyModel& model, std::span<const ToolLifeCycle> cycles,
                    const FilterConfig& filter) {
  const auto& names = model_feature_names(model);
  if (!names.empty() && names != canonical_feature_names())
    throw SchemaError("model feature schema differs from the dataset's feature columns");
  return evaluate(
      [&](const ToolLifeCycle& c) {
        std::span<const ToolLifeCycle> one(&c, 1);
        return predict(model, feature_matrix(one));
      },
      cycles, filter);
}

// --- sweep ----------------------------------------------------------------------

std::uint64_t sweep_seed(std::uint64_t root_seed, std::size_t replicate) {
  return derive_seed(root_seed, "sweep", replicate);
}

SweepResult sweep(const Dataset& data, const SweepConfig& cfg, const Dataset* eval_data) {
  if (cfg.models.empty()) throw ParameterError("sweep: no models");
  if (cfg.fractions.empty()) throw ParameterError("sweep: no train fractions");
  if (cfg.n_seeds < 1) throw ParameterError("sweep: n_seeds must be >= 1");
  if (data.cycles.size() < 2) throw ParameterError("sweep: need at least 2 cycles");
  for (double f : cfg.fractions)
    if (!(f > 0.0 && f < 1.0)) throw ParameterError("sweep: fractions must lie in (0, 1)");
  for (const auto& m : cfg.models) model_spec(m.kind);

  SweepResult result;
  result.fractions = cfg.fractions;
  for (const auto& m : cfg.models) result.model_names.push_back(m.kind);
  for (std::size_t mi = 0; mi < cfg.models.size(); ++mi)
    for (double f : cfg.fractions)
      for (std::size_t k = 0; k < cfg.n_seeds; ++k)
        result.cells.push_back({cfg.models[mi].kind, f, sweep_seed(cfg.root_seed, k), {}, {}});

  const std::size_t per_model = cfg.fractions.size() * cfg.n_seeds;
  const std::vector<std::string> ids = data.cycle_ids();
  const std::vector<std::string> names = canonical_feature_names();

  auto run_cell = [&](std::size_t idx) {
    SweepCell& cell = result.cells[idx];
    const ModelSpec& spec = cfg.models[idx / per_model];
    try {
      const SplitPlan plan = split_by_cycles(ids, cell.train_fraction, cell.seed);
      const Dataset train = data.subset(plan.train);
      const Dataset val = eval_data ? *eval_data : data.subset(plan.validation);
      const Matrix x = feature_matrix(train.cycles);
      const std::vector<int> y = label_vector(train.cycles);
      const AnyModel model = train_model(spec, x, y, cell.seed, names);
      cell.accuracy = evaluate(model, val.cycles, cfg.filter).accuracy;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, result.cells.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < result.cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < result.cells.size(); i = next++) run_cell(i);
      });
    for (auto& th : pool) th.join();
  }

  result.grid.assign(cfg.models.size(), std::vector<std::optional<double>>(cfg.fractions.size()));
  for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
    for (std::size_t fi = 0; fi < cfg.fractions.size(); ++fi) {
      double sum = 0.0;
      std::size_t ok = 0;
      for (std::size_t k = 0; k < cfg.n_seeds; ++k) {
        const auto& cell = result.cells[mi * per_model + fi * cfg.n_seeds + k];
        if (cell.accuracy) {
          sum += *cell.accuracy;
          ++ok;
        }
      }
      if (ok) result.grid[mi][fi] = sum / static_cast<double>(ok);
    }
  }
  return result;
}

}  // namespace tcm
