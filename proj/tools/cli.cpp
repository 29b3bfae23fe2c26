#include "cli.hpp"

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "json_config.hpp"
#include "tcm/dataset.hpp"
#include "tcm/error.hpp"
#include "tcm/io_util.hpp"
#include "tcm/model_io.hpp"
#include "tcm/synth.hpp"
#include "tcm/trace_io.hpp"

namespace tcm::cli {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCommands{"synth", "segment", "features", "train", "eval", "sweep"};

// The config file is attributed to the subcommand named on the command line.
std::string find_command(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config") {
      ++i;
      continue;
    }
    if (std::find(kCommands.begin(), kCommands.end(), a) != kCommands.end()) return a;
  }
  return {};
}

// --- shared option groups ---------------------------------------------------

struct SegmentationOpts {
  SegmentationParams params;
  std::string normalization = "slice";

  void add(CLI::App* app) {
    app->add_option("--window-len", params.window_len, "peak-to-peak window length (samples)")
        ->capture_default_str();
    app->add_option("--alpha0", params.alpha0, "lower quantile of the quiet-level slice")
        ->capture_default_str();
    app->add_option("--alpha1", params.alpha1, "upper quantile of the quiet-level slice")
        ->capture_default_str();
    app->add_option("--alpha2", params.alpha2, "threshold multiplier on the quiet level")
        ->capture_default_str();
    app->add_option("--min-above", params.min_above, "seconds above threshold to open a segment")
        ->capture_default_str();
    app->add_option("--min-below", params.min_below, "seconds below threshold to close a segment")
        ->capture_default_str();
    app->add_option("--normalization", normalization,
                    "quiet-level normalisation: slice (mean of the slice) or full (sum / N)")
        ->check(CLI::IsMember({"slice", "full"}))
        ->capture_default_str();
  }

  SegmentationParams resolved() const {
    SegmentationParams p = params;
    p.normalization = normalization == "full" ? ThresholdNormalization::FullLength
                                              : ThresholdNormalization::SliceMean;
    p.validate();
    return p;
  }
};

struct PipelineOpts {
  SegmentationOpts seg;
  PipelineConfig cfg;
  std::string window_fn = "hann";
  CLI::Option* rpm_opt = nullptr;
  CLI::Option* flutes_opt = nullptr;

  void add(CLI::App* app) {
    seg.add(app);
    app->add_option("--frame-len", cfg.spectral.frame_len, "FFT frame length (power of two)")
        ->capture_default_str();
    app->add_option("--stft-hop", cfg.spectral.hop, "samples between STFT columns")
        ->capture_default_str();
    app->add_option("--window", window_fn, "spectral window: hann, hamming or rect")
        ->check(CLI::IsMember({"hann", "hamming", "rect"}))
        ->capture_default_str();
    app->add_option("--welch-subframes", cfg.spectral.welch_subframes,
                    "sub-frames averaged per Welch estimate")
        ->capture_default_str();
    app->add_option("--welch-overlap", cfg.spectral.welch_overlap, "Welch sub-frame overlap in [0, 1)")
        ->capture_default_str();
    app->add_option("--feature-window", cfg.features.window_len, "feature window length (samples)")
        ->capture_default_str();
    app->add_option("--feature-hop", cfg.features.hop, "samples between feature windows")
        ->capture_default_str();
    app->add_option("--mode-bins", cfg.features.mode_bins, "histogram bins for the statistical mode")
        ->capture_default_str();
    app->add_option("--autocorr-lag", cfg.features.autocorr_lag,
                    "autocorrelation lag in samples (0 = one tooth period)")
        ->capture_default_str();
    app->add_option("--higuchi-kmax", cfg.features.higuchi_kmax, "Higuchi kmax")
        ->capture_default_str();
    rpm_opt = app->add_option("--spindle-rpm", cfg.spindle_rpm,
                              "spindle speed (default: manifest value, else 11540)");
    flutes_opt = app->add_option("--flutes", cfg.flutes, "cutter flutes (default: manifest value, else 4)");
    app->add_option("--harmonics", cfg.n_harmonics, "harmonics per process frequency")
        ->capture_default_str();
    app->add_option("--tolerance-bins", cfg.tolerance_bins, "harmonic band half-width in bins")
        ->capture_default_str();
  }

  PipelineConfig resolved(const Manifest* manifest) const {
    PipelineConfig out = cfg;
    out.segmentation = seg.resolved();
    out.spectral.window_fn = window_fn == "hamming" ? WindowFunction::Hamming
                             : window_fn == "rect"  ? WindowFunction::Rectangular
                                                    : WindowFunction::Hann;
    if (manifest && rpm_opt->count() == 0) out.spindle_rpm = manifest->spindle_rpm;
    if (manifest && flutes_opt->count() == 0) out.flutes = manifest->flutes;
    out.validate();
    return out;
  }
};

struct ModelOpts {
  SvcConfig svc;
  TreeConfig tree;

  void add(CLI::App* app) {
    app->add_option("--c", svc.c, "SVC regularisation C")->capture_default_str();
    app->add_option("--gamma", svc.gamma, "RBF gamma (0 = 1 / (d * var))")->capture_default_str();
    app->add_option("--tolerance", svc.tolerance, "SMO KKT tolerance")->capture_default_str();
    app->add_option("--max-iter", svc.max_iter, "SMO iteration limit")->capture_default_str();
    app->add_option("--cache-rows", svc.cache_rows, "kernel rows cached (0 = auto)")
        ->capture_default_str();
    app->add_option("--min-samples-split", tree.min_samples_split, "tree: smallest splittable node")
        ->capture_default_str();
  }

  ModelSpec spec(const std::string& kind) const {
    ModelSpec s = model_spec(kind);
    s.svc = svc;
    s.tree = tree;
    if (!(s.svc.c > 0.0)) throw ParameterError("--c must be > 0");
    if (!(s.svc.tolerance > 0.0)) throw ParameterError("--tolerance must be > 0");
    if (s.tree.min_samples_split < 2) throw ParameterError("--min-samples-split must be >= 2");
    return s;
  }
};

fs::path resolve(const fs::path& base, const std::string& rel) {
  const fs::path p(rel);
  return p.is_absolute() ? p : base / p;
}

bool is_manifest(const fs::path& p) { return p.extension() == ".json"; }

std::string pad2(std::size_t k) {
  std::string s = std::to_string(k);
  if (s.size() < 2) s.insert(0, 2 - s.size(), '0');
  return s;
}

// --- synth ------------------------------------------------------------------

struct SynthCmd {
  MillingConfig cfg;
  std::size_t cycles = 5;
  std::uint64_t seed = 0;
  std::string out;
  std::string profile = "A";
  std::string machine_id;

  void add(CLI::App* app) {
    app->add_option("--cycles", cycles, "number of tool life cycles (>= 2)")->capture_default_str();
    app->add_option("--seed", seed, "root seed; cycle k uses derive(seed, \"cycle\", k)")
        ->capture_default_str();
    app->add_option("--out", out, "output directory (default: $TCM_DATA_DIR)")
        ->envname("TCM_DATA_DIR")
        ->required();
    app->add_option("--profile", profile, "machine profile: A or B")
        ->check(CLI::IsMember({"A", "B"}))
        ->capture_default_str();
    app->add_option("--machine-id", machine_id, "machine id (default: the profile name)");
    app->add_option("--spindle-rpm", cfg.spindle_rpm, "spindle speed")->capture_default_str();
    app->add_option("--flutes", cfg.flutes, "cutter flutes")->capture_default_str();
    app->add_option("--sample-interval", cfg.sample_interval, "seconds per sample")
        ->capture_default_str();
    app->add_option("--idle-noise", cfg.idle_noise, "sensor noise SD")->capture_default_str();
    app->add_option("--process-noise", cfg.process_noise, "broadband cutting noise SD")
        ->capture_default_str();
    app->add_option("--wear-noise", cfg.wear_noise, "band noise SD at full wear")
        ->capture_default_str();
    app->add_option("--harmonic-drift", cfg.harmonic_drift, "relative harmonic growth at full wear")
        ->capture_default_str();
    app->add_option("--waveform-seed", cfg.waveform_seed, "machine-level harmonic phase pattern")
        ->capture_default_str();
    app->add_option("--phase-jitter", cfg.phase_jitter, "per-cycle harmonic phase jitter (rad)")
        ->capture_default_str();
    app->add_option("--wear-transition", cfg.wear_transition,
                    "time fraction where the tool becomes worn")
        ->capture_default_str();
    app->add_option("--onset-jitter", cfg.onset_jitter, "relative per-cycle jitter of the transition")
        ->capture_default_str();
    app->add_option("--segments", cfg.n_segments, "process segments per cycle")->capture_default_str();
    app->add_option("--segment-s", cfg.segment_s, "process segment length (s)")->capture_default_str();
    app->add_option("--gap-s", cfg.gap_s, "idle gap length (s)")->capture_default_str();
  }

  int run(std::ostream& out_s) {
    cfg.machine_profile = parse_profile(profile);
    cfg.validate();
    if (cycles < 2) throw ParameterError("--cycles must be >= 2");
    const Manifest m = generate_dataset(cfg, cycles, seed, out, machine_id);
    out_s << "wrote " << m.cycles.size() << " cycles of machine " << m.machine_id << " to "
          << (fs::path(out) / "manifest.json").string() << '\n';
    return kOk;
  }
};

// --- segment ------------------------------------------------------------------

struct SegmentCmd {
  SegmentationOpts seg;
  std::string input;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--input", input, "trace file (.f32 with sidecar, or .csv) or manifest.json")
        ->required();
    app->add_option("--out", out,
                    "segment CSV for a trace (default: stdout); directory for a manifest");
    seg.add(app);
  }

  int run(std::ostream& out_s, std::ostream& err) {
    const SegmentationParams params = seg.resolved();
    const fs::path in(input);
    if (is_manifest(in)) {
      if (out.empty()) throw ParameterError("--out directory is required with a manifest");
      const Manifest m = read_manifest(in);
      std::error_code ec;
      fs::create_directories(out, ec);
      if (ec) throw IoError(out + ": " + ec.message());
      for (const auto& e : m.cycles) {
        const Trace trace = read_trace(resolve(in.parent_path(), e.trace));
        const SegmentationResult r = segment_with_threshold(trace, params);
        const fs::path dest = fs::path(out) / (e.cycle_id + ".segments.csv");
        write_segments_csv(dest, r.segments, trace.sample_interval());
        out_s << e.cycle_id << ": " << r.segments.size() << " segments, threshold "
              << io::format_double(r.threshold) << '\n';
      }
      return kOk;
    }
    const Trace trace = read_trace(in);
    const SegmentationResult r = segment_with_threshold(trace, params);
    if (r.segments.empty()) err << "warning: " << input << ": no process segments found\n";
    if (out.empty()) {
      write_segments_csv(out_s, r.segments, trace.sample_interval());
    } else {
      write_segments_csv(fs::path(out), r.segments, trace.sample_interval());
      out_s << r.segments.size() << " segments, threshold " << io::format_double(r.threshold) << '\n';
    }
    return kOk;
  }
};

// --- features ---------------------------------------------------------------

struct FeaturesCmd {
  PipelineOpts pipe;
  std::string manifest;
  std::string input;
  std::string labels;
  std::string cycle_id;
  std::string machine_id;
  std::string out;
  std::string export_stft;

  void add(CLI::App* app) {
    auto* m = app->add_option("--manifest", manifest, "dataset manifest.json");
    auto* i = app->add_option("--input", input, "single trace file instead of a manifest");
    m->excludes(i);
    app->add_option("--labels", labels, "label CSV for --input (windows get label -1 without it)");
    app->add_option("--cycle-id", cycle_id, "cycle id for --input (default: file stem)");
    app->add_option("--machine-id", machine_id, "machine id for --input");
    app->add_option("--out", out, "feature CSV to write")->required();
    app->add_option("--export-stft", export_stft,
                    "directory for per-segment STFT tensors (float32 + JSON sidecar)");
    pipe.add(app);
  }

  void process(const Trace& trace, const LabelSeries& lab, const std::string& id,
               const std::string& machine, const PipelineConfig& cfg, Dataset& data,
               std::ostream& err) const {
    CycleBuildReport rep;
    ToolLifeCycle cycle = build_cycle(trace, lab, id, machine, cfg, &rep);
    std::size_t k = 0;
    for (const Segment& s : rep.segments) {
      if (s.length() < cfg.features.window_len) {
        err << "warning: " << id << ": segment [" << s.start << ", " << s.end << ") has "
            << s.length() << " samples, shorter than the feature window (" << cfg.features.window_len
            << "); skipped\n";
        continue;
      }
      if (!export_stft.empty()) {
        const Trace part = trace.slice(s.start, s.end);
        if (part.size() >= cfg.spectral.block_len()) {
          const fs::path dest = fs::path(export_stft) / (id + ".seg" + pad2(k) + ".stft.f32");
          export_stft_tensor(stft(part, cfg.spectral), dest);
        }
      }
      ++k;
    }
    if (rep.segments.empty()) err << "warning: " << id << ": no process segments found\n";
    data.cycles.push_back(std::move(cycle));
  }

  int run(std::ostream& out_s, std::ostream& err) {
    if (manifest.empty() == input.empty())
      throw ParameterError("give exactly one of --manifest or --input");
    if (!export_stft.empty()) {
      std::error_code ec;
      fs::create_directories(export_stft, ec);
      if (ec) throw IoError(export_stft + ": " + ec.message());
    }
    Dataset data;
    if (!manifest.empty()) {
      const fs::path mp(manifest);
      const Manifest m = read_manifest(mp);
      const PipelineConfig cfg = pipe.resolved(&m);
      for (const auto& e : m.cycles) {
        const Trace trace = read_trace(resolve(mp.parent_path(), e.trace));
        const LabelSeries lab = read_label_csv(resolve(mp.parent_path(), e.labels));
        process(trace, lab, e.cycle_id, e.machine_id, cfg, data, err);
      }
    } else {
      const PipelineConfig cfg = pipe.resolved(nullptr);
      const Trace trace = read_trace(input);
      const LabelSeries lab = labels.empty() ? LabelSeries{} : read_label_csv(labels);
      std::string id = cycle_id.empty() ? fs::path(input).stem().string() : cycle_id;
      process(trace, lab, id, machine_id, cfg, data, err);
    }
    write_feature_csv(fs::path(out), data);
    out_s << "wrote " << data.window_count() << " feature windows from " << data.cycles.size()
          << " cycles to " << out << '\n';
    return kOk;
  }
};

// --- train --------------------------------------------------------------------

struct TrainCmd {
  ModelOpts model_opts;
  std::string features;
  std::string model = "svc";
  double train_fraction = 0.6;
  std::uint64_t seed = 0;
  std::string out;
  std::string split_out;

  void add(CLI::App* app) {
    app->add_option("--features", features, "feature CSV")->required();
    app->add_option("--model", model, "model type: svc or tree")
        ->check(CLI::IsMember({"svc", "tree"}))
        ->capture_default_str();
    app->add_option("--train-fraction", train_fraction, "share of cycles used for training")
        ->capture_default_str();
    app->add_option("--seed", seed, "split and solver seed")->capture_default_str();
    app->add_option("--out", out, "model JSON to write")->required();
    app->add_option("--split-out", split_out, "split record (default: <out>.split.json)");
    model_opts.add(app);
  }

  int run(std::ostream& out_s) {
    const ModelSpec spec = model_opts.spec(model);
    const Dataset data = read_feature_csv(features);
    const SplitPlan plan = split_by_cycles(data.cycle_ids(), train_fraction, seed);
    const Dataset train = data.subset(plan.train);
    for (const auto& c : train.cycles) c.validate();
    const Matrix x = feature_matrix(train.cycles);
    const auto y = label_vector(train.cycles);
    const AnyModel m = train_model(spec, x, y, seed, canonical_feature_names());
    save_model(out, m);
    const std::string split_path = split_out.empty() ? out + ".split.json" : split_out;
    io::write_text_file(split_path, split_to_json(plan));
    out_s << "trained " << model << " on " << plan.train.size() << " cycles (" << x.rows()
          << " windows); validation cycles:";
    for (const auto& id : plan.validation) out_s << ' ' << id;
    out_s << "\nwrote " << out << " and " << split_path << '\n';
    return kOk;
  }
};

// --- eval -----------------------------------------------------------------------

struct EvalCmd {
  std::string model;
  std::string features;
  std::string split;
  std::vector<std::string> cycles;
  std::string out_dir;
  std::size_t min_run = 3;

  void add(CLI::App* app) {
    app->add_option("--model", model, "model JSON")->required();
    app->add_option("--features", features, "feature CSV")->required();
    auto* s = app->add_option("--split", split, "split record; its validation cycles are evaluated");
    auto* c = app->add_option("--cycles", cycles, "cycle ids to evaluate (default: all)")
                  ->delimiter(',');
    s->excludes(c);
    app->add_option("--out-dir", out_dir, "directory for predictions, delays and summary CSVs")
        ->required();
    app->add_option("--min-run", min_run, "temporal filter: shortest run kept")->capture_default_str();
  }

  int run(std::ostream& out_s) {
    if (min_run < 1) throw ParameterError("--min-run must be >= 1");
    const AnyModel m = load_model(model);
    const Dataset data = read_feature_csv(features);
    std::vector<std::string> ids = cycles;
    if (!split.empty()) ids = split_from_json(io::read_text_file(split)).validation;
    const Dataset val = ids.empty() ? data : data.subset(ids);
    const EvalReport report = evaluate(m, val.cycles, FilterConfig{min_run});
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError(out_dir + ": " + ec.message());
    write_predictions_csv(fs::path(out_dir) / "predictions.csv", report);
    write_delays_csv(fs::path(out_dir) / "delays.csv", report);
    write_summary_csv(fs::path(out_dir) / "summary.csv", report);
    out_s << "accuracy " << io::format_double(report.accuracy) << " (raw "
          << io::format_double(report.raw_accuracy) << ") over " << report.confusion.total()
          << " windows\n";
    for (const auto& c : report.cycles) {
      out_s << "  " << c.cycle_id << ": accuracy " << io::format_double(c.accuracy) << ", delay ";
      if (c.delay) out_s << *c.delay << " windows\n";
      else out_s << "undefined\n";
    }
    return kOk;
  }
};

// --- sweep ----------------------------------------------------------------------

struct SweepCmd {
  ModelOpts model_opts;
  std::string features;
  std::string eval_features;
  std::vector<std::string> models{"tree", "svc"};
  std::vector<double> fractions{0.2, 0.4, 0.6, 0.8};
  std::size_t seeds = 5;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::size_t min_run = 3;
  std::string out;
  std::string grid_out;

  void add(CLI::App* app) {
    app->add_option("--features", features, "feature CSV (training machine)")->required();
    app->add_option("--eval-features", eval_features,
                    "feature CSV of another machine; all of its cycles are the validation set");
    app->add_option("--models", models, "model types")
        ->delimiter(',')
        ->check(CLI::IsMember({"svc", "tree"}))
        ->capture_default_str();
    app->add_option("--fractions", fractions, "train fractions")->delimiter(',')->capture_default_str();
    app->add_option("--seeds", seeds, "replicates per cell")->capture_default_str();
    app->add_option("--seed", seed, "root seed; replicate k uses derive(seed, \"sweep\", k)")
        ->capture_default_str();
    app->add_option("--jobs", jobs, "cells trained in parallel")->capture_default_str();
    app->add_option("--min-run", min_run, "temporal filter: shortest run kept")->capture_default_str();
    app->add_option("--out", out, "per-cell CSV model,train_fraction,seed,accuracy")->required();
    app->add_option("--grid-out", grid_out, "mean accuracy per model and fraction");
    model_opts.add(app);
  }

  int run(std::ostream& out_s, std::ostream& err) {
    SweepConfig cfg;
    cfg.models.clear();
    for (const auto& m : models) cfg.models.push_back(model_opts.spec(m));
    cfg.fractions = fractions;
    cfg.n_seeds = seeds;
    cfg.root_seed = seed;
    cfg.jobs = jobs;
    cfg.filter.min_run = min_run;
    if (jobs < 1) throw ParameterError("--jobs must be >= 1");
    if (min_run < 1) throw ParameterError("--min-run must be >= 1");
    const Dataset data = read_feature_csv(features);
    std::optional<Dataset> other;
    if (!eval_features.empty()) other = read_feature_csv(eval_features);
    const SweepResult r = sweep(data, cfg, other ? &*other : nullptr);
    write_sweep_csv(fs::path(out), r);
    if (!grid_out.empty()) write_grid_csv(fs::path(grid_out), r);
    for (const auto& c : r.cells)
      if (!c.accuracy)
        err << "warning: " << c.model << " @ " << io::format_double(c.train_fraction) << " seed "
            << c.seed << " failed: " << c.error << '\n';
    out_s << "model";
    for (double f : r.fractions) out_s << std::setw(9) << io::format_double(f);
    out_s << '\n';
    for (std::size_t m = 0; m < r.model_names.size(); ++m) {
      out_s << std::left << std::setw(5) << r.model_names[m] << std::right;
      for (const auto& v : r.grid[m]) {
        std::ostringstream cell;
        if (v) cell << std::fixed << std::setprecision(4) << *v;
        else cell << "failed";
        out_s << std::setw(9) << cell.str();
      }
      out_s << '\n';
    }
    return kOk;
  }
};

int exit_code_for(const Error& e) {
  if (dynamic_cast<const IoError*>(&e)) return kIoError;
  if (dynamic_cast<const ParameterError*>(&e)) return kParameterError;
  if (dynamic_cast<const FormatError*>(&e)) return kFormatError;
  if (dynamic_cast<const SchemaError*>(&e)) return kSchemaError;
  if (dynamic_cast<const TrainingError*>(&e)) return kTrainingError;
  return kFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tool condition monitoring from spindle vibration: synthetic data, "
               "segmentation, features, classifiers and evaluation."};
  app.name("tcm");
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>(find_command(argc, argv)));
  app.set_config("--config", "", "flat JSON file of option values (flags take precedence)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();  // subcommands inherit it, so --config may follow the subcommand

  SynthCmd synth;
  SegmentCmd seg;
  FeaturesCmd feat;
  TrainCmd train;
  EvalCmd eval;
  SweepCmd sweep_cmd;
  auto* s_synth = app.add_subcommand("synth", "generate a synthetic dataset (traces, labels, manifest)");
  auto* s_seg = app.add_subcommand("segment", "detect process segments in traces");
  auto* s_feat = app.add_subcommand("features", "extract feature windows into a CSV");
  auto* s_train = app.add_subcommand("train", "train a classifier on a cycle-aware split");
  auto* s_eval = app.add_subcommand("eval", "evaluate a model with the temporal filter");
  auto* s_sweep = app.add_subcommand("sweep", "accuracy heatmap over models, fractions and seeds");
  synth.add(s_synth);
  seg.add(s_seg);
  feat.add(s_feat);
  train.add(s_train);
  eval.add(s_eval);
  sweep_cmd.add(s_sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (s_synth->parsed()) return synth.run(out);
    if (s_seg->parsed()) return seg.run(out, err);
    if (s_feat->parsed()) return feat.run(out, err);
    if (s_train->parsed()) return train.run(out);
    if (s_eval->parsed()) return eval.run(out);
    if (s_sweep->parsed()) return sweep_cmd.run(out, err);
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace tcm::cli
