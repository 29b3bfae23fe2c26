#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tcm/dataset.hpp"
#include "tcm/signal.hpp"

namespace tcm {

/// Which band the wear noise enters. A: 1.2-3.6 kHz only. B: mostly
/// 4.5-7 kHz with a weaker share in the A band.
enum class MachineProfile { A, B };

struct WearBand {
  double lo_hz;
  double hi_hz;
  double power_weight;  // share of the wear noise power put in this band
};

std::vector<WearBand> wear_bands(MachineProfile profile);
std::string profile_name(MachineProfile profile);
MachineProfile parse_profile(const std::string& name);

struct MillingConfig {
  double spindle_rpm = 11540.0;
  unsigned flutes = 4;
  double sample_interval = kDefaultSampleInterval;

  // lab-frame x amplitudes of tooth-pass multiples 1, 2, ...; y uses y_ratio
  std::vector<double> tooth_harmonics{0.45, 0.25, 0.12, 0.06};
  std::vector<double> spindle_harmonics{0.10, 0.04};
  double y_ratio = 0.6;
  double idle_noise = 0.01;      // sensor noise SD, present all the time
  double process_noise = 0.12;   // broadband cutting noise SD per lab axis
  double wear_noise = 0.35;      // band noise SD per lab axis at wear = 1
  double harmonic_drift = 0.2;   // relative harmonic growth at wear = 1
  std::uint64_t waveform_seed = 1;  // machine-level harmonic phase pattern
  double phase_jitter = 0.15;       // per-cycle harmonic phase jitter (rad)

  /// Control points (time fraction, wear), linearly interpolated.
  std::vector<std::pair<double, double>> wear_curve{
      {0.0, 0.0}, {0.1, 0.15}, {0.6, 0.5}, {0.8, 0.8}, {1.0, 1.0}};
  double wear_transition = 0.6;
  double onset_jitter = 0.1;  // per-cycle transition = wear_transition * (1 + U(-j, j))
  MachineProfile machine_profile = MachineProfile::A;

  // default layout: idle gap, then n_segments x (process, idle gap)
  std::size_t n_segments = 10;
  double segment_s = 20.0;
  double gap_s = 2.0;

  /// Lower bound on expected process RMS / idle RMS at wear 0.
  double min_process_idle_ratio = 10.0;

  void validate() const;
  double spindle_hz() const { return spindle_rpm / 60.0; }
  double tooth_pass_hz() const { return spindle_rpm / 60.0 * flutes; }
  /// Cycle length under the default layout.
  double default_duration() const;
  /// Expected RMS of the sensor channel while cutting at wear 0.
  double expected_process_rms() const;
};

/// Wear level of the configured curve at time fraction u in [0, 1].
double wear_at(const MillingConfig& cfg, double u);

/// Process intervals of one recording, in seconds.
struct CycleLayout {
  double duration_s = 0.0;
  std::vector<std::pair<double, double>> process;  // [start, end), sorted, disjoint
};

CycleLayout default_layout(const MillingConfig& cfg);
/// Fits as many segment_s process intervals separated by gap_s as the
/// duration allows (idle at both ends). Needs room for at least 2.
CycleLayout layout_for_duration(const MillingConfig& cfg, double duration_s);

struct GeneratedCycle {
  Trace trace;
  std::vector<Segment> truth;   // exact process intervals in samples
  LabelSeries labels;           // NotWorn from 0, Worn from transition_s
  double transition_fraction;   // jittered per cycle
  double transition_s;
};

/// Deterministic given (cfg, layout, seed). The per-cycle wear onset is
/// drawn from the seed; pass `transition_fraction` > 0 to fix it instead.
GeneratedCycle generate_cycle(const MillingConfig& cfg, const CycleLayout& layout,
                              std::uint64_t seed, const std::string& source_id = {},
                              double transition_fraction = 0.0);
GeneratedCycle generate_cycle(const MillingConfig& cfg, double duration_s, std::uint64_t seed);
GeneratedCycle generate_cycle(const MillingConfig& cfg, std::uint64_t seed);

/// Per-cycle seed used by generate_dataset.
std::uint64_t cycle_seed(std::uint64_t root_seed, std::size_t index);
std::string cycle_id_for(const std::string& machine_id, std::size_t index);

/// Writes cycle_NN.f32 (+ sidecar), cycle_NN.labels.csv,
/// cycle_NN.segments.csv and manifest.json into out_dir.
Manifest generate_dataset(const MillingConfig& cfg, std::size_t n_cycles, std::uint64_t root_seed,
                          const std::filesystem::path& out_dir,
                          const std::string& machine_id = {});

}  // namespace tcm
