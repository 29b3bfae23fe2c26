#include "tcm/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "tcm/error.hpp"
#include "tcm/kinematics.hpp"
#include "tcm/rng.hpp"
#include "tcm/trace_io.hpp"

namespace tcm {

std::vector<WearBand> wear_bands(MachineProfile profile) {
  if (profile == MachineProfile::A) return {{1200.0, 3600.0, 1.0}};
  return {{1200.0, 3600.0, 0.3}, {4500.0, 7000.0, 1.0}};
}

std::string profile_name(MachineProfile profile) {
  return profile == MachineProfile::A ? "A" : "B";
}

MachineProfile parse_profile(const std::string& name) {
  if (name == "A" || name == "a") return MachineProfile::A;
  if (name == "B" || name == "b") return MachineProfile::B;
  throw ParameterError("unknown machine profile '" + name + "' (expected A or B)");
}

void MillingConfig::validate() const {
  if (!(spindle_rpm > 0.0)) throw ParameterError("synth: spindle_rpm must be > 0");
  if (flutes < 1) throw ParameterError("synth: flutes must be >= 1");
  if (!(sample_interval > 0.0) || !std::isfinite(sample_interval))
    throw ParameterError("synth: sample_interval must be > 0");
  auto non_negative = [](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ParameterError(std::string("synth: ") + what + " must be finite and >= 0");
  };
  for (double a : tooth_harmonics) non_negative(a, "tooth harmonic amplitude");
  for (double a : spindle_harmonics) non_negative(a, "spindle harmonic amplitude");
  non_negative(y_ratio, "y_ratio");
  non_negative(idle_noise, "idle_noise");
  non_negative(process_noise, "process_noise");
  non_negative(wear_noise, "wear_noise");
  non_negative(harmonic_drift, "harmonic_drift");
  non_negative(phase_jitter, "phase_jitter");

  if (wear_curve.size() < 2) throw ParameterError("synth: wear curve needs >= 2 points");
  if (wear_curve.front().first != 0.0 || wear_curve.back().first != 1.0)
    throw ParameterError("synth: wear curve must span time fractions 0 to 1");
  if (wear_curve.front().second != 0.0)
    throw ParameterError("synth: wear curve must start at 0");
  for (std::size_t i = 0; i < wear_curve.size(); ++i) {
    const auto [u, w] = wear_curve[i];
    if (!(w >= 0.0 && w <= 1.0)) throw ParameterError("synth: wear values must lie in [0, 1]");
    if (i > 0 && !(u > wear_curve[i - 1].first))
      throw ParameterError("synth: wear curve time fractions must increase");
    if (i > 0 && w < wear_curve[i - 1].second)
      throw ParameterError("synth: wear curve must be non-decreasing");
  }
  if (!(wear_transition > 0.0 && wear_transition < 1.0))
    throw ParameterError("synth: wear_transition must lie in (0, 1)");
  if (!(onset_jitter >= 0.0 && onset_jitter < 1.0))
    throw ParameterError("synth: onset_jitter must lie in [0, 1)");
  if (!(wear_transition * (1.0 + onset_jitter) < 1.0))
    throw ParameterError("synth: jittered wear_transition reaches the end of the cycle");

  if (n_segments < 1) throw ParameterError("synth: n_segments must be >= 1");
  if (!(segment_s > 0.0) || !(gap_s > 0.0))
    throw ParameterError("synth: segment_s and gap_s must be > 0");

  const double nyquist = 0.5 / sample_interval;
  for (const auto& b : wear_bands(machine_profile))
    if (!(b.hi_hz < nyquist))
      throw ParameterError("synth: wear band above the Nyquist frequency");

  if (idle_noise > 0.0 && expected_process_rms() / idle_noise < min_process_idle_ratio)
    throw ParameterError("synth: process/idle RMS ratio below min_process_idle_ratio");
}

double MillingConfig::default_duration() const {
  return gap_s + static_cast<double>(n_segments) * (segment_s + gap_s);
}

double MillingConfig::expected_process_rms() const {
  double harmonic = 0.0;
  for (double a : tooth_harmonics) harmonic += a * a / 2.0;
  for (double a : spindle_harmonics) harmonic += a * a / 2.0;
  const double px = harmonic + process_noise * process_noise;
  const double py = y_ratio * y_ratio * harmonic + process_noise * process_noise;
  // the rotating sensor sees the mean of both lab axes
  return std::sqrt((px + py) / 2.0 + idle_noise * idle_noise);
}

double wear_at(const MillingConfig& cfg, double u) {
  const auto& c = cfg.wear_curve;
  if (u <= c.front().first) return c.front().second;
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (u <= c[i].first) {
      const double s = (u - c[i - 1].first) / (c[i].first - c[i - 1].first);
      return c[i - 1].second + s * (c[i].second - c[i - 1].second);
    }
  }
  return c.back().second;
}

CycleLayout default_layout(const MillingConfig& cfg) {
  CycleLayout layout;
  layout.duration_s = cfg.default_duration();
  double t = cfg.gap_s;
  for (std::size_t k = 0; k < cfg.n_segments; ++k) {
    layout.process.emplace_back(t, t + cfg.segment_s);
    t += cfg.segment_s + cfg.gap_s;
  }
  return layout;
}

CycleLayout layout_for_duration(const MillingConfig& cfg, double duration_s) {
  if (!(duration_s > 0.0)) throw ParameterError("synth: duration must be > 0");
  const double n = std::floor((duration_s - cfg.gap_s) / (cfg.segment_s + cfg.gap_s));
  if (!(n >= 2.0))
    throw ParameterError("synth: duration too short for 2 process segments");
  CycleLayout layout;
  layout.duration_s = duration_s;
  double t = cfg.gap_s;
  for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
    layout.process.emplace_back(t, t + cfg.segment_s);
    t += cfg.segment_s + cfg.gap_s;
  }
  return layout;
}

namespace {

constexpr double kPi = std::numbers::pi;

struct Biquad {
  double b0, b1, b2, a1, a2;
  double z1 = 0.0, z2 = 0.0;

  double step(double x) {
    const double y = b0 * x + z1;
    z1 = b1 * x - a1 * y + z2;
    z2 = b2 * x - a2 * y;
    return y;
  }
};

// Second-order Butterworth sections (bilinear, prewarped corner).
Biquad lowpass(double fc, double dt) {
  const double w0 = 2.0 * kPi * fc * dt;
  const double alpha = std::sin(w0) / std::numbers::sqrt2;
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  return {(1.0 - cw) / 2.0 / a0, (1.0 - cw) / a0, (1.0 - cw) / 2.0 / a0, -2.0 * cw / a0,
          (1.0 - alpha) / a0};
}

Biquad highpass(double fc, double dt) {
  const double w0 = 2.0 * kPi * fc * dt;
  const double alpha = std::sin(w0) / std::numbers::sqrt2;
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  return {(1.0 + cw) / 2.0 / a0, -(1.0 + cw) / a0, (1.0 + cw) / 2.0 / a0, -2.0 * cw / a0,
          (1.0 - alpha) / a0};
}

// Two high-pass and two low-pass sections, scaled to unit output variance
// for unit white input.
class BandFilter {
 public:
  BandFilter(double lo_hz, double hi_hz, double dt)
      : stages_{highpass(lo_hz, dt), highpass(lo_hz, dt), lowpass(hi_hz, dt),
                lowpass(hi_hz, dt)} {
    BandFilter probe = *this;
    double energy = 0.0;
    for (std::size_t i = 0; i < (std::size_t{1} << 16); ++i) {
      const double h = probe.raw(i == 0 ? 1.0 : 0.0);
      energy += h * h;
    }
    gain_ = energy > 0.0 ? 1.0 / std::sqrt(energy) : 0.0;
  }

  double step(double x) { return gain_ * raw(x); }

 private:
  double raw(double x) {
    for (auto& s : stages_) x = s.step(x);
    return x;
  }

  std::array<Biquad, 4> stages_;
  double gain_ = 1.0;
};

std::vector<double> band_noise(std::size_t n, const WearBand& band, double dt,
                               std::uint64_t seed) {
  Rng rng(seed);
  BandFilter filter(band.lo_hz, band.hi_hz, dt);
  std::vector<double> out(n);
  for (auto& v : out) v = filter.step(rng.normal());
  return out;
}

void validate_layout(const CycleLayout& layout) {
  if (!(layout.duration_s > 0.0)) throw ParameterError("synth: layout duration must be > 0");
  if (layout.process.size() < 2) throw ParameterError("synth: layout needs >= 2 process intervals");
  double prev = 0.0;
  for (const auto& [s, e] : layout.process) {
    if (!(s >= prev) || !(e > s) || !(e <= layout.duration_s))
      throw ParameterError("synth: process intervals must be sorted, disjoint and inside the trace");
    prev = e;
  }
}

}  // namespace

GeneratedCycle generate_cycle(const MillingConfig& cfg, const CycleLayout& layout,
                              std::uint64_t seed, const std::string& source_id,
                              double transition_fraction) {
  cfg.validate();
  validate_layout(layout);
  const double dt = cfg.sample_interval;
  const auto n = static_cast<std::size_t>(std::llround(layout.duration_s / dt));

  double tau = transition_fraction;
  if (!(tau > 0.0)) {
    Rng onset(derive_seed(seed, "synth.onset"));
    tau = cfg.wear_transition * (1.0 + onset.uniform(-cfg.onset_jitter, cfg.onset_jitter));
  }
  if (!(tau > 0.0 && tau < 1.0)) throw ParameterError("synth: transition fraction outside (0, 1)");

  // Time warp so that the wear level at this cycle's transition equals the
  // nominal level at wear_transition.
  const double tau0 = cfg.wear_transition;
  auto warped = [&](double u) {
    return u < tau ? u / tau * tau0 : tau0 + (u - tau) / (1.0 - tau) * (1.0 - tau0);
  };

  std::vector<Segment> truth;
  std::vector<char> cutting(n, 0);
  for (const auto& [s, e] : layout.process) {
    const auto a = static_cast<std::size_t>(std::llround(s / dt));
    const auto b = std::min(n, static_cast<std::size_t>(std::llround(e / dt)));
    if (b <= a) continue;
    truth.push_back({a, b, source_id});
    std::fill(cutting.begin() + static_cast<std::ptrdiff_t>(a),
              cutting.begin() + static_cast<std::ptrdiff_t>(b), 1);
  }

  std::vector<double> wear(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (cutting[i]) wear[i] = wear_at(cfg, warped(static_cast<double>(i) / static_cast<double>(n)));

  // Harmonic phases describe the machine's waveform (elliptical lab-frame
  // orbit, x and y offset); cycles only jitter them slightly.
  Rng shape_rng(derive_seed(cfg.waveform_seed, "synth.waveform"));
  Rng jitter_rng(derive_seed(seed, "synth.phase"));
  struct Tone {
    double freq, amp, phase_x, phase_y;
  };
  std::vector<Tone> tones;
  auto add_tones = [&](const std::vector<double>& amps, double base_hz) {
    for (std::size_t h = 0; h < amps.size(); ++h) {
      const double px = shape_rng.uniform(0.0, 2.0 * kPi);
      const double py = px + shape_rng.uniform(0.25 * kPi, 0.75 * kPi);
      const double jx = jitter_rng.uniform(-cfg.phase_jitter, cfg.phase_jitter);
      const double jy = jitter_rng.uniform(-cfg.phase_jitter, cfg.phase_jitter);
      tones.push_back({base_hz * static_cast<double>(h + 1), amps[h], px + jx, py + jy});
    }
  };
  add_tones(cfg.tooth_harmonics, cfg.tooth_pass_hz());
  add_tones(cfg.spindle_harmonics, cfg.spindle_hz());
  const double initial_phase = shape_rng.uniform(0.0, 2.0 * kPi) +
                               jitter_rng.uniform(-cfg.phase_jitter, cfg.phase_jitter);

  std::vector<double> ax(n, 0.0), ay(n, 0.0);
  for (const Tone& tone : tones) {
    const double cx = tone.amp * std::cos(tone.phase_x), sx = tone.amp * std::sin(tone.phase_x);
    const double cy = cfg.y_ratio * tone.amp * std::cos(tone.phase_y);
    const double sy = cfg.y_ratio * tone.amp * std::sin(tone.phase_y);
    const double w = 2.0 * kPi * tone.freq * dt;
    for (std::size_t i = 0; i < n; ++i) {
      if (!cutting[i]) continue;
      const double th = w * static_cast<double>(i);
      const double c = std::cos(th), s = std::sin(th);
      const double g = 1.0 + cfg.harmonic_drift * wear[i];
      ax[i] += g * (c * cx - s * sx);
      ay[i] += g * (c * cy - s * sy);
    }
  }

  {
    Rng nx(derive_seed(seed, "synth.process", 0));
    Rng ny(derive_seed(seed, "synth.process", 1));
    for (std::size_t i = 0; i < n; ++i) {
      const double ex = nx.normal(), ey = ny.normal();
      if (!cutting[i]) continue;
      ax[i] += cfg.process_noise * ex;
      ay[i] += cfg.process_noise * ey;
    }
  }

  const auto bands = wear_bands(cfg.machine_profile);
  for (std::size_t b = 0; b < bands.size(); ++b) {
    // stream by band position in the frequency plan so profiles share draws
    const std::uint64_t band_key = bands[b].lo_hz < 4000.0 ? 0 : 1;
    const auto bx = band_noise(n, bands[b], dt, derive_seed(seed, "synth.wear.x", band_key));
    const auto by = band_noise(n, bands[b], dt, derive_seed(seed, "synth.wear.y", band_key));
    const double scale = cfg.wear_noise * std::sqrt(bands[b].power_weight);
    for (std::size_t i = 0; i < n; ++i) {
      if (!cutting[i]) continue;
      ax[i] += scale * wear[i] * bx[i];
      ay[i] += scale * wear[i] * by[i];
    }
  }

  RotationState rot{cfg.spindle_rpm, initial_phase};
  SensorAxes sensor = rotate_to_sensor(ax, ay, rot, dt);
  std::vector<double> samples = std::move(sensor.radial);
  {
    Rng idle(derive_seed(seed, "synth.sensor"));
    for (auto& v : samples) v += cfg.idle_noise * idle.normal();
  }

  const double transition_s = tau * layout.duration_s;
  LabelSeries labels;
  labels.changes = {{0.0, 0}, {transition_s, 1}};
  return GeneratedCycle{Trace(std::move(samples), dt, source_id), std::move(truth),
                        std::move(labels), tau, transition_s};
}

GeneratedCycle generate_cycle(const MillingConfig& cfg, double duration_s, std::uint64_t seed) {
  cfg.validate();
  return generate_cycle(cfg, layout_for_duration(cfg, duration_s), seed);
}

GeneratedCycle generate_cycle(const MillingConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  return generate_cycle(cfg, default_layout(cfg), seed);
}

std::uint64_t cycle_seed(std::uint64_t root_seed, std::size_t index) {
  return derive_seed(root_seed, "cycle", index);
}

std::string cycle_id_for(const std::string& machine_id, std::size_t index) {
  std::string num = std::to_string(index);
  if (num.size() < 2) num.insert(0, 2 - num.size(), '0');
  return machine_id + "-c" + num;
}

Manifest generate_dataset(const MillingConfig& cfg, std::size_t n_cycles, std::uint64_t root_seed,
                          const std::filesystem::path& out_dir, const std::string& machine_id) {
  cfg.validate();
  if (n_cycles < 2) throw ParameterError("synth: n_cycles must be >= 2");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string() + ": " + ec.message());

  Manifest manifest;
  manifest.machine_id = machine_id.empty() ? profile_name(cfg.machine_profile) : machine_id;
  manifest.sample_interval = cfg.sample_interval;
  manifest.spindle_rpm = cfg.spindle_rpm;
  manifest.flutes = cfg.flutes;
  for (std::size_t k = 0; k < n_cycles; ++k) {
    const std::uint64_t seed = cycle_seed(root_seed, k);
    const std::string id = cycle_id_for(manifest.machine_id, k);
    GeneratedCycle g = generate_cycle(cfg, default_layout(cfg), seed, id);
    std::string stem = std::to_string(k);
    if (stem.size() < 2) stem.insert(0, 2 - stem.size(), '0');
    stem = "cycle_" + stem;

    ManifestEntry e;
    e.cycle_id = id;
    e.machine_id = manifest.machine_id;
    e.trace = stem + ".f32";
    e.labels = stem + ".labels.csv";
    e.segments = stem + ".segments.csv";
    e.seed = seed;
    e.wear_transition = g.transition_fraction;
    write_trace_binary(out_dir / e.trace, g.trace);
    write_label_csv(out_dir / e.labels, g.labels);
    write_segments_csv(out_dir / e.segments, g.truth, cfg.sample_interval);
    manifest.cycles.push_back(std::move(e));
  }
  write_manifest(out_dir / "manifest.json", manifest);
  return manifest;
}

}  // namespace tcm
