#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcm/signal.hpp"
#include "tcm/spectral.hpp"

namespace tcm {

/// Canonical feature order. It is also the column order of the feature CSV
/// and must not be reshuffled.
enum class Feature : std::size_t {
  Mean,
  Rms,
  Sd,
  CrestFactor,
  Kurtosis,
  Skewness,
  StatMode,
  StatModeSd,
  P2P,
  CenterFreq,
  DominantFreq,
  PsdEnergy,
  SpectralEntropy,
  PeriodicEnergy,
  AperiodicEnergy,
  RelAperiodicEnergy,
  Autocorr,
  HiguchiFd,
};

inline constexpr std::size_t kFeatureCount = 18;

const std::array<std::string_view, kFeatureCount>& feature_names();
std::string_view feature_name(Feature f);

/// Bit i set => feature i was undefined for this window and holds a
/// substitute value (0, or 1 for the fractal dimension).
using QualityFlags = std::uint32_t;

constexpr QualityFlags flag_of(Feature f) {
  return QualityFlags{1} << static_cast<std::size_t>(f);
}

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  QualityFlags flags = 0;
  std::string cycle_id;
  double t_start_s = 0.0;

  double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
  bool flagged(Feature f) const { return (flags & flag_of(f)) != 0; }
};

struct ProcessFrequencies {
  double spindle_hz = 11540.0 / 60.0;
  double tooth_pass_hz = 11540.0 / 60.0 * 4.0;
  std::size_t n_harmonics = 10;
  double tolerance_hz = 22.5;  // half-width of each harmonic band

  void validate() const;

  /// Spindle rate n/60, tooth-pass rate n/60 * flutes, bands of
  /// +/- tolerance_bins * bin_hz.
  static ProcessFrequencies from_process(double spindle_rpm, unsigned flutes,
                                         double bin_hz, std::size_t n_harmonics = 10,
                                         double tolerance_bins = 1.5);
};

struct FeatureWindowConfig {
  std::size_t window_len = 8192;
  std::size_t hop = 4096;
  std::size_t mode_bins = 64;
  std::size_t autocorr_lag = 0;  // 0 = one tooth period, resolved by resolve()
  std::size_t higuchi_kmax = 16;

  void validate() const;
  /// Copy with autocorr_lag filled in from the tooth-pass rate when it is 0.
  FeatureWindowConfig resolved(double sample_rate, const ProcessFrequencies& pf) const;
};

struct TimeFeatures {
  double mean = 0, rms = 0, sd = 0, crest_factor = 0, kurtosis = 0, skewness = 0, p2p = 0;
  QualityFlags flags = 0;
};

struct ModeFeatures {
  double stat_mode = 0;
  double stat_mode_sd = 0;
};

struct FreqFeatures {
  double center_freq = 0, dominant_freq = 0, psd_energy = 0, spectral_entropy = 0;
  double periodic_energy = 0, aperiodic_energy = 0, rel_aperiodic_energy = 0;
  QualityFlags flags = 0;
};

/// Mean, RMS, SD (N-1), crest max|x|/RMS, kurtosis and skewness as
/// (1/N) sum(((x - mean) / SD)^p), p2p max - min.
TimeFeatures time_features(std::span<const double> window);

/// Equal-width histogram over [min, max]; the mode is the centre of the most
/// populated bin (lowest bin on ties), its SD the population SD of the
/// samples in that bin.
ModeFeatures mode_features(std::span<const double> window, std::size_t mode_bins);

FreqFeatures freq_features(const PowerSpectrum& psd, const ProcessFrequencies& pf);

/// True for bins whose centre lies within tolerance of m * spindle or
/// m * tooth-pass, m = 1..n_harmonics.
std::vector<bool> harmonic_band_mask(const PowerSpectrum& psd, const ProcessFrequencies& pf);

/// Mean-removed autocorrelation at `lag`, normalised by the lag-0 sum.
/// Returns 0 and sets *flagged for a zero-variance window.
double autocorr(std::span<const double> window, std::size_t lag, bool* flagged = nullptr);

/// Higuchi fractal dimension: slope of log L(k) against log(1/k) for
/// k = 1..kmax. A constant window returns 1 and sets *flagged.
double higuchi_fd(std::span<const double> window, std::size_t kmax, bool* flagged = nullptr);

/// Every feature of one window.
FeatureVector compute_features(std::span<const double> window, double sample_interval,
                               const FeatureWindowConfig& cfg, const WindowConfig& wcfg,
                               const ProcessFrequencies& pf);

/// Slides the feature window over samples (time order preserved). t0 is the
/// time of samples[0] within the parent recording.
std::vector<FeatureVector> extract(std::span<const double> samples, double sample_interval,
                                   const FeatureWindowConfig& cfg, const WindowConfig& wcfg,
                                   const ProcessFrequencies& pf,
                                   const std::string& cycle_id = {}, double t0 = 0.0);

/// Features of one segment of `trace`; window times are relative to the trace.
std::vector<FeatureVector> extract(const Trace& trace, const Segment& segment,
                                   const FeatureWindowConfig& cfg, const WindowConfig& wcfg,
                                   const ProcessFrequencies& pf,
                                   const std::string& cycle_id = {});

}  // namespace tcm
