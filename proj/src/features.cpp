#include "tcm/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tcm/error.hpp"

namespace tcm {

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> names = {
      "mean",          "rms",          "sd",
      "crest_factor",  "kurtosis",     "skewness",
      "stat_mode",     "stat_mode_sd", "p2p",
      "center_freq",   "dominant_freq", "psd_energy",
      "spectral_entropy", "periodic_energy", "aperiodic_energy",
      "rel_aperiodic_energy", "autocorr", "higuchi_fd"};
  return names;
}

std::string_view feature_name(Feature f) { return feature_names()[static_cast<std::size_t>(f)]; }

void ProcessFrequencies::validate() const {
  if (!(spindle_hz > 0.0) || !(tooth_pass_hz > 0.0) || !(tolerance_hz > 0.0) ||
      n_harmonics == 0)
    throw ParameterError("process frequencies, harmonic count and tolerance must be > 0");
}

ProcessFrequencies ProcessFrequencies::from_process(double spindle_rpm, unsigned flutes,
                                                    double bin_hz, std::size_t n_harmonics,
                                                    double tolerance_bins) {
  if (!(spindle_rpm > 0.0) || flutes == 0 || !(bin_hz > 0.0))
    throw ParameterError("spindle_rpm, flutes and bin_hz must be > 0");
  ProcessFrequencies pf;
  pf.spindle_hz = spindle_rpm / 60.0;
  pf.tooth_pass_hz = pf.spindle_hz * static_cast<double>(flutes);
  pf.n_harmonics = n_harmonics;
  pf.tolerance_hz = tolerance_bins * bin_hz;
  pf.validate();
  return pf;
}

void FeatureWindowConfig::validate() const {
  if (higuchi_kmax < 2) throw ParameterError("higuchi_kmax must be >= 2");
  if (window_len < 4 * higuchi_kmax)
    throw ParameterError("feature window_len must be >= 4 * higuchi_kmax");
  if (hop == 0) throw ParameterError("feature hop must be > 0");
  if (mode_bins < 2) throw ParameterError("mode_bins must be >= 2");
  if (window_len < mode_bins) throw ParameterError("feature window_len must be >= mode_bins");
  if (autocorr_lag >= window_len)
    throw ParameterError("autocorr_lag must be < window_len (0 = one tooth period)");
}

FeatureWindowConfig FeatureWindowConfig::resolved(double sample_rate,
                                                  const ProcessFrequencies& pf) const {
  FeatureWindowConfig out = *this;
  if (out.autocorr_lag == 0) {
    pf.validate();
    out.autocorr_lag = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(sample_rate / pf.tooth_pass_hz)));
  }
  return out;
}

TimeFeatures time_features(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw LengthError("time_features needs at least 2 samples");
  const double dn = static_cast<double>(n);
  TimeFeatures f;
  double sum = 0.0, sumsq = 0.0, peak = 0.0;
  double lo = x[0], hi = x[0];
  for (double v : x) {
    sum += v;
    sumsq += v * v;
    peak = std::max(peak, std::abs(v));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  f.mean = sum / dn;
  f.rms = std::sqrt(sumsq / dn);
  f.p2p = hi - lo;
  double m2 = 0.0;
  for (double v : x) m2 += (v - f.mean) * (v - f.mean);
  f.sd = std::sqrt(m2 / (dn - 1.0));

  if (f.rms > 0.0) {
    f.crest_factor = peak / f.rms;
  } else {
    f.flags |= flag_of(Feature::CrestFactor);
  }
  if (f.sd > 0.0) {
    double m3 = 0.0, m4 = 0.0;
    for (double v : x) {
      const double z = (v - f.mean) / f.sd;
      m3 += z * z * z;
      m4 += z * z * z * z;
    }
    f.skewness = m3 / dn;
    f.kurtosis = m4 / dn;
  } else {
    f.flags |= flag_of(Feature::Skewness) | flag_of(Feature::Kurtosis);
  }
  return f;
}

ModeFeatures mode_features(std::span<const double> x, std::size_t mode_bins) {
  if (mode_bins < 2) throw ParameterError("mode_bins must be >= 2");
  if (x.size() < mode_bins) throw LengthError("mode_features needs at least mode_bins samples");
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) return {lo, 0.0};

  const double width = (hi - lo) / static_cast<double>(mode_bins);
  auto bin_of = [&](double v) {
    const auto b = static_cast<std::size_t>((v - lo) / width);
    return std::min(b, mode_bins - 1);
  };
  std::vector<std::size_t> counts(mode_bins, 0);
  for (double v : x) ++counts[bin_of(v)];
  // max_element returns the first maximum, i.e. the lowest bin on ties
  const std::size_t best = static_cast<std::size_t>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());

  double sum = 0.0;
  for (double v : x)
    if (bin_of(v) == best) sum += v;
  const double mean = sum / static_cast<double>(counts[best]);
  double ss = 0.0;
  for (double v : x)
    if (bin_of(v) == best) ss += (v - mean) * (v - mean);

  ModeFeatures out;
  out.stat_mode = lo + (static_cast<double>(best) + 0.5) * width;
  out.stat_mode_sd = std::sqrt(ss / static_cast<double>(counts[best]));
  return out;
}

std::vector<bool> harmonic_band_mask(const PowerSpectrum& psd, const ProcessFrequencies& pf) {
  pf.validate();
  std::vector<bool> mask(psd.n_bins(), false);
  const double nyquist = psd.frequency(psd.n_bins() == 0 ? 0 : psd.n_bins() - 1);
  for (double base : {pf.spindle_hz, pf.tooth_pass_hz}) {
    for (std::size_t m = 1; m <= pf.n_harmonics; ++m) {
      const double centre = base * static_cast<double>(m);
      if (centre - pf.tolerance_hz > nyquist) break;
      const double lo = centre - pf.tolerance_hz;
      const double hi = centre + pf.tolerance_hz;
      const auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(lo / psd.bin_hz)));
      for (std::size_t i = first; i < psd.n_bins() && psd.frequency(i) <= hi; ++i)
        if (psd.frequency(i) >= lo) mask[i] = true;
    }
  }
  return mask;
}

FreqFeatures freq_features(const PowerSpectrum& psd, const ProcessFrequencies& pf) {
  if (psd.n_bins() == 0 || !(psd.bin_hz > 0.0))
    throw ParameterError("freq_features needs a non-empty spectrum with bin_hz > 0");
  FreqFeatures f;
  const auto& a = psd.bins;
  const std::size_t n = a.size();

  double total = 0.0, weighted = 0.0, sq = 0.0;
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += a[i];
    weighted += psd.frequency(i) * a[i];
    sq += a[i] * a[i];
    if (a[i] > a[argmax]) argmax = i;
  }
  f.dominant_freq = psd.frequency(argmax);
  f.psd_energy = sq / static_cast<double>(n);

  const auto mask = harmonic_band_mask(psd, pf);
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) f.periodic_energy += a[i];
  f.aperiodic_energy = total - f.periodic_energy;

  if (total > 0.0) {
    f.center_freq = weighted / total;
    double h = 0.0;
    for (double v : a) {
      const double p = v / total;
      if (p > 0.0) h -= p * std::log2(p);
    }
    f.spectral_entropy = h;
    f.rel_aperiodic_energy = f.aperiodic_energy / total;
  } else {
    f.flags |= flag_of(Feature::CenterFreq) | flag_of(Feature::SpectralEntropy) |
               flag_of(Feature::RelAperiodicEnergy);
  }
  return f;
}

double autocorr(std::span<const double> x, std::size_t lag, bool* flagged) {
  if (lag >= x.size()) throw ParameterError("autocorr lag must be smaller than the window");
  if (flagged) *flagged = false;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mean;
    den += d * d;
    if (i + lag < x.size()) num += d * (x[i + lag] - mean);
  }
  if (!(den > 0.0)) {
    if (flagged) *flagged = true;
    return 0.0;
  }
  return num / den;
}

double higuchi_fd(std::span<const double> x, std::size_t kmax, bool* flagged) {
  if (kmax < 2) throw ParameterError("higuchi kmax must be >= 2");
  if (x.size() < 4 * kmax) throw LengthError("higuchi_fd needs at least 4 * kmax samples");
  if (flagged) *flagged = false;
  const std::size_t n = x.size();
  std::vector<double> log_inv_k, log_l;
  log_inv_k.reserve(kmax);
  log_l.reserve(kmax);
  for (std::size_t k = 1; k <= kmax; ++k) {
    double lk = 0.0;
    for (std::size_t m = 0; m < k; ++m) {
      const std::size_t steps = (n - 1 - m) / k;
      double len = 0.0;
      for (std::size_t i = 1; i <= steps; ++i)
        len += std::abs(x[m + i * k] - x[m + (i - 1) * k]);
      // curve-length normalisation (N - 1) / (steps * k), then divided by k
      lk += len * static_cast<double>(n - 1) /
            (static_cast<double>(steps) * static_cast<double>(k)) / static_cast<double>(k);
    }
    lk /= static_cast<double>(k);
    if (!(lk > 0.0)) {
      if (flagged) *flagged = true;
      return 1.0;
    }
    log_inv_k.push_back(std::log(1.0 / static_cast<double>(k)));
    log_l.push_back(std::log(lk));
  }
  // least-squares slope
  const double cnt = static_cast<double>(log_l.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < log_l.size(); ++i) {
    mx += log_inv_k[i];
    my += log_l[i];
  }
  mx /= cnt;
  my /= cnt;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < log_l.size(); ++i) {
    sxy += (log_inv_k[i] - mx) * (log_l[i] - my);
    sxx += (log_inv_k[i] - mx) * (log_inv_k[i] - mx);
  }
  return sxy / sxx;
}

FeatureVector compute_features(std::span<const double> window, double sample_interval,
                               const FeatureWindowConfig& cfg, const WindowConfig& wcfg,
                               const ProcessFrequencies& pf) {
  FeatureVector fv;
  const TimeFeatures t = time_features(window);
  fv[Feature::Mean] = t.mean;
  fv[Feature::Rms] = t.rms;
  fv[Feature::Sd] = t.sd;
  fv[Feature::CrestFactor] = t.crest_factor;
  fv[Feature::Kurtosis] = t.kurtosis;
  fv[Feature::Skewness] = t.skewness;
  fv[Feature::P2P] = t.p2p;
  fv.flags |= t.flags;

  const ModeFeatures m = mode_features(window, cfg.mode_bins);
  fv[Feature::StatMode] = m.stat_mode;
  fv[Feature::StatModeSd] = m.stat_mode_sd;

  const FreqFeatures f = freq_features(welch_psd(window, sample_interval, wcfg), pf);
  fv[Feature::CenterFreq] = f.center_freq;
  fv[Feature::DominantFreq] = f.dominant_freq;
  fv[Feature::PsdEnergy] = f.psd_energy;
  fv[Feature::SpectralEntropy] = f.spectral_entropy;
  fv[Feature::PeriodicEnergy] = f.periodic_energy;
  fv[Feature::AperiodicEnergy] = f.aperiodic_energy;
  fv[Feature::RelAperiodicEnergy] = f.rel_aperiodic_energy;
  fv.flags |= f.flags;

  bool flagged = false;
  fv[Feature::Autocorr] = autocorr(window, cfg.autocorr_lag, &flagged);
  if (flagged) fv.flags |= flag_of(Feature::Autocorr);
  fv[Feature::HiguchiFd] = higuchi_fd(window, cfg.higuchi_kmax, &flagged);
  if (flagged) fv.flags |= flag_of(Feature::HiguchiFd);
  return fv;
}

std::vector<FeatureVector> extract(std::span<const double> samples, double sample_interval,
                                   const FeatureWindowConfig& cfg_in, const WindowConfig& wcfg,
                                   const ProcessFrequencies& pf, const std::string& cycle_id,
                                   double t0) {
  const FeatureWindowConfig cfg = cfg_in.resolved(1.0 / sample_interval, pf);
  cfg.validate();
  wcfg.validate();
  pf.validate();
  if (cfg.window_len < wcfg.frame_len)
    throw ParameterError("feature window_len must be >= spectral frame_len");
  if (samples.size() < cfg.window_len) {
    std::ostringstream os;
    os << "segment of " << samples.size() << " samples is shorter than the feature window "
       << cfg.window_len;
    throw LengthError(os.str());
  }
  const std::size_t count = (samples.size() - cfg.window_len) / cfg.hop + 1;
  std::vector<FeatureVector> out;
  out.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    const std::size_t start = w * cfg.hop;
    FeatureVector fv = compute_features(samples.subspan(start, cfg.window_len),
                                        sample_interval, cfg, wcfg, pf);
    fv.cycle_id = cycle_id;
    fv.t_start_s = t0 + static_cast<double>(start) * sample_interval;
    out.push_back(std::move(fv));
  }
  return out;
}

std::vector<FeatureVector> extract(const Trace& trace, const Segment& segment,
                                   const FeatureWindowConfig& cfg, const WindowConfig& wcfg,
                                   const ProcessFrequencies& pf, const std::string& cycle_id) {
  if (segment.end > trace.size() || segment.start >= segment.end)
    throw LengthError("segment outside trace");
  return extract(trace.samples().subspan(segment.start, segment.length()),
                 trace.sample_interval(), cfg, wcfg, pf, cycle_id,
                 static_cast<double>(segment.start) * trace.sample_interval());
}

}  // namespace tcm
