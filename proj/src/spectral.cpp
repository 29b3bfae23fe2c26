#include "tcm/spectral.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tcm/error.hpp"
#include "tcm/io_util.hpp"

namespace tcm {

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (!is_power_of_two(n)) {
    std::ostringstream os;
    os << "FFT length " << n << " is not a power of two";
    throw LengthError(os.str());
  }
  twiddles_.resize(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddles_[k] = Complex(std::cos(a), std::sin(a));
  }
  bitrev_.resize(n);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    bitrev_[i] = r;
  }
}

void FftPlan::transform(std::span<Complex> data, bool inverse) const {
  if (data.size() != n_) throw LengthError("FFT input length does not match plan");
  for (std::size_t i = 0; i < n_; ++i)
    if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
  // iterative Cooley-Tukey, decimation in time
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        Complex w = twiddles_[k * stride];
        if (inverse) w = std::conj(w);
        const Complex u = data[start + k];
        const Complex v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

std::vector<Complex> fft_real(std::span<const double> frame, const FftPlan& plan) {
  if (frame.size() != plan.size()) throw LengthError("frame length does not match FFT plan");
  std::vector<Complex> buf(frame.begin(), frame.end());
  plan.transform(buf);
  buf.resize(frame.size() / 2 + 1);
  return buf;
}

std::vector<Complex> fft_real(std::span<const double> frame) {
  if (frame.size() < 2 || !is_power_of_two(frame.size())) {
    std::ostringstream os;
    os << "fft_real needs a power-of-two length >= 2, got " << frame.size();
    throw LengthError(os.str());
  }
  return fft_real(frame, FftPlan(frame.size()));
}

std::vector<double> ifft_real(std::span<const Complex> half_spectrum, std::size_t frame_len) {
  if (frame_len < 2 || !is_power_of_two(frame_len) ||
      half_spectrum.size() != frame_len / 2 + 1)
    throw LengthError("ifft_real: spectrum size must be frame_len/2 + 1 for a power-of-two frame");
  std::vector<Complex> full(frame_len);
  for (std::size_t k = 0; k <= frame_len / 2; ++k) full[k] = half_spectrum[k];
  for (std::size_t k = frame_len / 2 + 1; k < frame_len; ++k)
    full[k] = std::conj(half_spectrum[frame_len - k]);
  FftPlan(frame_len).transform(full, /*inverse=*/true);
  std::vector<double> out(frame_len);
  for (std::size_t i = 0; i < frame_len; ++i)
    out[i] = full[i].real() / static_cast<double>(frame_len);
  return out;
}

std::vector<double> window_coefficients(WindowFunction fn, std::size_t n) {
  std::vector<double> w(n, 1.0);
  const double two_pi_over_n = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(two_pi_over_n * static_cast<double>(i));
    switch (fn) {
      case WindowFunction::Rectangular: break;
      case WindowFunction::Hann: w[i] = 0.5 - 0.5 * c; break;
      case WindowFunction::Hamming: w[i] = 0.54 - 0.46 * c; break;
    }
  }
  return w;
}

void WindowConfig::validate() const {
  if (frame_len < 2 || !is_power_of_two(frame_len))
    throw ParameterError("frame_len must be a power of two >= 2");
  if (hop == 0 || hop > frame_len) throw ParameterError("hop must satisfy 0 < hop <= frame_len");
  if (welch_subframes < 1) throw ParameterError("welch_subframes must be >= 1");
  if (!(welch_overlap >= 0.0 && welch_overlap < 1.0))
    throw ParameterError("welch_overlap must lie in [0, 1)");
}

std::size_t WindowConfig::subframe_step() const {
  const double step = std::round(static_cast<double>(frame_len) * (1.0 - welch_overlap));
  return std::max<std::size_t>(1, static_cast<std::size_t>(step));
}

std::size_t WindowConfig::block_len() const {
  return frame_len + (welch_subframes - 1) * subframe_step();
}

double PowerSpectrum::total_power() const {
  double s = 0.0;
  for (double b : bins) s += b;
  return s;
}

namespace {

// One-sided periodogram of samples[start, start + M), normalised by M * sum(w^2).
void periodogram(std::span<const double> frame, const std::vector<double>& window,
                 double norm, const FftPlan& plan, std::vector<Complex>& scratch,
                 std::vector<double>& out) {
  const std::size_t m = frame.size();
  for (std::size_t i = 0; i < m; ++i) scratch[i] = Complex(frame[i] * window[i], 0.0);
  plan.transform(scratch);
  out.resize(m / 2 + 1);
  for (std::size_t k = 0; k <= m / 2; ++k) {
    const double p = std::norm(scratch[k]) / norm;
    out[k] = (k == 0 || k == m / 2) ? p : 2.0 * p;
  }
}

// Pairwise reduction of equally sized vectors, then division by the count.
std::vector<double> pairwise_mean(std::vector<std::vector<double>> parts) {
  const double count = static_cast<double>(parts.size());
  std::size_t n = parts.size();
  while (n > 1) {
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) {
      auto& a = parts[2 * i];
      const auto& b = parts[2 * i + 1];
      for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
      if (i != 2 * i) parts[i] = std::move(a);
    }
    if (n % 2 == 1) parts[half] = std::move(parts[n - 1]);
    n = half + n % 2;
  }
  std::vector<double> out = std::move(parts.front());
  for (double& v : out) v /= count;
  return out;
}

struct FrameAverager {
  explicit FrameAverager(const WindowConfig& cfg)
      : plan(cfg.frame_len),
        window(window_coefficients(cfg.window_fn, cfg.frame_len)),
        scratch(cfg.frame_len) {
    double sw2 = 0.0;
    for (double w : window) sw2 += w * w;
    norm = static_cast<double>(cfg.frame_len) * sw2;
  }

  std::vector<double> average(std::span<const double> samples, std::size_t n_frames,
                              std::size_t step) {
    std::vector<std::vector<double>> parts(n_frames);
    const std::size_t m = plan.size();
    for (std::size_t f = 0; f < n_frames; ++f)
      periodogram(samples.subspan(f * step, m), window, norm, plan, scratch, parts[f]);
    return pairwise_mean(std::move(parts));
  }

  FftPlan plan;
  std::vector<double> window;
  std::vector<Complex> scratch;
  double norm = 1.0;
};

void require_finite(std::span<const double> samples) {
  for (double v : samples)
    if (!std::isfinite(v)) throw DataError("non-finite sample in spectral input");
}

}  // namespace

PowerSpectrum welch_psd(std::span<const double> samples, double sample_interval,
                        const WindowConfig& cfg) {
  cfg.validate();
  if (!(sample_interval > 0.0)) throw ParameterError("sample_interval must be > 0");
  if (samples.size() < cfg.frame_len) {
    std::ostringstream os;
    os << "welch_psd needs at least " << cfg.frame_len << " samples, got " << samples.size();
    throw LengthError(os.str());
  }
  require_finite(samples);
  const std::size_t step = cfg.subframe_step();
  const std::size_t n_frames = (samples.size() - cfg.frame_len) / step + 1;
  FrameAverager avg(cfg);
  PowerSpectrum out;
  out.bins = avg.average(samples, n_frames, step);
  out.bin_hz = 1.0 / (static_cast<double>(cfg.frame_len) * sample_interval);
  return out;
}

PowerSpectrum welch_psd(const Trace& trace, const WindowConfig& cfg) {
  return welch_psd(trace.samples(), trace.sample_interval(), cfg);
}

Spectrogram stft(std::span<const double> samples, double sample_interval,
                 const WindowConfig& cfg) {
  cfg.validate();
  if (!(sample_interval > 0.0)) throw ParameterError("sample_interval must be > 0");
  const std::size_t block = cfg.block_len();
  if (samples.size() < block) {
    std::ostringstream os;
    os << "stft needs at least one block of " << block << " samples, got " << samples.size();
    throw LengthError(os.str());
  }
  require_finite(samples);
  const std::size_t n_cols = (samples.size() - block) / cfg.hop + 1;
  const std::size_t step = cfg.subframe_step();
  FrameAverager avg(cfg);
  Spectrogram out;
  out.bin_hz = 1.0 / (static_cast<double>(cfg.frame_len) * sample_interval);
  out.column_interval = static_cast<double>(cfg.hop) * sample_interval;
  out.columns.reserve(n_cols);
  for (std::size_t c = 0; c < n_cols; ++c) {
    PowerSpectrum col;
    col.bins = avg.average(samples.subspan(c * cfg.hop, block), cfg.welch_subframes, step);
    col.bin_hz = out.bin_hz;
    out.columns.push_back(std::move(col));
  }
  return out;
}

Spectrogram stft(const Trace& trace, const WindowConfig& cfg) {
  return stft(trace.samples(), trace.sample_interval(), cfg);
}

void export_stft_tensor(const Spectrogram& spec, const std::filesystem::path& path) {
  if (spec.empty() || spec.n_bins() == 0)
    throw ParameterError("cannot export an empty spectrogram");
  const std::size_t nb = spec.n_bins();
  const std::size_t nc = spec.n_columns();
  std::vector<float> grid(nb * nc);
  for (std::size_t c = 0; c < nc; ++c) {
    if (spec.columns[c].n_bins() != nb)
      throw ShapeError("spectrogram columns have differing bin counts");
    for (std::size_t f = 0; f < nb; ++f)
      grid[f * nc + c] = static_cast<float>(spec.columns[c].bins[f]);
  }
  io::write_f32_le(path, grid);
  nlohmann::json meta = {{"dims", {nb, nc}},
                         {"layout", "freq_major"},
                         {"dtype", "float32_le"},
                         {"bin_hz", spec.bin_hz},
                         {"column_interval", spec.column_interval}};
  io::write_text_file(io::sidecar_path(path), meta.dump(2) + "\n");
}

Spectrogram read_stft_tensor(const std::filesystem::path& path) {
  const auto meta_path = io::sidecar_path(path);
  std::size_t nb = 0;
  std::size_t nc = 0;
  Spectrogram out;
  try {
    const auto meta = nlohmann::json::parse(io::read_text_file(meta_path));
    const auto& dims = meta.at("dims");
    if (!dims.is_array() || dims.size() != 2)
      throw FormatError(meta_path.string() + ": dims must be a 2-element array");
    nb = dims[0].get<std::size_t>();
    nc = dims[1].get<std::size_t>();
    out.bin_hz = meta.at("bin_hz").get<double>();
    out.column_interval = meta.at("column_interval").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }
  const std::vector<float> grid = io::read_f32_le(path);
  if (grid.size() != nb * nc) {
    std::ostringstream os;
    os << path.string() << ": sidecar dims " << nb << "x" << nc << " do not match "
       << grid.size() << " stored values";
    throw FormatError(os.str());
  }
  out.columns.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    out.columns[c].bin_hz = out.bin_hz;
    out.columns[c].bins.resize(nb);
    for (std::size_t f = 0; f < nb; ++f) out.columns[c].bins[f] = grid[f * nc + c];
  }
  return out;
}

void write_psd_csv(const std::filesystem::path& path, const PowerSpectrum& psd) {
  std::ostringstream os;
  os << "freq_hz,power\n";
  for (std::size_t i = 0; i < psd.n_bins(); ++i)
    os << io::format_double(psd.frequency(i)) << ',' << io::format_double(psd.bins[i]) << '\n';
  io::write_text_file(path, os.str());
}

}  // namespace tcm
