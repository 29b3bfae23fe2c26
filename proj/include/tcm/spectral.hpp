#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "tcm/signal.hpp"

namespace tcm {

using Complex = std::complex<double>;

inline bool is_power_of_two(std::size_t n) noexcept { return n >= 1 && (n & (n - 1)) == 0; }

/// Precomputed twiddles and bit-reversal permutation for a radix-2 FFT of
/// one fixed length. Reusable and safe to share between threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  /// In-place forward (e^{-2 pi i k n / N}) or unnormalised inverse transform.
  void transform(std::span<Complex> data, bool inverse = false) const;

 private:
  std::size_t n_;
  std::vector<Complex> twiddles_;  // e^{-2 pi i k / n}, k < n/2
  std::vector<std::size_t> bitrev_;
};

/// One-sided spectrum, bins 0..M/2, of a real frame whose length is a power
/// of two. Throws LengthError otherwise.
std::vector<Complex> fft_real(std::span<const double> frame);
std::vector<Complex> fft_real(std::span<const double> frame, const FftPlan& plan);

/// Inverse of fft_real: rebuilds the length-M real frame from bins 0..M/2.
std::vector<double> ifft_real(std::span<const Complex> half_spectrum, std::size_t frame_len);

enum class WindowFunction { Rectangular, Hann, Hamming };

/// Periodic (DFT-even) window of length n.
std::vector<double> window_coefficients(WindowFunction fn, std::size_t n);

struct WindowConfig {
  std::size_t frame_len = 1024;
  std::size_t hop = 512;  // samples between spectrogram columns
  WindowFunction window_fn = WindowFunction::Hann;
  std::size_t welch_subframes = 4;
  double welch_overlap = 0.5;

  void validate() const;
  /// Distance between consecutive Welch sub-frames.
  std::size_t subframe_step() const;
  /// Samples consumed by one spectrogram column.
  std::size_t block_len() const;
};

/// One-sided power per frequency bin. Bins are scaled so that their sum
/// equals the (window-weighted) mean square of the input.
struct PowerSpectrum {
  std::vector<double> bins;
  double bin_hz = 0.0;

  std::size_t n_bins() const noexcept { return bins.size(); }
  double frequency(std::size_t i) const noexcept { return static_cast<double>(i) * bin_hz; }
  double total_power() const;
};

struct Spectrogram {
  std::vector<PowerSpectrum> columns;  // time axis
  double bin_hz = 0.0;
  double column_interval = 0.0;  // seconds between columns

  std::size_t n_columns() const noexcept { return columns.size(); }
  std::size_t n_bins() const noexcept { return columns.empty() ? 0 : columns.front().n_bins(); }
  bool empty() const noexcept { return columns.empty(); }
};

/// Averaged, window-power-normalised periodograms of every frame of
/// `frame_len` samples stepped by subframe_step() across the input.
PowerSpectrum welch_psd(std::span<const double> samples, double sample_interval,
                        const WindowConfig& cfg);
PowerSpectrum welch_psd(const Trace& trace, const WindowConfig& cfg);

/// Time-frequency grid: each column is the Welch estimate of one block of
/// block_len() samples (welch_subframes sub-frames); blocks advance by hop.
/// Trailing partial blocks are dropped.
Spectrogram stft(std::span<const double> samples, double sample_interval,
                 const WindowConfig& cfg);
Spectrogram stft(const Trace& trace, const WindowConfig& cfg);

/// Writes the grid freq-major as little-endian float32 to `path` plus a JSON
/// sidecar `<path>.json` {dims:[n_bins,n_columns], bin_hz, column_interval}.
void export_stft_tensor(const Spectrogram& spec, const std::filesystem::path& path);
Spectrogram read_stft_tensor(const std::filesystem::path& path);

/// CSV `freq_hz,power`.
void write_psd_csv(const std::filesystem::path& path, const PowerSpectrum& psd);

}  // namespace tcm
