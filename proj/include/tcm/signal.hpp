#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tcm {

inline constexpr double kDefaultSampleInterval = 65e-6;  // seconds

/// Uniformly sampled single-axis acceleration recording. Immutable.
class Trace {
 public:
  Trace(std::vector<double> samples, double sample_interval,
        std::string source_id = {}, std::string unit = "g");

  std::span<const double> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double sample_interval() const noexcept { return sample_interval_; }
  double sample_rate() const noexcept { return 1.0 / sample_interval_; }
  double nyquist_hz() const noexcept { return 0.5 / sample_interval_; }
  double duration() const noexcept {
    return static_cast<double>(samples_.size()) * sample_interval_;
  }
  const std::string& source_id() const noexcept { return source_id_; }
  const std::string& unit() const noexcept { return unit_; }

  /// Copy of samples [start, end) carrying the same metadata.
  Trace slice(std::size_t start, std::size_t end) const;

 private:
  std::vector<double> samples_;
  double sample_interval_;
  std::string source_id_;
  std::string unit_;
};

/// Sliding peak-to-peak magnitudes. values[i] covers source samples
/// [i, i + window_len), i.e. it is the value at time step t = i + offset.
struct P2PSeries {
  std::vector<double> values;
  std::size_t window_len = 0;
  std::size_t offset = 0;  // == window_len - 1
};

/// How the quiet-level sum over the sorted slice is normalised.
enum class ThresholdNormalization {
  SliceMean,   // divide by slice count (default)
  FullLength,  // divide by the full series length N, as the formula is printed
};

struct SegmentationParams {
  std::size_t window_len = 256;
  double alpha0 = 0.01;
  double alpha1 = 0.03;
  double alpha2 = 10.0;
  double min_above = 0.050;  // seconds above th before a segment opens
  double min_below = 0.200;  // seconds below th before a segment closes
  ThresholdNormalization normalization = ThresholdNormalization::SliceMean;

  /// Throws ParameterError on any violated invariant.
  void validate() const;
};

/// Half-open sample range [start, end) of in-cut data within `parent`.
struct Segment {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string parent;

  std::size_t length() const noexcept { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// max - min over every full window, using monotonic deques (O(N)).
P2PSeries peak_to_peak_series(std::span<const double> samples,
                              std::size_t window_len);
P2PSeries peak_to_peak_series(const Trace& trace, std::size_t window_len);

/// th = alpha2 * (mean of the sorted p2p values over
/// [floor(alpha0 N), floor(alpha1 N))).
double compute_threshold(const P2PSeries& p2p, const SegmentationParams& params);

/// Hysteresis state machine over a p2p series and a known threshold.
/// Exposed separately so the threshold can be supplied from elsewhere.
std::vector<Segment> detect_segments(const P2PSeries& p2p, double threshold,
                                     const SegmentationParams& params,
                                     double sample_interval,
                                     std::size_t trace_length,
                                     const std::string& parent = {});

struct SegmentationResult {
  std::vector<Segment> segments;
  double threshold = 0.0;
};

SegmentationResult segment_with_threshold(const Trace& trace,
                                          const SegmentationParams& params);

/// Isolates process (in-cut) intervals. Empty when nothing exceeds th.
std::vector<Segment> segment(const Trace& trace, const SegmentationParams& params);

}  // namespace tcm
