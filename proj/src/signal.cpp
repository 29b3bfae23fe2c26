#include "tcm/signal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "tcm/error.hpp"

namespace tcm {

Trace::Trace(std::vector<double> samples, double sample_interval,
             std::string source_id, std::string unit)
    : samples_(std::move(samples)),
      sample_interval_(sample_interval),
      source_id_(std::move(source_id)),
      unit_(std::move(unit)) {
  if (!(sample_interval_ > 0.0) || !std::isfinite(sample_interval_))
    throw ParameterError("sample_interval must be a positive finite number");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      std::ostringstream os;
      os << "non-finite sample at index " << i;
      if (!source_id_.empty()) os << " in " << source_id_;
      throw DataError(os.str());
    }
  }
}

Trace Trace::slice(std::size_t start, std::size_t end) const {
  if (start > end || end > samples_.size())
    throw LengthError("slice range outside trace");
  return Trace(std::vector<double>(samples_.begin() + static_cast<std::ptrdiff_t>(start),
                                   samples_.begin() + static_cast<std::ptrdiff_t>(end)),
               sample_interval_, source_id_, unit_);
}

void SegmentationParams::validate() const {
  if (window_len < 2) throw ParameterError("segmentation window_len must be >= 2");
  if (!(alpha0 >= 0.0 && alpha0 < alpha1 && alpha1 <= 1.0))
    throw ParameterError("segmentation alphas must satisfy 0 <= alpha0 < alpha1 <= 1");
  if (!(alpha2 > 1.0)) throw ParameterError("segmentation alpha2 must be > 1");
  if (!(min_above >= 0.0) || !(min_below >= 0.0))
    throw ParameterError("segmentation hold durations must be >= 0");
}

P2PSeries peak_to_peak_series(std::span<const double> samples, std::size_t window_len) {
  if (window_len < 2) throw ParameterError("p2p window_len must be >= 2");
  if (samples.size() < window_len) {
    std::ostringstream os;
    os << "trace of " << samples.size() << " samples is shorter than p2p window "
       << window_len;
    throw LengthError(os.str());
  }
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!std::isfinite(samples[i])) throw DataError("non-finite sample in p2p input");

  P2PSeries out;
  out.window_len = window_len;
  out.offset = window_len - 1;
  out.values.reserve(samples.size() - window_len + 1);

  // indices with decreasing (max) / increasing (min) values
  std::deque<std::size_t> maxq;
  std::deque<std::size_t> minq;
  for (std::size_t t = 0; t < samples.size(); ++t) {
    const double x = samples[t];
    while (!maxq.empty() && samples[maxq.back()] <= x) maxq.pop_back();
    maxq.push_back(t);
    while (!minq.empty() && samples[minq.back()] >= x) minq.pop_back();
    minq.push_back(t);
    if (t + 1 < window_len) continue;
    const std::size_t first = t + 1 - window_len;
    while (maxq.front() < first) maxq.pop_front();
    while (minq.front() < first) minq.pop_front();
    out.values.push_back(samples[maxq.front()] - samples[minq.front()]);
  }
  return out;
}

P2PSeries peak_to_peak_series(const Trace& trace, std::size_t window_len) {
  return peak_to_peak_series(trace.samples(), window_len);
}

namespace {

std::size_t floor_fraction(double alpha, std::size_t n) {
  // guard against 0.03 * 100 = 3.0000000000000004 style representation noise
  return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 1e-9));
}

std::size_t hold_samples(double seconds, double dt) {
  const double n = std::ceil(seconds / dt - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::max(0.0, n)));
}

}  // namespace

double compute_threshold(const P2PSeries& p2p, const SegmentationParams& params) {
  params.validate();
  const std::size_t n = p2p.values.size();
  const std::size_t lo = floor_fraction(params.alpha0, n);
  const std::size_t hi = floor_fraction(params.alpha1, n);
  if (hi <= lo) {
    std::ostringstream os;
    os << "threshold slice [" << lo << ", " << hi << ") is empty for a p2p series of "
       << n << " values";
    throw ParameterError(os.str());
  }
  std::vector<double> sorted = p2p.values;
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(hi),
                    sorted.end());
  double sum = 0.0;
  for (std::size_t i = lo; i < hi; ++i) sum += sorted[i];
  const double denom = params.normalization == ThresholdNormalization::SliceMean
                           ? static_cast<double>(hi - lo)
                           : static_cast<double>(n);
  return params.alpha2 * (sum / denom);
}

std::vector<Segment> detect_segments(const P2PSeries& p2p, double threshold,
                                     const SegmentationParams& params,
                                     double sample_interval, std::size_t trace_length,
                                     const std::string& parent) {
  params.validate();
  const std::size_t need_above = hold_samples(params.min_above, sample_interval);
  const std::size_t need_below = hold_samples(params.min_below, sample_interval);
  const std::size_t offset = p2p.offset;

  std::vector<Segment> out;
  auto emit = [&](std::size_t start, std::size_t end) {
    end = std::min(end, trace_length);
    // A run shorter than the p2p window maps to an empty trace range.
    if (end > start) out.push_back(Segment{start, end, parent});
  };

  bool open = false;
  std::size_t run_start = 0;
  std::size_t run_len = 0;
  std::size_t seg_start = 0;
  const auto& v = p2p.values;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const bool above = v[i] > threshold;
    if (!open) {
      if (above) {
        if (run_len == 0) run_start = i;
        if (++run_len >= need_above) {
          open = true;
          seg_start = run_start + offset;
          run_len = 0;
        }
      } else {
        run_len = 0;
      }
    } else {
      if (!above) {
        if (run_len == 0) run_start = i;
        if (++run_len >= need_below) {
          emit(seg_start, run_start);
          open = false;
          run_len = 0;
        }
      } else {
        run_len = 0;
      }
    }
  }
  if (open) emit(seg_start, run_len > 0 ? run_start : trace_length);
  return out;
}

SegmentationResult segment_with_threshold(const Trace& trace,
                                          const SegmentationParams& params) {
  params.validate();
  const P2PSeries p2p = peak_to_peak_series(trace, params.window_len);
  SegmentationResult r;
  r.threshold = compute_threshold(p2p, params);
  r.segments = detect_segments(p2p, r.threshold, params, trace.sample_interval(),
                               trace.size(), trace.source_id());
  return r;
}

std::vector<Segment> segment(const Trace& trace, const SegmentationParams& params) {
  return segment_with_threshold(trace, params).segments;
}

}  // namespace tcm
