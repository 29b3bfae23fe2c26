#include "tcm/classify.hpp"

namespace tcm {

namespace {

struct Run {
  int label;
  std::size_t length;
};

std::vector<Run> runs_of(std::span<const int> labels) {
  std::vector<Run> runs;
  for (int v : labels) {
    if (!runs.empty() && runs.back().label == v) ++runs.back().length;
    else runs.push_back({v, 1});
  }
  return runs;
}

}  // namespace

std::vector<int> temporal_filter(std::span<const int> labels, std::size_t min_run) {
  if (min_run < 1) throw ParameterError("temporal_filter: min_run must be >= 1");
  std::vector<Run> runs = runs_of(labels);
  bool changed = true;
  while (changed) {
    changed = false;
    // Left to right; a replaced island merges with both neighbours at once,
    // so the scan continues from the merged run.
    for (std::size_t r = 1; r + 1 < runs.size();) {
      if (runs[r].length < min_run && runs[r - 1].label != runs[r].label &&
          runs[r + 1].label != runs[r].label) {
        runs[r - 1].length += runs[r].length + runs[r + 1].length;
        runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(r),
                   runs.begin() + static_cast<std::ptrdiff_t>(r + 2));
        changed = true;
      } else {
        ++r;
      }
    }
  }
  std::vector<int> out;
  out.reserve(labels.size());
  for (const Run& run : runs) out.insert(out.end(), run.length, run.label);
  return out;
}

std::vector<Prediction> temporal_filter(const std::vector<Prediction>& preds,
                                        std::size_t min_run) {
  std::vector<int> labels;
  labels.reserve(preds.size());
  for (const auto& p : preds) labels.push_back(to_label(p.label));
  const std::vector<int> filtered = temporal_filter(labels, min_run);
  std::vector<Prediction> out = preds;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].label = to_state(filtered[i]);
  return out;
}

}  // namespace tcm
