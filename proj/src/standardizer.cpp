#include <algorithm>
#include <cmath>

#include "tcm/classify.hpp"

namespace tcm {

ToolState to_state(int label) {
  if (label == 0) return ToolState::NotWorn;
  if (label == 1) return ToolState::Worn;
  throw ParameterError("tool state label must be 0 or 1, got " + std::to_string(label));
}

bool StandardizationParams::any_constant() const {
  for (bool c : constant)
    if (c) return true;
  return false;
}

StandardizationParams fit_standardizer(const Matrix& x) {
  if (x.rows() < 2) throw ParameterError("fit_standardizer needs at least 2 rows");
  const std::size_t d = x.cols();
  StandardizationParams p;
  p.mean.assign(d, 0.0);
  p.scale.assign(d, 1.0);
  p.constant.assign(d, false);
  const double n = static_cast<double>(x.rows());
  for (std::size_t c = 0; c < d; ++c) {
    double m = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) m += x(r, c);
    m /= n;
    double v = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) v += (x(r, c) - m) * (x(r, c) - m);
    const double sd = std::sqrt(v / n);
    // rounding in the mean leaves ~1 ulp of spread on an exactly constant column
    if (std::isfinite(sd) && sd > 1e-12 * std::abs(m)) {
      p.mean[c] = m;
      p.scale[c] = sd;
    } else {
      // constant column: passed through unchanged
      p.mean[c] = 0.0;
      p.scale[c] = 1.0;
      p.constant[c] = true;
    }
  }
  return p;
}

void apply_standardizer_row(const StandardizationParams& p, std::span<const double> in,
                            std::span<double> out) {
  if (in.size() != p.dims() || out.size() != p.dims())
    throw ShapeError("standardizer dimension mismatch");
  for (std::size_t c = 0; c < in.size(); ++c) out[c] = (in[c] - p.mean[c]) / p.scale[c];
}

Matrix apply_standardizer(const StandardizationParams& p, const Matrix& x) {
  if (x.cols() != p.dims() && !x.empty()) throw ShapeError("standardizer dimension mismatch");
  Matrix out(x.rows(), p.dims());
  for (std::size_t r = 0; r < x.rows(); ++r) apply_standardizer_row(p, x.row(r), out.row(r));
  return out;
}

}  // namespace tcm
