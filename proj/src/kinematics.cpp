#include "tcm/kinematics.hpp"

#include <cmath>
#include <numbers>

#include "tcm/error.hpp"

namespace tcm {

void RotationState::validate() const {
  if (!(spindle_rpm > 0.0) || !std::isfinite(spindle_rpm))
    throw ParameterError("spindle_rpm must be > 0");
  if (!std::isfinite(initial_phase)) throw ParameterError("initial_phase must be finite");
}

std::vector<double> rotation_phase(std::size_t n, const RotationState& state,
                                   double sample_interval) {
  state.validate();
  if (!(sample_interval > 0.0)) throw ParameterError("sample_interval must be > 0");
  std::vector<double> phase(n);
  const double omega = 2.0 * std::numbers::pi * state.spindle_hz();
  for (std::size_t i = 0; i < n; ++i) {
    // reduce per revolution so phase stays accurate over long traces
    const double t = static_cast<double>(i) * sample_interval;
    phase[i] = state.initial_phase + std::fmod(omega * t, 2.0 * std::numbers::pi);
  }
  return phase;
}

SensorAxes rotate_by_phase(std::span<const double> ax, std::span<const double> ay,
                           std::span<const double> phase) {
  if (ax.size() != ay.size() || ax.size() != phase.size())
    throw ShapeError("rotate_to_sensor: a_x, a_y and phase lengths differ");
  SensorAxes out;
  out.radial.resize(ax.size());
  out.tangential.resize(ax.size());
  for (std::size_t i = 0; i < ax.size(); ++i) {
    if (!std::isfinite(ax[i]) || !std::isfinite(ay[i]))
      throw DataError("rotate_to_sensor: non-finite acceleration");
    const double c = std::cos(phase[i]);
    const double s = std::sin(phase[i]);
    out.radial[i] = c * ax[i] + s * ay[i];
    out.tangential[i] = c * ay[i] - s * ax[i];
  }
  return out;
}

SensorAxes rotate_to_sensor(std::span<const double> ax, std::span<const double> ay,
                            const RotationState& state, double sample_interval) {
  if (ax.size() != ay.size()) throw ShapeError("rotate_to_sensor: a_x and a_y lengths differ");
  const auto phase = rotation_phase(ax.size(), state, sample_interval);
  return rotate_by_phase(ax, ay, phase);
}

void rotate_to_lab(std::span<const double> ar, std::span<const double> at,
                   std::span<const double> phase, std::vector<double>& ax,
                   std::vector<double>& ay) {
  if (ar.size() != at.size() || ar.size() != phase.size())
    throw ShapeError("rotate_to_lab: input lengths differ");
  ax.resize(ar.size());
  ay.resize(ar.size());
  for (std::size_t i = 0; i < ar.size(); ++i) {
    const double c = std::cos(phase[i]);
    const double s = std::sin(phase[i]);
    ax[i] = c * ar[i] - s * at[i];
    ay[i] = s * ar[i] + c * at[i];
  }
}

}  // namespace tcm
