#pragma once

#include <span>
#include <vector>

namespace tcm {

struct RotationState {
  double spindle_rpm = 11540.0;
  double initial_phase = 0.0;  // radians

  /// Throws ParameterError unless spindle_rpm > 0.
  void validate() const;
  double spindle_hz() const noexcept { return spindle_rpm / 60.0; }
};

struct SensorAxes {
  std::vector<double> radial;      // a_r, what the single-axis sensor records
  std::vector<double> tangential;  // a_t, not observed by the physical sensor
};

/// Lab-frame (a_x, a_y) seen from a sensor rotating with the spindle:
///   phi(t) = phi0 + 2 pi (n / 60) t
///   a_r = cos(phi) a_x + sin(phi) a_y
///   a_t = cos(phi) a_y - sin(phi) a_x
SensorAxes rotate_to_sensor(std::span<const double> ax, std::span<const double> ay,
                            const RotationState& state, double sample_interval);

/// Same mapping with an explicit phase per sample. Used for the n -> 0 limit
/// and by the exact inverse below.
SensorAxes rotate_by_phase(std::span<const double> ax, std::span<const double> ay,
                           std::span<const double> phase);

/// Inverse rotation back to the lab frame (needs both sensor axes).
void rotate_to_lab(std::span<const double> ar, std::span<const double> at,
                   std::span<const double> phase, std::vector<double>& ax,
                   std::vector<double>& ay);

/// phi(t_i) for i in [0, n).
std::vector<double> rotation_phase(std::size_t n, const RotationState& state,
                                   double sample_interval);

}  // namespace tcm
