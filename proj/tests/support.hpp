#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tcm/rng.hpp"
#include "tcm/signal.hpp"

namespace testing {

inline std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  tcm::Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal(0.0, sd);
  return v;
}

inline std::vector<double> tone(std::size_t n, double freq_hz, double dt, double amp = 1.0,
                                double phase = 0.0) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = amp * std::cos(2.0 * 3.14159265358979323846 * freq_hz * static_cast<double>(i) * dt + phase);
  return v;
}

/// Idle noise with process bursts of amplitude `amp` over the given sample ranges.
inline std::vector<double> bursts(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& on,
                                  std::uint64_t seed, double idle = 0.01, double amp = 1.0) {
  tcm::Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal(0.0, idle);
  for (const auto& [a, b] : on)
    for (std::size_t i = a; i < b; ++i) v[i] += rng.normal(0.0, amp);
  return v;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("tcm_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace testing
