#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vrft/lti.hpp"

namespace vrft::testing {

inline std::vector<double> uniform_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

inline Signal random_signal(std::size_t n, std::uint64_t seed, double amplitude = 1.0) {
  return Signal(uniform_vector(n, seed, -amplitude, amplitude));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b, std::size_t offset = 0) {
  double worst = 0.0;
  for (std::size_t i = offset; i < a.size() && i < b.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("vrft_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace vrft::testing
