#pragma once

// Hammerstein benchmark plants, measurement noise and excitation signals.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "vrft/lti.hpp"
#include "vrft/nonlin.hpp"

namespace vrft {

/// Static input nonlinearity followed by a strictly proper linear block.
class HammersteinPlant {
 public:
  HammersteinPlant(PiecewiseAffineMap input_nonlinearity, TransferFunction linear_block, std::string label);

  const PiecewiseAffineMap& input_nonlinearity() const { return nonlinearity_; }
  const TransferFunction& linear_block() const { return linear_; }
  const std::string& label() const { return label_; }

 private:
  PiecewiseAffineMap nonlinearity_;
  TransferFunction linear_;
  std::string label_;
};

/// Additive white gaussian measurement noise.
///
/// Samples come from std::mt19937_64 seeded with `seed`, transformed by
/// std::normal_distribution. Streams are reproducible for a given standard
/// library; they are not guaranteed to match across library vendors.
struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

std::vector<double> gaussian_noise(std::size_t n, const NoiseSpec& noise);

Signal simulate_plant(const HammersteinPlant& plant, const Signal& u, const NoiseSpec& noise);

/// id 1: G(z) = 0.2 / (z - 0.8); id 2: G(z) = 0.04 z / (z - 0.8)^2.
HammersteinPlant builtin_plant(int id);

/// T_d(z) = 0.01 / (z - 0.9)^2.
TransferFunction benchmark_reference_model();

/// Gain a for which F(z) = T_d (1 - T_d) a / (z - 1) has F(1) = 1.
double excitation_filter_gain(const TransferFunction& td);
/// F(z) with the (z - 1) factor of 1 - T_d cancelled exactly.
TransferFunction excitation_filter(const TransferFunction& td);

enum class InputKind { random, steps };

std::string to_string(InputKind kind);
InputKind input_kind_from_string(const std::string& name);

struct InputSpec {
  InputKind kind = InputKind::random;
  std::size_t n = 1000;
  double amplitude = 25.0;
  std::uint64_t seed = 1;
  std::size_t dwell = 100;  // steps kind only
};

/// Unfiltered piecewise-constant sequence cycling through
/// amplitude * {0.25, 0.6, 1.0, -0.25, -0.6, -1.0}, each held for dwell samples.
Signal raw_step_sequence(std::size_t n, double amplitude, std::size_t dwell);

/// Excitation input: uniform white noise on [-amplitude, amplitude] (random)
/// or raw_step_sequence (steps), filtered by excitation_filter(td).
Signal gen_input(const InputSpec& spec, const TransferFunction& td);

}  // namespace vrft
