#include "vrft/plant.hpp"

#include <cmath>
#include <random>

#include "vrft/error.hpp"

namespace vrft {

namespace {
constexpr double kUnitGainTol = 1e-9;
}

HammersteinPlant::HammersteinPlant(PiecewiseAffineMap input_nonlinearity, TransferFunction linear_block,
                                   std::string label)
    : nonlinearity_(std::move(input_nonlinearity)), linear_(std::move(linear_block)), label_(std::move(label)) {
  if (relative_degree(linear_) < 1) {
    throw ValidationError("Hammerstein plant linear block must be strictly proper");
  }
}

std::vector<double> gaussian_noise(std::size_t n, const NoiseSpec& noise) {
  if (!(noise.sigma >= 0.0) || !std::isfinite(noise.sigma)) {
    throw ValidationError("noise sigma must be finite and non-negative");
  }
  std::vector<double> out(n, 0.0);
  if (noise.sigma == 0.0) return out;
  std::mt19937_64 gen(noise.seed);
  std::normal_distribution<double> dist(0.0, noise.sigma);
  for (double& v : out) v = dist(gen);
  return out;
}

Signal simulate_plant(const HammersteinPlant& plant, const Signal& u, const NoiseSpec& noise) {
  LtiState state(plant.linear_block());
  const auto nu = gaussian_noise(u.size(), noise);
  std::vector<double> y(u.size());
  for (std::size_t t = 0; t < u.size(); ++t) {
    y[t] = state.step(plant.input_nonlinearity()(u[t])) + nu[t];
  }
  return Signal(std::move(y));
}

HammersteinPlant builtin_plant(int id) {
  switch (id) {
    case 1:
      return HammersteinPlant(benchmark_nonlinearity(), TransferFunction({0.2}, {1.0, -0.8}), "plant #1");
    case 2:
      return HammersteinPlant(benchmark_nonlinearity(), TransferFunction({0.04, 0.0}, {1.0, -1.6, 0.64}),
                              "plant #2");
    default:
      throw ValidationError("unknown built-in plant id " + std::to_string(id) + " (expected 1 or 2)");
  }
}

TransferFunction benchmark_reference_model() { return TransferFunction({0.01}, {1.0, -1.8, 0.81}); }

namespace {

// T_d (1 - T_d) / (z - 1) with the z = 1 root of the numerator of 1 - T_d removed.
TransferFunction unscaled_excitation_filter(const TransferFunction& td) {
  if (std::abs(dc_gain(td) - 1.0) > kUnitGainTol) {
    throw ValidationError("excitation filter requires T_d(1) = 1");
  }
  const Polynomial one_minus_num = deflate_root(poly_sub(td.den(), td.num()), 1.0);
  return TransferFunction(poly_mul(td.num(), one_minus_num), poly_mul(td.den(), td.den()));
}

}  // namespace

double excitation_filter_gain(const TransferFunction& td) { return 1.0 / dc_gain(unscaled_excitation_filter(td)); }

TransferFunction excitation_filter(const TransferFunction& td) {
  const TransferFunction base = unscaled_excitation_filter(td);
  const double a = 1.0 / dc_gain(base);
  Polynomial num = base.num();
  for (double& c : num) c *= a;
  return TransferFunction(std::move(num), base.den());
}

std::string to_string(InputKind kind) { return kind == InputKind::random ? "random" : "steps"; }

InputKind input_kind_from_string(const std::string& name) {
  if (name == "random") return InputKind::random;
  if (name == "steps") return InputKind::steps;
  throw ValidationError("unknown input kind '" + name + "' (expected random or steps)");
}

Signal raw_step_sequence(std::size_t n, double amplitude, std::size_t dwell) {
  if (dwell == 0) throw ValidationError("step dwell must be at least one sample");
  static constexpr double kLevels[] = {0.25, 0.6, 1.0, -0.25, -0.6, -1.0};
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = amplitude * kLevels[(t / dwell) % std::size(kLevels)];
  return Signal(std::move(out));
}

Signal gen_input(const InputSpec& spec, const TransferFunction& td) {
  if (spec.n == 0) throw ValidationError("input length must be at least 1");
  if (!std::isfinite(spec.amplitude)) throw ValidationError("input amplitude must be finite");
  const TransferFunction f = excitation_filter(td);
  if (spec.kind == InputKind::steps) return filter(f, raw_step_sequence(spec.n, spec.amplitude, spec.dwell));

  std::vector<double> raw(spec.n, 0.0);
  if (spec.amplitude != 0.0) {
    std::mt19937_64 gen(spec.seed);
    const double a = std::abs(spec.amplitude);
    std::uniform_real_distribution<double> dist(-a, a);
    for (double& v : raw) v = dist(gen);
  }
  return filter(f, Signal(std::move(raw)));
}

}  // namespace vrft
