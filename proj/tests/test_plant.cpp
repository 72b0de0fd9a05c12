#include "doctest.h"

#include <cmath>
#include <numeric>

#include "support.hpp"
#include "vrft/error.hpp"
#include "vrft/plant.hpp"

using namespace vrft;
using vrft::testing::max_abs_diff;
using vrft::testing::random_signal;

TEST_CASE("builtin plants") {
  const auto p1 = builtin_plant(1);
  const auto p2 = builtin_plant(2);
  CHECK(p1.linear_block() == TransferFunction({0.2}, {1.0, -0.8}));
  CHECK(p2.linear_block() == TransferFunction({0.04, 0.0}, {1.0, -1.6, 0.64}));
  CHECK(p1.input_nonlinearity().breakpoints() == p2.input_nonlinearity().breakpoints());
  CHECK(p1.input_nonlinearity().slopes() == p2.input_nonlinearity().slopes());
  CHECK(p1.input_nonlinearity().anchor() == p2.input_nonlinearity().anchor());
  CHECK_THROWS_AS(builtin_plant(3), ValidationError);
  CHECK_THROWS_AS(builtin_plant(0), ValidationError);
}

TEST_CASE("Hammerstein plant needs a strictly proper linear block") {
  CHECK_THROWS_AS(HammersteinPlant(benchmark_nonlinearity(), TransferFunction({1.0, 0.0}, {1.0, -0.5}), "biproper"),
                  ValidationError);
}

TEST_CASE("simulate_plant steady states") {
  const auto p1 = builtin_plant(1);
  const auto p2 = builtin_plant(2);
  const Signal zero = simulate_plant(p1, Signal::zeros(50), {});
  for (double v : zero) CHECK(v == 0.0);

  const Signal y1 = simulate_plant(p1, Signal::constant(400, 0.5), {});
  CHECK(y1[399] == doctest::Approx(0.5).epsilon(1e-12));
  const Signal y2 = simulate_plant(p2, Signal::constant(600, 3.0), {});
  CHECK(y2[599] == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("simulate_plant reduces to filter with an identity nonlinearity") {
  const TransferFunction g({0.04, 0.0}, {1.0, -1.6, 0.64});
  const HammersteinPlant plant(PiecewiseAffineMap::identity(), g, "linear");
  const Signal u = random_signal(500, 5, 10.0);
  CHECK(max_abs_diff(simulate_plant(plant, u, {}).vector(), filter(g, u).vector()) <= 1e-12);
}

TEST_CASE("plant 1 is linear inside the unit band of the nonlinearity") {
  const auto p1 = builtin_plant(1);
  const Signal u = random_signal(500, 9, 0.999);
  CHECK(max_abs_diff(simulate_plant(p1, u, {}).vector(), filter(p1.linear_block(), u).vector()) <= 1e-12);
}

TEST_CASE("simulation is deterministic") {
  const auto p2 = builtin_plant(2);
  const Signal u = random_signal(300, 2, 5.0);
  CHECK(simulate_plant(p2, u, {}).vector() == simulate_plant(p2, u, {}).vector());
  CHECK(simulate_plant(p2, u, {0.05, 4}).vector() == simulate_plant(p2, u, {0.05, 4}).vector());
  CHECK(simulate_plant(p2, u, {0.05, 4}).vector() != simulate_plant(p2, u, {0.05, 5}).vector());
}

TEST_CASE("gaussian noise statistics") {
  const std::size_t n = 100000;
  for (double sigma : {0.05, 1.0}) {
    const auto nu = gaussian_noise(n, {sigma, 17});
    const double mean = std::accumulate(nu.begin(), nu.end(), 0.0) / n;
    double var = 0.0;
    for (double v : nu) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / (n - 1));
    CHECK(std::abs(mean) <= 4.0 * sigma / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(sd - sigma) <= 0.02 * sigma);
  }
  for (double v : gaussian_noise(100, {0.0, 3})) CHECK(v == 0.0);
  CHECK_THROWS_AS(gaussian_noise(10, {-0.1, 1}), ValidationError);
}

TEST_CASE("excitation filter") {
  const auto td = benchmark_reference_model();
  CHECK(excitation_filter_gain(td) == doctest::Approx(0.05).epsilon(1e-12));

  // F = 0.0005 (z - 0.8) / (z - 0.9)^4
  const auto f = excitation_filter(td);
  const Polynomial num{0.0005, -0.0004};
  const Polynomial den{1.0, -3.6, 4.86, -2.916, 0.6561};
  REQUIRE(f.num().size() == num.size());
  REQUIRE(f.den().size() == den.size());
  for (std::size_t i = 0; i < num.size(); ++i) CHECK(std::abs(f.num()[i] - num[i]) <= 1e-10 * std::abs(num[i]));
  for (std::size_t i = 0; i < den.size(); ++i) CHECK(std::abs(f.den()[i] - den[i]) <= 1e-14);
  CHECK(std::abs(dc_gain(f) - 1.0) <= 1e-12);
  CHECK(f.is_stable());
  CHECK(f.is_proper());
  CHECK(relative_degree(f) == 3);

  CHECK_THROWS_AS(excitation_filter(TransferFunction({0.02}, {1.0, -1.8, 0.81})), ValidationError);
}

TEST_CASE("excitation filter for another unit-gain model") {
  const TransferFunction td({0.5}, {1.0, -0.5});
  const auto f = excitation_filter(td);
  CHECK(std::abs(dc_gain(f) - 1.0) <= 1e-12);
  // 1 - T_d = (z - 1) / (z - 0.5), so F = 0.5 a / (z - 0.5)^2 and F(1) = 2 a
  CHECK(excitation_filter_gain(td) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(relative_degree(f) == 2);
}

TEST_CASE("gen_input") {
  const auto td = benchmark_reference_model();
  InputSpec spec;
  CHECK(spec.n == 1000);
  const Signal u = gen_input(spec, td);
  CHECK(u.size() == 1000);
  CHECK(gen_input(spec, td).vector() == u.vector());
  // relative degree 3 filter: the first three samples are zero
  CHECK(u[0] == 0.0);
  CHECK(u[1] == 0.0);
  CHECK(u[2] == 0.0);
  CHECK(u[3] != 0.0);

  InputSpec other = spec;
  other.seed = 2;
  CHECK(gen_input(other, td).vector() != u.vector());

  InputSpec silent = spec;
  silent.amplitude = 0.0;
  for (double v : gen_input(silent, td)) CHECK(v == 0.0);

  InputSpec steps = spec;
  steps.kind = InputKind::steps;
  steps.amplitude = 1.0;
  const Signal us = gen_input(steps, td);
  CHECK(max_abs_diff(us.vector(), filter(excitation_filter(td), raw_step_sequence(1000, 1.0, 100)).vector()) == 0.0);

  InputSpec empty = spec;
  empty.n = 0;
  CHECK_THROWS_AS(gen_input(empty, td), ValidationError);
}

TEST_CASE("raw step sequence") {
  const Signal s = raw_step_sequence(14, 10.0, 2);
  const double expected[] = {2.5, 2.5, 6, 6, 10, 10, -2.5, -2.5, -6, -6, -10, -10, 2.5, 2.5};
  for (std::size_t i = 0; i < 14; ++i) CHECK(s[i] == doctest::Approx(expected[i]));
  CHECK_THROWS_AS(raw_step_sequence(10, 1.0, 0), ValidationError);
  CHECK(input_kind_from_string("steps") == InputKind::steps);
  CHECK_THROWS_AS(input_kind_from_string("chirp"), ValidationError);
}
