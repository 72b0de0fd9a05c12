#pragma once

// Discrete-time SISO linear systems described by rational transfer functions.
//
// Polynomials are coefficient lists in descending powers of z, so
// {1, -1.8, 0.81} is z^2 - 1.8 z + 0.81. Time index t = 1..N in the math
// maps to container index t - 1. All filtering uses zero initial conditions.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vrft {

using Polynomial = std::vector<double>;

double poly_eval(std::span<const double> poly, double x);
Polynomial poly_mul(std::span<const double> a, std::span<const double> b);
/// a - b with the coefficient lists aligned at the constant term.
Polynomial poly_sub(std::span<const double> a, std::span<const double> b);
std::vector<std::complex<double>> poly_roots(std::span<const double> poly);

/// Synthetic division by (z - root). Throws ValidationError when root is not
/// a root of poly to within tol relative to the polynomial's magnitude at root.
Polynomial deflate_root(std::span<const double> poly, double root, double tol = 1e-9);

/// Finite-valued sampled signal, length >= 1.
class Signal {
 public:
  explicit Signal(std::vector<double> values);
  static Signal zeros(std::size_t n);
  static Signal constant(std::size_t n, double value);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vector() const { return values_; }

  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

 private:
  std::vector<double> values_;
};

class TransferFunction {
 public:
  /// Leading zeros are stripped and both polynomials are divided by the
  /// leading denominator coefficient. Improper functions are allowed here;
  /// forward filtering rejects them.
  TransferFunction(Polynomial num, Polynomial den);

  static TransferFunction identity();

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }

  int num_degree() const { return static_cast<int>(num_.size()) - 1; }
  int den_degree() const { return static_cast<int>(den_.size()) - 1; }
  bool is_proper() const { return num_degree() <= den_degree(); }
  bool is_stable() const;

  double operator()(double z) const { return poly_eval(num_, z) / poly_eval(den_, z); }

  /// Series connection.
  TransferFunction operator*(const TransferFunction& other) const;

  friend bool operator==(const TransferFunction&, const TransferFunction&) = default;

 private:
  Polynomial num_;
  Polynomial den_;
};

/// Streaming realization of a proper transfer function (direct form,
/// zero initial state).
class LtiState {
 public:
  explicit LtiState(const TransferFunction& tf);

  /// Output at the current step contributed by past samples only. For a
  /// strictly proper system this is the full output.
  double pending_output() const;
  /// Feeds the current input, returns the current output, and advances.
  double step(double input);
  void reset();

 private:
  std::vector<double> b_;  // numerator, padded to den length
  std::vector<double> a_;  // monic denominator
  std::vector<double> past_in_;
  std::vector<double> past_out_;
};

Signal filter(const TransferFunction& tf, const Signal& input);
double dc_gain(const TransferFunction& tf);
int relative_degree(const TransferFunction& tf);

/// Smallest 1-based t such that the step response stays within
/// band * |final value| of the final value for every sample from t on.
int settling_time(const TransferFunction& tf, double band);

}  // namespace vrft
