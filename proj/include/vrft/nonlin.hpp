#pragma once

// Scalar nonlinear maps: continuous piecewise-affine functions and the basis
// dictionaries that parameterize the controller's static element.

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace vrft {

/// Continuous, strictly increasing piecewise-affine map.
///
/// Piece k covers (breakpoints[k-1], breakpoints[k]) and has slope
/// slopes[k]; the map is pinned by its value at x = 0.
class PiecewiseAffineMap {
 public:
  PiecewiseAffineMap(std::vector<double> breakpoints, std::vector<double> slopes, double anchor);

  static PiecewiseAffineMap identity();

  double operator()(double x) const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& slopes() const { return slopes_; }
  double anchor() const { return anchor_; }
  /// Map values at each breakpoint.
  const std::vector<double>& knot_values() const { return knot_values_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> slopes_;
  double anchor_;
  std::vector<double> knot_values_;
};

/// The shared input nonlinearity of both benchmark plants: slopes 2, 5, 1, 5, 2
/// with breakpoints at -2, -1, 1, 2, odd symmetric.
PiecewiseAffineMap benchmark_nonlinearity();

double pwa_eval(const PiecewiseAffineMap& map, double x);
PiecewiseAffineMap pwa_invert(const PiecewiseAffineMap& map);

enum class DictionaryKind { polynomial_odd, deadzone, custom };

std::string to_string(DictionaryKind kind);
DictionaryKind dictionary_kind_from_string(const std::string& name);

/// Ordered family of scalar basis functions psi_1..psi_m.
///
/// polynomial_odd: psi_i(x) = (x / scale)^(2i - 1).
/// deadzone: psi_i is zero on |x| <= spacing*(i-1) and affine outside, with
///   slope 1 / (scale - spacing*(i-1)), so |psi_i(scale)| = 1.
/// custom: caller-supplied callbacks, no normalization.
class Dictionary {
 public:
  using Basis = std::function<double(double)>;

  static Dictionary polynomial_odd(std::size_t m, double scale = 200.0);
  static Dictionary deadzone(std::size_t m, double scale = 200.0, double spacing = 10.0);
  static Dictionary custom(std::vector<Basis> basis);

  DictionaryKind kind() const { return kind_; }
  std::size_t size() const { return m_; }
  double scale() const { return scale_; }
  double spacing() const { return spacing_; }

  /// Writes psi_1(x)..psi_m(x) into out (size m).
  void evaluate(double x, std::span<double> out) const;
  std::vector<double> evaluate(double x) const;

  /// Same kind, size, scale and spacing. Custom dictionaries never compare equal.
  bool same_spec(const Dictionary& other) const;
  std::string describe() const;

 private:
  Dictionary(DictionaryKind kind, std::size_t m, double scale, double spacing);

  DictionaryKind kind_;
  std::size_t m_;
  double scale_;
  double spacing_;
  std::vector<Basis> custom_;
};

std::vector<double> dict_eval(const Dictionary& dict, double x);

/// sum_i rho_i psi_i(x). Terms with rho_i == 0 are skipped, so an exactly
/// sparse parameter vector never touches (possibly overflowing) unused bases.
double static_map(const Dictionary& dict, const Eigen::VectorXd& rho, double x);

}  // namespace vrft
