#include "vrft/nonlin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vrft/error.hpp"

namespace vrft {

PiecewiseAffineMap::PiecewiseAffineMap(std::vector<double> breakpoints, std::vector<double> slopes,
                                       double anchor)
    : breakpoints_(std::move(breakpoints)), slopes_(std::move(slopes)), anchor_(anchor) {
  if (slopes_.size() != breakpoints_.size() + 1) {
    throw ValidationError("piecewise-affine map needs exactly one more slope than breakpoints");
  }
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw ValidationError("piecewise-affine breakpoints must be strictly increasing");
    }
  }
  for (double s : slopes_) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ValidationError("piecewise-affine map must be strictly increasing (all slopes > 0)");
    }
  }
  if (!std::isfinite(anchor_)) throw ValidationError("piecewise-affine anchor must be finite");

  // Integrate the slopes outward from x = 0, where the value is the anchor.
  const std::size_t n = breakpoints_.size();
  knot_values_.assign(n, 0.0);
  const auto zero_piece =
      static_cast<std::size_t>(std::upper_bound(breakpoints_.begin(), breakpoints_.end(), 0.0) - breakpoints_.begin());
  double x_prev = 0.0;
  double f_prev = anchor_;
  for (std::size_t i = zero_piece; i < n; ++i) {
    f_prev += slopes_[i] * (breakpoints_[i] - x_prev);
    x_prev = breakpoints_[i];
    knot_values_[i] = f_prev;
  }
  x_prev = 0.0;
  f_prev = anchor_;
  for (std::size_t i = zero_piece; i-- > 0;) {
    f_prev -= slopes_[i + 1] * (x_prev - breakpoints_[i]);
    x_prev = breakpoints_[i];
    knot_values_[i] = f_prev;
  }
}

PiecewiseAffineMap PiecewiseAffineMap::identity() { return PiecewiseAffineMap({}, {1.0}, 0.0); }

double PiecewiseAffineMap::operator()(double x) const {
  const auto k =
      static_cast<std::size_t>(std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x) - breakpoints_.begin());
  if (k > 0) return knot_values_[k - 1] + slopes_[k] * (x - breakpoints_[k - 1]);
  if (!breakpoints_.empty()) return knot_values_[0] + slopes_[0] * (x - breakpoints_[0]);
  return anchor_ + slopes_[0] * x;
}

PiecewiseAffineMap benchmark_nonlinearity() {
  return PiecewiseAffineMap({-2.0, -1.0, 1.0, 2.0}, {2.0, 5.0, 1.0, 5.0, 2.0}, 0.0);
}

double pwa_eval(const PiecewiseAffineMap& map, double x) { return map(x); }

PiecewiseAffineMap pwa_invert(const PiecewiseAffineMap& map) {
  const auto& knots = map.knot_values();
  const auto& slopes = map.slopes();
  const auto& bps = map.breakpoints();

  std::vector<double> inv_slopes(slopes.size());
  std::transform(slopes.begin(), slopes.end(), inv_slopes.begin(), [](double s) { return 1.0 / s; });

  // Preimage of 0 gives the inverse's anchor.
  const auto k = static_cast<std::size_t>(std::upper_bound(knots.begin(), knots.end(), 0.0) - knots.begin());
  double anchor;
  if (k > 0) {
    anchor = bps[k - 1] + (0.0 - knots[k - 1]) / slopes[k];
  } else if (!bps.empty()) {
    anchor = bps[0] + (0.0 - knots[0]) / slopes[0];
  } else {
    anchor = -map.anchor() / slopes[0];
  }
  return PiecewiseAffineMap(knots, std::move(inv_slopes), anchor);
}

std::string to_string(DictionaryKind kind) {
  switch (kind) {
    case DictionaryKind::polynomial_odd: return "polynomial";
    case DictionaryKind::deadzone: return "deadzone";
    case DictionaryKind::custom: return "custom";
  }
  return "unknown";
}

DictionaryKind dictionary_kind_from_string(const std::string& name) {
  if (name == "polynomial" || name == "polynomial-odd" || name == "poly") return DictionaryKind::polynomial_odd;
  if (name == "deadzone") return DictionaryKind::deadzone;
  if (name == "custom") return DictionaryKind::custom;
  throw ValidationError("unknown dictionary kind '" + name + "'");
}

Dictionary::Dictionary(DictionaryKind kind, std::size_t m, double scale, double spacing)
    : kind_(kind), m_(m), scale_(scale), spacing_(spacing) {
  if (m_ == 0) throw ValidationError("dictionary must contain at least one basis function");
}

Dictionary Dictionary::polynomial_odd(std::size_t m, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("dictionary scale must be positive");
  return Dictionary(DictionaryKind::polynomial_odd, m, scale, 0.0);
}

Dictionary Dictionary::deadzone(std::size_t m, double scale, double spacing) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("dictionary scale must be positive");
  if (!(spacing >= 0.0) || !std::isfinite(spacing)) throw ValidationError("deadzone spacing must be non-negative");
  if (m > 0 && !(spacing * static_cast<double>(m - 1) < scale)) {
    std::ostringstream msg;
    msg << "deadzone dictionary: spacing*(m-1) = " << spacing * static_cast<double>(m - 1)
        << " must be below scale " << scale;
    throw ValidationError(msg.str());
  }
  return Dictionary(DictionaryKind::deadzone, m, scale, spacing);
}

Dictionary Dictionary::custom(std::vector<Basis> basis) {
  Dictionary d(DictionaryKind::custom, basis.size(), 1.0, 0.0);
  for (const auto& f : basis) {
    if (!f) throw ValidationError("custom dictionary basis function is empty");
  }
  d.custom_ = std::move(basis);
  return d;
}

void Dictionary::evaluate(double x, std::span<double> out) const {
  if (out.size() != m_) throw ValidationError("dictionary output buffer has the wrong size");
  switch (kind_) {
    case DictionaryKind::polynomial_odd: {
      const double s = x / scale_;
      const double s2 = s * s;
      double p = s;
      for (std::size_t i = 0; i < m_; ++i) {
        out[i] = p;
        p *= s2;
      }
      break;
    }
    case DictionaryKind::deadzone: {
      const double ax = std::abs(x);
      const double sign = x < 0.0 ? -1.0 : 1.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double edge = spacing_ * static_cast<double>(i);
        out[i] = ax > edge ? sign * (ax - edge) / (scale_ - edge) : 0.0;
      }
      break;
    }
    case DictionaryKind::custom:
      for (std::size_t i = 0; i < m_; ++i) out[i] = custom_[i](x);
      break;
  }
}

std::vector<double> Dictionary::evaluate(double x) const {
  std::vector<double> out(m_);
  evaluate(x, out);
  return out;
}

bool Dictionary::same_spec(const Dictionary& other) const {
  if (kind_ == DictionaryKind::custom || other.kind_ == DictionaryKind::custom) return false;
  return kind_ == other.kind_ && m_ == other.m_ && scale_ == other.scale_ &&
         (kind_ != DictionaryKind::deadzone || spacing_ == other.spacing_);
}

std::string Dictionary::describe() const {
  std::ostringstream s;
  s << to_string(kind_) << " m=" << m_;
  if (kind_ != DictionaryKind::custom) s << " scale=" << scale_;
  if (kind_ == DictionaryKind::deadzone) s << " spacing=" << spacing_;
  return s.str();
}

std::vector<double> dict_eval(const Dictionary& dict, double x) { return dict.evaluate(x); }

double static_map(const Dictionary& dict, const Eigen::VectorXd& rho, double x) {
  if (static_cast<std::size_t>(rho.size()) != dict.size()) {
    throw ValidationError("parameter vector length " + std::to_string(rho.size()) +
                          " does not match dictionary size " + std::to_string(dict.size()));
  }
  thread_local std::vector<double> psi;
  psi.resize(dict.size());
  dict.evaluate(x, psi);
  double acc = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double r = rho[static_cast<Eigen::Index>(i)];
    if (r != 0.0) acc += r * psi[i];
  }
  return acc;
}

}  // namespace vrft
