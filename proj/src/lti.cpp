#include "vrft/lti.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vrft/error.hpp"

namespace vrft {

namespace {

constexpr int kSettlingHorizon = 10000;

Polynomial strip_leading_zeros(Polynomial p) {
  auto first = std::find_if(p.begin(), p.end(), [](double c) { return c != 0.0; });
  if (first == p.end()) return {0.0};
  p.erase(p.begin(), first);
  return p;
}

void require_finite(std::span<const double> coeffs, const char* what) {
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw ValidationError(std::string(what) + " has a non-finite coefficient");
  }
}

}  // namespace

double poly_eval(std::span<const double> poly, double x) {
  double acc = 0.0;
  for (double c : poly) acc = acc * x + c;
  return acc;
}

Polynomial poly_mul(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  Polynomial out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Polynomial poly_sub(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::max(a.size(), b.size());
  Polynomial out(n, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[n - a.size() + i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[n - b.size() + i] -= b[i];
  return out;
}

std::vector<std::complex<double>> poly_roots(std::span<const double> poly) {
  Polynomial p = strip_leading_zeros(Polynomial(poly.begin(), poly.end()));
  const auto n = static_cast<Eigen::Index>(p.size()) - 1;
  if (n <= 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) companion(0, j) = -p[static_cast<std::size_t>(j) + 1] / p[0];
  for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

Polynomial deflate_root(std::span<const double> poly, double root, double tol) {
  if (poly.size() < 2) throw ValidationError("deflate_root: polynomial has degree < 1");
  // Horner's scheme yields the quotient coefficients and the remainder.
  Polynomial quotient(poly.size() - 1);
  double acc = 0.0;
  double magnitude = 0.0;
  double power = 1.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    acc = acc * root + poly[i];
    if (i + 1 < poly.size()) quotient[i] = acc;
    magnitude += std::abs(poly[poly.size() - 1 - i]) * power;
    power *= std::abs(root);
  }
  const double residual = acc;
  if (!(std::abs(residual) <= tol * std::max(magnitude, 1e-300))) {
    std::ostringstream msg;
    msg << "deflate_root: z = " << root << " is not a root (residual " << residual << ")";
    throw ValidationError(msg.str());
  }
  return quotient;
}

Signal::Signal(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ValidationError("Signal must have at least one sample");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DataError("Signal sample " + std::to_string(i + 1) + " is not finite");
    }
  }
}

Signal Signal::zeros(std::size_t n) { return Signal(std::vector<double>(n, 0.0)); }

Signal Signal::constant(std::size_t n, double value) { return Signal(std::vector<double>(n, value)); }

TransferFunction::TransferFunction(Polynomial num, Polynomial den)
    : num_(strip_leading_zeros(std::move(num))), den_(strip_leading_zeros(std::move(den))) {
  require_finite(num_, "numerator");
  require_finite(den_, "denominator");
  if (den_.size() == 1 && den_[0] == 0.0) throw ValidationError("transfer function denominator is zero");
  const double lead = den_.front();
  for (double& c : num_) c /= lead;
  for (double& c : den_) c /= lead;
}

TransferFunction TransferFunction::identity() { return TransferFunction({1.0}, {1.0}); }

bool TransferFunction::is_stable() const {
  for (const auto& r : poly_roots(den_)) {
    if (std::abs(r) >= 1.0) return false;
  }
  return true;
}

TransferFunction TransferFunction::operator*(const TransferFunction& other) const {
  return TransferFunction(poly_mul(num_, other.num_), poly_mul(den_, other.den_));
}

LtiState::LtiState(const TransferFunction& tf) {
  if (!tf.is_proper()) throw ValidationError("cannot filter with an improper transfer function");
  a_ = tf.den();
  b_.assign(a_.size() - tf.num().size(), 0.0);
  b_.insert(b_.end(), tf.num().begin(), tf.num().end());
  past_in_.assign(a_.size() - 1, 0.0);
  past_out_.assign(a_.size() - 1, 0.0);
}

double LtiState::pending_output() const {
  double acc = 0.0;
  for (std::size_t k = 1; k < a_.size(); ++k) acc += b_[k] * past_in_[k - 1] - a_[k] * past_out_[k - 1];
  return acc;
}

double LtiState::step(double input) {
  const double out = b_[0] * input + pending_output();
  if (!past_in_.empty()) {
    std::copy_backward(past_in_.begin(), past_in_.end() - 1, past_in_.end());
    std::copy_backward(past_out_.begin(), past_out_.end() - 1, past_out_.end());
    past_in_[0] = input;
    past_out_[0] = out;
  }
  return out;
}

void LtiState::reset() {
  std::fill(past_in_.begin(), past_in_.end(), 0.0);
  std::fill(past_out_.begin(), past_out_.end(), 0.0);
}

Signal filter(const TransferFunction& tf, const Signal& input) {
  LtiState state(tf);
  std::vector<double> out;
  out.reserve(input.size());
  for (double x : input) out.push_back(state.step(x));
  return Signal(std::move(out));
}

double dc_gain(const TransferFunction& tf) {
  const double den1 = poly_eval(tf.den(), 1.0);
  if (den1 == 0.0) {
    throw ValidationError("dc_gain: denominator vanishes at z = 1; deflate the (z - 1) factor first");
  }
  return poly_eval(tf.num(), 1.0) / den1;
}

int relative_degree(const TransferFunction& tf) { return tf.den_degree() - tf.num_degree(); }

int settling_time(const TransferFunction& tf, double band) {
  if (!(band > 0.0 && band < 1.0)) throw ValidationError("settling_time: band must lie in (0, 1)");
  if (!tf.is_stable()) throw ValidationError("settling_time: transfer function is not stable");
  const double final_value = dc_gain(tf);
  if (final_value == 0.0) throw ValidationError("settling_time: step response settles to zero");
  const double width = band * std::abs(final_value);

  LtiState state(tf);
  int last_outside = 0;  // 1-based index of the last sample outside the band
  for (int t = 1; t <= kSettlingHorizon; ++t) {
    if (std::abs(state.step(1.0) - final_value) > width) last_outside = t;
  }
  if (last_outside >= kSettlingHorizon) {
    throw ValidationError("settling_time: step response did not settle within the horizon");
  }
  return last_outside + 1;
}

}  // namespace vrft
