#include "vrft/closed_loop.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "vrft/error.hpp"

namespace vrft {

namespace {

bool diverged(double v) { return !std::isfinite(v) || std::abs(v) > kDivergenceThreshold; }

}  // namespace

Controller::Controller(Variant variant, std::optional<ControllerParams> params)
    : variant_(variant), params_(std::move(params)), inverse_nonlinearity_(pwa_invert(benchmark_nonlinearity())) {}

Controller Controller::from_params(ControllerParams params) {
  if (static_cast<std::size_t>(params.rho.size()) != params.dictionary.size()) {
    throw ValidationError("controller parameter length does not match its dictionary");
  }
  return Controller(Variant::dictionary, std::move(params));
}

Controller Controller::ideal(int plant_id) {
  switch (plant_id) {
    case 1: return Controller(Variant::ideal_1, std::nullopt);
    case 2: return Controller(Variant::ideal_2, std::nullopt);
    default: throw ValidationError("no ideal controller for plant id " + std::to_string(plant_id));
  }
}

Controller ideal_controller(int plant_id) { return Controller::ideal(plant_id); }

void Controller::reset() {
  state_ = 0.0;
  last_error_ = 0.0;
}

double Controller::output() const {
  if (variant_ == Variant::dictionary) return static_map(params_->dictionary, params_->rho, state_);
  return inverse_nonlinearity_(state_);
}

void Controller::push_error(double e) {
  switch (variant_) {
    case Variant::dictionary: state_ += e; break;
    case Variant::ideal_1: state_ += 0.05 * e; break;
    case Variant::ideal_2:
      state_ += 0.25 * e - 0.2 * last_error_;
      last_error_ = e;
      break;
  }
}

Signal desired_response(const TransferFunction& td, const Signal& r) {
  if (!td.is_stable()) throw ValidationError("reference model must be stable");
  return filter(td, r);
}

double mr_cost(std::span<const double> y, std::span<const double> y_d) {
  if (y.size() != y_d.size()) {
    throw ValidationError("mr_cost: lengths differ (" + std::to_string(y.size()) + " vs " +
                          std::to_string(y_d.size()) + ")");
  }
  double acc = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double d = y_d[t] - y[t];
    acc += d * d;
  }
  return acc;
}

ClosedLoopResult simulate_closed_loop(const HammersteinPlant& plant, Controller& ctrl, const Signal& r,
                                      const NoiseSpec& noise, const TransferFunction& td) {
  const Signal y_d = desired_response(td, r);
  const auto nu = gaussian_noise(r.size(), noise);
  LtiState linear(plant.linear_block());
  ctrl.reset();

  ClosedLoopResult out;
  out.r.reserve(r.size());
  out.y.reserve(r.size());
  out.u.reserve(r.size());
  out.y_d.reserve(r.size());
  for (std::size_t t = 0; t < r.size(); ++t) {
    const double y = linear.pending_output() + nu[t];
    const double e = r[t] - y;
    const double u = ctrl.output();
    if (diverged(y) || diverged(u)) {
      out.stable = false;
      out.divergence_index = t + 1;
      break;
    }
    ctrl.push_error(e);
    linear.step(plant.input_nonlinearity()(u));
    out.r.push_back(r[t]);
    out.y.push_back(y);
    out.u.push_back(u);
    out.y_d.push_back(y_d[t]);
  }
  out.J = out.stable ? mr_cost(out.y, out.y_d) : std::numeric_limits<double>::infinity();
  return out;
}

Signal eval_reference(const std::vector<double>& amplitudes, std::size_t dwell) {
  if (dwell == 0) throw ValidationError("reference dwell must be at least one sample");
  if (amplitudes.empty()) throw ValidationError("reference needs at least one amplitude");
  std::vector<double> r;
  r.reserve(amplitudes.size() * dwell);
  for (double a : amplitudes) r.insert(r.end(), dwell, a);
  return Signal(std::move(r));
}

void write_result_csv(const std::filesystem::path& path, const ClosedLoopResult& result) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << std::setprecision(17) << "t,r,y,y_d,u\n";
  for (std::size_t t = 0; t < result.y.size(); ++t) {
    out << t + 1 << ',' << result.r[t] << ',' << result.y[t] << ',' << result.y_d[t] << ',' << result.u[t] << '\n';
  }
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

nlohmann::json result_summary(const ClosedLoopResult& result, std::optional<std::size_t> nonzero) {
  nlohmann::json j{{"J", result.stable ? nlohmann::json(result.J) : nlohmann::json(nullptr)},
                   {"stable", result.stable},
                   {"samples", result.y.size()}};
  j["divergence_index"] = result.divergence_index ? nlohmann::json(*result.divergence_index) : nlohmann::json(nullptr);
  j["nonzero_count"] = nonzero ? nlohmann::json(*nonzero) : nlohmann::json(nullptr);
  return j;
}

}  // namespace vrft
