#pragma once

// Closed-loop evaluation of a plant with a designed or ideal controller.
//
// Each sample t runs in a fixed order: measure y(t) (plant output plus
// noise), form e(t) = r(t) - y(t), read u(t) from the controller (which only
// sees errors up to t - 1), then advance the plant with u(t).

#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"

#include "vrft/lti.hpp"
#include "vrft/nonlin.hpp"
#include "vrft/plant.hpp"
#include "vrft/solvers.hpp"

namespace vrft {

/// Loop diverged once |y| or |u| exceeds this, or a sample stops being finite.
inline constexpr double kDivergenceThreshold = 1e6;

class Controller {
 public:
  enum class Variant { dictionary, ideal_1, ideal_2 };

  /// u(t) = static_map(rho, z(t)) with z(t) = sum_{tau < t} e(tau).
  static Controller from_params(ControllerParams params);
  /// id 1: v(t) = v(t-1) + 0.05 e(t-1);
  /// id 2: v(t) = v(t-1) + 0.25 e(t-1) - 0.2 e(t-2); both u(t) = phi^{-1}(v(t)).
  static Controller ideal(int plant_id);

  Variant variant() const { return variant_; }
  const std::optional<ControllerParams>& params() const { return params_; }

  void reset();
  /// Control output for the current sample.
  double output() const;
  /// Records e(t) after output() has been read for sample t.
  void push_error(double e);

 private:
  Controller(Variant variant, std::optional<ControllerParams> params);

  Variant variant_;
  std::optional<ControllerParams> params_;
  PiecewiseAffineMap inverse_nonlinearity_;
  double state_ = 0.0;       // integrator z(t) (dictionary) or v(t) (ideal)
  double last_error_ = 0.0;  // e(t - 1), ideal-2 only
};

Controller ideal_controller(int plant_id);

struct ClosedLoopResult {
  std::vector<double> r;
  std::vector<double> y;  // measured output
  std::vector<double> u;
  std::vector<double> y_d;
  double J = 0.0;  // +inf when the loop diverged
  bool stable = true;
  std::optional<std::size_t> divergence_index;  // 1-based sample where divergence was detected
};

Signal desired_response(const TransferFunction& td, const Signal& r);

double mr_cost(std::span<const double> y, std::span<const double> y_d);

/// Resets the controller, then simulates. On divergence the traces stop just
/// before the offending sample.
ClosedLoopResult simulate_closed_loop(const HammersteinPlant& plant, Controller& ctrl, const Signal& r,
                                      const NoiseSpec& noise,
                                      const TransferFunction& td = benchmark_reference_model());

/// Piecewise-constant reference holding each amplitude for dwell samples.
Signal eval_reference(const std::vector<double>& amplitudes, std::size_t dwell);

inline const std::vector<double>& default_reference_amplitudes() {
  static const std::vector<double> amps{2.0, 6.0, -2.0, -6.0};
  return amps;
}
inline constexpr std::size_t kDefaultReferenceDwell = 150;

/// Columns t, r, y, y_d, u.
void write_result_csv(const std::filesystem::path& path, const ClosedLoopResult& result);
nlohmann::json result_summary(const ClosedLoopResult& result, std::optional<std::size_t> nonzero = std::nullopt);

}  // namespace vrft
