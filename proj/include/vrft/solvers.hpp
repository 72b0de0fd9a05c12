#pragma once

// Least-squares and L1-regularized solvers for the VRFT regression.

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "vrft/nonlin.hpp"
#include "vrft/regression.hpp"

namespace vrft {

struct SolverDiagnostics {
  int iterations = 0;  // full sweeps (lasso); 0 for ols
  bool converged = false;
  double objective = 0.0;
  std::optional<double> duality_gap;  // per-sample units, duality_gap stopping only
  Eigen::Index rank = -1;  // ols only
  bool rank_deficient = false;
  std::vector<std::string> notes;
  std::vector<double> objective_history;  // after every sweep, active-set ones included, when requested
};

struct ControllerParams {
  Eigen::VectorXd rho;
  Dictionary dictionary;
  double alpha = 0.0;
  std::string solver = "ols";
  SolverDiagnostics diagnostics;
};

enum class ObjectiveScaling {
  per_sample,  // (1 / (2 N)) ||target - phi rho||^2 + alpha ||rho||_1
  raw,         // ||target - phi rho||^2 + alpha ||rho||_1
};

std::string to_string(ObjectiveScaling scaling);
ObjectiveScaling objective_scaling_from_string(const std::string& name);

/// When coordinate descent may stop.
enum class StoppingRule {
  /// Largest absolute coefficient change in a full sweep is below tol.
  coefficient_change,
  /// scikit-learn's rule: once the largest coefficient change relative to the
  /// largest coefficient drops below tol, stop if the duality gap of
  /// 0.5 ||r||^2 + alpha N ||rho||_1 is below tol * ||target||^2. Plain full
  /// sweeps only, as in that implementation.
  duality_gap,
};

std::string to_string(StoppingRule rule);
StoppingRule stopping_rule_from_string(const std::string& name);

struct LassoOptions {
  double tol = 1e-6;
  int max_iter = 100000;
  StoppingRule stopping = StoppingRule::coefficient_change;
  ObjectiveScaling scaling = ObjectiveScaling::per_sample;
  bool standardize = false;
  bool record_history = false;
  std::optional<Eigen::VectorXd> warm_start;
};

/// Minimum-norm least-squares solution through a complete orthogonal
/// decomposition; rank deficiency is reported in the diagnostics.
ControllerParams ols_solve(const RegressionProblem& problem);

double soft_threshold(double x, double lambda);

/// Objective value of rho under the given scaling.
double lasso_objective(const RegressionProblem& problem, const Eigen::VectorXd& rho, double alpha,
                       ObjectiveScaling scaling = ObjectiveScaling::per_sample);

/// Cyclic coordinate descent. With coefficient_change stopping, each full
/// sweep is followed by sweeps over the nonzero coordinates until they settle,
/// and convergence is declared only on a full sweep. With duality_gap stopping
/// every sweep is a full sweep.
ControllerParams lasso_cd(const RegressionProblem& problem, double alpha, const LassoOptions& options = {});

/// Solves for each alpha in descending order, warm-starting from the previous
/// solution. Results are returned in the order of the input list.
std::vector<ControllerParams> lasso_path(const RegressionProblem& problem, const std::vector<double>& alphas,
                                         LassoOptions options = {});

std::size_t nonzero_count(const ControllerParams& params);

/// Dictionary spec as stored in config and controller files.
nlohmann::json dictionary_to_json(const Dictionary& dict);
Dictionary dictionary_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ControllerParams& params);
ControllerParams controller_params_from_json(const nlohmann::json& j);

void save_controller(const std::filesystem::path& path, const ControllerParams& params,
                     const nlohmann::json& provenance = nullptr);
ControllerParams load_controller(const std::filesystem::path& path);

}  // namespace vrft
