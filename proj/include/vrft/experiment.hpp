#pragma once

// Config-driven experiment pipeline: generate data, design controllers,
// evaluate them in closed loop, and tabulate the results.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "vrft/closed_loop.hpp"
#include "vrft/plant.hpp"
#include "vrft/regression.hpp"
#include "vrft/solvers.hpp"

namespace vrft {

enum class SolverKind { ols, lasso };

std::string to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);

/// One row of an experiment's design matrix. A lasso design with several
/// alphas runs as a warm-started sweep and yields one cell per alpha.
struct DesignSpec {
  nlohmann::json dictionary;  // {kind, m, scale, spacing}
  SolverKind solver = SolverKind::lasso;
  std::vector<double> alphas;  // lasso only
};

struct ExperimentConfig {
  int plant = 1;
  InputKind input_kind = InputKind::random;
  double amplitude = 25.0;
  std::size_t input_dwell = 100;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> noise_seed;  // defaults to seed + 1
  std::size_t n = 1000;
  double sigma = 0.05;
  Polynomial td_num{0.01};
  Polynomial td_den{1.0, -1.8, 0.81};
  nlohmann::json dictionary{{"kind", "deadzone"}, {"m", 20}, {"scale", 200.0}, {"spacing", 10.0}};
  SolverKind solver = SolverKind::lasso;
  double alpha = 0.001;
  std::vector<double> alphas;  // sweep list for the top-level design
  double tol = 1e-6;
  int max_iter = 100000;
  ObjectiveScaling objective_scaling = ObjectiveScaling::per_sample;
  bool standardize = false;
  StoppingRule stopping = StoppingRule::coefficient_change;
  std::vector<double> eval_amplitudes = default_reference_amplitudes();
  std::size_t eval_dwell = kDefaultReferenceDwell;
  double eval_sigma = 0.0;
  std::filesystem::path output_dir = "out";
  std::vector<DesignSpec> designs;  // experiment matrix; empty means the top-level design only

  /// Unknown keys and invalid values raise ValidationError.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void validate() const;

  TransferFunction reference_model() const;
  Dictionary make_dictionary() const;
  LassoOptions lasso_options() const;
  NoiseSpec noise() const;
  InputSpec input() const;
  Signal evaluation_reference() const;
  /// The design matrix to run; falls back to the top-level dictionary/solver.
  std::vector<DesignSpec> design_matrix() const;
};

struct GenerateOutcome {
  Dataset data;
  std::filesystem::path csv_path;
  std::filesystem::path sidecar_path;
};

struct DesignOutcome {
  ControllerParams params;
  std::filesystem::path controller_path;
  std::string summary;  // one line: m, nonzero count, objective, converged
};

struct EvaluateOutcome {
  ClosedLoopResult result;
  nlohmann::json summary;
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
};

struct CellReport {
  std::size_t index = 0;
  std::string dictionary;
  std::size_t m = 0;
  std::string solver;
  double alpha = 0.0;
  std::optional<std::size_t> nonzero;
  std::optional<double> J;
  std::optional<bool> stable;
  bool converged = false;
  std::string controller_file;
  std::string error;
};

struct ExperimentReport {
  std::vector<CellReport> cells;
  nlohmann::json json;
  std::string table;
  std::filesystem::path json_path;
  std::filesystem::path table_path;
};

/// Simulates the configured plant and writes dataset.csv plus dataset.json.
GenerateOutcome cmd_generate(const ExperimentConfig& config);

/// Designs a controller from a dataset CSV and writes it as JSON.
DesignOutcome cmd_design(const ExperimentConfig& config, const std::filesystem::path& dataset_csv,
                         std::optional<std::filesystem::path> controller_out = std::nullopt);

/// Evaluates a stored controller, or the plant's ideal controller when
/// controller_file is empty, on the configured reference.
EvaluateOutcome cmd_evaluate(const ExperimentConfig& config, const std::optional<std::filesystem::path>& controller_file,
                             const std::string& tag = "result");

/// Runs generate, every design in the matrix, and evaluation. Failures are
/// recorded per cell and do not stop the run.
ExperimentReport cmd_experiment(const ExperimentConfig& config);

}  // namespace vrft
