#include "vrft/solvers.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "vrft/error.hpp"

namespace vrft {

namespace {

void require_finite(const RegressionProblem& problem) {
  if (!problem.phi.allFinite()) throw DataError("regressor matrix contains non-finite entries");
  if (!problem.target.allFinite()) throw DataError("regression target contains non-finite entries");
}

// Coordinate descent on the per-sample objective
//   (1 / 2N) ||target - phi rho||^2 + alpha ||rho||_1
// using the Gram form: gram = phi^T phi / N, corr = phi^T target / N, and
// grad = corr - gram rho is kept current after every coordinate move.
struct CoordinateDescent {
  Eigen::MatrixXd gram;
  Eigen::VectorXd corr;
  double half_mean_sq_target;
  double alpha;
  Eigen::VectorXd rho;
  Eigen::VectorXd grad;

  void refresh_gradient() { grad.noalias() = corr - gram * rho; }

  double objective() const { return half_mean_sq_target - 0.5 * rho.dot(corr + grad) + alpha * rho.lpNorm<1>(); }

  double max_abs_coefficient = 0.0;  // over the coordinates of the last sweep

  // Duality gap divided by N; see StoppingRule::duality_gap.
  double duality_gap(double mean_sq_target) const {
    const double mean_r2 = mean_sq_target - rho.dot(corr + grad);
    const double mean_r_target = mean_sq_target - rho.dot(corr);
    const double dual_norm = grad.cwiseAbs().maxCoeff();
    const double scale = dual_norm > alpha ? alpha / dual_norm : 1.0;
    return 0.5 * mean_r2 * (1.0 + scale * scale) + alpha * rho.lpNorm<1>() - scale * mean_r_target;
  }

  double sweep(const std::vector<Eigen::Index>& coords) {
    double max_delta = 0.0;
    max_abs_coefficient = 0.0;
    for (Eigen::Index j : coords) {
      const double old = rho[j];
      const double diag = gram(j, j);
      const double updated = soft_threshold(grad[j] + diag * old, alpha) / diag;
      if (updated != old) {
        grad.noalias() -= (updated - old) * gram.col(j);
        rho[j] = updated;
        max_delta = std::max(max_delta, std::abs(updated - old));
      }
      max_abs_coefficient = std::max(max_abs_coefficient, std::abs(updated));
    }
    return max_delta;
  }
};

}  // namespace

std::string to_string(ObjectiveScaling scaling) {
  return scaling == ObjectiveScaling::per_sample ? "per-sample" : "raw";
}

std::string to_string(StoppingRule rule) {
  return rule == StoppingRule::coefficient_change ? "coefficient-change" : "duality-gap";
}

StoppingRule stopping_rule_from_string(const std::string& name) {
  if (name == "coefficient-change" || name == "coefficient_change") return StoppingRule::coefficient_change;
  if (name == "duality-gap" || name == "duality_gap") return StoppingRule::duality_gap;
  throw ValidationError("unknown stopping rule '" + name + "' (expected coefficient-change or duality-gap)");
}

ObjectiveScaling objective_scaling_from_string(const std::string& name) {
  if (name == "per-sample" || name == "per_sample") return ObjectiveScaling::per_sample;
  if (name == "raw") return ObjectiveScaling::raw;
  throw ValidationError("unknown objective scaling '" + name + "' (expected per-sample or raw)");
}

ControllerParams ols_solve(const RegressionProblem& problem) {
  if (problem.rows() == 0 || problem.cols() == 0) throw ValidationError("ols_solve: empty regressor matrix");
  require_finite(problem);

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(problem.phi);
  ControllerParams params{cod.solve(problem.target), problem.dictionary, 0.0, "ols", {}};
  auto& diag = params.diagnostics;
  diag.rank = cod.rank();
  diag.rank_deficient = diag.rank < problem.cols();
  diag.converged = true;
  diag.objective = vrft_cost(problem, params.rho);
  if (diag.rank_deficient) {
    diag.notes.push_back("regressor matrix has rank " + std::to_string(diag.rank) + " < " +
                         std::to_string(problem.cols()) + "; minimum-norm solution returned");
  }
  if (!params.rho.allFinite()) throw DataError("ols_solve produced non-finite coefficients");
  return params;
}

double soft_threshold(double x, double lambda) {
  if (x > lambda) return x - lambda;
  if (x < -lambda) return x + lambda;
  return 0.0;
}

double lasso_objective(const RegressionProblem& problem, const Eigen::VectorXd& rho, double alpha,
                       ObjectiveScaling scaling) {
  const double rss = vrft_cost(problem, rho);
  const double l1 = rho.lpNorm<1>();
  if (scaling == ObjectiveScaling::raw) return rss + alpha * l1;
  return 0.5 * rss / static_cast<double>(problem.rows()) + alpha * l1;
}

ControllerParams lasso_cd(const RegressionProblem& problem, double alpha, const LassoOptions& options) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("lasso alpha must be finite and >= 0");
  if (options.max_iter < 1) throw ValidationError("lasso max_iter must be at least 1");
  if (!(options.tol > 0.0)) throw ValidationError("lasso tol must be positive");
  if (problem.rows() == 0 || problem.cols() == 0) throw ValidationError("lasso_cd: empty regressor matrix");
  require_finite(problem);

  const Eigen::Index n = problem.rows();
  const Eigen::Index m = problem.cols();
  const double two_n = 2.0 * static_cast<double>(n);
  const double working_alpha = options.scaling == ObjectiveScaling::raw ? alpha / two_n : alpha;

  Eigen::MatrixXd gram = problem.phi.transpose() * problem.phi / static_cast<double>(n);
  Eigen::VectorXd corr = problem.phi.transpose() * problem.target / static_cast<double>(n);
  if (!gram.allFinite() || !corr.allFinite()) {
    throw DataError("regressor cross products overflow; the dictionary scale is too small for this data");
  }

  // Standardization rescales columns to unit mean square; coefficients are
  // mapped back at the end.
  Eigen::VectorXd col_scale = Eigen::VectorXd::Ones(m);
  if (options.standardize) {
    col_scale = gram.diagonal().cwiseSqrt();
    for (Eigen::Index j = 0; j < m; ++j) {
      if (col_scale[j] == 0.0) col_scale[j] = 1.0;
    }
    const Eigen::VectorXd inv = col_scale.cwiseInverse();
    gram = inv.asDiagonal() * gram * inv.asDiagonal();
    corr = corr.cwiseProduct(inv);
  }

  CoordinateDescent cd{std::move(gram), std::move(corr),
                       0.5 * problem.target.squaredNorm() / static_cast<double>(n), working_alpha,
                       Eigen::VectorXd::Zero(m), Eigen::VectorXd()};

  ControllerParams params{Eigen::VectorXd(), problem.dictionary, alpha, "lasso", {}};
  auto& diag = params.diagnostics;

  if (options.warm_start) {
    if (options.warm_start->size() != m) throw ValidationError("lasso warm start has the wrong length");
    cd.rho = options.warm_start->cwiseProduct(col_scale);
  }

  std::vector<Eigen::Index> all;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (cd.gram(j, j) > 0.0) {
      all.push_back(j);
    } else {
      cd.rho[j] = 0.0;
      diag.notes.push_back("regressor " + std::to_string(j + 1) + " is identically zero; coefficient pinned to 0");
    }
  }

  const double report_factor = options.scaling == ObjectiveScaling::raw ? two_n : 1.0;
  auto record = [&] {
    if (options.record_history) diag.objective_history.push_back(report_factor * cd.objective());
  };

  if (options.stopping == StoppingRule::duality_gap) {
    const double mean_sq_target = problem.target.squaredNorm() / static_cast<double>(n);
    const double gap_tol = options.tol * mean_sq_target;
    cd.refresh_gradient();
    while (diag.iterations < options.max_iter) {
      const double delta = cd.sweep(all);
      ++diag.iterations;
      record();
      const bool last = diag.iterations == options.max_iter;
      if (cd.max_abs_coefficient == 0.0 || delta / cd.max_abs_coefficient < options.tol || last) {
        cd.refresh_gradient();
        diag.duality_gap = cd.duality_gap(mean_sq_target);
        if (*diag.duality_gap < gap_tol) {
          diag.converged = true;
          break;
        }
      }
    }
  } else {
    std::vector<Eigen::Index> active;
    while (diag.iterations < options.max_iter) {
      cd.refresh_gradient();
      const double delta = cd.sweep(all);
      ++diag.iterations;
      record();
      if (delta < options.tol) {
        diag.converged = true;
        break;
      }

      active.clear();
      for (Eigen::Index j : all) {
        if (cd.rho[j] != 0.0) active.push_back(j);
      }
      if (active.size() == all.size()) continue;
      for (int inner_sweeps = 0; inner_sweeps < options.max_iter; ++inner_sweeps) {
        const double inner = cd.sweep(active);
        record();
        if (inner < options.tol) break;
      }
    }
  }

  params.rho = cd.rho.cwiseQuotient(col_scale);
  const double penalty = options.standardize ? cd.rho.lpNorm<1>() : params.rho.lpNorm<1>();
  const double rss = vrft_cost(problem, params.rho);
  diag.objective = report_factor * (0.5 * rss / static_cast<double>(n) + working_alpha * penalty);
  if (!diag.converged) {
    diag.notes.push_back("coordinate descent stopped at max_iter = " + std::to_string(options.max_iter) +
                         " before reaching tol");
  }
  return params;
}

std::vector<ControllerParams> lasso_path(const RegressionProblem& problem, const std::vector<double>& alphas,
                                         LassoOptions options) {
  std::vector<std::size_t> order(alphas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return alphas[a] > alphas[b]; });

  std::vector<std::optional<ControllerParams>> solved(alphas.size());
  for (std::size_t idx : order) {
    solved[idx] = lasso_cd(problem, alphas[idx], options);
    options.warm_start = solved[idx]->rho;
  }
  std::vector<ControllerParams> out;
  out.reserve(alphas.size());
  for (auto& s : solved) out.push_back(std::move(*s));
  return out;
}

std::size_t nonzero_count(const ControllerParams& params) {
  return static_cast<std::size_t>((params.rho.array() != 0.0).count());
}

nlohmann::json dictionary_to_json(const Dictionary& dict) {
  if (dict.kind() == DictionaryKind::custom) throw ValidationError("custom dictionaries cannot be serialized");
  nlohmann::json j{{"kind", to_string(dict.kind())}, {"m", dict.size()}, {"scale", dict.scale()}};
  if (dict.kind() == DictionaryKind::deadzone) j["spacing"] = dict.spacing();
  return j;
}

Dictionary dictionary_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("dictionary spec must be an object");
  const auto kind = dictionary_kind_from_string(j.at("kind").get<std::string>());
  const auto m_signed = j.at("m").get<long long>();
  if (m_signed < 1) throw ValidationError("dictionary m must be at least 1");
  const auto m = static_cast<std::size_t>(m_signed);
  const double scale = j.value("scale", 200.0);
  switch (kind) {
    case DictionaryKind::polynomial_odd: return Dictionary::polynomial_odd(m, scale);
    case DictionaryKind::deadzone: return Dictionary::deadzone(m, scale, j.value("spacing", 10.0));
    case DictionaryKind::custom: break;
  }
  throw ValidationError("custom dictionaries cannot be loaded from a spec");
}

nlohmann::json to_json(const ControllerParams& params) {
  const auto& d = params.diagnostics;
  nlohmann::json diag{{"iterations", d.iterations},
                      {"converged", d.converged},
                      {"objective", d.objective},
                      {"duality_gap", d.duality_gap ? nlohmann::json(*d.duality_gap) : nlohmann::json(nullptr)},
                      {"nonzero_count", nonzero_count(params)},
                      {"notes", d.notes}};
  if (d.rank >= 0) {
    diag["rank"] = d.rank;
    diag["rank_deficient"] = d.rank_deficient;
  }
  return {{"dictionary", dictionary_to_json(params.dictionary)},
          {"solver", params.solver},
          {"alpha", params.alpha},
          {"rho", std::vector<double>(params.rho.data(), params.rho.data() + params.rho.size())},
          {"diagnostics", std::move(diag)}};
}

ControllerParams controller_params_from_json(const nlohmann::json& j) {
  try {
    ControllerParams params{Eigen::VectorXd(), dictionary_from_json(j.at("dictionary")), j.value("alpha", 0.0),
                            j.value("solver", std::string("ols")), {}};
    const auto rho = j.at("rho").get<std::vector<double>>();
    if (rho.size() != params.dictionary.size()) {
      throw ValidationError("controller rho has " + std::to_string(rho.size()) + " entries but dictionary has " +
                            std::to_string(params.dictionary.size()));
    }
    params.rho = Eigen::Map<const Eigen::VectorXd>(rho.data(), static_cast<Eigen::Index>(rho.size()));
    if (!params.rho.allFinite()) throw DataError("controller coefficients must be finite");
    if (j.contains("diagnostics")) {
      const auto& d = j.at("diagnostics");
      params.diagnostics.iterations = d.value("iterations", 0);
      params.diagnostics.converged = d.value("converged", false);
      params.diagnostics.objective = d.value("objective", 0.0);
      params.diagnostics.rank = d.value("rank", Eigen::Index{-1});
      params.diagnostics.rank_deficient = d.value("rank_deficient", false);
      params.diagnostics.notes = d.value("notes", std::vector<std::string>{});
    }
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed controller document: ") + e.what());
  }
}

void save_controller(const std::filesystem::path& path, const ControllerParams& params,
                     const nlohmann::json& provenance) {
  auto j = to_json(params);
  if (!provenance.is_null()) j["config"] = provenance;
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << std::setw(2) << j << '\n';
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

ControllerParams load_controller(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open controller file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return controller_params_from_json(j);
}

}  // namespace vrft
