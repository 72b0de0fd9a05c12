#include "vrft/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <set>
#include <sstream>

#include "vrft/error.hpp"

namespace vrft {

namespace {

using nlohmann::json;

const std::set<std::string> kConfigKeys{
    "plant",     "input_kind", "amplitude",     "input_dwell",  "seed",           "noise_seed",
    "N",         "sigma",      "reference_model", "dictionary", "solver",         "alpha",
    "alphas",    "tol",        "max_iter",      "objective_scaling", "standardize", "stopping", "eval_reference",
    "eval_sigma", "output_dir", "designs"};

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config key '") + key + "': " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << std::setw(2) << j << '\n';
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void ensure_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw DataError("cannot create output directory '" + dir.string() + "'");
  }
}

DesignSpec design_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("each design must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "dictionary" && key != "solver" && key != "alpha" && key != "alphas") {
      throw ValidationError("unknown design key '" + key + "'");
    }
  }
  DesignSpec d;
  d.dictionary = j.at("dictionary");
  d.solver = solver_kind_from_string(get_as<std::string>(j, "solver"));
  if (j.contains("alphas")) d.alphas = get_as<std::vector<double>>(j, "alphas");
  if (j.contains("alpha")) d.alphas.push_back(get_as<double>(j, "alpha"));
  return d;
}

json design_to_json(const DesignSpec& d) {
  json j{{"dictionary", d.dictionary}, {"solver", to_string(d.solver)}};
  if (d.solver == SolverKind::lasso) j["alphas"] = d.alphas;
  return j;
}

void validate_alpha(double a) {
  if (!(a >= 0.0) || !std::isfinite(a)) throw ValidationError("alpha must be finite and >= 0");
}

std::string format_number(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::string cell_stem(std::size_t index, const Dictionary& dict, SolverKind solver, double alpha) {
  std::ostringstream s;
  s << "cell_" << std::setw(2) << std::setfill('0') << index << '_' << to_string(dict.kind()) << "_m" << dict.size()
    << '_' << to_string(solver);
  if (solver == SolverKind::lasso) s << "_a" << alpha;
  return s.str();
}

EvaluateOutcome evaluate_with(const ExperimentConfig& config, Controller ctrl, std::optional<std::size_t> nonzero,
                              const std::filesystem::path& dir, const std::string& tag, std::uint64_t noise_seed) {
  const HammersteinPlant plant = builtin_plant(config.plant);
  EvaluateOutcome out{simulate_closed_loop(plant, ctrl, config.evaluation_reference(), {config.eval_sigma, noise_seed},
                                           config.reference_model()),
                      {}, dir / (tag + ".csv"), dir / (tag + ".json")};
  out.summary = result_summary(out.result, nonzero);
  write_result_csv(out.csv_path, out.result);
  json doc = out.summary;
  doc["config"] = config.to_json();
  write_json(out.summary_path, doc);
  return out;
}

std::string design_summary(const ControllerParams& p) {
  std::ostringstream s;
  s << "m=" << p.rho.size() << " nonzero=" << nonzero_count(p) << " objective=" << std::setprecision(8)
    << p.diagnostics.objective << " converged=" << (p.diagnostics.converged ? "true" : "false");
  return s.str();
}

}  // namespace

std::string to_string(SolverKind kind) { return kind == SolverKind::ols ? "ols" : "lasso"; }

SolverKind solver_kind_from_string(const std::string& name) {
  if (name == "ols") return SolverKind::ols;
  if (name == "lasso") return SolverKind::lasso;
  throw ValidationError("unknown solver '" + name + "' (expected ols or lasso)");
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kConfigKeys.contains(key)) throw ValidationError("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  if (j.contains("plant")) c.plant = get_as<int>(j, "plant");
  if (j.contains("input_kind")) c.input_kind = input_kind_from_string(get_as<std::string>(j, "input_kind"));
  if (j.contains("amplitude")) c.amplitude = get_as<double>(j, "amplitude");
  if (j.contains("input_dwell")) c.input_dwell = get_as<std::size_t>(j, "input_dwell");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("noise_seed") && !j.at("noise_seed").is_null()) c.noise_seed = get_as<std::uint64_t>(j, "noise_seed");
  if (j.contains("N")) {
    if (get_as<long long>(j, "N") < 0) throw ValidationError("N must be at least 10");
    c.n = get_as<std::size_t>(j, "N");
  }
  if (j.contains("sigma")) c.sigma = get_as<double>(j, "sigma");
  if (j.contains("reference_model")) {
    const auto& rm = j.at("reference_model");
    c.td_num = get_as<Polynomial>(rm, "num");
    c.td_den = get_as<Polynomial>(rm, "den");
  }
  if (j.contains("dictionary")) c.dictionary = j.at("dictionary");
  if (j.contains("solver")) c.solver = solver_kind_from_string(get_as<std::string>(j, "solver"));
  if (j.contains("alpha")) c.alpha = get_as<double>(j, "alpha");
  if (j.contains("alphas")) c.alphas = get_as<std::vector<double>>(j, "alphas");
  if (j.contains("tol")) c.tol = get_as<double>(j, "tol");
  if (j.contains("max_iter")) c.max_iter = get_as<int>(j, "max_iter");
  if (j.contains("objective_scaling")) {
    c.objective_scaling = objective_scaling_from_string(get_as<std::string>(j, "objective_scaling"));
  }
  if (j.contains("standardize")) c.standardize = get_as<bool>(j, "standardize");
  if (j.contains("stopping")) c.stopping = stopping_rule_from_string(get_as<std::string>(j, "stopping"));
  if (j.contains("eval_reference")) {
    const auto& er = j.at("eval_reference");
    if (er.contains("amplitudes")) c.eval_amplitudes = get_as<std::vector<double>>(er, "amplitudes");
    if (er.contains("dwell")) {
      if (get_as<long long>(er, "dwell") < 1) throw ValidationError("eval_reference dwell must be >= 1");
      c.eval_dwell = get_as<std::size_t>(er, "dwell");
    }
  }
  if (j.contains("eval_sigma")) c.eval_sigma = get_as<double>(j, "eval_sigma");
  if (j.contains("output_dir")) c.output_dir = get_as<std::string>(j, "output_dir");
  if (j.contains("designs")) {
    const auto& ds = j.at("designs");
    if (!ds.is_array()) throw ValidationError("designs must be an array");
    if (ds.empty()) throw ValidationError("designs is empty: the experiment matrix needs at least one design");
    for (const auto& d : ds) c.designs.push_back(design_from_json(d));
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json j{{"plant", plant},
         {"input_kind", to_string(input_kind)},
         {"amplitude", amplitude},
         {"input_dwell", input_dwell},
         {"seed", seed},
         {"noise_seed", noise().seed},
         {"N", n},
         {"sigma", sigma},
         {"reference_model", {{"num", td_num}, {"den", td_den}}},
         {"dictionary", dictionary},
         {"solver", to_string(solver)},
         {"alpha", alpha},
         {"tol", tol},
         {"max_iter", max_iter},
         {"objective_scaling", to_string(objective_scaling)},
         {"standardize", standardize},
         {"stopping", to_string(stopping)},
         {"eval_reference", {{"amplitudes", eval_amplitudes}, {"dwell", eval_dwell}}},
         {"eval_sigma", eval_sigma},
         {"output_dir", output_dir.string()}};
  if (!alphas.empty()) j["alphas"] = alphas;
  if (!designs.empty()) {
    j["designs"] = json::array();
    for (const auto& d : designs) j["designs"].push_back(design_to_json(d));
  }
  return j;
}

void ExperimentConfig::validate() const {
  if (plant != 1 && plant != 2) throw ValidationError("plant must be 1 or 2, got " + std::to_string(plant));
  if (n < 10) throw ValidationError("N must be at least 10");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be finite and >= 0");
  if (!(eval_sigma >= 0.0) || !std::isfinite(eval_sigma)) throw ValidationError("eval_sigma must be finite and >= 0");
  if (!std::isfinite(amplitude)) throw ValidationError("amplitude must be finite");
  if (input_dwell < 1) throw ValidationError("input_dwell must be >= 1");
  validate_alpha(alpha);
  for (double a : alphas) validate_alpha(a);
  if (!(tol > 0.0)) throw ValidationError("tol must be positive");
  if (max_iter < 1) throw ValidationError("max_iter must be >= 1");
  if (eval_amplitudes.empty()) throw ValidationError("eval_reference needs at least one amplitude");
  if (eval_dwell < 1) throw ValidationError("eval_reference dwell must be >= 1");

  const TransferFunction td = reference_model();
  if (!td.is_proper()) throw ValidationError("reference model must be proper");
  if (!td.is_stable()) throw ValidationError("reference model must be stable");
  if (std::abs(dc_gain(td) - 1.0) > 1e-9) throw ValidationError("reference model must satisfy T_d(1) = 1");

  dictionary_from_json(dictionary);
  for (const auto& d : designs) {
    dictionary_from_json(d.dictionary);
    if (d.solver == SolverKind::lasso && d.alphas.empty()) {
      throw ValidationError("lasso design needs alpha or alphas");
    }
    for (double a : d.alphas) validate_alpha(a);
  }
}

TransferFunction ExperimentConfig::reference_model() const { return TransferFunction(td_num, td_den); }

Dictionary ExperimentConfig::make_dictionary() const { return dictionary_from_json(dictionary); }

LassoOptions ExperimentConfig::lasso_options() const {
  LassoOptions o;
  o.tol = tol;
  o.max_iter = max_iter;
  o.scaling = objective_scaling;
  o.standardize = standardize;
  o.stopping = stopping;
  return o;
}

NoiseSpec ExperimentConfig::noise() const { return {sigma, noise_seed.value_or(seed + 1)}; }

InputSpec ExperimentConfig::input() const { return {input_kind, n, amplitude, seed, input_dwell}; }

Signal ExperimentConfig::evaluation_reference() const { return eval_reference(eval_amplitudes, eval_dwell); }

std::vector<DesignSpec> ExperimentConfig::design_matrix() const {
  if (!designs.empty()) return designs;
  DesignSpec d{dictionary, solver, {}};
  if (solver == SolverKind::lasso) d.alphas = alphas.empty() ? std::vector<double>{alpha} : alphas;
  return {d};
}

GenerateOutcome cmd_generate(const ExperimentConfig& config) {
  config.validate();
  ensure_output_dir(config.output_dir);
  const TransferFunction td = config.reference_model();
  const HammersteinPlant plant = builtin_plant(config.plant);
  const Signal u = gen_input(config.input(), td);
  const Signal y = simulate_plant(plant, u, config.noise());

  GenerateOutcome out{Dataset(u, y), config.output_dir / "dataset.csv", config.output_dir / "dataset.json"};
  write_dataset_csv(out.csv_path, out.data);

  const TransferFunction f = excitation_filter(td);
  json sidecar{{"plant", config.plant},
               {"plant_label", plant.label()},
               {"seed", config.seed},
               {"noise_seed", config.noise().seed},
               {"sigma", config.sigma},
               {"N", config.n},
               {"input_kind", to_string(config.input_kind)},
               {"amplitude", config.amplitude},
               {"excitation_filter", {{"num", f.num()}, {"den", f.den()}, {"gain", excitation_filter_gain(td)}}},
               {"noise_generator", "mt19937_64 + std::normal_distribution"},
               {"config", config.to_json()}};
  write_json(out.sidecar_path, sidecar);
  return out;
}

DesignOutcome cmd_design(const ExperimentConfig& config, const std::filesystem::path& dataset_csv,
                         std::optional<std::filesystem::path> controller_out) {
  config.validate();
  const Dataset data = read_dataset_csv(dataset_csv);
  const RegressionProblem problem = build_regression(data, config.reference_model(), config.make_dictionary());

  DesignOutcome out{config.solver == SolverKind::ols ? ols_solve(problem)
                                                     : lasso_cd(problem, config.alpha, config.lasso_options()),
                    controller_out.value_or(config.output_dir / "controller.json"), {}};
  json provenance = config.to_json();
  provenance["dataset"] = dataset_csv.string();
  save_controller(out.controller_path, out.params, provenance);
  out.summary = design_summary(out.params);
  return out;
}

EvaluateOutcome cmd_evaluate(const ExperimentConfig& config, const std::optional<std::filesystem::path>& controller_file,
                             const std::string& tag) {
  config.validate();
  ensure_output_dir(config.output_dir);
  const std::uint64_t seed = config.noise().seed + 1000;
  if (!controller_file) return evaluate_with(config, Controller::ideal(config.plant), std::nullopt, config.output_dir, tag, seed);

  ControllerParams params = load_controller(*controller_file);
  const Dictionary expected = config.make_dictionary();
  if (!params.dictionary.same_spec(expected)) {
    throw ValidationError("controller dictionary (" + params.dictionary.describe() +
                          ") does not match the config dictionary (" + expected.describe() + ")");
  }
  const std::size_t nz = nonzero_count(params);
  return evaluate_with(config, Controller::from_params(std::move(params)), nz, config.output_dir, tag, seed);
}

ExperimentReport cmd_experiment(const ExperimentConfig& config) {
  config.validate();
  const GenerateOutcome generated = cmd_generate(config);
  const TransferFunction td = config.reference_model();
  const auto matrix = config.design_matrix();
  const std::filesystem::path cell_dir = config.output_dir / "cells";
  ensure_output_dir(cell_dir);

  // Cell indices are fixed up front so seeds and file names do not depend on scheduling.
  std::vector<std::size_t> first_cell(matrix.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    first_cell[i] = total;
    total += matrix[i].solver == SolverKind::lasso ? matrix[i].alphas.size() : 1;
  }

  auto run_design = [&](std::size_t di) {
    const DesignSpec& spec = matrix[di];
    const std::size_t n_cells = spec.solver == SolverKind::lasso ? spec.alphas.size() : 1;
    std::vector<CellReport> cells(n_cells);
    const Dictionary dict = dictionary_from_json(spec.dictionary);
    for (std::size_t k = 0; k < n_cells; ++k) {
      auto& c = cells[k];
      c.index = first_cell[di] + k;
      c.dictionary = to_string(dict.kind());
      c.m = dict.size();
      c.solver = to_string(spec.solver);
      c.alpha = spec.solver == SolverKind::lasso ? spec.alphas[k] : 0.0;
    }
    try {
      const RegressionProblem problem = build_regression(generated.data, td, dict);
      std::vector<ControllerParams> solved;
      if (spec.solver == SolverKind::ols) {
        solved.push_back(ols_solve(problem));
      } else if (spec.alphas.size() == 1) {
        solved.push_back(lasso_cd(problem, spec.alphas[0], config.lasso_options()));
      } else {
        solved = lasso_path(problem, spec.alphas, config.lasso_options());
      }
      for (std::size_t k = 0; k < n_cells; ++k) {
        auto& c = cells[k];
        try {
          const std::string stem = cell_stem(c.index, dict, spec.solver, c.alpha);
          const auto controller_path = cell_dir / (stem + ".json");
          json provenance = config.to_json();
          provenance["cell"] = design_to_json(spec);
          save_controller(controller_path, solved[k], provenance);
          // Counts are taken from the stored file so the report matches it exactly.
          const ControllerParams stored = load_controller(controller_path);
          c.nonzero = nonzero_count(stored);
          c.converged = stored.diagnostics.converged;
          c.controller_file = controller_path.string();
          const auto eval = evaluate_with(config, Controller::from_params(stored), c.nonzero, cell_dir,
                                          stem + "_result", config.noise().seed + 1000 + c.index);
          c.stable = eval.result.stable;
          if (eval.result.stable) c.J = eval.result.J;
        } catch (const std::exception& e) {
          c.error = e.what();
        }
      }
    } catch (const std::exception& e) {
      for (auto& c : cells) c.error = e.what();
    }
    return cells;
  };

  std::vector<std::future<std::vector<CellReport>>> futures;
  futures.reserve(matrix.size());
  for (std::size_t di = 0; di < matrix.size(); ++di) futures.push_back(std::async(std::launch::async, run_design, di));

  ExperimentReport report;
  for (auto& f : futures) {
    auto cells = f.get();
    report.cells.insert(report.cells.end(), cells.begin(), cells.end());
  }

  report.json = {{"config", config.to_json()}, {"dataset", generated.csv_path.string()}, {"cells", json::array()}};
  std::ostringstream table;
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %-10s %5s %-6s %9s %8s %14s %-7s %s\n", "cell", "dictionary", "m", "solver",
                "alpha", "nonzero", "J", "stable", "note");
  table << line;
  for (const auto& c : report.cells) {
    json row{{"cell", c.index},
             {"dictionary", c.dictionary},
             {"m", c.m},
             {"solver", c.solver},
             {"alpha", c.alpha},
             {"nonzero_count", c.nonzero ? json(*c.nonzero) : json(nullptr)},
             {"J", c.J ? json(*c.J) : json(nullptr)},
             {"stable", c.stable ? json(*c.stable) : json(nullptr)},
             {"converged", c.converged},
             {"controller_file", c.controller_file}};
    if (!c.error.empty()) row["error"] = c.error;
    report.json["cells"].push_back(std::move(row));

    const std::string nz = c.nonzero ? std::to_string(*c.nonzero) : "-";
    const std::string J = c.J ? format_number(*c.J) : "-";
    const std::string stable = c.stable ? (*c.stable ? "yes" : "no") : "-";
    const std::string alpha = c.solver == "lasso" ? format_number(c.alpha) : "-";
    std::string note = c.error.empty() ? (c.solver == "lasso" && !c.converged ? "not converged" : "") : "error: " + c.error;
    std::snprintf(line, sizeof line, "%-4zu %-10s %5zu %-6s %9s %8s %14s %-7s ", c.index, c.dictionary.c_str(), c.m,
                  c.solver.c_str(), alpha.c_str(), nz.c_str(), J.c_str(), stable.c_str());
    table << line << note << '\n';
  }
  report.table = table.str();
  report.json_path = config.output_dir / "report.json";
  report.table_path = config.output_dir / "report.txt";
  write_json(report.json_path, report.json);
  std::ofstream txt(report.table_path);
  if (!txt) throw DataError("cannot open '" + report.table_path.string() + "' for writing");
  txt << report.table;
  return report;
}

}  // namespace vrft
