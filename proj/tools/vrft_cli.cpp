// vrft: generate data, design controllers, evaluate them, run experiment matrices.
//
// Exit codes: 0 success, 1 validation error, 2 runtime or data error.

#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "vrft/error.hpp"
#include "vrft/experiment.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int run(int argc, char** argv) {
  CLI::App app{"Virtual reference feedback tuning with sparse controller dictionaries"};
  app.require_subcommand(1);

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  };

  auto* generate = app.add_subcommand("generate", "simulate the plant and write dataset.csv + dataset.json");
  add_config(generate);

  std::string dataset;
  std::string controller_out;
  auto* design = app.add_subcommand("design", "fit a controller to a dataset and write it as JSON");
  add_config(design);
  design->add_option("--dataset", dataset, "dataset CSV with columns t,u,y")->required();
  design->add_option("--out", controller_out, "controller file (default <output_dir>/controller.json)");

  std::string controller_file;
  std::string tag = "result";
  bool use_ideal = false;
  auto* evaluate = app.add_subcommand("evaluate", "closed-loop evaluation on the configured reference");
  add_config(evaluate);
  auto* ctrl_opt = evaluate->add_option("--controller", controller_file, "controller JSON file");
  auto* ideal_opt = evaluate->add_flag("--ideal", use_ideal, "use the plant's ideal controller");
  ctrl_opt->excludes(ideal_opt);
  evaluate->add_option("--tag", tag, "output file stem (default result)");

  auto* experiment = app.add_subcommand("experiment", "run the full design matrix and write report.json/report.txt");
  add_config(experiment);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  const auto config = vrft::ExperimentConfig::load(config_path);

  if (generate->parsed()) {
    const auto out = vrft::cmd_generate(config);
    std::cout << out.csv_path.string() << '\n';
  } else if (design->parsed()) {
    std::optional<std::filesystem::path> out_path;
    if (!controller_out.empty()) out_path = controller_out;
    const auto out = vrft::cmd_design(config, dataset, out_path);
    std::cout << out.summary << '\n';
  } else if (evaluate->parsed()) {
    if (controller_file.empty() && !use_ideal) {
      throw vrft::ValidationError("evaluate needs --controller <file> or --ideal");
    }
    std::optional<std::filesystem::path> file;
    if (!controller_file.empty()) file = controller_file;
    const auto out = vrft::cmd_evaluate(config, file, tag);
    std::cout << out.summary.dump() << '\n';
  } else if (experiment->parsed()) {
    const auto report = vrft::cmd_experiment(config);
    std::cout << report.table;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const vrft::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
