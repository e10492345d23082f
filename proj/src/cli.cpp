#include <fstream>
#include <optional>
#include <sstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "d2d/errors.hpp"
#include "d2d/experiment.hpp"

namespace d2d {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Age-of-information D2D scheduling: layouts, MPNN training and policy evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool paper_scale = false;
  std::string policies;
  std::string backend;
  std::string output_dir;
  std::optional<unsigned> jobs;
  app.add_option("--config", config_path, "experiment config file (INI)");
  app.add_option("--seed", seed, "master seed (overrides scenario.seed)");
  app.add_flag("--paper-scale", paper_scale, "500 layouts and a 50000-sample training corpus");
  app.add_option("--policies", policies,
                 "comma list of age_aware, stationary_optimal, proportional_fair, greedy");
  app.add_option("--backend", backend, "age-aware backend: auto, mpnn, vertex_exact, projected_gradient");
  app.add_option("--output", output_dir, "output directory (overrides paths.output_dir)");
  app.add_option("--jobs", jobs, "worker threads for layout-level work");

  auto* generate = app.add_subcommand("generate", "write evaluation layouts and the training corpus");
  auto* train_cmd = app.add_subcommand("train", "train the MPNN on the generated corpus");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "simulate every requested policy on the layouts");
  auto* solve = app.add_subcommand("solve-slot", "solve one per-slot instance with every backend");
  std::string instance_path;
  std::string checkpoint;
  solve->add_option("instance", instance_path, "instance file")->required();
  solve->add_option("--checkpoint", checkpoint, "MPNN checkpoint to include in the comparison");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (seed) cfg.scenario.seed = *seed;
    if (paper_scale) apply_paper_scale(cfg);
    if (!policies.empty() || !backend.empty()) {
      std::string ini = "[eval]\n";
      if (!policies.empty()) ini += "policies = " + policies + "\n";
      if (!backend.empty()) ini += "backend = " + backend + "\n";
      std::istringstream in(ini);
      const ExperimentConfig overrides = parse_config(in);
      if (!policies.empty()) cfg.eval.policies = overrides.eval.policies;
      if (!backend.empty()) cfg.eval.backend = overrides.eval.backend;
    }
    if (!output_dir.empty()) cfg.paths.output_dir = output_dir;
    if (jobs) cfg.eval.jobs = *jobs;
    cfg.validate();

    if (*generate) {
      cmd_generate(cfg, std::cerr);
    } else if (*train_cmd) {
      cmd_train(cfg, std::cerr);
    } else if (*evaluate_cmd) {
      cmd_evaluate(cfg, std::cerr);
    } else if (*solve) {
      std::ifstream in(instance_path);
      if (!in) throw IoError("cannot open instance", instance_path);
      const SlotInstance inst = parse_instance(in);
      std::unique_ptr<MpnnModel> model;
      if (!checkpoint.empty()) model = std::make_unique<MpnnModel>(load_model(checkpoint));
      cmd_solve_slot(inst, cfg, model.get(), std::cout);
    }
    std::cerr << "config sha256 " << cfg.hash() << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CapabilityError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace d2d
