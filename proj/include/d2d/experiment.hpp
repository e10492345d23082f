#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "d2d/channel.hpp"
#include "d2d/mpnn.hpp"
#include "d2d/policies.hpp"
#include "d2d/simulator.hpp"
#include "d2d/solvers.hpp"

namespace d2d {

enum class DensityMode { fixed_area, same_density };

struct ScenarioConfig {
  double area_length_m = 500.0;
  std::size_t layout_count = 50;
  std::uint64_t seed = 1;
};

struct TrainSection {
  TrainConfig train;
  std::size_t pairs = 20;
  double area_length_m = 500.0;
};

struct EvalSection {
  SimConfig sim;
  std::vector<PolicyKind> policies{PolicyKind::age_aware, PolicyKind::stationary_optimal,
                                   PolicyKind::proportional_fair, PolicyKind::greedy};
  // Empty means pick per M: vertex_exact up to auto_vertex_max links, mpnn above.
  std::optional<Backend> backend;
  std::size_t auto_vertex_max = 10;
  std::vector<std::size_t> pairs{10, 20};
  DensityMode density = DensityMode::fixed_area;
  std::size_t reference_pairs = 20;  // same_density: L = area * sqrt(M / reference_pairs)
  unsigned jobs = 1;
};

struct PathsConfig {
  std::filesystem::path output_dir = "out";
  std::filesystem::path checkpoint;  // empty: output_dir/model.json
  std::filesystem::path dataset;     // empty: output_dir/dataset.bin

  std::filesystem::path checkpoint_path() const;
  std::filesystem::path dataset_path() const;
  std::filesystem::path layout_dir(std::size_t pairs) const;
  std::filesystem::path results_dir() const { return output_dir / "results"; }
};

struct ExperimentConfig {
  RadioConfig radio;
  ScenarioConfig scenario;
  TrainSection train;
  EvalSection eval;
  SolverConfig solver;
  PathsConfig paths;

  void validate() const;  // ConfigError
  // Deterministic "section.key = value" dump of every effective setting.
  std::string canonical() const;
  // SHA-256 of canonical(); stamped on every output file.
  std::string hash() const;
};

// INI-style file: [section] headers, "key = value" lines, ';' or '#' comments. Unknown
// sections or keys and malformed values raise ConfigError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

// Full-size campaign: 500 layouts and a 50000-sample training corpus.
void apply_paper_scale(ExperimentConfig& cfg);

double area_for(const ExperimentConfig& cfg, std::size_t pairs);
Backend age_aware_backend(const ExperimentConfig& cfg, std::size_t pairs);

// Evaluation layouts never share seeds with the training corpus.
std::uint64_t eval_layout_seed(std::uint64_t master, std::size_t pairs, std::size_t index);
std::uint64_t training_corpus_seed(std::uint64_t master);
std::vector<Layout> make_eval_layouts(const ExperimentConfig& cfg, std::size_t pairs);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Each command logs progress to `log` and writes under cfg.paths.
void cmd_generate(const ExperimentConfig& cfg, std::ostream& log);
void cmd_train(const ExperimentConfig& cfg, std::ostream& log);
void cmd_evaluate(const ExperimentConfig& cfg, std::ostream& log);

// Per-slot debug instance: weights, linear gains and radio constants.
struct SlotInstance {
  std::vector<double> weights;
  GainMatrix gains;
  RadioConfig radio;
};

// Line format ('#' comments allowed):
//   pairs M
//   weights w_1 ... w_M
//   gains            followed by M rows of M linear gains, row = transmitter
//   <radio key> <value>   optional: sinr_threshold, tx_power_dbm, noise_psd_dbm_hz,
//                         bandwidth_hz, interference_cutoff_m
// Throws ParseError with the offending line number.
SlotInstance parse_instance(std::istream& in);
void write_instance(std::ostream& out, const SlotInstance& inst);

struct SlotReport {
  std::string backend;
  std::vector<double> p;
  double value = 0.0;
};

// Vertex (when M <= cap), projected gradient, and mpnn (when a model is given).
std::vector<SlotReport> solve_slot(const SlotInstance& inst, const SolverConfig& solver,
                                   const MpnnModel* model, std::uint64_t seed);
void cmd_solve_slot(const SlotInstance& inst, const ExperimentConfig& cfg, const MpnnModel* model,
                    std::ostream& out);

// Command-line front end. Returns the process exit code: 0 success, 1 configuration or
// input error, 2 runtime failure.
int run_cli(int argc, char** argv);

}  // namespace d2d
