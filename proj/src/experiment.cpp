#include "d2d/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "d2d/errors.hpp"

namespace d2d {

namespace fs = std::filesystem;
using json = nlohmann::json;

fs::path PathsConfig::checkpoint_path() const {
  return checkpoint.empty() ? output_dir / "model.json" : checkpoint;
}

fs::path PathsConfig::dataset_path() const {
  return dataset.empty() ? output_dir / "dataset.bin" : dataset;
}

fs::path PathsConfig::layout_dir(std::size_t pairs) const {
  return output_dir / "layouts" / ("M" + std::to_string(pairs));
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    std::string item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("bad value for " + key + ": '" + text + "'");
  }
  return value;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string join_policies(const std::vector<PolicyKind>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::string(to_string(v[i]));
  return s;
}

// Section -> key -> setter. Every accepted key is listed here.
using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string&)>;

template <class T, class F>
Setter number(F field) {
  return [field](ExperimentConfig& c, const std::string& key, const std::string& v) {
    field(c) = parse_number<T>(key, v);
  };
}

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> table = {
      {"radio",
       {
           {"carrier_hz", number<double>([](auto& c) -> double& { return c.radio.carrier_hz; })},
           {"bandwidth_hz", number<double>([](auto& c) -> double& { return c.radio.bandwidth_hz; })},
           {"tx_antenna_height_m",
            number<double>([](auto& c) -> double& { return c.radio.tx_antenna_height_m; })},
           {"rx_antenna_height_m",
            number<double>([](auto& c) -> double& { return c.radio.rx_antenna_height_m; })},
           {"antenna_gain_dbi",
            number<double>([](auto& c) -> double& { return c.radio.antenna_gain_dbi; })},
           {"tx_power_dbm", number<double>([](auto& c) -> double& { return c.radio.tx_power_dbm; })},
           {"noise_psd_dbm_hz",
            number<double>([](auto& c) -> double& { return c.radio.noise_psd_dbm_hz; })},
           {"sinr_threshold",
            number<double>([](auto& c) -> double& { return c.radio.sinr_threshold; })},
           {"interference_cutoff_m",
            number<double>([](auto& c) -> double& { return c.radio.interference_cutoff_m; })},
       }},
      {"scenario",
       {
           {"area_length_m",
            number<double>([](auto& c) -> double& { return c.scenario.area_length_m; })},
           {"layout_count",
            number<std::size_t>([](auto& c) -> std::size_t& { return c.scenario.layout_count; })},
           {"seed", number<std::uint64_t>([](auto& c) -> std::uint64_t& { return c.scenario.seed; })},
       }},
      {"train",
       {
           {"dataset_size",
            number<std::size_t>([](auto& c) -> std::size_t& { return c.train.train.dataset_size; })},
           {"pairs", number<std::size_t>([](auto& c) -> std::size_t& { return c.train.pairs; })},
           {"area_length_m", number<double>([](auto& c) -> double& { return c.train.area_length_m; })},
           {"epochs", number<int>([](auto& c) -> int& { return c.train.train.epochs; })},
           {"batch_size",
            number<std::size_t>([](auto& c) -> std::size_t& { return c.train.train.batch_size; })},
           {"learning_rate",
            number<double>([](auto& c) -> double& { return c.train.train.learning_rate; })},
           {"decay_factor", number<double>([](auto& c) -> double& { return c.train.train.decay_factor; })},
           {"decay_interval_epochs",
            number<int>([](auto& c) -> int& { return c.train.train.decay_interval_epochs; })},
       }},
      {"eval",
       {
           {"slots", number<std::int64_t>([](auto& c) -> std::int64_t& { return c.eval.sim.slots; })},
           {"initial_aoi", number<Aoi>([](auto& c) -> Aoi& { return c.eval.sim.initial_aoi; })},
           {"trace_stride",
            number<std::int64_t>([](auto& c) -> std::int64_t& { return c.eval.sim.trace_stride; })},
           {"policies",
            [](ExperimentConfig& c, const std::string&, const std::string& v) {
              c.eval.policies.clear();
              for (const auto& name : split_list(v)) c.eval.policies.push_back(parse_policy_kind(name));
            }},
           {"backend",
            [](ExperimentConfig& c, const std::string&, const std::string& v) {
              if (v == "auto") {
                c.eval.backend.reset();
              } else {
                c.eval.backend = parse_backend(v);
              }
            }},
           {"auto_vertex_max",
            number<std::size_t>([](auto& c) -> std::size_t& { return c.eval.auto_vertex_max; })},
           {"pairs",
            [](ExperimentConfig& c, const std::string& key, const std::string& v) {
              c.eval.pairs.clear();
              for (const auto& item : split_list(v)) c.eval.pairs.push_back(parse_number<std::size_t>(key, item));
            }},
           {"density",
            [](ExperimentConfig& c, const std::string& key, const std::string& v) {
              if (v == "fixed_area") {
                c.eval.density = DensityMode::fixed_area;
              } else if (v == "same_density") {
                c.eval.density = DensityMode::same_density;
              } else {
                throw ConfigError("bad value for " + key + ": '" + v + "'");
              }
            }},
           {"reference_pairs",
            number<std::size_t>([](auto& c) -> std::size_t& { return c.eval.reference_pairs; })},
           {"jobs", number<unsigned>([](auto& c) -> unsigned& { return c.eval.jobs; })},
       }},
      {"solver",
       {
           {"max_iters", number<int>([](auto& c) -> int& { return c.solver.max_iters; })},
           {"step_size", number<double>([](auto& c) -> double& { return c.solver.step_size; })},
           {"restarts", number<int>([](auto& c) -> int& { return c.solver.restarts; })},
           {"tolerance", number<double>([](auto& c) -> double& { return c.solver.tolerance; })},
           {"vertex_cap",
            number<std::size_t>([](auto& c) -> std::size_t& { return c.solver.vertex_cap; })},
       }},
      {"paths",
       {
           {"output_dir",
            [](ExperimentConfig& c, const std::string&, const std::string& v) { c.paths.output_dir = v; }},
           {"checkpoint",
            [](ExperimentConfig& c, const std::string&, const std::string& v) { c.paths.checkpoint = v; }},
           {"dataset",
            [](ExperimentConfig& c, const std::string&, const std::string& v) { c.paths.dataset = v; }},
       }},
  };
  return table;
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    radio.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("radio: ") + e.what());
  }
  solver.validate();
  train.train.validate();
  eval.sim.validate();
  if (!(scenario.area_length_m > 0) || !std::isfinite(scenario.area_length_m)) {
    throw ConfigError("scenario.area_length_m must be positive");
  }
  if (scenario.layout_count == 0) throw ConfigError("scenario.layout_count must be positive");
  if (train.pairs == 0) throw ConfigError("train.pairs must be positive");
  if (!(train.area_length_m > 0) || !std::isfinite(train.area_length_m)) {
    throw ConfigError("train.area_length_m must be positive");
  }
  if (eval.pairs.empty()) throw ConfigError("eval.pairs must list at least one M");
  for (std::size_t m : eval.pairs) {
    if (m == 0) throw ConfigError("eval.pairs entries must be positive");
  }
  if (eval.policies.empty()) throw ConfigError("eval.policies must list at least one policy");
  if (eval.reference_pairs == 0) throw ConfigError("eval.reference_pairs must be positive");
  if (eval.jobs == 0) throw ConfigError("eval.jobs must be positive");
  if (paths.output_dir.empty()) throw ConfigError("paths.output_dir must be set");
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream s;
  s << std::setprecision(17);
  s << "radio.carrier_hz = " << radio.carrier_hz << '\n'
    << "radio.bandwidth_hz = " << radio.bandwidth_hz << '\n'
    << "radio.tx_antenna_height_m = " << radio.tx_antenna_height_m << '\n'
    << "radio.rx_antenna_height_m = " << radio.rx_antenna_height_m << '\n'
    << "radio.antenna_gain_dbi = " << radio.antenna_gain_dbi << '\n'
    << "radio.tx_power_dbm = " << radio.tx_power_dbm << '\n'
    << "radio.noise_psd_dbm_hz = " << radio.noise_psd_dbm_hz << '\n'
    << "radio.sinr_threshold = " << radio.sinr_threshold << '\n'
    << "radio.interference_cutoff_m = " << radio.interference_cutoff_m << '\n'
    << "scenario.area_length_m = " << scenario.area_length_m << '\n'
    << "scenario.layout_count = " << scenario.layout_count << '\n'
    << "scenario.seed = " << scenario.seed << '\n'
    << "train.dataset_size = " << train.train.dataset_size << '\n'
    << "train.pairs = " << train.pairs << '\n'
    << "train.area_length_m = " << train.area_length_m << '\n'
    << "train.epochs = " << train.train.epochs << '\n'
    << "train.batch_size = " << train.train.batch_size << '\n'
    << "train.learning_rate = " << train.train.learning_rate << '\n'
    << "train.decay_factor = " << train.train.decay_factor << '\n'
    << "train.decay_interval_epochs = " << train.train.decay_interval_epochs << '\n'
    << "eval.slots = " << eval.sim.slots << '\n'
    << "eval.initial_aoi = " << eval.sim.initial_aoi << '\n'
    << "eval.trace_stride = " << eval.sim.trace_stride << '\n'
    << "eval.policies = " << join_policies(eval.policies) << '\n'
    << "eval.backend = " << (eval.backend ? std::string(to_string(*eval.backend)) : "auto") << '\n'
    << "eval.auto_vertex_max = " << eval.auto_vertex_max << '\n'
    << "eval.pairs = " << join_sizes(eval.pairs) << '\n'
    << "eval.density = " << (eval.density == DensityMode::fixed_area ? "fixed_area" : "same_density")
    << '\n'
    << "eval.reference_pairs = " << eval.reference_pairs << '\n'
    << "solver.max_iters = " << solver.max_iters << '\n'
    << "solver.step_size = " << solver.step_size << '\n'
    << "solver.restarts = " << solver.restarts << '\n'
    << "solver.tolerance = " << solver.tolerance << '\n'
    << "solver.vertex_cap = " << solver.vertex_cap << '\n';
  // Paths and eval.jobs do not change results and are left out of the hash.
  return s.str();
}

std::string ExperimentConfig::hash() const { return sha256_hex(canonical()); }

ExperimentConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    const auto sec = schema().find(section);
    if (sec == schema().end() || body.empty()) {
      throw ConfigError("unknown config section '" + section + "'");
    }
    for (const auto& [key, node] : body) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end()) {
        throw ConfigError("unknown config key '" + section + "." + key + "'");
      }
      setter->second(cfg, section + "." + key, trim(node.data()));
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

void apply_paper_scale(ExperimentConfig& cfg) {
  cfg.scenario.layout_count = 500;
  cfg.train.train.dataset_size = 50000;
}

double area_for(const ExperimentConfig& cfg, std::size_t pairs) {
  if (cfg.eval.density == DensityMode::fixed_area) return cfg.scenario.area_length_m;
  // M / L^2 held at reference_pairs / area^2.
  return cfg.scenario.area_length_m *
         std::sqrt(static_cast<double>(pairs) / static_cast<double>(cfg.eval.reference_pairs));
}

Backend age_aware_backend(const ExperimentConfig& cfg, std::size_t pairs) {
  if (cfg.eval.backend) return *cfg.eval.backend;
  return pairs <= cfg.eval.auto_vertex_max ? Backend::vertex_exact : Backend::mpnn;
}

std::uint64_t eval_layout_seed(std::uint64_t master, std::size_t pairs, std::size_t index) {
  // Stream index with the top bit set never collides with corpus sample indices.
  const std::uint64_t per_m = derive_seed(master, stream::layout, (1ULL << 31) | pairs);
  return derive_seed(per_m, stream::layout, index);
}

std::uint64_t training_corpus_seed(std::uint64_t master) {
  return derive_seed(master, stream::training, 2);
}

std::vector<Layout> make_eval_layouts(const ExperimentConfig& cfg, std::size_t pairs) {
  std::vector<Layout> layouts;
  layouts.reserve(cfg.scenario.layout_count);
  const double area = area_for(cfg, pairs);
  for (std::size_t k = 0; k < cfg.scenario.layout_count; ++k) {
    Rng rng(eval_layout_seed(cfg.scenario.seed, pairs, k));
    layouts.push_back(sample_layout(pairs, area, rng));
  }
  return layouts;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::ostringstream s;
  for (unsigned int i = 0; i < len; ++i) {
    s << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return s.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read", path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory (" + ec.message() + ")", dir.string());
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  ensure_dir(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot write", path.string());
  return out;
}

void close_checked(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("write failed", path.string());
}

fs::path layout_file(const PathsConfig& paths, std::size_t pairs, std::size_t index) {
  std::ostringstream name;
  name << "layout_" << std::setw(4) << std::setfill('0') << index << ".txt";
  return paths.layout_dir(pairs) / name.str();
}

// Manifest: config hash, seeds and checksums of everything the command wrote.
void write_manifest(const ExperimentConfig& cfg, const std::string& command, json extra,
                    const std::vector<fs::path>& files) {
  json doc;
  doc["command"] = command;
  doc["config_sha256"] = cfg.hash();
  doc["config"] = cfg.canonical();
  doc["seed"] = cfg.scenario.seed;
  for (auto it = extra.begin(); it != extra.end(); ++it) doc[it.key()] = it.value();
  json sums = json::object();
  for (const auto& f : files) {
    sums[fs::relative(f, cfg.paths.output_dir).generic_string()] = sha256_file(f);
  }
  doc["files"] = sums;
  const fs::path path = cfg.paths.output_dir / ("manifest_" + command + ".json");
  std::ofstream out = open_out(path);
  out << doc.dump(2) << '\n';
  close_checked(out, path);
}

std::vector<Layout> read_layouts(const ExperimentConfig& cfg, std::size_t pairs) {
  std::vector<Layout> layouts;
  for (std::size_t k = 0; k < cfg.scenario.layout_count; ++k) {
    const fs::path path = layout_file(cfg.paths, pairs, k);
    std::ifstream in(path);
    if (!in) throw IoError("missing layout (run generate first)", path.string());
    try {
      layouts.push_back(read_layout(in));
    } catch (const ParseError& e) {
      throw IoError(std::string("malformed layout, ") + e.what(), path.string());
    }
    if (layouts.back().size() != pairs) throw IoError("layout has the wrong M", path.string());
  }
  return layouts;
}

}  // namespace

void cmd_generate(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  std::vector<fs::path> written;
  json seeds = json::object();
  for (std::size_t pairs : cfg.eval.pairs) {
    const std::vector<Layout> layouts = make_eval_layouts(cfg, pairs);
    for (std::size_t k = 0; k < layouts.size(); ++k) {
      const fs::path path = layout_file(cfg.paths, pairs, k);
      std::ofstream out = open_out(path);
      write_layout(out, layouts[k]);
      close_checked(out, path);
      written.push_back(path);
    }
    seeds["layouts_M" + std::to_string(pairs)] = eval_layout_seed(cfg.scenario.seed, pairs, 0);
    log << "wrote " << layouts.size() << " layouts with M = " << pairs << " (L = "
        << area_for(cfg, pairs) << " m)\n";
  }

  const std::uint64_t corpus_seed = training_corpus_seed(cfg.scenario.seed);
  const std::vector<GraphSample> corpus =
      generate_corpus(cfg.train.train.dataset_size, cfg.train.pairs, cfg.train.area_length_m,
                      cfg.radio, corpus_seed);
  const fs::path dataset = cfg.paths.dataset_path();
  ensure_dir(dataset.parent_path().empty() ? fs::path(".") : dataset.parent_path());
  save_dataset(dataset, corpus);
  written.push_back(dataset);
  seeds["corpus"] = corpus_seed;
  log << "wrote " << corpus.size() << " training samples with M = " << cfg.train.pairs << " to "
      << dataset.string() << '\n';
  write_manifest(cfg, "generate", json{{"derived_seeds", seeds}}, written);
}

void cmd_train(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const fs::path dataset = cfg.paths.dataset_path();
  if (!fs::exists(dataset)) throw IoError("missing dataset (run generate first)", dataset.string());
  const std::vector<GraphSample> corpus = load_dataset(dataset);
  const std::uint64_t seed = derive_seed(cfg.scenario.seed, stream::training, 0);
  TrainConfig tc = cfg.train.train;
  tc.dataset_size = corpus.size();

  const TrainResult result = train(corpus, tc, seed, MpnnArchitecture{}, [&](int epoch, double l) {
    log << "epoch " << epoch + 1 << "/" << tc.epochs << " loss " << l << '\n' << std::flush;
  });

  const fs::path checkpoint = cfg.paths.checkpoint_path();
  ensure_dir(checkpoint.parent_path().empty() ? fs::path(".") : checkpoint.parent_path());
  save_model(checkpoint, result.model);

  const fs::path loss_csv = cfg.paths.output_dir / "loss.csv";
  std::ofstream out = open_out(loss_csv);
  out << "# config_sha256=" << cfg.hash() << '\n' << "epoch,learning_rate,loss\n"
      << std::setprecision(17);
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    out << e + 1 << ',' << tc.learning_rate_at(static_cast<int>(e)) << ',' << result.epoch_loss[e]
        << '\n';
  }
  close_checked(out, loss_csv);
  const std::string checkpoint_hash = sha256_file(checkpoint);
  log << "checkpoint " << checkpoint.string() << " sha256 " << checkpoint_hash << '\n';
  write_manifest(cfg, "train",
                 json{{"training_seed", seed}, {"dataset_sha256", sha256_file(dataset)}},
                 {checkpoint, loss_csv});
}

void cmd_evaluate(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const std::string hash = cfg.hash();
  const fs::path results = cfg.paths.results_dir();
  ensure_dir(results);

  std::shared_ptr<const MpnnModel> model;
  auto need_model = [&]() {
    if (model) return;
    const fs::path checkpoint = cfg.paths.checkpoint_path();
    if (!fs::exists(checkpoint)) {
      throw ConfigError("the mpnn backend needs a trained checkpoint; none at " + checkpoint.string() +
                        " (run train first)");
    }
    model = std::make_shared<const MpnnModel>(load_model(checkpoint));
  };

  std::vector<fs::path> written;
  const fs::path summary_path = results / "summary.csv";
  std::ostringstream summary;
  summary << "# config_sha256=" << hash << '\n'
          << "policy,M,area_length_m,layouts,mean_aoi\n"
          << std::setprecision(17);

  for (std::size_t pairs : cfg.eval.pairs) {
    const std::vector<Layout> layouts = read_layouts(cfg, pairs);
    const fs::path fitted_path = results / ("policies_M" + std::to_string(pairs) + ".csv");
    std::ostringstream fitted;
    fitted << "# config_sha256=" << hash << '\n' << "layout_id,policy,p\n" << std::setprecision(17);

    for (PolicyKind kind : cfg.eval.policies) {
      PolicySpec spec;
      spec.kind = kind;
      spec.solver = cfg.solver;
      if (kind == PolicyKind::age_aware) {
        spec.backend = age_aware_backend(cfg, pairs);
        if (spec.backend == Backend::mpnn) {
          need_model();
          spec.model = model;
        }
      }
      const std::string name = spec.name();
      std::vector<std::vector<double>> vectors(layouts.size());
      PolicyFactory factory = [&](std::size_t k, const Layout& layout, const GainMatrix& gains) {
        Policy p(spec, layout, gains, cfg.radio, derive_seed(cfg.eval.sim.seed, stream::solver, k));
        vectors[k] = p.fixed_probabilities();
        return p;
      };
      SimConfig sim = cfg.eval.sim;
      sim.seed = derive_seed(cfg.scenario.seed, stream::episode, pairs);
      const EvaluationReport report = evaluate(layouts, factory, sim, cfg.radio, cfg.eval.jobs);

      const std::string stem = std::string(to_string(kind)) + "_M" + std::to_string(pairs);
      const fs::path rows = results / (stem + ".csv");
      const fs::path cdf = results / (stem + "_cdf.csv");
      {
        std::ofstream out = open_out(rows);
        write_results_csv(out, report, name, hash);
        close_checked(out, rows);
      }
      {
        std::ofstream out = open_out(cdf);
        write_cdf_csv(out, report, name, hash);
        close_checked(out, cdf);
      }
      written.push_back(rows);
      written.push_back(cdf);
      for (std::size_t k = 0; k < vectors.size(); ++k) {
        if (vectors[k].empty()) continue;
        fitted << k << ',' << name << ',';
        for (std::size_t i = 0; i < vectors[k].size(); ++i) fitted << (i ? ";" : "") << vectors[k][i];
        fitted << '\n';
      }
      summary << name << ',' << pairs << ',' << area_for(cfg, pairs) << ',' << layouts.size() << ','
              << report.mean_aoi << '\n';
      log << name << " M=" << pairs << " mean AoI " << report.mean_aoi << '\n' << std::flush;
    }
    std::ofstream out = open_out(fitted_path);
    out << fitted.str();
    close_checked(out, fitted_path);
    written.push_back(fitted_path);
  }
  std::ofstream out = open_out(summary_path);
  out << summary.str();
  close_checked(out, summary_path);
  written.push_back(summary_path);

  json extra;
  if (model) extra["checkpoint_sha256"] = sha256_file(cfg.paths.checkpoint_path());
  write_manifest(cfg, "evaluate", extra, written);
}

SlotInstance parse_instance(std::istream& in) {
  SlotInstance inst;
  std::size_t m = 0;
  bool have_pairs = false;
  bool have_weights = false;
  std::size_t gain_rows = 0;
  bool in_gains = false;
  std::string raw;
  std::size_t line = 0;

  auto numbers = [&](std::istringstream& s, std::size_t count) {
    std::vector<double> out;
    std::string tok;
    while (s >> tok) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw ParseError("bad number '" + tok + "'", line);
      }
      out.push_back(v);
    }
    if (out.size() != count) {
      throw ParseError("expected " + std::to_string(count) + " values, got " + std::to_string(out.size()),
                       line);
    }
    return out;
  };

  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw.substr(0, raw.find('#')));
    if (text.empty()) continue;
    std::istringstream s(text);
    if (in_gains) {
      const std::vector<double> row = numbers(s, m);
      for (std::size_t j = 0; j < m; ++j) {
        if (!(row[j] >= 0.0)) throw ParseError("gains must be non-negative", line);
        inst.gains.h(gain_rows, j) = row[j];
      }
      if (!(row[gain_rows] > 0.0)) throw ParseError("direct-link gain must be positive", line);
      if (++gain_rows == m) in_gains = false;
      continue;
    }
    std::string key;
    s >> key;
    if (key == "pairs") {
      std::size_t v = 0;
      std::string tok, extra;
      if (!(s >> tok) || (s >> extra)) throw ParseError("pairs needs one value", line);
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || v == 0) {
        throw ParseError("bad pair count '" + tok + "'", line);
      }
      if (have_pairs) throw ParseError("pairs given twice", line);
      m = v;
      have_pairs = true;
      inst.gains.h = Matrix(m, m);
    } else if (key == "weights") {
      if (!have_pairs) throw ParseError("weights before pairs", line);
      inst.weights = numbers(s, m);
      for (double w : inst.weights) {
        if (w < 0.0) throw ParseError("weights must be non-negative", line);
      }
      have_weights = true;
    } else if (key == "gains") {
      if (!have_pairs) throw ParseError("gains before pairs", line);
      std::string extra;
      if (s >> extra) throw ParseError("gain rows start on the next line", line);
      in_gains = true;
      gain_rows = 0;
    } else {
      static const std::map<std::string, double RadioConfig::*> radio_keys = {
          {"sinr_threshold", &RadioConfig::sinr_threshold},
          {"tx_power_dbm", &RadioConfig::tx_power_dbm},
          {"noise_psd_dbm_hz", &RadioConfig::noise_psd_dbm_hz},
          {"bandwidth_hz", &RadioConfig::bandwidth_hz},
          {"interference_cutoff_m", &RadioConfig::interference_cutoff_m},
      };
      const auto it = radio_keys.find(key);
      if (it == radio_keys.end()) throw ParseError("unknown key '" + key + "'", line);
      inst.radio.*(it->second) = numbers(s, 1)[0];
    }
  }
  if (in_gains) throw ParseError("gain matrix has too few rows", line);
  if (!have_pairs || !have_weights || gain_rows != m) {
    throw ParseError("instance needs pairs, weights and gains", line);
  }
  try {
    inst.radio.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line);
  }
  return inst;
}

void write_instance(std::ostream& out, const SlotInstance& inst) {
  const std::size_t m = inst.weights.size();
  const auto old = out.precision(17);
  out << "pairs " << m << "\nweights";
  for (double w : inst.weights) out << ' ' << w;
  out << "\ngains\n";
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) out << (j ? " " : "") << inst.gains(i, j);
    out << '\n';
  }
  out << "sinr_threshold " << inst.radio.sinr_threshold << '\n'
      << "tx_power_dbm " << inst.radio.tx_power_dbm << '\n'
      << "noise_psd_dbm_hz " << inst.radio.noise_psd_dbm_hz << '\n'
      << "bandwidth_hz " << inst.radio.bandwidth_hz << '\n'
      << "interference_cutoff_m " << inst.radio.interference_cutoff_m << '\n';
  out.precision(old);
}

std::vector<SlotReport> solve_slot(const SlotInstance& inst, const SolverConfig& solver,
                                   const MpnnModel* model, std::uint64_t seed) {
  auto constants = std::make_shared<const DriftConstants>(drift_constants(inst.gains, inst.radio));
  SlotProblem prob{inst.weights, constants, 0.0};
  std::vector<SlotReport> out;
  if (inst.weights.size() <= solver.vertex_cap) {
    const SlotSolution s = solve_vertex(prob, solver.vertex_cap);
    out.push_back({"vertex_exact", s.p, s.value});
  }
  Rng rng(derive_seed(seed, stream::solver, 3));
  const SlotSolution pgd = solve_projected_gradient(prob, solver, rng);
  out.push_back({"projected_gradient", pgd.p, pgd.value});
  if (model) {
    const GraphSample raw =
        build_graph(inst.weights, inst.gains, edge_mask_from_gains(inst.gains, inst.radio), inst.radio);
    std::vector<double> mu = model->predict(raw);
    const double value = objective_f(mu, prob);
    out.push_back({"mpnn", std::move(mu), value});
  }
  return out;
}

void cmd_solve_slot(const SlotInstance& inst, const ExperimentConfig& cfg, const MpnnModel* model,
                    std::ostream& out) {
  const auto reports = solve_slot(inst, cfg.solver, model, cfg.scenario.seed);
  const auto old = out.precision(10);
  out << "backend,f,p\n";
  for (const SlotReport& r : reports) {
    out << r.backend << ',' << r.value << ',';
    for (std::size_t i = 0; i < r.p.size(); ++i) out << (i ? " " : "") << r.p[i];
    out << '\n';
  }
  out.precision(old);
}

}  // namespace d2d
