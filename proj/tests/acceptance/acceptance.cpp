// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero if any fails.
// The pipeline criteria (7-10) train and evaluate under --work; expect well over an hour
// on one core.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "d2d/channel.hpp"
#include "d2d/drift.hpp"
#include "d2d/experiment.hpp"
#include "d2d/kernels.hpp"
#include "d2d/mpnn.hpp"
#include "d2d/policies.hpp"
#include "d2d/simulator.hpp"
#include "d2d/solvers.hpp"
#include "support.hpp"

using namespace d2d;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

// Alternate the default link budget with a weak one so rho is visibly below 1.
RadioConfig oracle_radio(int k) {
  RadioConfig cfg;
  if (k % 2 == 1) cfg.tx_power_dbm = -5.0;
  return cfg;
}

// SINR outcome computed from its definition, independent of the library's sinr().
std::vector<bool> delivered(const GainMatrix& g, const Action& a, Rng& rng, const RadioConfig& cfg) {
  const std::size_t m = g.size();
  Matrix s(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) s(i, j) = rng.exponential();
  const double pw = cfg.tx_power_w(), noise = cfg.noise_power_w();
  std::vector<bool> ok(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (!a[i]) continue;
    double interference = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j != i && a[j]) interference += pw * g(j, i) * s(j, i);
    }
    ok[i] = pw * g(i, i) * s(i, i) >= cfg.sinr_threshold * (interference + noise);
  }
  return ok;
}

Action bernoulli_action(const std::vector<double>& p, Rng& rng) {
  Action a(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) a[i] = rng.bernoulli(p[i]);
  return a;
}

Outcome drift_oracle() {
  const auto t0 = Clock::now();
  Rng rng(101);
  const int n = 1000000;
  double worst = 0.0;
  bool ok = true;
  for (int k = 0; k < 20; ++k) {
    const RadioConfig cfg = oracle_radio(k);
    const Layout l = sample_layout(3, 100.0, rng);
    const GainMatrix g = gain_matrix(l, cfg);
    std::vector<Aoi> aoi(3);
    for (Aoi& a : aoi) a = 1 + static_cast<Aoi>(rng.below(50));
    const auto p = test::uniform_vector(3, rng);
    const double closed = drift(NetworkState{aoi, g, cfg}, p);
    const double l0 = lyapunov(aoi);
    double sum = 0.0, sum2 = 0.0;
    std::vector<Aoi> next(3);
    for (int t = 0; t < n; ++t) {
      const auto got = delivered(g, bernoulli_action(p, rng), rng, cfg);
      for (std::size_t i = 0; i < 3; ++i) next[i] = got[i] ? 1 : aoi[i] + 1;
      const double x = lyapunov(next) - l0;
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / n;
    const double se = std::sqrt(std::max(sum2 / n - mean * mean, 0.0) / n);
    const double z = se > 0 ? std::abs(mean - closed) / se : (mean == closed ? 0.0 : INFINITY);
    worst = std::max(worst, z);
    ok = ok && z <= 3.0;
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 120.0,
          "20 states x 1e6 transitions, worst |MC - closed| = " + fmt(worst, 3) + " SE (limit 3), " +
              fmt(secs, 3) + " s (limit 120)"};
}

Outcome success_oracle() {
  Rng rng(202);
  const int n = 1000000;
  double worst = 0.0;
  bool ok = true;
  for (int k = 0; k < 20; ++k) {
    const RadioConfig cfg = oracle_radio(k);
    const std::size_t m = 1 + k % 4;
    const Layout l = sample_layout(m, 100.0, rng);
    const GainMatrix g = gain_matrix(l, cfg);
    const auto p = test::uniform_vector(m, rng);
    const auto q = success_prob(p, drift_constants(g, cfg));
    std::vector<long> hits(m, 0);
    for (int t = 0; t < n; ++t) {
      const auto got = delivered(g, bernoulli_action(p, rng), rng, cfg);
      for (std::size_t i = 0; i < m; ++i) hits[i] += got[i];
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double est = static_cast<double>(hits[i]) / n;
      const double se = std::sqrt(q[i] * (1 - q[i]) / n);
      const double z = se > 0 ? std::abs(est - q[i]) / se : (est == q[i] ? 0.0 : INFINITY);
      worst = std::max(worst, z);
      ok = ok && z <= 3.0;
    }
  }
  return {ok, "20 instances M<=4 x 1e6 draws, worst deviation " + fmt(worst, 3) + " SE (limit 3)"};
}

Outcome vertex_optimality() {
  Rng rng(303);
  const int steps = 20;
  double worst_gap = 0.0, worst_ratio = 0.0;
  bool ok = true;
  for (int k = 0; k < 50; ++k) {
    const RadioConfig cfg = oracle_radio(k);
    const Layout l = sample_layout(4, 100.0, rng);
    auto c = std::make_shared<const DriftConstants>(drift_constants(gain_matrix(l, cfg), cfg));
    const SlotProblem prob{test::uniform_vector(4, rng, 0.0, 10.0), c, 0.0};
    const SlotSolution v = solve_vertex(prob);

    // f on the grid, then the smallest value and the largest change between neighbors.
    std::vector<double> f(21 * 21 * 21 * 21);
    std::vector<double> p(4);
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
      std::size_t r = idx;
      for (std::size_t d = 0; d < 4; ++d) {
        p[d] = static_cast<double>(r % 21) / steps;
        r /= 21;
      }
      f[idx] = test::reference_f(p, prob.weights, c->rho, c->d);
    }
    double grid_min = f[0], cell = 0.0;
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
      grid_min = std::min(grid_min, f[idx]);
      std::size_t stride = 1;
      for (std::size_t d = 0; d < 4; ++d, stride *= 21) {
        if ((idx / stride) % 21 < 20) cell = std::max(cell, std::abs(f[idx + stride] - f[idx]));
      }
    }
    const double gap = std::abs(grid_min - v.value);
    worst_gap = std::max(worst_gap, gap);
    if (cell > 0) worst_ratio = std::max(worst_ratio, gap / cell);
    ok = ok && gap <= cell;
  }
  return {ok, "50 instances M=4, worst |grid min - vertex min| = " + fmt(worst_gap, 3) + " (" +
                  fmt(worst_ratio, 3) + " of one cell's variation)"};
}

Normalizer typical_normalizer() { return Normalizer{-70.0, 8.0, -100.0, 12.0}; }

MpnnParams random_params(std::uint64_t seed) {
  Rng rng(seed);
  MpnnParams p = MpnnParams::glorot(MpnnArchitecture{}, rng);
  for (std::size_t l = 0; l < kMpnnLayerCount; ++l) {
    for (double& b : p.bias(static_cast<MpnnLayer>(l))) b = rng.uniform(-0.2, 0.2);
  }
  return p;
}

Outcome permutation() {
  Rng rng(404);
  const RadioConfig cfg;
  const MpnnParams params = random_params(405);
  double worst_f = 0.0, worst_mu = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t m = 2 + rng.below(14);
    const Layout l = sample_layout(m, 100.0 + 600.0 * rng.uniform(), rng);
    const auto perm = test::random_permutation(m, rng);
    const GainMatrix g = gain_matrix(l, cfg);
    const auto w = test::uniform_vector(m, rng, 0.0, 50.0);
    const auto p = test::uniform_vector(m, rng);

    const SlotProblem prob{w, std::make_shared<const DriftConstants>(drift_constants(g, cfg)), 0.0};
    const GainMatrix gp{test::permute(g.h, perm)};
    const SlotProblem permuted{test::permute(w, perm),
                               std::make_shared<const DriftConstants>(drift_constants(gp, cfg)), 0.0};
    const double f = objective_f(p, prob);
    worst_f = std::max(worst_f, std::abs(objective_f(test::permute(p, perm), permuted) - f) /
                                    std::max(1.0, std::abs(f)));

    const auto mask = edge_mask_from_gains(g, cfg);
    const auto mask_p = edge_mask_from_gains(gp, cfg);
    const auto mu = forward(normalize(build_graph(w, g, mask, cfg), typical_normalizer()), params);
    const auto mu_p =
        forward(normalize(build_graph(test::permute(w, perm), gp, mask_p, cfg), typical_normalizer()), params);
    for (std::size_t i = 0; i < m; ++i) worst_mu = std::max(worst_mu, std::abs(mu_p[i] - mu[perm[i]]));
  }
  return {worst_f <= 1e-12 && worst_mu <= 1e-9,
          "100 permutations each, worst f change " + fmt(worst_f, 3) + " (limit 1e-12), worst mu change " +
              fmt(worst_mu, 3) + " (limit 1e-9)"};
}

Outcome gradients_check() {
  Rng rng(505);
  double worst_f = 0.0;
  for (int k = 0; k < 20; ++k) {
    const RadioConfig cfg = oracle_radio(k);
    const std::size_t m = 2 + k % 7;
    const Layout l = sample_layout(m, 100.0, rng);
    auto c = std::make_shared<const DriftConstants>(drift_constants(gain_matrix(l, cfg), cfg));
    const SlotProblem prob{test::uniform_vector(m, rng, 0.0, 10.0), c, 0.0};
    const auto p = test::uniform_vector(m, rng, 0.05, 0.95);
    const auto grad = objective_gradient(p, prob);
    for (std::size_t i = 0; i < m; ++i) {
      auto hi = p, lo = p;
      hi[i] += 1e-6;
      lo[i] -= 1e-6;
      const double fd = (objective_f(hi, prob) - objective_f(lo, prob)) / 2e-6;
      worst_f = std::max(worst_f, test::rel_err(grad[i], fd, 1e-8));
    }
  }

  // Every MPNN parameter on 20 single-sample instances; points whose +-h probes change an
  // activation pattern straddle a kink and are skipped.
  const double h = 1e-5;
  const RadioConfig cfg;
  double worst_mu = 0.0;
  std::size_t checked = 0, skipped = 0;
  for (int k = 0; k < 20; ++k) {
    const MpnnParams params = random_params(600 + k);
    const std::size_t m = 3 + k % 3;
    const Layout l = sample_layout(m, 150.0, rng);
    const GainMatrix g = gain_matrix(l, cfg);
    const GraphSample s = normalize(
        build_graph(test::uniform_vector(m, rng), g, edge_mask_from_gains(g, cfg), cfg), typical_normalizer());
    const GraphSample* batch[] = {&s};
    const LossGradient an = gradients(batch, params);
    const SlotProblem prob = graph_problem(s);
    ForwardCache cache;
    forward(s, params, &cache);
    const std::uint64_t sig = activation_signature(cache);
    auto probe = [&](MpnnParams& q, double& value) {
      value = objective_f(forward(s, q, &cache), prob);
      return activation_signature(cache) == sig;
    };
    MpnnParams q = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
      double up = 0.0, down = 0.0;
      q.values()[i] = params.values()[i] + h;
      const bool smooth_up = probe(q, up);
      q.values()[i] = params.values()[i] - h;
      const bool smooth_down = probe(q, down);
      q.values()[i] = params.values()[i];
      if (!smooth_up || !smooth_down) {
        ++skipped;
        continue;
      }
      const double fd = (up - down) / (2 * h);
      const double a = an.gradient[i];
      worst_mu = std::max(worst_mu, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6}));
      ++checked;
    }
  }
  const bool ok = worst_f < 1e-4 && worst_mu < 1e-4 && skipped * 10 < checked;
  return {ok, "grad f worst rel err " + fmt(worst_f, 3) + " over 20 instances; MPNN worst rel err " +
                  fmt(worst_mu, 3) + " over " + std::to_string(checked) + " parameter checks (" +
                  std::to_string(skipped) + " at kinks skipped); limit 1e-4"};
}

// Standard error of the time-averaged AoI over T slots relative to 1/q. Each delivery
// cycle X is geometric(q) and contributes X(X+1)/2, so by the renewal-reward delta method
// Var(mean) = Var(R - X/q) / (qT E[X]^2).
double renewal_rel_se(double q, double slots) {
  double m2 = 0.0, pk = q;
  for (double k = 1; pk > 1e-300 && k < 1e7; ++k, pk *= 1.0 - q) {
    const double d = k * (k + 1) / 2 - k / q;
    m2 += pk * d * d;
  }
  return std::sqrt(m2 / (q * slots)) * q * q;
}

Outcome renewal() {
  Rng rng(707);
  const RadioConfig cfg;
  const double slots = 200000;
  double worst = 0.0;
  int redrawn = 0;
  for (int k = 0; k < 10; ++k) {
    // Strong cross-link interference can push q so low that 2% is under one standard error
    // at this T; such draws say nothing about the identity and are replaced.
    Layout l;
    std::vector<double> p, q;
    for (;;) {
      l = sample_layout(3, 500.0, rng);
      p = test::uniform_vector(3, rng, 0.5, 1.0);
      q = success_prob(p, drift_constants(gain_matrix(l, cfg), cfg));
      double se = 0.0;
      for (double qi : q) se = std::max(se, renewal_rel_se(qi, slots));
      if (3 * se <= 0.02) break;
      ++redrawn;
    }
    Policy policy = Policy::fixed(p);
    SimConfig sim;
    sim.slots = static_cast<std::int64_t>(slots);
    sim.seed = derive_seed(707, stream::episode, k);
    const SimMetrics mt = run_episode(l, policy, sim, cfg);
    for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, std::abs(mt.per_link_mean[i] * q[i] - 1.0));
  }
  return {worst <= 0.02, "10 layouts M=3, T=2e5, worst |mean AoI * q - 1| = " + fmt(worst, 3) +
                             " (limit 0.02; " + std::to_string(redrawn) +
                             " draws replaced where 2% was under 3 standard errors)"};
}

// ---- pipeline ----

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream(path) << text;
}

ExperimentConfig config_from(const std::string& text, const fs::path& out) {
  std::istringstream in(text);
  ExperimentConfig cfg = parse_config(in);
  cfg.paths.output_dir = out;
  return cfg;
}

// summary.csv rows keyed by (policy, M).
std::map<std::pair<std::string, std::size_t>, double> read_summary(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing " + path.string());
  std::map<std::pair<std::string, std::size_t>, double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("policy,", 0) == 0) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    out[{f.at(0), std::stoul(f.at(1))}] = std::stod(f.at(4));
  }
  return out;
}

std::map<std::string, std::string> tree_hashes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = sha256_file(e.path());
  }
  return out;
}

struct Pipeline {
  fs::path work;
  std::ostringstream log;
  double train_seconds = 0.0;

  fs::path main_dir() const { return work / "main"; }
  fs::path model_path() const { return main_dir() / "model.json"; }
  fs::path large_model_path() const { return work / "large_model" / "model.json"; }

  // Desk-scale campaign: 10000 samples at M = 20 on the 500 m square, 100 epochs, then 50
  // evaluation layouts at M = 10 and M = 20 with every policy.
  void run_main() {
    const ExperimentConfig cfg = config_from(
        "[scenario]\nlayout_count = 50\nseed = 1\n"
        "[train]\ndataset_size = 10000\npairs = 20\narea_length_m = 500\nepochs = 100\n"
        "[eval]\nslots = 20000\npairs = 10,20\n",
        main_dir());
    fs::remove_all(main_dir());
    cmd_generate(cfg, log);
    const auto t0 = Clock::now();
    cmd_train(cfg, log);
    train_seconds = seconds_since(t0);
    cmd_evaluate(cfg, log);
  }

  // The size-generalization runs use a model trained on 50000 samples, the corpus size of the
  // full-scale campaign; the desk model is evaluated alongside for reference.
  void train_large() {
    const fs::path dir = large_model_path().parent_path();
    fs::remove_all(dir);
    const ExperimentConfig cfg = config_from(
        "[scenario]\nlayout_count = 1\nseed = 1\n"
        "[train]\ndataset_size = 50000\npairs = 20\narea_length_m = 500\nepochs = 100\n"
        "[eval]\npairs = 20\n",
        dir);
    cmd_generate(cfg, log);
    cmd_train(cfg, log);
    fs::remove(cfg.paths.dataset_path());
  }

  void run_generalization(const std::string& name, const std::string& pairs, const std::string& density,
                          const fs::path& checkpoint) {
    const fs::path dir = work / name;
    fs::remove_all(dir);
    ExperimentConfig cfg = config_from(
        "[scenario]\nlayout_count = 30\nseed = 1\n"
        "[train]\ndataset_size = 1\n"
        "[eval]\nslots = 2000\npolicies = age_aware,greedy\nbackend = mpnn\npairs = " + pairs +
            "\ndensity = " + density + "\n",
        dir);
    cfg.paths.checkpoint = checkpoint;
    cmd_generate(cfg, log);
    cmd_evaluate(cfg, log);
  }
};

Outcome mpnn_quality(const Pipeline& pipe) {
  const MpnnModel model = load_model(pipe.model_path());
  const RadioConfig cfg;
  std::string detail;
  double sum_mpnn = 0.0, sum_vertex = 0.0;
  for (std::size_t m : {4, 6, 8, 10}) {
    // Held out: a seed family the training corpus never uses.
    const auto corpus = generate_corpus(100, m, 500.0, cfg, derive_seed(9001, stream::training, m));
    double a = 0.0, b = 0.0;
    for (const auto& raw : corpus) {
      const GraphSample s = normalize(raw, model.normalizer);
      const SlotProblem prob = graph_problem(s);
      a += objective_f(forward(s, model.params), prob);
      b += solve_vertex(prob).value;
    }
    detail += " M=" + std::to_string(m) + ":" + fmt(a / b, 4);
    sum_mpnn += a;
    sum_vertex += b;
  }
  const double ratio = sum_mpnn / sum_vertex;
  return {ratio >= 0.9 && pipe.train_seconds < 7200.0,
          "mpnn reaches " + fmt(ratio, 4) + " of the vertex drift reduction on 400 held-out instances (" +
              detail.substr(1) + "; limit 0.9), training " + fmt(pipe.train_seconds, 4) + " s (limit 7200)"};
}

Outcome ordering(const Pipeline& pipe) {
  const auto s = read_summary(pipe.main_dir() / "results" / "summary.csv");
  const double v10 = s.at({"age_aware[vertex_exact]", 10}), g10 = s.at({"greedy", 10});
  const double n20 = s.at({"age_aware[mpnn]", 20}), g20 = s.at({"greedy", 20});
  const double st10 = s.at({"stationary_optimal", 10}), st20 = s.at({"stationary_optimal", 20});
  auto rel = [](double st, double g) { return st > g ? "worse than" : "better than"; };
  return {v10 < g10 && n20 < g20,
          "50 layouts: M=10 age-aware " + fmt(v10) + " vs greedy " + fmt(g10) + "; M=20 age-aware " + fmt(n20) +
              " vs greedy " + fmt(g20) + "; stationary optimal " + fmt(st10) + " / " + fmt(st20) + " is " +
              rel(st10, g10) + " / " + rel(st20, g20) + " greedy"};
}

Outcome generalization(const Pipeline& pipe) {
  bool ok = true;
  std::string detail = "50000-sample model, 30 layouts, T=2000:";
  auto compare = [&](const std::string& name, std::vector<std::size_t> sizes, bool counts) {
    const auto s = read_summary(pipe.work / name / "results" / "summary.csv");
    for (std::size_t m : sizes) {
      const double a = s.at({"age_aware[mpnn]", m}), g = s.at({"greedy", m});
      if (counts) ok = ok && a < g;
      detail += " M=" + std::to_string(m) + " " + fmt(a) + " vs " + fmt(g) + ";";
    }
  };
  compare("fixed_area", {40, 80}, true);
  compare("same_density", {50, 100}, true);
  detail += " (desk model, not scored:";
  compare("fixed_area_desk", {40, 80}, false);
  detail.pop_back();
  detail += ")";
  return {ok, detail};
}

// Two complete small runs from the same seed must agree byte for byte, as must a
// single- and a multi-worker evaluation and repeated slot solves.
Outcome determinism(const Pipeline& pipe) {
  const std::string text =
      "[scenario]\nlayout_count = 6\nseed = 5\n"
      "[train]\ndataset_size = 300\nepochs = 3\n"
      "[eval]\nslots = 1500\npairs = 8,12\n";
  std::vector<std::map<std::string, std::string>> runs;
  for (int r = 0; r < 2; ++r) {
    const fs::path dir = pipe.work / ("determinism_" + std::to_string(r));
    fs::remove_all(dir);
    ExperimentConfig cfg = config_from(text, dir);
    cfg.eval.jobs = r == 0 ? 1 : 3;
    std::ostringstream log;
    cmd_generate(cfg, log);
    cmd_train(cfg, log);
    cmd_evaluate(cfg, log);
    runs.push_back(tree_hashes(dir));
  }
  std::size_t differing = 0;
  for (const auto& [file, hash] : runs[0]) {
    const auto it = runs[1].find(file);
    if (it == runs[1].end() || it->second != hash) ++differing;
  }
  differing += runs[1].size() > runs[0].size() ? runs[1].size() - runs[0].size() : 0;

  const MpnnModel model = load_model(pipe.work / "determinism_0" / "model.json");
  Rng rng(1010);
  const RadioConfig cfg;
  const Layout l = sample_layout(10, 200.0, rng);
  const SlotInstance inst{test::uniform_vector(10, rng, 1.0, 100.0), gain_matrix(l, cfg), cfg};
  ExperimentConfig ec;
  std::ostringstream a, b;
  cmd_solve_slot(inst, ec, &model, a);
  cmd_solve_slot(inst, ec, &model, b);
  const bool slot_same = a.str() == b.str();

  return {differing == 0 && slot_same && !runs[0].empty(),
          std::to_string(runs[0].size()) + " output files checksummed across two runs (1 vs 3 workers), " +
              std::to_string(differing) + " differ; solve-slot repeat " + (slot_same ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  fs::path work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--work", work, "scratch directory for the pipeline criteria");
  app.add_option("--only", only, "run just these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  std::cout << "kernels: " << kernels::active().name << '\n' << std::flush;
  const std::set<int> chosen(only.begin(), only.end());
  auto wanted = [&](int k) { return chosen.empty() || chosen.count(k) > 0; };

  Pipeline pipe;
  pipe.work = fs::absolute(work);
  bool all = true;
  auto report = [&](int k, const std::function<Outcome()>& check) {
    if (!wanted(k)) return;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  ["
              << fmt(seconds_since(t0), 3) << " s]\n"
              << std::flush;
  };

  report(1, drift_oracle);
  report(2, success_oracle);
  report(3, vertex_optimality);
  report(4, permutation);
  report(5, gradients_check);
  report(6, renewal);

  if (wanted(7) || wanted(8) || wanted(9)) {
    try {
      pipe.run_main();
      if (wanted(9)) {
        pipe.train_large();
        pipe.run_generalization("fixed_area", "40,80", "fixed_area", pipe.large_model_path());
        pipe.run_generalization("same_density", "50,100", "same_density", pipe.large_model_path());
        pipe.run_generalization("fixed_area_desk", "40,80", "fixed_area", pipe.model_path());
      }
    } catch (const std::exception& e) {
      std::cout << "pipeline error: " << e.what() << '\n';
    }
  }
  report(7, [&] { return mpnn_quality(pipe); });
  report(8, [&] { return ordering(pipe); });
  report(9, [&] { return generalization(pipe); });
  report(10, [&] { return determinism(pipe); });

  std::cout << (all ? "all selected criteria passed" : "some criteria FAILED") << '\n';
  return all ? 0 : 1;
}
