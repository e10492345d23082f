#include "d2d/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "d2d/errors.hpp"
#include "d2d/kernels.hpp"

namespace d2d {

void SolverConfig::validate() const {
  if (max_iters <= 0 || restarts <= 0) throw ConfigError("solver iteration counts must be positive");
  if (!(step_size > 0.0) || !(tolerance > 0.0)) {
    throw ConfigError("solver step size and tolerance must be positive");
  }
  if (vertex_cap == 0 || vertex_cap > kMaxVertexCap) {
    throw ConfigError("vertex_cap must be in [1, 24]");
  }
}

std::string_view to_string(SolverTag tag) noexcept {
  switch (tag) {
    case SolverTag::vertex_exact:
      return "vertex_exact";
    case SolverTag::projected_gradient:
      return "projected_gradient";
    case SolverTag::mpnn:
      return "mpnn";
  }
  return "unknown";
}

namespace {

bool all_zero_weights(const SlotProblem& prob) {
  return std::all_of(prob.weights.begin(), prob.weights.end(), [](double w) { return w == 0.0; });
}

struct VertexSearch {
  const SlotProblem& prob;
  const DriftConstants& c;
  const kernels::KernelTable& k;
  std::size_t m;
  std::vector<double> scaled;             // W_i rho_i
  std::vector<std::vector<double>> prods;  // prods[depth] = products over chosen links so far
  std::vector<unsigned char> chosen;
  std::vector<unsigned char> best;
  double best_value;

  void visit(std::size_t depth) {
    if (depth == m) {
      const std::vector<double>& prod = prods[depth];
      double f = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (chosen[i]) f -= scaled[i] * 1.0 * prod[i];
      }
      if (f < best_value) {
        best_value = f;
        best = chosen;
      }
      return;
    }
    prods[depth + 1] = prods[depth];
    chosen[depth] = 0;
    visit(depth + 1);
    prods[depth + 1] = prods[depth];
    k.scale_one_minus(prods[depth + 1].data(), c.coupling.row(depth).data(), 1.0, m);
    chosen[depth] = 1;
    visit(depth + 1);
    chosen[depth] = 0;
  }
};

}  // namespace

SlotSolution solve_vertex(const SlotProblem& prob, std::size_t vertex_cap) {
  const std::size_t m = prob.size();
  if (m > vertex_cap || vertex_cap > kMaxVertexCap) {
    throw CapabilityError("vertex enumeration supports M <= " + std::to_string(vertex_cap) +
                          " (got M = " + std::to_string(m) +
                          "); use the projected_gradient solver");
  }
  SlotSolution sol{std::vector<double>(m, 0.0), 0.0, SolverTag::vertex_exact};
  if (all_zero_weights(prob)) return sol;

  const DriftConstants& c = *prob.constants;
  VertexSearch search{prob, c, kernels::active(), m, std::vector<double>(m),
                      std::vector<std::vector<double>>(m + 1, std::vector<double>(m, 1.0)),
                      std::vector<unsigned char>(m, 0), std::vector<unsigned char>(m, 0),
                      std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < m; ++i) search.scaled[i] = prob.weights[i] * c.rho[i];
  search.visit(0);
  for (std::size_t i = 0; i < m; ++i) sol.p[i] = search.best[i] ? 1.0 : 0.0;
  sol.value = objective_f(sol.p, prob);
  return sol;
}

DescentResult projected_descent(const BoxObjective& objective, std::vector<double> start,
                                double lower, double upper, double initial_step, int max_iters,
                                double tolerance, std::vector<double>* trace) {
  DescentResult r;
  r.x = std::move(start);
  for (double& v : r.x) v = std::clamp(v, lower, upper);
  r.value = objective.value(r.x);
  if (trace) trace->push_back(r.value);
  double eta = initial_step;
  const double min_step = initial_step * 1e-14;
  std::vector<double> candidate(r.x.size());
  while (r.iterations < max_iters) {
    ++r.iterations;
    const std::vector<double> grad = objective.gradient(r.x);
    bool accepted = false;
    double improvement = 0.0;
    while (eta >= min_step) {
      bool moved = false;
      for (std::size_t i = 0; i < r.x.size(); ++i) {
        candidate[i] = std::clamp(r.x[i] - eta * grad[i], lower, upper);
        moved = moved || candidate[i] != r.x[i];
      }
      if (!moved) break;  // projected gradient is zero: stationary point
      const double value = objective.value(candidate);
      if (value < r.value) {
        improvement = r.value - value;
        r.x = candidate;
        r.value = value;
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;
    if (trace) trace->push_back(r.value);
    if (improvement < tolerance * std::max(1.0, std::abs(r.value))) break;
    eta = std::min(2.0 * eta, initial_step);
  }
  return r;
}

DescentResult multistart_descent(const BoxObjective& objective, std::size_t dim, double lower,
                                 double upper, double initial_step, const SolverConfig& cfg,
                                 Rng& rng) {
  DescentResult best;
  bool have_best = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<double> start(dim);
    for (double& v : start) v = rng.uniform(lower, upper);
    DescentResult run = projected_descent(objective, std::move(start), lower, upper, initial_step,
                                          cfg.max_iters, cfg.tolerance);
    if (!have_best || run.value < best.value ||
        (run.value == best.value && run.x < best.x)) {
      best = std::move(run);
      have_best = true;
    }
  }
  return best;
}

SlotSolution solve_projected_gradient(const SlotProblem& prob, const SolverConfig& cfg, Rng& rng) {
  const std::size_t m = prob.size();
  SlotSolution sol{std::vector<double>(m, 0.0), 0.0, SolverTag::projected_gradient};
  if (all_zero_weights(prob)) return sol;
  const DriftConstants& c = *prob.constants;
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, prob.weights[i] * c.rho[i]);
  const BoxObjective objective{
      [&prob](std::span<const double> p) { return objective_f(p, prob); },
      [&prob](std::span<const double> p) { return objective_gradient(p, prob); }};
  // f is linear in the weights; scaling the step by the largest weight keeps cfg.step_size
  // meaningful in units of probability.
  DescentResult best = multistart_descent(objective, m, 0.0, 1.0, cfg.step_size / scale, cfg, rng);
  sol.p = std::move(best.x);
  sol.value = best.value;
  return sol;
}

}  // namespace d2d
