#include "d2d/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "d2d/errors.hpp"

namespace d2d {

std::string_view to_string(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::age_aware:
      return "age_aware";
    case PolicyKind::stationary_optimal:
      return "stationary_optimal";
    case PolicyKind::proportional_fair:
      return "proportional_fair";
    case PolicyKind::greedy:
      return "greedy";
    case PolicyKind::fixed:
      return "fixed";
  }
  return "unknown";
}

std::string_view to_string(Backend backend) noexcept {
  switch (backend) {
    case Backend::mpnn:
      return "mpnn";
    case Backend::vertex_exact:
      return "vertex_exact";
    case Backend::projected_gradient:
      return "projected_gradient";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  for (PolicyKind k : {PolicyKind::age_aware, PolicyKind::stationary_optimal,
                       PolicyKind::proportional_fair, PolicyKind::greedy}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown policy '" + std::string(name) + "'");
}

Backend parse_backend(std::string_view name) {
  for (Backend b : {Backend::mpnn, Backend::vertex_exact, Backend::projected_gradient}) {
    if (name == to_string(b)) return b;
  }
  throw ConfigError("unknown backend '" + std::string(name) + "'");
}

std::string PolicySpec::name() const {
  std::string n(to_string(kind));
  if (kind == PolicyKind::age_aware) n += "[" + std::string(to_string(backend)) + "]";
  return n;
}

double stationary_objective(std::span<const double> p, const DriftConstants& c) {
  const std::vector<double> q = success_prob(p, c);
  double sum = 0.0;
  for (double v : q) sum += 1.0 / v;
  return sum / static_cast<double>(q.size());
}

double proportional_fair_objective(std::span<const double> p, const DriftConstants& c) {
  const std::vector<double> q = success_prob(p, c);
  double sum = 0.0;
  for (double v : q) sum -= std::log(v);
  return sum;
}

namespace {

// d/dp_k of sum_i phi(q_i) where phi'(q) q = `own` scale. Uses
// dq_k/dp_k = q_k / p_k and dq_i/dp_k = -q_i c_ki / (1 - p_k c_ki).
template <class Outer>
std::vector<double> chain_gradient(std::span<const double> p, const DriftConstants& c,
                                        Outer outer) {
  const std::size_t m = c.size();
  const std::vector<double> q = success_prob(p, c);
  std::vector<double> dq(m);
  for (std::size_t i = 0; i < m; ++i) dq[i] = outer(q[i]);  // phi'(q_i) * q_i
  std::vector<double> grad(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    double g = dq[k] / p[k];
    for (std::size_t i = 0; i < m; ++i) {
      if (i == k) continue;
      const double ck = c.coupling(k, i);
      g -= dq[i] * ck / (1.0 - p[k] * ck);
    }
    grad[k] = g;
  }
  return grad;
}

}  // namespace

std::vector<double> stationary_gradient(std::span<const double> p, const DriftConstants& c) {
  // phi(q) = 1/(M q): phi'(q) q = -1/(M q)
  const double inv_m = 1.0 / static_cast<double>(c.size());
  return chain_gradient(p, c, [inv_m](double q) { return -inv_m / q; });
}

std::vector<double> proportional_fair_gradient(std::span<const double> p, const DriftConstants& c) {
  // phi(q) = -log q: phi'(q) q = -1
  return chain_gradient(p, c, [](double) { return -1.0; });
}

namespace {

std::vector<double> fit_stationary(const GainMatrix& gains, const RadioConfig& cfg,
                                   const SolverConfig& solver, std::uint64_t seed, bool fair) {
  auto constants = std::make_shared<const DriftConstants>(drift_constants(gains, cfg));
  const DriftConstants& c = *constants;
  const std::size_t m = c.size();
  BoxObjective objective;
  if (fair) {
    objective.value = [&c](std::span<const double> p) { return proportional_fair_objective(p, c); };
    objective.gradient = [&c](std::span<const double> p) { return proportional_fair_gradient(p, c); };
  } else {
    objective.value = [&c](std::span<const double> p) { return stationary_objective(p, c); };
    objective.gradient = [&c](std::span<const double> p) { return stationary_gradient(p, c); };
  }
  Rng rng(derive_seed(seed, stream::solver, fair ? 1 : 0));
  DescentResult best =
      multistart_descent(objective, m, kStationaryFloor, 1.0, solver.step_size, solver, rng);
  return best.x;
}

}  // namespace

std::vector<double> fit_stationary_optimal(const GainMatrix& gains, const RadioConfig& cfg,
                                           const SolverConfig& solver, std::uint64_t seed) {
  return fit_stationary(gains, cfg, solver, seed, false);
}

std::vector<double> fit_proportional_fair(const GainMatrix& gains, const RadioConfig& cfg,
                                          const SolverConfig& solver, std::uint64_t seed) {
  return fit_stationary(gains, cfg, solver, seed, true);
}

MpnnContext make_mpnn_context(std::shared_ptr<const MpnnModel> model, const Layout& layout,
                              const GainMatrix& gains, const RadioConfig& cfg) {
  if (!model) throw ConfigError("the mpnn backend needs a trained checkpoint");
  const std::vector<double> ones(layout.size(), 1.0);
  GraphSample raw = build_graph(ones, gains, edge_mask_from_layout(layout, cfg.interference_cutoff_m), cfg);
  GraphSample graph = normalize(raw, model->normalizer);
  return MpnnContext{std::move(model), std::move(graph)};
}

std::vector<double> age_aware_decide_probs(std::span<const Aoi> aoi, Backend backend,
                                           const std::shared_ptr<const DriftConstants>& constants,
                                           MpnnContext* mpnn, const SolverConfig& solver,
                                           Rng& rng) {
  switch (backend) {
    case Backend::vertex_exact:
      return solve_vertex(make_slot_problem(aoi, constants), solver.vertex_cap).p;
    case Backend::projected_gradient:
      return solve_projected_gradient(make_slot_problem(aoi, constants), solver, rng).p;
    case Backend::mpnn: {
      if (!mpnn) throw ConfigError("the mpnn backend needs a trained checkpoint");
      // Only the weight column changes between slots; the graph is otherwise static.
      GraphSample& graph = mpnn->graph;
      double w_max = 0.0;
      for (Aoi g : aoi) w_max = std::max(w_max, drift_weight(g));
      for (std::size_t i = 0; i < aoi.size(); ++i) graph.z(i, 0) = drift_weight(aoi[i]) / w_max;
      return forward(graph, mpnn->model->params);
    }
  }
  return {};
}

std::size_t greedy_choice(std::span<const Aoi> aoi) {
  return static_cast<std::size_t>(std::max_element(aoi.begin(), aoi.end()) - aoi.begin());
}

Action sample_action(std::span<const double> p, Rng& rng) {
  Action a(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) a[i] = rng.uniform() < p[i] ? 1 : 0;
  return a;
}

Policy::Policy(const PolicySpec& spec, const Layout& layout, const GainMatrix& gains,
               const RadioConfig& cfg, std::uint64_t seed)
    : spec_(spec),
      constants_(std::make_shared<const DriftConstants>(drift_constants(gains, cfg))),
      solver_rng_(derive_seed(seed, stream::solver, 2)) {
  switch (spec_.kind) {
    case PolicyKind::stationary_optimal:
      fixed_ = fit_stationary_optimal(gains, cfg, spec_.solver, seed);
      break;
    case PolicyKind::proportional_fair:
      fixed_ = fit_proportional_fair(gains, cfg, spec_.solver, seed);
      break;
    case PolicyKind::age_aware:
      if (spec_.backend == Backend::mpnn) {
        mpnn_ = make_mpnn_context(spec_.model, layout, gains, cfg);
      } else if (spec_.backend == Backend::vertex_exact && layout.size() > spec_.solver.vertex_cap) {
        throw CapabilityError("vertex_exact backend supports M <= " +
                              std::to_string(spec_.solver.vertex_cap) + ", layout has M = " +
                              std::to_string(layout.size()));
      }
      break;
    case PolicyKind::greedy:
      break;
    case PolicyKind::fixed:
      throw ConfigError("fixed policies are built with Policy::fixed");
  }
}

Policy Policy::fixed(std::vector<double> p) {
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("fixed probabilities must lie in [0, 1]");
  }
  Policy policy;
  policy.spec_.kind = PolicyKind::fixed;
  policy.fixed_ = std::move(p);
  return policy;
}

std::vector<double> Policy::probabilities(std::span<const Aoi> aoi) {
  switch (spec_.kind) {
    case PolicyKind::stationary_optimal:
    case PolicyKind::proportional_fair:
    case PolicyKind::fixed:
      return fixed_;
    case PolicyKind::greedy: {
      std::vector<double> p(aoi.size(), 0.0);
      p[greedy_choice(aoi)] = 1.0;
      return p;
    }
    case PolicyKind::age_aware:
      return age_aware_decide_probs(aoi, spec_.backend, constants_, mpnn_ ? &*mpnn_ : nullptr,
                                    spec_.solver, solver_rng_);
  }
  return {};
}

Action Policy::decide(const NetworkState& state, Rng& rng) {
  if (spec_.kind == PolicyKind::greedy) {
    Action a(state.aoi.size(), 0);
    a[greedy_choice(state.aoi)] = 1;
    return a;
  }
  return sample_action(probabilities(state.aoi), rng);
}

}  // namespace d2d
