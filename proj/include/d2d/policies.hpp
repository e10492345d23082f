#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "d2d/channel.hpp"
#include "d2d/drift.hpp"
#include "d2d/mpnn.hpp"
#include "d2d/random.hpp"
#include "d2d/solvers.hpp"

namespace d2d {

// `fixed` is a caller-supplied probability vector (tests and diagnostics); it is not one of
// the evaluated policies and cannot be named in a config.
enum class PolicyKind { age_aware, stationary_optimal, proportional_fair, greedy, fixed };
enum class Backend { mpnn, vertex_exact, projected_gradient };

std::string_view to_string(PolicyKind kind) noexcept;
std::string_view to_string(Backend backend) noexcept;
// Throw ConfigError on unknown names.
PolicyKind parse_policy_kind(std::string_view name);
Backend parse_backend(std::string_view name);

// Layout-independent description of a policy.
struct PolicySpec {
  PolicyKind kind = PolicyKind::greedy;
  Backend backend = Backend::vertex_exact;
  std::shared_ptr<const MpnnModel> model;  // required for Backend::mpnn
  SolverConfig solver;

  std::string name() const;  // e.g. "age_aware[mpnn]", "greedy"
};

// Age-independent baselines built on the renewal identity: under fixed p link i's mean
// AoI is 1/q_i(p). Both minimize over p in [kStationaryFloor, 1]^M with multistart
// projected descent and analytic gradients.
inline constexpr double kStationaryFloor = 1e-6;

// J(p) = (1/M) sum_i 1 / q_i(p)
double stationary_objective(std::span<const double> p, const DriftConstants& c);
// -sum_i log q_i(p)
double proportional_fair_objective(std::span<const double> p, const DriftConstants& c);
std::vector<double> stationary_gradient(std::span<const double> p, const DriftConstants& c);
std::vector<double> proportional_fair_gradient(std::span<const double> p, const DriftConstants& c);

std::vector<double> fit_stationary_optimal(const GainMatrix& gains, const RadioConfig& cfg,
                                           const SolverConfig& solver, std::uint64_t seed = 0);
std::vector<double> fit_proportional_fair(const GainMatrix& gains, const RadioConfig& cfg,
                                          const SolverConfig& solver, std::uint64_t seed = 0);

// Precomputed per-layout state for the MPNN backend: the normalized static graph with
// only the weight column changing between slots.
struct MpnnContext {
  std::shared_ptr<const MpnnModel> model;
  GraphSample graph;  // normalized
};

MpnnContext make_mpnn_context(std::shared_ptr<const MpnnModel> model, const Layout& layout,
                              const GainMatrix& gains, const RadioConfig& cfg);

// p(t) from the drift-minimizing backend. `constants` and `mpnn` are the per-layout caches.
std::vector<double> age_aware_decide_probs(std::span<const Aoi> aoi, Backend backend,
                                           const std::shared_ptr<const DriftConstants>& constants,
                                           MpnnContext* mpnn, const SolverConfig& solver,
                                           Rng& rng);

// Lowest index among the largest AoI values.
std::size_t greedy_choice(std::span<const Aoi> aoi);

// Independent Bernoulli(p_i) draws; one uniform consumed per link.
Action sample_action(std::span<const double> p, Rng& rng);

// A policy bound to one layout: stationary vectors are fitted and MPNN graphs prepared once.
class Policy {
 public:
  Policy(const PolicySpec& spec, const Layout& layout, const GainMatrix& gains,
         const RadioConfig& cfg, std::uint64_t seed = 0);
  static Policy fixed(std::vector<double> p);

  PolicyKind kind() const noexcept { return spec_.kind; }
  const PolicySpec& spec() const noexcept { return spec_; }

  // Scheduling probabilities for the current AoI (indicator vector for greedy).
  std::vector<double> probabilities(std::span<const Aoi> aoi);
  Action decide(const NetworkState& state, Rng& rng);

  // The fitted vector for stationary policies, empty otherwise.
  const std::vector<double>& fixed_probabilities() const noexcept { return fixed_; }

 private:
  Policy() : solver_rng_(0) {}

  PolicySpec spec_;
  std::shared_ptr<const DriftConstants> constants_;
  std::optional<MpnnContext> mpnn_;
  std::vector<double> fixed_;
  Rng solver_rng_;
};

}  // namespace d2d
