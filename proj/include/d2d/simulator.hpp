#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "d2d/channel.hpp"
#include "d2d/drift.hpp"
#include "d2d/policies.hpp"

namespace d2d {

struct SimConfig {
  std::int64_t slots = 20000;
  std::uint64_t seed = 1;
  Aoi initial_aoi = 1;
  // Every trace_stride-th slot's network mean AoI is kept; 0 disables the trace.
  std::int64_t trace_stride = 0;

  void validate() const;  // ConfigError on slots < 1, initial_aoi < 1, trace_stride < 0
};

struct SimMetrics {
  double mean_aoi = 0.0;              // 1/(TM) sum_t sum_i g_i(t), t = 1..T
  std::vector<double> per_link_mean;  // 1/T sum_t g_i(t)
  std::vector<double> success_rate;   // deliveries / T
  std::vector<double> trace;
};

// Policy randomness comes from derive_seed(seed, episode, 0) and fading from
// derive_seed(seed, fading, 0), so two policies run on one seed see the same channel.
SimMetrics run_episode(const Layout& layout, Policy& policy, const SimConfig& sim,
                       const RadioConfig& radio);
// Binds the spec to the layout first (stationary fits, MPNN graph).
SimMetrics run_episode(const Layout& layout, const PolicySpec& spec, const SimConfig& sim,
                       const RadioConfig& radio);

// Builds the policy used on layout `index`.
using PolicyFactory = std::function<Policy(std::size_t index, const Layout& layout,
                                           const GainMatrix& gains)>;

struct EvaluationReport {
  std::vector<SimMetrics> per_layout;
  double mean_aoi = 0.0;
  // Sorted per-layout mean AoI with empirical CDF levels (k+1)/n.
  std::vector<double> cdf_aoi;
  std::vector<double> cdf_level;
};

// Layout k runs with seed derive_seed(sim.seed, episode, k + 1); results do not depend on
// `jobs`. An EpisodeError is rethrown with the layout index in its message.
EvaluationReport evaluate(const std::vector<Layout>& layouts, const PolicyFactory& factory,
                          const SimConfig& sim, const RadioConfig& radio, unsigned jobs = 1);

// One row per layout: layout_id,policy,M,mean_aoi,min_link_mean,max_link_mean,
// mean_success_rate,min_success_rate
void write_results_csv(std::ostream& out, const EvaluationReport& report, const std::string& policy,
                       const std::string& config_hash);
void write_cdf_csv(std::ostream& out, const EvaluationReport& report, const std::string& policy,
                   const std::string& config_hash);

}  // namespace d2d
