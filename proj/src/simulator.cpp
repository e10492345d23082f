#include "d2d/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "d2d/errors.hpp"
#include "d2d/random.hpp"

namespace d2d {

void SimConfig::validate() const {
  if (slots < 1) throw ConfigError("eval.slots must be >= 1");
  if (initial_aoi < 1) throw ConfigError("eval.initial_aoi must be >= 1");
  if (trace_stride < 0) throw ConfigError("eval.trace_stride must be >= 0");
}

SimMetrics run_episode(const Layout& layout, Policy& policy, const SimConfig& sim,
                       const RadioConfig& radio) {
  sim.validate();
  const std::size_t m = layout.size();
  const GainMatrix gains = gain_matrix(layout, radio);
  const double p_tx = radio.tx_power_w();
  const double noise = radio.noise_power_w();
  const double beta = radio.sinr_threshold;

  Rng rng(derive_seed(sim.seed, stream::episode, 0));
  const FadingField fading(derive_seed(sim.seed, stream::fading, 0));

  std::vector<Aoi> g(m, sim.initial_aoi);
  std::vector<std::int64_t> sum(m, 0);
  std::vector<std::int64_t> delivered(m, 0);
  std::vector<std::uint32_t> active;
  SimMetrics out;

  for (std::int64_t t = 0; t < sim.slots; ++t) {
    std::int64_t slot_sum = 0;
    for (std::size_t i = 0; i < m; ++i) {
      sum[i] += g[i];
      slot_sum += g[i];
    }
    if (sim.trace_stride > 0 && t % sim.trace_stride == 0) {
      out.trace.push_back(static_cast<double>(slot_sum) / static_cast<double>(m));
    }

    const Action a = policy.decide(NetworkState{g, gains, radio}, rng);
    active.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (a[i]) active.push_back(static_cast<std::uint32_t>(i));
    }
    // Only scheduled receivers matter, and only scheduled transmitters interfere.
    const auto slot = static_cast<std::uint64_t>(t);
    std::vector<std::uint8_t> ok(m, 0);
    for (std::uint32_t i : active) {
      double interference = 0.0;
      for (std::uint32_t j : active) {
        if (j != i) interference += gains(j, i) * fading.power(slot, j, i);
      }
      const double signal = p_tx * gains(i, i) * fading.power(slot, i, i);
      ok[i] = signal / (p_tx * interference + noise) >= beta;
    }
    for (std::size_t i = 0; i < m; ++i) {
      delivered[i] += ok[i];
      g[i] = aoi_step(g[i], ok[i] != 0);
      if (g[i] > kAoiCap) {
        throw EpisodeError("link starved past the AoI cap", i, t);
      }
    }
  }

  const double slots = static_cast<double>(sim.slots);
  out.per_link_mean.resize(m);
  out.success_rate.resize(m);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < m; ++i) {
    out.per_link_mean[i] = static_cast<double>(sum[i]) / slots;
    out.success_rate[i] = static_cast<double>(delivered[i]) / slots;
    total += sum[i];
  }
  out.mean_aoi = static_cast<double>(total) / (slots * static_cast<double>(m));
  return out;
}

SimMetrics run_episode(const Layout& layout, const PolicySpec& spec, const SimConfig& sim,
                       const RadioConfig& radio) {
  Policy policy(spec, layout, gain_matrix(layout, radio), radio, sim.seed);
  return run_episode(layout, policy, sim, radio);
}

EvaluationReport evaluate(const std::vector<Layout>& layouts, const PolicyFactory& factory,
                          const SimConfig& sim, const RadioConfig& radio, unsigned jobs) {
  if (layouts.empty()) throw ConfigError("evaluate needs at least one layout");
  sim.validate();
  const std::size_t n = layouts.size();
  EvaluationReport report;
  report.per_layout.resize(n);
  std::vector<std::exception_ptr> errors(n);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        SimConfig local = sim;
        local.seed = derive_seed(sim.seed, stream::episode, k + 1);
        const GainMatrix gains = gain_matrix(layouts[k], radio);
        Policy policy = factory(k, layouts[k], gains);
        report.per_layout[k] = run_episode(layouts[k], policy, local, radio);
      } catch (const EpisodeError& e) {
        errors[k] = std::make_exception_ptr(EpisodeError("layout " + std::to_string(k) + ": ", e));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  report.cdf_aoi.reserve(n);
  double sum = 0.0;
  for (const SimMetrics& s : report.per_layout) {
    report.cdf_aoi.push_back(s.mean_aoi);
    sum += s.mean_aoi;
  }
  report.mean_aoi = sum / static_cast<double>(n);
  std::sort(report.cdf_aoi.begin(), report.cdf_aoi.end());
  report.cdf_level.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    report.cdf_level[k] = static_cast<double>(k + 1) / static_cast<double>(n);
  }
  return report;
}

void write_results_csv(std::ostream& out, const EvaluationReport& report, const std::string& policy,
                       const std::string& config_hash) {
  out << "# config_sha256=" << config_hash << '\n';
  out << "layout_id,policy,M,mean_aoi,min_link_mean,max_link_mean,mean_success_rate,"
         "min_success_rate\n";
  const auto old = out.precision(17);
  for (std::size_t k = 0; k < report.per_layout.size(); ++k) {
    const SimMetrics& s = report.per_layout[k];
    const auto [lo, hi] = std::minmax_element(s.per_link_mean.begin(), s.per_link_mean.end());
    const double mean_rate = std::accumulate(s.success_rate.begin(), s.success_rate.end(), 0.0) /
                             static_cast<double>(s.success_rate.size());
    const double min_rate = *std::min_element(s.success_rate.begin(), s.success_rate.end());
    out << k << ',' << policy << ',' << s.per_link_mean.size() << ',' << s.mean_aoi << ',' << *lo
        << ',' << *hi << ',' << mean_rate << ',' << min_rate << '\n';
  }
  out.precision(old);
}

void write_cdf_csv(std::ostream& out, const EvaluationReport& report, const std::string& policy,
                   const std::string& config_hash) {
  out << "# config_sha256=" << config_hash << '\n';
  out << "policy,mean_aoi,cdf\n";
  const auto old = out.precision(17);
  for (std::size_t k = 0; k < report.cdf_aoi.size(); ++k) {
    out << policy << ',' << report.cdf_aoi[k] << ',' << report.cdf_level[k] << '\n';
  }
  out.precision(old);
}

}  // namespace d2d
