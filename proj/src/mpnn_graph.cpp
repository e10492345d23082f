#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "d2d/mpnn.hpp"

namespace d2d {

std::vector<std::uint8_t> edge_mask_from_layout(const Layout& layout, double cutoff_m) {
  const std::size_t m = layout.size();
  std::vector<std::uint8_t> mask(m * m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j && distance(layout.tx[i], layout.rx[j]) <= cutoff_m) mask[i * m + j] = 1;
    }
  }
  return mask;
}

std::vector<std::uint8_t> edge_mask_from_gains(const GainMatrix& gains, const RadioConfig& cfg) {
  const std::size_t m = gains.size();
  const double cutoff_gain =
      db_to_linear(cfg.total_antenna_gain_db() - path_loss_db(cfg.interference_cutoff_m, cfg));
  std::vector<std::uint8_t> mask(m * m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j && gains(i, j) >= cutoff_gain) mask[i * m + j] = 1;
    }
  }
  return mask;
}

namespace {

std::vector<std::vector<std::uint32_t>> in_neighbors_of(std::span<const std::uint8_t> mask,
                                                        std::size_t m) {
  std::vector<std::vector<std::uint32_t>> in(m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      if (mask[j * m + i]) in[i].push_back(static_cast<std::uint32_t>(j));
    }
  }
  for (auto& list : in) std::sort(list.begin(), list.end());
  return in;
}

}  // namespace

GraphSample build_graph(std::span<const double> raw_weights, const GainMatrix& gains,
                        std::span<const std::uint8_t> edge_mask, const RadioConfig& cfg,
                        double offset) {
  const std::size_t m = gains.size();
  if (raw_weights.size() != m || edge_mask.size() != m * m) {
    throw std::invalid_argument("weights and edge mask must match the gain matrix size");
  }
  GraphSample s;
  s.z = Matrix(m, MpnnArchitecture::node_features);
  s.a = Matrix(m, m);
  s.edge.assign(edge_mask.begin(), edge_mask.end());
  for (std::size_t i = 0; i < m; ++i) s.edge[i * m + i] = 0;

  const double w_max = *std::max_element(raw_weights.begin(), raw_weights.end());
  for (std::size_t i = 0; i < m; ++i) {
    // All-zero weights carry no preference; keep them zero rather than dividing by zero.
    s.z(i, 0) = w_max > 0.0 ? raw_weights[i] / w_max : 0.0;
    s.z(i, 1) = linear_to_db(gains(i, i));
  }
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      if (s.edge[j * m + i]) s.a(j, i) = linear_to_db(gains(j, i));
    }
  }
  s.in_neighbors = in_neighbors_of(s.edge, m);
  s.raw.weights.assign(raw_weights.begin(), raw_weights.end());
  s.raw.constants = std::make_shared<const DriftConstants>(drift_constants(gains, cfg));
  s.raw.offset = offset;
  return s;
}

GraphSample build_graph(const NetworkState& state, const Layout& layout) {
  std::vector<double> weights;
  weights.reserve(state.aoi.size());
  for (Aoi g : state.aoi) weights.push_back(drift_weight(g));
  return build_graph(weights, state.gains,
                     edge_mask_from_layout(layout, state.radio.interference_cutoff_m), state.radio,
                     drift_offset(state.aoi));
}

Normalizer fit_normalizer(std::span<const GraphSample> corpus) {
  double node_sum = 0.0, node_sq = 0.0, edge_sum = 0.0, edge_sq = 0.0;
  std::size_t node_n = 0, edge_n = 0;
  for (const GraphSample& s : corpus) {
    const std::size_t m = s.size();
    for (std::size_t i = 0; i < m; ++i) {
      node_sum += s.z(i, 1);
      node_sq += s.z(i, 1) * s.z(i, 1);
      ++node_n;
    }
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        if (!s.has_edge(j, i)) continue;
        edge_sum += s.a(j, i);
        edge_sq += s.a(j, i) * s.a(j, i);
        ++edge_n;
      }
    }
  }
  // Degenerate statistics (no data or zero spread) fall back to mean 0 / std 1 so the
  // std > 0 invariant holds.
  auto stats = [](double sum, double sq, std::size_t n, double& mean, double& stddev) {
    if (n == 0) {
      mean = 0.0;
      stddev = 1.0;
      return;
    }
    mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sq / static_cast<double>(n) - mean * mean);
    stddev = var > 0.0 ? std::sqrt(var) : 1.0;
  };
  Normalizer norm;
  stats(node_sum, node_sq, node_n, norm.node_mean_db, norm.node_std_db);
  stats(edge_sum, edge_sq, edge_n, norm.edge_mean_db, norm.edge_std_db);
  return norm;
}

GraphSample normalize(const GraphSample& sample, const Normalizer& norm) {
  if (sample.normalized) throw std::invalid_argument("sample is already normalized");
  GraphSample out = sample;
  const std::size_t m = out.size();
  for (std::size_t i = 0; i < m; ++i) {
    out.z(i, 1) = (out.z(i, 1) - norm.node_mean_db) / norm.node_std_db;
  }
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      if (out.has_edge(j, i)) out.a(j, i) = (out.a(j, i) - norm.edge_mean_db) / norm.edge_std_db;
    }
  }
  out.normalized = true;
  return out;
}

SlotProblem graph_problem(const GraphSample& sample) {
  SlotProblem prob;
  prob.weights.resize(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) prob.weights[i] = sample.z(i, 0);
  prob.constants = sample.raw.constants;
  prob.offset = 0.0;
  return prob;
}

}  // namespace d2d
