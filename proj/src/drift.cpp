#include "d2d/drift.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "d2d/kernels.hpp"

namespace d2d {

double lyapunov(std::span<const Aoi> aoi) {
  double sum = 0.0;
  for (Aoi g : aoi) sum += static_cast<double>(g) * static_cast<double>(g);
  return 0.5 * sum;
}

double drift_offset(std::span<const Aoi> aoi) {
  double sum = 0.0;
  for (Aoi g : aoi) sum += static_cast<double>(g) + 0.5;
  return sum;
}

DriftConstants drift_constants(const GainMatrix& gains, const RadioConfig& cfg) {
  const std::size_t m = gains.size();
  const double beta = cfg.sinr_threshold;
  const double noise_over_power = cfg.noise_power_w() / cfg.tx_power_w();
  std::vector<double> rho(m);
  Matrix d(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    rho[i] = std::exp(-beta * noise_over_power / gains(i, i));
    for (std::size_t j = 0; j < m; ++j) {
      d(j, i) = j == i ? std::numeric_limits<double>::infinity() : gains(i, i) / (beta * gains(j, i));
    }
  }
  return drift_constants_from(std::move(rho), std::move(d));
}

DriftConstants drift_constants_from(std::vector<double> rho, Matrix d) {
  const std::size_t m = rho.size();
  if (d.rows() != m || d.cols() != m) throw std::invalid_argument("D must be M x M");
  DriftConstants c{std::move(rho), std::move(d), Matrix(m, m)};
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      c.coupling(j, i) = j == i ? 0.0 : 1.0 / (1.0 + c.d(j, i));
    }
  }
  return c;
}

SlotProblem make_slot_problem(std::span<const Aoi> aoi,
                              std::shared_ptr<const DriftConstants> constants) {
  SlotProblem prob;
  prob.weights.reserve(aoi.size());
  for (Aoi g : aoi) prob.weights.push_back(drift_weight(g));
  prob.constants = std::move(constants);
  prob.offset = drift_offset(aoi);
  return prob;
}

std::vector<double> interference_products(std::span<const double> p, const DriftConstants& c) {
  const std::size_t m = c.size();
  const auto& k = kernels::active();
  std::vector<double> prod(m, 1.0);
  for (std::size_t j = 0; j < m; ++j) {
    if (p[j] != 0.0) k.scale_one_minus(prod.data(), c.coupling.row(j).data(), p[j], m);
  }
  return prod;
}

std::vector<double> success_prob(std::span<const double> p, const DriftConstants& c) {
  std::vector<double> q = interference_products(p, c);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] *= p[i] * c.rho[i];
  return q;
}

double objective_f(std::span<const double> p, const SlotProblem& prob) {
  const DriftConstants& c = *prob.constants;
  const std::vector<double> prod = interference_products(p, c);
  double f = 0.0;
  for (std::size_t i = 0; i < prod.size(); ++i) f -= prob.weights[i] * c.rho[i] * p[i] * prod[i];
  return f;
}

double drift(const NetworkState& state, std::span<const double> p) {
  // The constants are cheap relative to the Monte-Carlo uses of this entry point.
  auto constants = std::make_shared<const DriftConstants>(drift_constants(state.gains, state.radio));
  const SlotProblem prob = make_slot_problem(state.aoi, std::move(constants));
  return objective_f(p, prob) + prob.offset;
}

std::vector<double> objective_gradient(std::span<const double> p, const SlotProblem& prob) {
  const DriftConstants& c = *prob.constants;
  const std::size_t m = c.size();
  std::vector<double> grad(m, 0.0);
  std::vector<double> factor(m), prefix(m + 1), suffix(m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    const double scale = prob.weights[i] * c.rho[i];
    if (scale == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j) factor[j] = 1.0 - p[j] * c.coupling(j, i);
    prefix[0] = 1.0;
    for (std::size_t j = 0; j < m; ++j) prefix[j + 1] = prefix[j] * factor[j];
    suffix[m] = 1.0;
    for (std::size_t j = m; j-- > 0;) suffix[j] = suffix[j + 1] * factor[j];
    // factor[i] == 1, so the full product already excludes i.
    grad[i] -= scale * prefix[m];
    if (p[i] == 0.0) continue;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == i) continue;
      grad[k] += scale * p[i] * c.coupling(k, i) * prefix[k] * suffix[k + 1];
    }
  }
  return grad;
}

}  // namespace d2d
