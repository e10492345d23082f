#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "d2d/channel.hpp"
#include "d2d/matrix.hpp"

namespace d2d {

using Aoi = std::int64_t;

// Simulated AoI beyond this means a link was starved; episodes abort with EpisodeError.
inline constexpr Aoi kAoiCap = 1'000'000;

// g(t+1) = 1 on delivery, g(t) + 1 otherwise.
constexpr Aoi aoi_step(Aoi aoi, bool delivered) noexcept { return delivered ? 1 : aoi + 1; }

// 1/2 * sum g_i^2
double lyapunov(std::span<const Aoi> aoi);

// W_i = g_i (g_i + 2) / 2
constexpr double drift_weight(Aoi aoi) noexcept {
  const double g = static_cast<double>(aoi);
  return 0.5 * g * (g + 2.0);
}

// sum (g_i + 1/2); the action-independent part of the drift.
double drift_offset(std::span<const Aoi> aoi);

// Non-owning view of S(t) = (g(t), H^l) plus the radio constants that turn H^l into
// success statistics.
struct NetworkState {
  std::span<const Aoi> aoi;
  const GainMatrix& gains;
  const RadioConfig& radio;
};

struct DriftConstants {
  // rho_i = exp(-beta sigma^2 / (P_tx h_ii)): success probability with no interferers.
  std::vector<double> rho;
  // D(j, i) = h_ii / (beta h_ji) for j != i; diagonal is +inf.
  Matrix d;
  // coupling(j, i) = 1 / (1 + D(j, i)); diagonal is 0. Row j is interferer j's footprint.
  Matrix coupling;

  std::size_t size() const noexcept { return rho.size(); }
};

DriftConstants drift_constants(const GainMatrix& gains, const RadioConfig& cfg);

// Builds constants directly from rho and D (the graph-sample path stores these raw).
DriftConstants drift_constants_from(std::vector<double> rho, Matrix d);

// One per-slot instance of the drift-minimization problem: minimize objective_f over [0,1]^M.
struct SlotProblem {
  std::vector<double> weights;
  std::shared_ptr<const DriftConstants> constants;
  double offset = 0.0;

  std::size_t size() const noexcept { return weights.size(); }
};

SlotProblem make_slot_problem(std::span<const Aoi> aoi,
                              std::shared_ptr<const DriftConstants> constants);

// prod_i = prod_{j != i} (1 - p_j coupling(j, i))
std::vector<double> interference_products(std::span<const double> p, const DriftConstants& c);

// q_i = p_i rho_i prod_{j != i} (1 - p_j / (1 + D_ji)): per-slot delivery probability
// under independent Bernoulli(p) scheduling and Rayleigh fading.
std::vector<double> success_prob(std::span<const double> p, const DriftConstants& c);

// Closed-form conditional expectation E[L(S(t+1)) - L(S(t)) | S(t)].
double drift(const NetworkState& state, std::span<const double> p);

// f(p) = -sum_i W_i rho_i p_i prod_{j != i}(1 - p_j coupling(j, i))
double objective_f(std::span<const double> p, const SlotProblem& prob);

std::vector<double> objective_gradient(std::span<const double> p, const SlotProblem& prob);

}  // namespace d2d
