#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "d2d/drift.hpp"
#include "d2d/random.hpp"

namespace d2d {

struct SolverConfig {
  int max_iters = 500;
  double step_size = 1.0;
  int restarts = 8;
  double tolerance = 1e-9;
  std::size_t vertex_cap = 20;

  // Throws ConfigError unless all fields are positive and vertex_cap <= 24.
  void validate() const;
};

inline constexpr std::size_t kMaxVertexCap = 24;

enum class SolverTag { vertex_exact, projected_gradient, mpnn };

std::string_view to_string(SolverTag tag) noexcept;

struct SlotSolution {
  std::vector<double> p;
  double value = 0.0;
  SolverTag tag = SolverTag::vertex_exact;
};

// Exact minimizer of objective_f over [0,1]^M. f is affine in each coordinate, so some
// vertex is optimal; all 2^M are enumerated depth-first and ties go to the
// lexicographically smallest binary vector. Throws CapabilityError when M > vertex_cap.
SlotSolution solve_vertex(const SlotProblem& prob, std::size_t vertex_cap = SolverConfig{}.vertex_cap);

SlotSolution solve_projected_gradient(const SlotProblem& prob, const SolverConfig& cfg, Rng& rng);

// Generic box-constrained descent shared by the slot solver and the stationary baselines.
struct BoxObjective {
  std::function<double(std::span<const double>)> value;
  std::function<std::vector<double>(std::span<const double>)> gradient;
};

struct DescentResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
};

// x <- clip(x - eta * grad, lower, upper). A rejected step halves eta; an accepted one
// doubles it back up to the initial step. Stops when the accepted improvement drops below
// tolerance * max(1, |f|), the projected step stalls, or max_iters is reached. Accepted
// iterates strictly decrease f.
DescentResult projected_descent(const BoxObjective& objective, std::vector<double> start,
                                double lower, double upper, double initial_step, int max_iters,
                                double tolerance, std::vector<double>* trace = nullptr);

// Runs projected_descent from `restarts` uniform starts in [lower, upper]^M and keeps the
// best value, breaking exact ties toward the lexicographically smaller point.
DescentResult multistart_descent(const BoxObjective& objective, std::size_t dim, double lower,
                                 double upper, double initial_step, const SolverConfig& cfg,
                                 Rng& rng);

}  // namespace d2d
