#pragma once

// Primal-dual iterations for the flux form of the Earth Mover's Distance.
//
//   minimize  cost(m)  subject to  div(m) + p1 - p0 = 0
//
// with cost = sum_i |m_i|_2 (Euclidean ground metric) or sum_{i,v} |m_iv|
// plus an optional (eps/2)|m|_2^2 term (Manhattan ground metric). Each step
// is a proximal descent in m followed by an ascent in the multiplier phi
// evaluated at the extrapolated flux m_new + theta*(m_new - m_old).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emd/lattice.hpp"

namespace emd {

enum class Metric { L1, L2 };

std::string_view to_string(Metric metric);
/// Accepts "l1"/"l2" (case-insensitive). Throws ConfigurationError.
Metric parse_metric(std::string_view text);

struct SolverConfig {
  Metric metric = Metric::L2;
  double mu = 0.025;     // primal step
  double tau = 0.025;    // dual step
  double theta = 1.0;    // extrapolation, in [0, 1]
  double epsilon = 0.01; // quadratic regularization, L1 only
  double tol = 1e-5;     // threshold on the mean divergence residual
  std::size_t max_iters = 100000;
  std::size_t residual_check_interval = 1;

  /// Reject (instead of warn about) steps with tau*mu*|K|^2 >= 1.
  bool strict_steps = false;
  /// Opt in to epsilon == 0 under L1, where the minimizer is not unique.
  bool allow_nonunique = false;
  /// Worker threads for the per-vertex maps. Output does not depend on it.
  unsigned threads = 1;

  /// Throws ConfigurationError on out-of-range fields.
  void validate() const;
};

/// Grid-aware step for both mu and tau: dx/4 for d <= 3 (0.025 at
/// dx = 0.1, giving tau*mu*operator_norm_bound = d/4), shrunk for d > 3 so
/// that the product stays at 1/2.
double scaled_step(const LatticeGrid& grid);

struct ResidualSample {
  std::size_t iteration;
  double residual;
};

struct SolveReport {
  SolveReport(FluxField m, DualPotential phi)
      : flux(std::move(m)), potential(std::move(phi)) {}

  FluxField flux;
  DualPotential potential;
  double distance = 0.0;
  double regularized_distance = 0.0;
  std::size_t iterations = 0;
  std::vector<ResidualSample> residual_history;
  bool converged = false;
  /// Wall-clock seconds spent in the iteration loop.
  double loop_seconds = 0.0;
  /// Non-fatal diagnostics (step-size condition, epsilon == 0).
  std::vector<std::string> warnings;

  double final_residual() const { return residual_history.back().residual; }
};

/// sign(y) * max(|y| - alpha, 0); exactly 0 when |y| == alpha.
double shrink(double y, double alpha);

/// (y/|y|_2) * max(|y|_2 - alpha, 0); zero vector when |y|_2 <= alpha.
std::vector<double> shrink2(std::span<const double> y, double alpha);

/// In-place variant used by the solver loop.
void shrink2_in_place(std::span<double> y, double alpha);

FluxField primal_update_l2(const FluxField& m_prev, const DualPotential& phi,
                           double mu);
FluxField primal_update_l1(const FluxField& m_prev, const DualPotential& phi,
                           double mu, double epsilon);

/// phi + tau * (div(m_next + theta*(m_next - m_prev)) + p1 - p0)
DualPotential dual_update(const DualPotential& phi_prev,
                          const FluxField& m_next, const FluxField& m_prev,
                          const DensityField& p0, const DensityField& p1,
                          double tau, double theta);

/// L2: sum_i |m_i|_2.  L1: sum_{i,v} |m_iv|.
double cost(const FluxField& m, Metric metric);

/// Upper bound 4d/dx^2 on the squared operator norm of the divergence.
double operator_norm_bound(const LatticeGrid& grid);

SolveReport solve(const DensityField& p0, const DensityField& p1,
                  const SolverConfig& config,
                  std::optional<FluxField> m0 = std::nullopt,
                  std::optional<DualPotential> phi0 = std::nullopt);

}  // namespace emd
