#pragma once

#include "lpgd/types.hpp"

#include <string>
#include <vector>

namespace lpgd {

// L(x, y, w); see solver.hpp for the exact form.
double lagrangian_value(const PrimalDualSolution& z,
                        const ProblemParameters& params);

// sup_y L(x, y, w) - L*(w). Nonnegative, zero exactly at optimal x. Throws
// InfiniteDivergence when x violates the equality constraints by more than
// oracle_tol (the sup over the unbounded duals is +infinity there).
double lagrangian_divergence(const VectorXd& x,
                             const ProblemParameters& params,
                             double oracle_tol);

// The L-proximal map: re-solves the forward problem at perturbed parameters,
// warm-started at z_star.
//
// Linearized loss: cost becomes c + tau*grad (Lower) or c - tau*grad (Upper).
// Quadratic loss: tau * weight * ||x - target||^2 is absorbed into (H, c).
// Augmentation (rho > 0): tau/(2 rho) * ||x - x_star||^2 is added, so the
// envelope objective carries 1/(2 rho) at every temperature.
//
// The Upper variant with a quadratic loss is non-convex; it is solved exactly
// when the problem separates per coordinate (no equalities, diagonal or
// absent H), and rejected with UnsupportedLoss otherwise.
SolverReport proximal_map(const ProblemParameters& params,
                          const LossSpec& loss, const EnvelopeConfig& config,
                          const PrimalDualSolution& z_star, double tol);

// Envelope of the loss at the given parameters. Linearized losses are
// reported relative to the anchor, i.e. l(x*) := 0.
double envelope_value(const ProblemParameters& params, const LossSpec& loss,
                      const EnvelopeConfig& config, double oracle_tol);

// Same, reusing an existing tol-accurate forward solution.
double envelope_value_at(const ProblemParameters& params,
                         const LossSpec& loss, const EnvelopeConfig& config,
                         const PrimalDualSolution& z_star, double oracle_tol);

// Column identifier "{variant}_tau{tau}_rho{rho}".
std::string config_id(const EnvelopeConfig& config);

enum class SweepLossMode {
  Linearized,  // re-linearize the loss at each step's solution
  Exact        // use the quadratic loss directly
};

struct SweepTable {
  std::vector<double> t;
  std::vector<double> true_loss;
  std::vector<std::string> config_ids;
  // envelope[k][s] is the value of configs[k] at step s. Linearized columns
  // are reported in absolute terms: true_loss + anchored envelope.
  std::vector<std::vector<double>> envelope;
};

// 1-D sweep through cost space: c <- c + t * direction for `steps` points of
// [t_min, t_max]. The loss must be quadratic so that it can be re-linearized
// at each step's solution. Steps are independent and run on `workers`
// threads.
SweepTable envelope_sweep(const ProblemParameters& base_params,
                          const VectorXd& direction, double t_min,
                          double t_max, int steps, const LossSpec& loss,
                          const std::vector<EnvelopeConfig>& configs,
                          double oracle_tol,
                          SweepLossMode mode = SweepLossMode::Linearized,
                          int workers = 1);

// Negate the Lagrangian and swap the primal and dual blocks, producing a
// problem whose primal optimum is y*(w). All linearized-loss envelope
// machinery applies to it, which covers losses on the duals.
ProblemParameters dual_loss_reduction(const ProblemParameters& params);

}  // namespace lpgd
