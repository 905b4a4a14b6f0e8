#pragma once

#include "lpgd/types.hpp"

namespace lpgd {

// Parameter gradient of the Lagrangian at z, one block per entry of w:
//   d/dc = x,  d/dH = 1/2 x x^T,  d/dA = y x^T,  d/db = y.
UpdateVector lagrangian_parameter_gradient(const ProblemParameters& params,
                                           const PrimalDualSolution& z,
                                           const LearnableMask& mask);

// Solver effort spent inside a backward update.
struct BackwardDiagnostics {
  int iterations = 0;
  int solves = 0;
};

// Backward update from a linearized loss: the scaled difference of
// Lagrangian parameter gradients between the proximal point and z*. The
// Average variant runs the lower and upper solves sequentially, both
// warm-started at z*. FiniteDifference form drops the 1/tau factor.
UpdateVector lpgd_update(const ProblemParameters& params,
                         const PrimalDualSolution& z_star,
                         const VectorXd& grad_loss,
                         const EnvelopeConfig& config, double tol,
                         const LearnableMask& mask,
                         UpdateForm form = UpdateForm::Gradient,
                         BackwardDiagnostics* diag = nullptr);

UpdateVector lpgd_update(const ProblemParameters& params,
                         const PrimalDualSolution& z_star,
                         const VectorXd& grad_loss,
                         const EnvelopeConfig& config, double tol);

// Same update with the exact quadratic loss absorbed into (H, c).
UpdateVector lppm_update(const ProblemParameters& params,
                         const PrimalDualSolution& z_star,
                         const LossSpec& loss, const EnvelopeConfig& config,
                         double tol, const LearnableMask& mask,
                         UpdateForm form = UpdateForm::Gradient,
                         BackwardDiagnostics* diag = nullptr);

UpdateVector lppm_update(const ProblemParameters& params,
                         const PrimalDualSolution& z_star,
                         const LossSpec& loss, const EnvelopeConfig& config,
                         double tol);

// Single-perturbation update for linear programs,
// 1/tau [x*(c + tau grad) - x*(c)] in the cost block.
UpdateVector bb_update(const ProblemParameters& params,
                       const PrimalDualSolution& z_star,
                       const VectorXd& grad_loss, double tau, double tol,
                       UpdateForm form = UpdateForm::Gradient);

// Two-sided difference 1/(2 tau) [z*(c + tau grad) - z*(c - tau grad)] for
// regularized programs (H present).
UpdateVector central_difference_update(const ProblemParameters& params,
                                       const PrimalDualSolution& z_star,
                                       const VectorXd& grad_loss, double tau,
                                       double tol,
                                       UpdateForm form = UpdateForm::Gradient);

// Large-temperature limit of the augmented update:
// clip(x* - rho grad, lo, hi) - x*.
VectorXd projection_limit_update(const VectorXd& x_star,
                                 const VectorXd& grad_loss, double rho,
                                 const VectorXd& lo, const VectorXd& hi);

// Gradient of the SPO+ loss for a linear program:
// 2 [x*(c_true) - argmin_x <x, 2 c_pred - c_true>].
VectorXd spo_plus_gradient(const ProblemParameters& params,
                           const VectorXd& c_pred, const VectorXd& c_true,
                           double tol);

// Gradient of the Fenchel-Young loss: x_true - x* of the regularized
// program.
VectorXd fenchel_young_gradient(const VectorXd& x_star_regularized,
                                const VectorXd& x_true);

}  // namespace lpgd
