#pragma once

#include "lpgd/types.hpp"

namespace lpgd {

// Value of the Lagrangian
//   L(x, y, w) = 1/2 x^T H x + <x, c> + <y, A x + b> - 1/2 y^T dual_H y
// (the last term only exists on negated-and-swapped problems).
double lagrangian(const ProblemParameters& p, const VectorXd& x,
                  const VectorXd& y);

// 1/2 x^T H x + <x, c>, the y-maximized Lagrangian on the equality manifold.
double objective_value(const ProblemParameters& p, const VectorXd& x);

// ||A x + b||_inf plus the box violation of x.
double primal_residual(const ProblemParameters& p, const VectorXd& x);

// Projected stationarity residual
//   || x - P_[lo,hi](x - (H x + c + A^T y)) ||_inf.
// Zero exactly at saddle points; recomputable from (x, y, params) alone.
double stationarity_residual(const ProblemParameters& p, const VectorXd& x,
                             const VectorXd& y);

// Negate the Lagrangian and swap the primal and dual blocks. Applying the
// transform twice reproduces the input exactly.
ProblemParameters dual_swap(const ProblemParameters& p);

// Forward oracle. Operator-splitting iterations on the box-constrained
// quadratic program followed by an active-set polish step. On problems with a
// dual-side box (see dual_loss_reduction) the equivalent standard problem is
// solved internally and the report is mapped back.
//
// Throws InfeasibleProblem when the primal residual stagnates above the
// tolerance while the duals diverge. When the iteration limit is reached the
// best iterate is returned with converged = false.
SolverReport solve(const ProblemParameters& params, double tol,
                   const std::optional<PrimalDualSolution>& warm_start =
                       std::nullopt,
                   int max_iters = 20000);

// Exact optimum of a small LP by enumerating vertices of the box intersected
// with the equality subspace. Ties are broken by the lexicographically
// smallest x. Requires H absent, n <= 16 and m <= 4.
PrimalDualSolution solve_exact_lp(const ProblemParameters& params);

}  // namespace lpgd
