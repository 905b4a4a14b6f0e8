#pragma once

#include "lpgd/types.hpp"

#include <vector>

namespace lpgd {

// Linearized optimality system of the forward problem at z*, with the active
// box coordinates folded in as equality rows:
//
//   [ H + (1/rho) I   Atil^T ]        Atil = [ A ; rows of active bounds ]
//   [ Atil            0      ]
//
// rho = 0 omits the regularizer.
struct KktSystem {
  MatrixXd jacobian;
  std::vector<Eigen::Index> active_lower, active_upper;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  double rho = 0.0;

  Eigen::Index size() const { return jacobian.rows(); }
  // sigma_max / sigma_min; computed on demand.
  double condition_number() const;

  // Contracts the adjoint solution u of  jacobian * u = [grad_loss; 0]
  // against the dF/dw blocks:
  //   d_c = -u_x,  d_b = -u_y,
  //   d_A = y (-u_x)^T + (-u_y) x^T,  d_H = sym((-u_x) x^T).
  UpdateVector apply_adjoint(const PrimalDualSolution& z_star,
                             const VectorXd& u,
                             const LearnableMask& mask) const;
};

KktSystem build_kkt_system(const ProblemParameters& params,
                           const PrimalDualSolution& z_star, double rho,
                           double tol);

// True gradient of the loss through the optimization layer via the
// transposed linearized KKT system, assembled into parameter blocks.
//
// Throws SingularSystem when the (possibly regularized) system cannot be
// solved reliably (the message suggests rho > 0) and
// StrictComplementarityViolated when rho = 0 and an active coordinate
// carries a vanishing multiplier.
UpdateVector implicit_gradient_qp(const ProblemParameters& params,
                                  const PrimalDualSolution& z_star,
                                  const VectorXd& grad_loss, double rho,
                                  double tol, const LearnableMask& mask);

UpdateVector implicit_gradient_qp(const ProblemParameters& params,
                                  const PrimalDualSolution& z_star,
                                  const VectorXd& grad_loss, double rho,
                                  double tol);

}  // namespace lpgd
