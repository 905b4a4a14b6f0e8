#include "lpgd/updates.hpp"

#include "lpgd/envelope.hpp"
#include "lpgd/solver.hpp"

namespace lpgd {

namespace {

// (grad_w L at a) - (grad_w L at b), divided by tau in gradient form. The
// division keeps the result bit-identical to the directly coded
// finite-difference formulas.
UpdateVector gradient_difference(const PrimalDualSolution& za,
                                 const PrimalDualSolution& zb, double tau,
                                 UpdateForm form, const LearnableMask& mask) {
  const bool div = form == UpdateForm::Gradient;
  UpdateVector u;
  if (mask.c) {
    VectorXd d = za.x - zb.x;
    u.d_c = div ? VectorXd(d / tau) : d;
  }
  if (mask.H) {
    MatrixXd d =
        0.5 * (za.x * za.x.transpose() - zb.x * zb.x.transpose());
    u.d_H = div ? MatrixXd(d / tau) : d;
  }
  if (mask.A) {
    MatrixXd d = za.y * za.x.transpose() - zb.y * zb.x.transpose();
    u.d_A = div ? MatrixXd(d / tau) : d;
  }
  if (mask.b) {
    VectorXd d = za.y - zb.y;
    u.d_b = div ? VectorXd(d / tau) : d;
  }
  return u;
}

UpdateVector one_sided_update(const ProblemParameters& params,
                              const PrimalDualSolution& z_star,
                              const LossSpec& loss, Variant variant,
                              double tau, double rho, double tol,
                              const LearnableMask& mask, UpdateForm form,
                              BackwardDiagnostics* diag) {
  EnvelopeConfig cfg{variant, tau, rho};
  SolverReport prox = proximal_map(params, loss, cfg, z_star, tol);
  if (diag) {
    diag->iterations += prox.iterations;
    diag->solves += 1;
  }
  if (variant == Variant::Lower)
    return gradient_difference(prox.solution, z_star, tau, form, mask);
  return gradient_difference(z_star, prox.solution, tau, form, mask);
}

UpdateVector envelope_update(const ProblemParameters& params,
                             const PrimalDualSolution& z_star,
                             const LossSpec& loss,
                             const EnvelopeConfig& config, double tol,
                             const LearnableMask& mask, UpdateForm form,
                             BackwardDiagnostics* diag) {
  params.validate();
  if (config.tau <= 0.0) throw Error("tau must be positive");
  if (z_star.x.size() != params.primal_dim() ||
      z_star.y.size() != params.dual_dim())
    throw DimensionMismatch("z_star has wrong dimensions");
  switch (config.variant) {
    case Variant::Lower:
    case Variant::Upper:
      return one_sided_update(params, z_star, loss, config.variant,
                              config.tau, config.rho, tol, mask, form, diag);
    case Variant::Average: {
      UpdateVector lower =
          one_sided_update(params, z_star, loss, Variant::Lower, config.tau,
                           config.rho, tol, mask, form, diag);
      UpdateVector upper =
          one_sided_update(params, z_star, loss, Variant::Upper, config.tau,
                           config.rho, tol, mask, form, diag);
      lower += upper;
      lower *= 0.5;
      return lower;
    }
  }
  throw Error("unknown variant");
}

}  // namespace

UpdateVector lagrangian_parameter_gradient(const ProblemParameters& params,
                                           const PrimalDualSolution& z,
                                           const LearnableMask& mask) {
  UpdateVector u;
  if (mask.c) u.d_c = z.x;
  if (mask.H) u.d_H = 0.5 * z.x * z.x.transpose();
  if (mask.A) u.d_A = z.y * z.x.transpose();
  if (mask.b) u.d_b = z.y;
  (void)params;
  return u;
}

UpdateVector lpgd_update(const ProblemParameters& params,
                         const PrimalDualSolution& z_star,
                         const VectorXd& grad_loss,
                         const EnvelopeConfig& config, double tol,
                         const LearnableMask& mask, UpdateForm form,
                         BackwardDiagnostics* diag) {
  return envelope_update(params, z_star, LossSpec::linearized(grad_loss),
                         config, tol, mask, form, diag);
}

UpdateVector lpgd_update(const ProblemParameters& params,
                         const PrimalDualSolution& z_star,
                         const VectorXd& grad_loss,
                         const EnvelopeConfig& config, double tol) {
  return lpgd_update(params, z_star, grad_loss, config, tol,
                     LearnableMask::all_of(params));
}

UpdateVector lppm_update(const ProblemParameters& params,
                         const PrimalDualSolution& z_star,
                         const LossSpec& loss, const EnvelopeConfig& config,
                         double tol, const LearnableMask& mask,
                         UpdateForm form, BackwardDiagnostics* diag) {
  if (loss.kind != LossKind::QuadraticMSE)
    throw UnsupportedLoss("lppm_update expects the exact quadratic loss");
  return envelope_update(params, z_star, loss, config, tol, mask, form, diag);
}

UpdateVector lppm_update(const ProblemParameters& params,
                         const PrimalDualSolution& z_star,
                         const LossSpec& loss, const EnvelopeConfig& config,
                         double tol) {
  return lppm_update(params, z_star, loss, config, tol,
                     LearnableMask::all_of(params));
}

UpdateVector bb_update(const ProblemParameters& params,
                       const PrimalDualSolution& z_star,
                       const VectorXd& grad_loss, double tau, double tol,
                       UpdateForm form) {
  if (params.H)
    throw UnsupportedLoss("bb_update applies to linear programs only");
  return lpgd_update(params, z_star, grad_loss,
                     EnvelopeConfig{Variant::Lower, tau, 0.0}, tol,
                     LearnableMask::all_of(params), form);
}

UpdateVector central_difference_update(const ProblemParameters& params,
                                       const PrimalDualSolution& z_star,
                                       const VectorXd& grad_loss, double tau,
                                       double tol, UpdateForm form) {
  if (!params.H)
    throw UnsupportedLoss(
        "central_difference_update expects a strongly convex regularizer");
  return lpgd_update(params, z_star, grad_loss,
                     EnvelopeConfig{Variant::Average, tau, 0.0}, tol,
                     LearnableMask::all_of(params), form);
}

VectorXd projection_limit_update(const VectorXd& x_star,
                                 const VectorXd& grad_loss, double rho,
                                 const VectorXd& lo, const VectorXd& hi) {
  if (grad_loss.size() != x_star.size() || lo.size() != x_star.size() ||
      hi.size() != x_star.size())
    throw DimensionMismatch("projection_limit_update: length mismatch");
  if (rho <= 0.0) throw Error("rho must be positive");
  VectorXd target = x_star - rho * grad_loss;
  return target.cwiseMax(lo).cwiseMin(hi) - x_star;
}

VectorXd spo_plus_gradient(const ProblemParameters& params,
                           const VectorXd& c_pred, const VectorXd& c_true,
                           double tol) {
  params.validate();
  if (params.H)
    throw UnsupportedLoss("spo_plus_gradient applies to linear programs");
  if (c_pred.size() != params.primal_dim() ||
      c_true.size() != params.primal_dim())
    throw DimensionMismatch("spo_plus_gradient: cost length mismatch");

  ProblemParameters at_true = params;
  at_true.c = c_true;
  SolverReport st = solve(at_true, tol);
  if (!st.converged) throw SolverFailure("SPO+ solve at c_true failed");

  ProblemParameters at_half = params;
  at_half.c = 2.0 * c_pred - c_true;
  SolverReport sh = solve(at_half, tol);
  if (!sh.converged) throw SolverFailure("SPO+ solve at 2c - c_true failed");

  return 2.0 * (st.solution.x - sh.solution.x);
}

VectorXd fenchel_young_gradient(const VectorXd& x_star_regularized,
                                const VectorXd& x_true) {
  if (x_star_regularized.size() != x_true.size())
    throw DimensionMismatch("fenchel_young_gradient: length mismatch");
  return x_true - x_star_regularized;
}

}  // namespace lpgd
