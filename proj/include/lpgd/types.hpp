#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

namespace lpgd {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};
struct InfeasibleProblem : Error {
  using Error::Error;
};
struct SolverFailure : Error {
  using Error::Error;
};
// Thrown by the exact enumeration oracle when the instance exceeds its bounds.
struct TooLarge : Error {
  using Error::Error;
};
// Thrown by the exact enumeration oracle when no box point meets the
// equality constraints.
struct ExactInfeasible : Error {
  using Error::Error;
};
struct NoDuals : Error {
  using Error::Error;
};
struct UnsupportedLoss : Error {
  using Error::Error;
};
struct SingularSystem : Error {
  using Error::Error;
};
struct StrictComplementarityViolated : Error {
  using Error::Error;
};
// Distinguished error for an unbounded Lagrangian divergence. Kept as an
// exception rather than a float infinity so it cannot leak into arithmetic.
struct InfiniteDivergence : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Problem data
// ---------------------------------------------------------------------------

// Parameters w = (c, v) of the embedded saddle-point program
//
//   min_{x in [lo,hi]} max_y  1/2 x^T H x + <x, c> + <y, A x + b>
//
// with H optional (absent means a linear program) and y the multipliers of
// the equality constraints A x + b = 0. The box is part of the feasible set
// and carries no multipliers of its own.
//
// The negated-and-swapped form produced by dual_loss_reduction is stored in
// the same struct: there the primal block is the former dual block, the box
// moves to `dual_lo`/`dual_hi` and a quadratic term on the (new) dual side is
// kept in `dual_H`. Standard forward problems never populate those fields.
struct ProblemParameters {
  VectorXd c;               // linear primal cost, length n
  std::optional<MatrixXd> H;  // symmetric PSD quadratic term, n x n
  MatrixXd A;               // equality coefficients, m x n (m may be 0)
  VectorXd b;               // equality offsets, length m
  VectorXd lo, hi;          // primal box

  // Populated only on problems produced by dual_loss_reduction.
  std::optional<MatrixXd> dual_H;  // quadratic term on the dual block
  VectorXd dual_lo, dual_hi;       // finite box on the dual block

  Eigen::Index primal_dim() const { return c.size(); }
  Eigen::Index dual_dim() const { return b.size(); }
  bool has_dual_box() const { return dual_lo.size() > 0; }

  // Throws DimensionMismatch / Error if the invariants do not hold.
  void validate() const;
};

// z = (x, y): primal point and equality-constraint duals.
struct PrimalDualSolution {
  VectorXd x;
  VectorXd y;
};

struct SolverReport {
  PrimalDualSolution solution;
  double objective = 0.0;       // saddle value L(x*, y*, w)
  double primal_residual = 0.0; // ||A x + b||_inf plus box violation
  double dual_residual = 0.0;   // projected stationarity residual, inf-norm
  int iterations = 0;
  bool warm_started = false;
  bool converged = false;
};

// ---------------------------------------------------------------------------
// Envelope configuration and losses
// ---------------------------------------------------------------------------

enum class Variant { Lower, Upper, Average };

struct EnvelopeConfig {
  Variant variant = Variant::Lower;
  double tau = 1.0;  // temperature, > 0
  double rho = 0.0;  // augmentation strength, >= 0; 0 disables augmentation
};

enum class LossKind {
  LinearizedAtSolution,  // payload is the loss gradient at x*
  QuadraticMSE           // payload is the target x_true
};

// For QuadraticMSE the loss is weight * ||x - x_true||_2^2; the weight lets
// callers express per-dimension averaging without rescaling tau.
struct LossSpec {
  LossKind kind = LossKind::LinearizedAtSolution;
  VectorXd payload;
  double weight = 1.0;

  static LossSpec linearized(VectorXd grad) {
    return LossSpec{LossKind::LinearizedAtSolution, std::move(grad), 1.0};
  }
  static LossSpec quadratic(VectorXd target, double weight = 1.0) {
    return LossSpec{LossKind::QuadraticMSE, std::move(target), weight};
  }

  double value(const VectorXd& x, const VectorXd& x_star) const;
  VectorXd gradient_at(const VectorXd& x) const;
};

// ---------------------------------------------------------------------------
// Update vectors
// ---------------------------------------------------------------------------

// Which parameter blocks receive updates.
struct LearnableMask {
  bool c = true;
  bool H = false;
  bool A = false;
  bool b = false;

  // Every block the problem actually has.
  static LearnableMask all_of(const ProblemParameters& p) {
    LearnableMask m;
    m.c = true;
    m.H = p.H.has_value();
    m.A = p.dual_dim() > 0;
    m.b = p.dual_dim() > 0;
    return m;
  }
};

enum class UpdateForm {
  Gradient,         // 1/tau * [grad_w L difference]
  FiniteDifference  // tau * gradient form, i.e. the raw difference
};

// Gradient replacement with one block per parameter of w. Blocks are present
// exactly for the learnable parameters.
struct UpdateVector {
  std::optional<VectorXd> d_c;
  std::optional<MatrixXd> d_H;
  std::optional<MatrixXd> d_A;
  std::optional<VectorXd> d_b;

  double inf_norm() const;
  bool all_finite() const;
  UpdateVector& operator*=(double s);
  UpdateVector& operator+=(const UpdateVector& other);
};

// inf-norm of the blockwise difference (absent blocks must match).
double inf_norm_diff(const UpdateVector& a, const UpdateVector& u);

}  // namespace lpgd
