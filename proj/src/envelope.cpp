#include "lpgd/envelope.hpp"

#include "lpgd/parallel.hpp"
#include "lpgd/solver.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdio>

namespace lpgd {

namespace {

SolverReport solve_or_throw(const ProblemParameters& p, double tol,
                            const std::optional<PrimalDualSolution>& warm =
                                std::nullopt) {
  SolverReport r = solve(p, tol, warm);
  if (!r.converged)
    throw SolverFailure("oracle did not reach tolerance " +
                        std::to_string(tol));
  return r;
}

bool is_diagonal(const MatrixXd& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (i != j && M(i, j) != 0.0) return false;
  return true;
}

bool is_psd(const MatrixXd& M) {
  MatrixXd S = 0.5 * (M + M.transpose());
  S.diagonal().array() += 1e-12 + 1e-10 * M.cwiseAbs().maxCoeff();
  return Eigen::LLT<MatrixXd>(S).info() == Eigen::Success;
}

// Exact minimizer of sum_i 1/2 h_i x_i^2 + q_i x_i over the box; h may be
// negative (the Upper proximal map of a quadratic loss), in which case the
// coordinate minimum sits at a bound.
VectorXd separable_box_minimize(const VectorXd& h, const VectorXd& q,
                                const VectorXd& lo, const VectorXd& hi) {
  const Eigen::Index n = q.size();
  VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto value = [&](double v) { return 0.5 * h[i] * v * v + q[i] * v; };
    double best = lo[i];
    double best_val = value(lo[i]);
    if (value(hi[i]) < best_val) {
      best = hi[i];
      best_val = value(hi[i]);
    }
    if (h[i] > 0.0) {
      const double interior = std::clamp(-q[i] / h[i], lo[i], hi[i]);
      if (value(interior) < best_val) best = interior;
    }
    x[i] = best;
  }
  return x;
}

struct PerturbedProblem {
  ProblemParameters params;
  bool needs_separable = false;  // quadratic term went indefinite
  VectorXd sep_h;                // diagonal of the indefinite quadratic
};

// Assembles the perturbed problem the proximal map solves:
//   min_x max_y  L(x, y, w) + s * tau * loss(x) + tau/(2 rho) ||x - x*||^2
// with s = +1 for Lower and -1 for Upper.
PerturbedProblem perturb(const ProblemParameters& p, const LossSpec& loss,
                         Variant variant, double tau, double rho,
                         const VectorXd& x_star) {
  if (variant == Variant::Average)
    throw Error("perturb expects Lower or Upper");
  if (tau <= 0.0) throw Error("tau must be positive");
  if (rho < 0.0) throw Error("rho must be nonnegative");
  const double sign = variant == Variant::Lower ? 1.0 : -1.0;
  const Eigen::Index n = p.primal_dim();

  if (p.has_dual_box()) {
    // The swapped problem only carries linear parameters on its primal
    // block, so only cost perturbations stay representable.
    if (loss.kind != LossKind::LinearizedAtSolution || rho > 0.0)
      throw UnsupportedLoss(
          "dual-side losses support only the linearized form without "
          "augmentation");
  }

  PerturbedProblem out;
  out.params = p;
  double diag_shift = 0.0;
  switch (loss.kind) {
    case LossKind::LinearizedAtSolution:
      if (loss.payload.size() != n)
        throw DimensionMismatch("loss gradient length mismatch");
      out.params.c += sign * tau * loss.weight * loss.payload;
      break;
    case LossKind::QuadraticMSE: {
      if (loss.payload.size() != n)
        throw DimensionMismatch("loss target length mismatch");
      const double k = sign * 2.0 * tau * loss.weight;
      diag_shift += k;
      out.params.c -= k * loss.payload;
      break;
    }
  }
  if (rho > 0.0) {
    diag_shift += tau / rho;
    out.params.c -= (tau / rho) * x_star;
  }
  if (diag_shift != 0.0) {
    MatrixXd H = p.H ? *p.H : MatrixXd::Zero(n, n);
    H.diagonal().array() += diag_shift;
    if (!is_psd(H)) {
      if (p.dual_dim() == 0 && (!p.H || is_diagonal(*p.H))) {
        out.needs_separable = true;
        out.sep_h = H.diagonal();
        out.params.H.reset();
        return out;
      }
      throw UnsupportedLoss(
          "upper proximal map with a quadratic loss is non-convex for this "
          "problem");
    }
    out.params.H = std::move(H);
  }
  return out;
}

double quadratic_term(const EnvelopeConfig& config, const VectorXd& x,
                      const VectorXd& x_star) {
  if (config.rho <= 0.0) return 0.0;
  return (x - x_star).squaredNorm() / (2.0 * config.rho);
}

double one_sided_envelope(const ProblemParameters& params,
                          const LossSpec& loss, const EnvelopeConfig& config,
                          const PrimalDualSolution& z_star,
                          double oracle_tol) {
  const double sign = config.variant == Variant::Lower ? 1.0 : -1.0;
  SolverReport prox = proximal_map(params, loss, config, z_star, oracle_tol);
  const double gap = lagrangian_value(prox.solution, params) -
                     lagrangian_value(z_star, params);
  return loss.value(prox.solution.x, z_star.x) + sign * gap / config.tau +
         sign * quadratic_term(config, prox.solution.x, z_star.x);
}

}  // namespace

double lagrangian_value(const PrimalDualSolution& z,
                        const ProblemParameters& params) {
  return lagrangian(params, z.x, z.y);
}

double lagrangian_divergence(const VectorXd& x,
                             const ProblemParameters& params,
                             double oracle_tol) {
  params.validate();
  if (oracle_tol <= 0.0) throw Error("oracle_tol must be positive");
  if (x.size() != params.primal_dim())
    throw DimensionMismatch("divergence: x has wrong dimension");
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] < params.lo[i] - oracle_tol || x[i] > params.hi[i] + oracle_tol)
      throw Error("divergence: x outside the box");

  double sup = objective_value(params, x);
  const Eigen::Index m = params.dual_dim();
  if (m > 0) {
    const VectorXd r = params.A * x + params.b;
    if (!params.has_dual_box()) {
      if (r.cwiseAbs().maxCoeff() > oracle_tol)
        throw InfiniteDivergence("x violates the equality constraints");
      // sup over the unbounded duals contributes nothing on the manifold.
    } else if (!params.dual_H) {
      for (Eigen::Index i = 0; i < m; ++i)
        sup += std::max(params.dual_lo[i] * r[i], params.dual_hi[i] * r[i]);
    } else {
      // max_d <d, r> - 1/2 d^T dual_H d over the dual box.
      ProblemParameters sub;
      sub.c = -r;
      sub.H = params.dual_H;
      sub.A = MatrixXd::Zero(0, m);
      sub.b = VectorXd(0);
      sub.lo = params.dual_lo;
      sub.hi = params.dual_hi;
      SolverReport s = solve_or_throw(sub, oracle_tol);
      sup -= s.objective;
    }
  }

  SolverReport fwd = solve_or_throw(params, oracle_tol);
  return std::max(0.0, sup - fwd.objective);
}

SolverReport proximal_map(const ProblemParameters& params,
                          const LossSpec& loss, const EnvelopeConfig& config,
                          const PrimalDualSolution& z_star, double tol) {
  params.validate();
  if (config.variant == Variant::Average)
    throw Error("proximal_map is one-sided; call per variant");
  PerturbedProblem per =
      perturb(params, loss, config.variant, config.tau, config.rho, z_star.x);
  if (per.needs_separable) {
    SolverReport rep;
    rep.solution.x = separable_box_minimize(per.sep_h, per.params.c,
                                            per.params.lo, per.params.hi);
    rep.solution.y = VectorXd(0);
    rep.objective = 0.5 * rep.solution.x.dot(
                        per.sep_h.cwiseProduct(rep.solution.x)) +
                    per.params.c.dot(rep.solution.x);
    rep.iterations = 0;
    rep.warm_started = false;
    rep.converged = true;
    return rep;
  }
  SolverReport rep = solve(per.params, tol, z_star);
  if (!rep.converged)
    throw SolverFailure("proximal solve did not reach tolerance");
  return rep;
}

double envelope_value_at(const ProblemParameters& params,
                         const LossSpec& loss, const EnvelopeConfig& config,
                         const PrimalDualSolution& z_star,
                         double oracle_tol) {
  switch (config.variant) {
    case Variant::Lower:
    case Variant::Upper:
      return one_sided_envelope(params, loss, config, z_star, oracle_tol);
    case Variant::Average: {
      EnvelopeConfig lower = config, upper = config;
      lower.variant = Variant::Lower;
      upper.variant = Variant::Upper;
      return 0.5 * (one_sided_envelope(params, loss, lower, z_star,
                                       oracle_tol) +
                    one_sided_envelope(params, loss, upper, z_star,
                                       oracle_tol));
    }
  }
  throw Error("unknown variant");
}

double envelope_value(const ProblemParameters& params, const LossSpec& loss,
                      const EnvelopeConfig& config, double oracle_tol) {
  SolverReport fwd = solve_or_throw(params, oracle_tol);
  return envelope_value_at(params, loss, config, fwd.solution, oracle_tol);
}

std::string config_id(const EnvelopeConfig& config) {
  const char* name = config.variant == Variant::Lower   ? "lower"
                     : config.variant == Variant::Upper ? "upper"
                                                        : "average";
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s_tau%g_rho%g", name, config.tau,
                config.rho);
  return buf;
}

SweepTable envelope_sweep(const ProblemParameters& base_params,
                          const VectorXd& direction, double t_min,
                          double t_max, int steps, const LossSpec& loss,
                          const std::vector<EnvelopeConfig>& configs,
                          double oracle_tol, SweepLossMode mode,
                          int workers) {
  base_params.validate();
  if (steps < 2) throw Error("sweep needs at least 2 steps");
  if (direction.size() != base_params.primal_dim())
    throw DimensionMismatch("sweep direction length mismatch");
  if (loss.kind != LossKind::QuadraticMSE)
    throw UnsupportedLoss("sweeps require a quadratic loss to re-linearize");

  SweepTable table;
  table.t.resize(steps);
  table.true_loss.resize(steps);
  table.config_ids.reserve(configs.size());
  for (const auto& cfg : configs) table.config_ids.push_back(config_id(cfg));
  table.envelope.assign(configs.size(), std::vector<double>(steps, 0.0));

  std::vector<std::exception_ptr> errors(steps);
  parallel_for(steps, workers, [&](std::ptrdiff_t s) {
    try {
      const double t =
          t_min + (t_max - t_min) * static_cast<double>(s) /
                      static_cast<double>(steps - 1);
      ProblemParameters p = base_params;
      p.c += t * direction;
      SolverReport fwd = solve_or_throw(p, oracle_tol);
      const VectorXd& x_star = fwd.solution.x;
      const double true_loss = loss.value(x_star, x_star);
      table.t[s] = t;
      table.true_loss[s] = true_loss;
      for (std::size_t k = 0; k < configs.size(); ++k) {
        double v;
        if (mode == SweepLossMode::Exact) {
          v = envelope_value_at(p, loss, configs[k], fwd.solution,
                                oracle_tol);
        } else {
          LossSpec lin = LossSpec::linearized(loss.gradient_at(x_star));
          v = true_loss + envelope_value_at(p, lin, configs[k], fwd.solution,
                                            oracle_tol);
        }
        table.envelope[k][s] = v;
      }
    } catch (...) {
      errors[s] = std::current_exception();
    }
  });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return table;
}

ProblemParameters dual_loss_reduction(const ProblemParameters& params) {
  params.validate();
  if (params.dual_dim() == 0)
    throw NoDuals("problem has no dual variables");
  if (params.has_dual_box() && params.H)
    throw UnsupportedLoss(
        "re-swapping a perturbed dual problem with a quadratic primal term "
        "is not representable");
  return dual_swap(params);
}

}  // namespace lpgd
