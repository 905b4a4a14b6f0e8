#include "lpgd/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace lpgd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

VectorXd clamp_box(const VectorXd& v, const VectorXd& lo, const VectorXd& hi) {
  return v.cwiseMax(lo).cwiseMin(hi);
}

// H x + c + A^T y, the primal gradient of the Lagrangian.
VectorXd primal_gradient(const ProblemParameters& p, const VectorXd& x,
                         const VectorXd& y) {
  VectorXd g = p.c;
  if (p.H) g += (*p.H) * x;
  if (p.dual_dim() > 0) g += p.A.transpose() * y;
  return g;
}

struct Residuals {
  double primal = kInf;
  double dual = kInf;
  double worst() const { return std::max(primal, dual); }
};

Residuals report_residuals(const ProblemParameters& p, const VectorXd& x,
                           const VectorXd& y) {
  Residuals r;
  r.primal = primal_residual(p, x);
  r.dual = stationarity_residual(p, x, y);
  return r;
}

// --- Active-set polish -----------------------------------------------------
//
// Guess the active box coordinates from the iterate, pin them to their bounds
// and solve the remaining equality-constrained KKT system exactly. The
// candidate is accepted only if it improves the residuals.
struct PolishResult {
  bool ok = false;
  double kkt_residual = kInf;
  VectorXd x, y;
  std::vector<Eigen::Index> free_idx;
};

// Pins x to the bounds on the given active set and solves the remaining
// equality KKT system in correction form around the iterate: with
// x_F = x_in,F + d,
//   [ H_FF  A_F^T ] [d]   [ -(H x + c)_F ]
//   [ A_F   0     ] [y] = [ -(A x + b)   ]
// so a rank-deficient system lands on the face nearest the iterate rather
// than nearest the origin. An inconsistent system (typical for degenerate
// programs with a wrong active-set guess) keeps its least-squares residual
// in kkt_residual.
PolishResult solve_pinned(const ProblemParameters& p, const VectorXd& y_in,
                          double tol,
                          const std::vector<Eigen::Index>& free_idx,
                          const VectorXd& pinned_x) {
  PolishResult out;
  const Eigen::Index m = p.dual_dim();
  const Eigen::Index f = static_cast<Eigen::Index>(free_idx.size());
  VectorXd x = pinned_x;
  VectorXd y = y_in;
  out.free_idx = free_idx;

  if (f > 0) {
    MatrixXd K = MatrixXd::Zero(f + m, f + m);
    VectorXd rhs(f + m);
    VectorXd grad = p.c;
    if (p.H) grad += (*p.H) * x;
    for (Eigen::Index a = 0; a < f; ++a) {
      const Eigen::Index i = free_idx[a];
      if (p.H)
        for (Eigen::Index b2 = 0; b2 < f; ++b2)
          K(a, b2) = (*p.H)(i, free_idx[b2]);
      for (Eigen::Index k = 0; k < m; ++k) {
        K(a, f + k) = p.A(k, i);
        K(f + k, a) = p.A(k, i);
      }
      rhs[a] = -grad[i];
    }
    if (m > 0) rhs.tail(m) = -(p.A * x + p.b);
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(K);
    VectorXd sol = cod.solve(rhs);
    out.kkt_residual = (K * sol - rhs).cwiseAbs().maxCoeff() /
                       (1.0 + rhs.cwiseAbs().maxCoeff());
    for (Eigen::Index a = 0; a < f; ++a) x[free_idx[a]] += sol[a];
    y = sol.tail(m);
    for (Eigen::Index a = 0; a < f; ++a) {
      const Eigen::Index i = free_idx[a];
      if (x[i] < p.lo[i] - tol || x[i] > p.hi[i] + tol) return out;
    }
  } else {
    out.kkt_residual = 0.0;
    y = y_in;
  }

  out.ok = true;
  out.x = std::move(x);
  out.y = std::move(y);
  return out;
}

PolishResult polish(const ProblemParameters& p, const VectorXd& x_in,
                    const VectorXd& y_in, double tol, double delta) {
  const Eigen::Index n = p.primal_dim();
  std::vector<Eigen::Index> free_idx;
  VectorXd x = x_in;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(p.lo[i]) && x_in[i] - p.lo[i] <= delta)
      x[i] = p.lo[i];
    else if (std::isfinite(p.hi[i]) && p.hi[i] - x_in[i] <= delta)
      x[i] = p.hi[i];
    else
      free_idx.push_back(i);
  }
  PolishResult out = solve_pinned(p, y_in, tol, free_idx, x);
  if (out.ok && out.kkt_residual > 1e-8) out.ok = false;
  return out;
}

// Try active sets at several proximity thresholds, from the tolerance up to
// fixed coarse rungs; degenerate tails often sit a mid-sized distance from
// the optimal face. Wrong guesses are harmless since candidates must improve
// the residuals to be accepted. Returns true when the accepted iterate meets
// the tolerance.
bool polish_ladder(const ProblemParameters& p, double tol, VectorXd& best_x,
                   VectorXd& best_y, Residuals& best_r) {
  const double scale = 1.0 + best_x.cwiseAbs().maxCoeff();
  double deltas[] = {10.0 * tol * scale,       1e3 * tol * scale,
                     10.0 * best_r.worst(),    100.0 * best_r.worst(),
                     1e-4 * scale,             1e-3 * scale,
                     1e-2 * scale};
  std::sort(std::begin(deltas), std::end(deltas));
  auto accept = [&](const PolishResult& pol) {
    if (!pol.ok) return false;
    Residuals rp = report_residuals(p, pol.x, pol.y);
    if (rp.worst() < best_r.worst()) {
      best_r = rp;
      best_x = pol.x;
      best_y = pol.y;
    }
    return best_r.worst() <= tol;
  };
  for (double delta : deltas)
    if (accept(polish(p, best_x, best_y, tol, delta))) return true;
  return best_r.worst() <= tol;
}

// --- Operator-splitting core ----------------------------------------------

struct AdmmWork {
  // Scaled problem data (objective divided by obj_scale).
  MatrixXd Hs;      // n x n, zero when H absent
  VectorXd cs;      // n
  double obj_scale = 1.0;
  double sigma = 1e-6;
  double rho_box = 0.1;
  double rho_eq = 100.0;
  Eigen::LLT<MatrixXd> llt;

  void factor(const ProblemParameters& p) {
    MatrixXd K = Hs;
    K.diagonal().array() += sigma + rho_box;
    if (p.dual_dim() > 0) K.noalias() += rho_eq * p.A.transpose() * p.A;
    llt.compute(K);
    if (llt.info() != Eigen::Success)
      throw SolverFailure("splitting system factorization failed");
  }
};

struct AdmmOutcome {
  VectorXd x, y;
  Residuals residuals;
  int iterations = 0;
  bool converged = false;
};

AdmmOutcome admm_phase(const ProblemParameters& p, double tol,
                       const std::optional<PrimalDualSolution>& warm,
                       int max_iters) {
  const Eigen::Index n = p.primal_dim();
  const Eigen::Index m = p.dual_dim();

  AdmmWork w;
  w.obj_scale = std::max(1.0, p.c.cwiseAbs().maxCoeff());
  if (p.H) w.obj_scale = std::max(w.obj_scale, p.H->cwiseAbs().maxCoeff());
  w.Hs = p.H ? MatrixXd(*p.H / w.obj_scale) : MatrixXd::Zero(n, n);
  w.cs = p.c / w.obj_scale;
  w.rho_eq = 1e3 * w.rho_box;
  w.factor(p);

  // Iterates: x in R^n, split variable z and multiplier nu over the stacked
  // constraint rows [A; I] (equality rows first, then box rows).
  VectorXd x, z_eq(m), z_box, nu_eq, nu_box;
  if (warm) {
    x = warm->x;
    nu_eq = warm->y / w.obj_scale;
  } else {
    x = clamp_box(VectorXd::Zero(n), p.lo, p.hi);
    nu_eq = VectorXd::Zero(m);
  }
  z_eq = (m > 0) ? VectorXd(-p.b) : VectorXd(0);
  z_box = clamp_box(x, p.lo, p.hi);
  nu_box = VectorXd::Zero(n);
  if (warm) {
    // Rebuild box multipliers so that a near-optimal warm start also starts
    // with a near-zero splitting dual residual.
    VectorXd g = w.Hs * x + w.cs;
    if (m > 0) g += p.A.transpose() * nu_eq;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lo = std::isfinite(p.lo[i]) && x[i] - p.lo[i] <= 1e-9;
      const bool at_hi = std::isfinite(p.hi[i]) && p.hi[i] - x[i] <= 1e-9;
      if ((at_lo && -g[i] <= 0.0) || (at_hi && -g[i] >= 0.0)) nu_box[i] = -g[i];
    }
  }

  const double alpha = 1.6;
  VectorXd best_x = x, best_y = nu_eq * w.obj_scale;
  Residuals best_r = report_residuals(p, best_x, best_y);

  double stagnation_primal = kInf;
  int stagnation_count = 0;
  double stall_mark = kInf;
  int stall_check = 750;
  // Penalty adaptation happens at doubling intervals and freezes once the
  // residuals get close, so the tail contraction is not disturbed.
  int next_adapt = 100;
  int adapt_gap = 100;
  // Polish attempts start early (warm starts often sit on the optimal face
  // already) and back off to every 250 iterations.
  int next_polish = 10;
  int polish_gap = 40;

  int iter = 0;
  for (; iter < max_iters; ++iter) {
    // x update through the condensed SPD system.
    VectorXd rhs = w.sigma * x - w.cs + (w.rho_box * z_box - nu_box);
    if (m > 0)
      rhs.noalias() += p.A.transpose() * (w.rho_eq * z_eq - nu_eq);
    VectorXd x_tilde = w.llt.solve(rhs);

    VectorXd zt_eq = (m > 0) ? VectorXd(p.A * x_tilde) : VectorXd(0);
    const VectorXd& zt_box = x_tilde;

    x = alpha * x_tilde + (1.0 - alpha) * x;

    if (m > 0) {
      VectorXd v = alpha * zt_eq + (1.0 - alpha) * z_eq;
      VectorXd z_new = VectorXd(-p.b);  // projection onto the equality rows
      nu_eq += w.rho_eq * (v - z_new);
      z_eq = std::move(z_new);
    }
    {
      VectorXd v = alpha * zt_box + (1.0 - alpha) * z_box;
      VectorXd z_new = clamp_box(v + nu_box / w.rho_box, p.lo, p.hi);
      nu_box += w.rho_box * (v - z_new);
      z_box = std::move(z_new);
    }

    VectorXd y_unscaled = nu_eq * w.obj_scale;
    Residuals r = report_residuals(p, x, y_unscaled);
    if (r.worst() < best_r.worst()) {
      best_r = r;
      best_x = x;
      best_y = y_unscaled;
    }
    if (r.worst() <= tol) {
      ++iter;
      break;
    }

    // Hand control back when the phase stops contracting; the caller has
    // better endgames than a stalled splitting iteration.
    if (iter + 1 == stall_check) {
      stall_check += 750;
      if (best_r.worst() > 0.7 * stall_mark) {
        ++iter;
        break;
      }
      stall_mark = best_r.worst();
    }

    // Infeasibility heuristic: primal residual stagnating well above
    // tolerance over a 100-iteration window while the duals blow up. Each
    // stagnant window raises the feasibility penalty, which on infeasible
    // instances drives the dual divergence the 1e6 gate looks for.
    if (r.primal < stagnation_primal * (1.0 - 1e-6) - 1e-14) {
      stagnation_primal = r.primal;
      stagnation_count = 0;
    } else if (++stagnation_count >= 100 &&
               r.primal > std::max(1e-3, 1e3 * tol)) {
      if (y_unscaled.cwiseAbs().maxCoeff() > 1e6)
        throw InfeasibleProblem("primal residual stagnated at " +
                                std::to_string(r.primal) +
                                " with diverging duals");
      w.rho_box = std::min(w.rho_box * 10.0, 1e7);
      w.rho_eq = 1e3 * w.rho_box;
      w.factor(p);
      stagnation_count = 0;
    }

    // Periodically try to snap onto the optimal face; degenerate programs
    // often reach it long before the splitting residuals do.
    if (iter + 1 == next_polish) {
      polish_gap = std::min(2 * polish_gap, 250);
      next_polish += polish_gap;
      if (polish_ladder(p, tol, best_x, best_y, best_r)) {
        ++iter;
        break;
      }
    }

    // Rebalance the penalty between feasibility and stationarity using the
    // internal splitting residuals in relative form.
    if (iter + 1 == next_adapt && best_r.worst() > 100.0 * tol) {
      adapt_gap *= 2;
      next_adapt += adapt_gap;
      VectorXd mx_eq = (m > 0) ? VectorXd(p.A * x) : VectorXd(0);
      double rp_int = 0.0, mx_norm = 0.0, z_norm = 0.0;
      if (m > 0) {
        rp_int = (mx_eq - z_eq).cwiseAbs().maxCoeff();
        mx_norm = mx_eq.cwiseAbs().maxCoeff();
        z_norm = z_eq.cwiseAbs().maxCoeff();
      }
      rp_int = std::max(rp_int, (x - z_box).cwiseAbs().maxCoeff());
      mx_norm = std::max(mx_norm, x.cwiseAbs().maxCoeff());
      z_norm = std::max(z_norm, z_box.cwiseAbs().maxCoeff());
      VectorXd grad = w.Hs * x + w.cs + nu_box;
      if (m > 0) grad.noalias() += p.A.transpose() * nu_eq;
      const double rd_int = grad.cwiseAbs().maxCoeff();
      const double rd_scale =
          std::max({(w.Hs * x).cwiseAbs().maxCoeff(),
                    w.cs.cwiseAbs().maxCoeff(), nu_box.cwiseAbs().maxCoeff(),
                    1e-10});
      const double rp_rel = rp_int / std::max({mx_norm, z_norm, 1e-10});
      const double rd_rel = rd_int / rd_scale;
      const double ratio =
          std::clamp(std::sqrt(rp_rel / std::max(rd_rel, 1e-16)), 0.1, 10.0);
      const double scaled = std::clamp(w.rho_box * ratio, 1e-6, 1e6);
      if (scaled > 5.0 * w.rho_box || scaled < w.rho_box / 5.0) {
        w.rho_box = scaled;
        w.rho_eq = 1e3 * scaled;
        w.factor(p);
      }
    }
  }

  // Snap to the exact optimum of the guessed active set when possible.
  polish_ladder(p, tol, best_x, best_y, best_r);

  AdmmOutcome out;
  out.x = std::move(best_x);
  out.y = std::move(best_y);
  out.residuals = best_r;
  out.iterations = iter;
  out.converged = best_r.worst() <= tol;
  return out;
}

SolverReport solve_standard(const ProblemParameters& p, double tol,
                            const std::optional<PrimalDualSolution>& warm,
                            int max_iters) {
  p.validate();
  if (tol <= 0.0) throw Error("tol must be positive");
  if (max_iters <= 0) throw Error("max_iters must be positive");
  if (warm) {
    if (warm->x.size() != p.primal_dim() || warm->y.size() != p.dual_dim())
      throw DimensionMismatch("warm start has wrong dimensions");
  }

  SolverReport rep;
  rep.warm_started = warm.has_value();

  // A warm start that already satisfies the residual contract is returned
  // as-is; the perturbed re-solves of the backward pass hit this path when
  // the perturbation vanishes.
  if (warm) {
    Residuals r0 = report_residuals(p, warm->x, warm->y);
    if (r0.worst() <= tol) {
      rep.solution = *warm;
      rep.objective = lagrangian(p, warm->x, warm->y);
      rep.primal_residual = r0.primal;
      rep.dual_residual = r0.dual;
      rep.iterations = 0;
      rep.converged = true;
      return rep;
    }
  }

  const int first_budget = std::min(max_iters, 3000);
  AdmmOutcome best = admm_phase(p, tol, warm, first_budget);
  int used = best.iterations;

  // A stale warm start can park the iteration on a bad attractor. Retry
  // cold once before the heavier endgame.
  if (!best.converged && warm && used < max_iters) {
    AdmmOutcome cold =
        admm_phase(p, tol, std::nullopt, std::min(max_iters - used, 6000));
    used += cold.iterations;
    if (cold.residuals.worst() < best.residuals.worst()) {
      best.x = std::move(cold.x);
      best.y = std::move(cold.y);
      best.residuals = cold.residuals;
      best.converged = cold.converged;
    }
  }

  // Proximal-point endgame for stalled (near-)degenerate programs: iterate
  // the strictly convex prox subproblem centred at the current iterate. The
  // centre term keeps every subproblem uniquely solvable, and the original
  // stationarity error at a subproblem solution is bounded by the inner
  // error plus mu times the outer step, which contracts to zero in finitely
  // many rounds on polyhedral problems. A failed warm inner solve is retried
  // cold; mu shrinks only when the outer genuinely stops improving.
  if (!best.converged && used < max_iters) {
    const Eigen::Index n = p.primal_dim();
    const double scale = std::max({1.0, p.c.cwiseAbs().maxCoeff(),
                                   p.H ? p.H->cwiseAbs().maxCoeff() : 0.0});
    double mu = 0.1 * scale;
    const double tol_inner = std::min(1e-2 * tol, 1e-10);
    ProblemParameters q = p;
    VectorXd centre = best.x;
    PrimalDualSolution inner_warm{best.x, best.y};
    double last_r = best.residuals.worst();
    int rounds_without_progress = 0;
    for (int round = 0; round < 96 && used < max_iters; ++round) {
      MatrixXd Hq = p.H ? *p.H : MatrixXd::Zero(n, n);
      Hq.diagonal().array() += mu;
      q.H = std::move(Hq);
      q.c = p.c - mu * centre;
      AdmmOutcome inner =
          admm_phase(q, tol_inner,
                     std::optional<PrimalDualSolution>(inner_warm),
                     std::min(max_iters - used, 6000));
      used += inner.iterations;
      if (!inner.converged && used < max_iters) {
        AdmmOutcome retry = admm_phase(q, tol_inner, std::nullopt,
                                       std::min(max_iters - used, 8000));
        used += retry.iterations;
        if (retry.residuals.worst() < inner.residuals.worst()) inner = retry;
      }
      Residuals r = report_residuals(p, inner.x, inner.y);
      if (r.worst() < best.residuals.worst()) {
        best.x = inner.x;
        best.y = inner.y;
        best.residuals = r;
      }
      if (best.residuals.worst() <= tol) {
        best.converged = true;
        break;
      }
      centre = inner.x;
      inner_warm = PrimalDualSolution{inner.x, inner.y};
      if (best.residuals.worst() > 0.9 * last_r) {
        if (++rounds_without_progress >= 5) {
          mu = std::max(mu / 5.0, 1e-8 * scale);
          rounds_without_progress = 0;
        }
      } else {
        rounds_without_progress = 0;
      }
      last_r = std::min(last_r, best.residuals.worst());
    }
  }

  // Spend any remaining budget on the plain iteration.
  if (!best.converged && used < max_iters) {
    AdmmOutcome tail =
        admm_phase(p, tol,
                   std::optional<PrimalDualSolution>(
                       PrimalDualSolution{best.x, best.y}),
                   max_iters - used);
    used += tail.iterations;
    if (tail.residuals.worst() < best.residuals.worst()) {
      best.x = tail.x;
      best.y = tail.y;
      best.residuals = tail.residuals;
      best.converged = tail.converged;
    }
  }

  rep.solution.x = best.x;
  rep.solution.y = best.y;
  rep.objective = lagrangian(p, best.x, best.y);
  rep.primal_residual = best.residuals.primal;
  rep.dual_residual = best.residuals.dual;
  rep.iterations = used;
  rep.converged = best.residuals.worst() <= tol;
  return rep;
}

}  // namespace

double lagrangian(const ProblemParameters& p, const VectorXd& x,
                  const VectorXd& y) {
  if (x.size() != p.primal_dim() || y.size() != p.dual_dim())
    throw DimensionMismatch("lagrangian: z has wrong dimensions");
  double v = p.c.dot(x);
  if (p.H) v += 0.5 * x.dot(*p.H * x);
  if (p.dual_dim() > 0) v += y.dot(p.A * x + p.b);
  if (p.dual_H) v -= 0.5 * y.dot(*p.dual_H * y);
  return v;
}

double objective_value(const ProblemParameters& p, const VectorXd& x) {
  if (x.size() != p.primal_dim())
    throw DimensionMismatch("objective_value: x has wrong dimension");
  double v = p.c.dot(x);
  if (p.H) v += 0.5 * x.dot(*p.H * x);
  return v;
}

double primal_residual(const ProblemParameters& p, const VectorXd& x) {
  double r = 0.0;
  if (p.dual_dim() > 0) r = (p.A * x + p.b).cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::isfinite(p.lo[i])) r = std::max(r, p.lo[i] - x[i]);
    if (std::isfinite(p.hi[i])) r = std::max(r, x[i] - p.hi[i]);
  }
  return r;
}

double stationarity_residual(const ProblemParameters& p, const VectorXd& x,
                             const VectorXd& y) {
  VectorXd g = primal_gradient(p, x, y);
  VectorXd proj = clamp_box(x - g, p.lo, p.hi);
  return (x - proj).cwiseAbs().maxCoeff();
}

ProblemParameters dual_swap(const ProblemParameters& p) {
  const Eigen::Index n = p.primal_dim();
  const Eigen::Index m = p.dual_dim();
  ProblemParameters q;
  q.c = -p.b;
  q.H = p.dual_H;
  q.A = -p.A.transpose();
  q.b = -p.c;
  if (p.has_dual_box()) {
    q.lo = p.dual_lo;
    q.hi = p.dual_hi;
    q.dual_lo.resize(0);
    q.dual_hi.resize(0);
    q.dual_H.reset();
  } else {
    q.lo = VectorXd::Constant(m, -kInf);
    q.hi = VectorXd::Constant(m, kInf);
    q.dual_lo = p.lo;
    q.dual_hi = p.hi;
    q.dual_H = p.H;
  }
  (void)n;
  return q;
}

SolverReport solve(const ProblemParameters& params, double tol,
                   const std::optional<PrimalDualSolution>& warm_start,
                   int max_iters) {
  if (!params.has_dual_box())
    return solve_standard(params, tol, warm_start, max_iters);

  // Negated-and-swapped problem: solve the underlying standard problem and
  // map the saddle point back. The swap is an involution, so un-swapping is
  // a second application.
  ProblemParameters std_p = dual_swap(params);
  std::optional<PrimalDualSolution> std_warm;
  if (warm_start) std_warm = PrimalDualSolution{warm_start->y, warm_start->x};
  SolverReport r = solve_standard(std_p, tol, std_warm, max_iters);
  SolverReport out;
  out.solution.x = r.solution.y;
  out.solution.y = r.solution.x;
  out.objective = -r.objective;
  out.primal_residual = r.dual_residual;
  out.dual_residual = r.primal_residual;
  out.iterations = r.iterations;
  out.warm_started = r.warm_started;
  out.converged = r.converged;
  return out;
}

PrimalDualSolution solve_exact_lp(const ProblemParameters& params) {
  params.validate();
  if (params.H)
    throw TooLarge("exact oracle handles linear programs only");
  if (params.has_dual_box())
    throw TooLarge("exact oracle handles standard problems only");
  const Eigen::Index n = params.primal_dim();
  const Eigen::Index m = params.dual_dim();
  if (n > 16) throw TooLarge("exact oracle limited to n <= 16");
  if (m > 4) throw TooLarge("exact oracle limited to m <= 4");

  constexpr double kFeasTol = 1e-12;
  const double tie_eps = 1e-9;

  bool found = false;
  double best_obj = kInf;
  VectorXd best_x;
  std::vector<Eigen::Index> best_free;

  auto lex_smaller = [&](const VectorXd& a, const VectorXd& bb) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (a[i] < bb[i] - 1e-9) return true;
      if (a[i] > bb[i] + 1e-9) return false;
    }
    return false;
  };

  auto consider = [&](const VectorXd& x, const std::vector<Eigen::Index>& fr) {
    const double obj = params.c.dot(x);
    if (!found || obj < best_obj - tie_eps * (1.0 + std::abs(best_obj))) {
      found = true;
      best_obj = obj;
      best_x = x;
      best_free = fr;
    } else if (obj <= best_obj + tie_eps * (1.0 + std::abs(best_obj)) &&
               lex_smaller(x, best_x)) {
      best_x = x;
      best_free = fr;
    }
  };

  // Enumerate candidate vertices: choose up to m coordinates to leave free,
  // pin the rest to a bound pattern and solve the equalities on the free
  // block. Every vertex of the box/equality polytope arises this way.
  std::vector<Eigen::Index> free_idx;
  std::vector<Eigen::Index> pinned;
  auto enumerate_patterns = [&](auto&& self_check) {
    pinned.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      bool is_free = false;
      for (Eigen::Index f : free_idx) is_free |= (f == i);
      if (!is_free) pinned.push_back(i);
    }
    const Eigen::Index np = static_cast<Eigen::Index>(pinned.size());
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << np); ++bits) {
      VectorXd x(n);
      for (Eigen::Index kk = 0; kk < np; ++kk)
        x[pinned[kk]] = (bits >> kk) & 1 ? params.hi[pinned[kk]]
                                         : params.lo[pinned[kk]];
      self_check(x);
    }
  };

  if (m == 0) {
    free_idx.clear();
    enumerate_patterns([&](VectorXd& x) { consider(x, {}); });
  } else {
    std::vector<Eigen::Index> sel;
    auto choose = [&](auto&& self, Eigen::Index start, Eigen::Index k) -> void {
      if (k == 0) {
        free_idx = sel;
        enumerate_patterns([&](VectorXd& x) {
          const Eigen::Index f = static_cast<Eigen::Index>(free_idx.size());
          VectorXd rhs = -params.b;
          for (Eigen::Index i : pinned) rhs -= params.A.col(i) * x[i];
          if (f > 0) {
            MatrixXd Af(m, f);
            for (Eigen::Index a = 0; a < f; ++a)
              Af.col(a) = params.A.col(free_idx[a]);
            Eigen::ColPivHouseholderQR<MatrixXd> qr(Af);
            VectorXd xf = qr.solve(rhs);
            if ((Af * xf - rhs).cwiseAbs().maxCoeff() > kFeasTol) return;
            for (Eigen::Index a = 0; a < f; ++a) {
              const Eigen::Index i = free_idx[a];
              if (xf[a] < params.lo[i] - kFeasTol ||
                  xf[a] > params.hi[i] + kFeasTol)
                return;
              x[i] = std::clamp(xf[a], params.lo[i], params.hi[i]);
            }
          } else {
            if ((params.A * x + params.b).cwiseAbs().maxCoeff() > kFeasTol)
              return;
          }
          consider(x, free_idx);
        });
        return;
      }
      for (Eigen::Index i = start; i <= n - k; ++i) {
        sel.push_back(i);
        self(self, i + 1, k - 1);
        sel.pop_back();
      }
    };
    for (Eigen::Index k = 0; k <= std::min<Eigen::Index>(m, n); ++k)
      choose(choose, 0, k);
  }

  if (!found)
    throw ExactInfeasible("no box vertex satisfies the equality constraints");

  PrimalDualSolution sol;
  sol.x = best_x;
  sol.y = VectorXd::Zero(m);
  if (m > 0 && !best_free.empty()) {
    // Best-effort duals from the stationarity of the free block.
    const Eigen::Index f = static_cast<Eigen::Index>(best_free.size());
    MatrixXd AfT(f, m);
    VectorXd rhs(f);
    for (Eigen::Index a = 0; a < f; ++a) {
      AfT.row(a) = params.A.col(best_free[a]).transpose();
      rhs[a] = -params.c[best_free[a]];
    }
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(AfT);
    sol.y = cod.solve(rhs);
  }
  return sol;
}

}  // namespace lpgd
