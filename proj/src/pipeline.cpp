#include "lpgd/pipeline.hpp"

#include "lpgd/envelope.hpp"
#include "lpgd/implicit_diff.hpp"
#include "lpgd/parallel.hpp"
#include "lpgd/rng.hpp"
#include "lpgd/solver.hpp"
#include "lpgd/sudoku.hpp"
#include "lpgd/updates.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <numeric>

namespace lpgd {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

VectorXd effective_cost(const LearnableParams& lp, const TrainExample& ex) {
  if (lp.backbone) {
    if (!ex.input) throw ConfigError("backbone requires example inputs");
    return lp.backbone->W * (*ex.input) + lp.backbone->u;
  }
  if (ex.fixed_cost) return *ex.fixed_cost;
  return lp.params.c;
}

double instance_mse(const VectorXd& x, const VectorXd& target) {
  return (x - target).squaredNorm() / static_cast<double>(x.size());
}

// Adam/SGD state for one tensor, stored flat.
struct OptState {
  VectorXd m, v;
  void init(Eigen::Index size) {
    m = VectorXd::Zero(size);
    v = VectorXd::Zero(size);
  }
};

class Optimizer {
 public:
  Optimizer(const OptimizerConfig& cfg) : cfg_(cfg) {}

  void step(VectorXd& params, const VectorXd& grad, OptState& state) {
    if (cfg_.kind == OptimizerKind::SGD) {
      params -= cfg_.learning_rate * grad;
      return;
    }
    state.m = cfg_.beta1 * state.m + (1.0 - cfg_.beta1) * grad;
    state.v = cfg_.beta2 * state.v +
              (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    Eigen::ArrayXd mhat = state.m.array() / bc1;
    Eigen::ArrayXd vhat = state.v.array() / bc2;
    params.array() -=
        cfg_.learning_rate * mhat / (vhat.sqrt() + cfg_.epsilon);
  }

  // Shared step counter so every tensor sees the same bias correction.
  void begin_step() { ++t_; }

 private:
  OptimizerConfig cfg_;
  long t_ = 0;
};

struct ItemResult {
  UpdateVector update;
  double mse = 0.0;
  double t_forward = 0.0;
  double t_backward = 0.0;
  int forward_iters = 0;
  int backward_iters = 0;
  int backward_solves = 0;
  bool failed = false;
  std::string error;
};

}  // namespace

void TrainConfig::validate() const {
  if (optimizer.learning_rate <= 0.0) throw ConfigError("alpha must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (solver_tol <= 0.0) throw ConfigError("solver_tol must be > 0");
  if (envelope.tau <= 0.0) throw ConfigError("tau must be > 0");
  if (envelope.rho < 0.0) throw ConfigError("rho must be >= 0");
}

void LearnableParams::validate() const {
  params.validate();
  if (!mask.c && !mask.H && !mask.A && !mask.b && !backbone)
    throw ConfigError("at least one parameter block must be learnable");
  if (backbone && backbone->u.size() != params.primal_dim())
    throw ConfigError("backbone output dimension must equal n");
  if (backbone && backbone->W.rows() != params.primal_dim())
    throw ConfigError("backbone output dimension must equal n");
  if (feasible_point && feasible_point->size() != params.primal_dim())
    throw ConfigError("feasible point must have length n");
}

std::map<std::string, double> evaluate(const LearnableParams& learnable,
                                       const Dataset& dataset,
                                       const std::set<std::string>& metrics,
                                       double tol, int workers) {
  learnable.validate();
  std::map<std::string, double> out;
  if (dataset.empty()) throw ConfigError("dataset is empty");
  const bool want_mse = metrics.count("mse") > 0;
  const bool want_exact = metrics.count("exact_err") > 0;
  const bool want_constraint = metrics.count("constraint_err") > 0;
  if ((want_exact || want_constraint) &&
      learnable.params.primal_dim() != kSudokuVars)
    throw ConfigError("board metrics require length-64 problems");

  std::vector<double> mse(dataset.size(), 0.0);
  std::vector<int> violated(dataset.size(), 0);
  std::vector<std::exception_ptr> errors(dataset.size());
  parallel_for(static_cast<std::ptrdiff_t>(dataset.size()), workers,
               [&](std::ptrdiff_t i) {
                 try {
                   ProblemParameters p = learnable.params;
                   p.c = effective_cost(learnable, dataset[i]);
                   SolverReport r = solve(p, tol);
                   if (!r.converged &&
                       std::max(r.primal_residual, r.dual_residual) >
                           50.0 * tol)
                     throw SolverFailure("evaluation solve failed");
                   mse[i] = instance_mse(r.solution.x, dataset[i].target);
                   if (want_exact || want_constraint)
                     violated[i] = count_violated_constraints(
                         argmax_board(r.solution.x));
                 } catch (...) {
                   errors[i] = std::current_exception();
                 }
               });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  const double n = static_cast<double>(dataset.size());
  if (want_mse)
    out["mse"] = std::accumulate(mse.begin(), mse.end(), 0.0) / n;
  if (want_exact) {
    double bad = 0;
    for (int v : violated) bad += v > 0 ? 1.0 : 0.0;
    out["exact_err"] = bad / n;
  }
  if (want_constraint) {
    double total = 0;
    for (int v : violated) total += static_cast<double>(v);
    out["constraint_err"] = total / (n * kSudokuConstraints);
  }
  return out;
}

TrainTrace train(const Dataset& train_data, const Dataset& test_data,
                 const LearnableParams& learnable_in,
                 const TrainConfig& config) {
  config.validate();
  learnable_in.validate();
  if (train_data.empty()) throw ConfigError("training dataset is empty");

  LearnableParams lp = learnable_in;
  const Eigen::Index n = lp.params.primal_dim();
  const Eigen::Index m = lp.params.dual_dim();
  if (lp.feasible_point) lp.params.b = -lp.params.A * (*lp.feasible_point);

  // Which blocks the backward pass must produce.
  LearnableMask umask;
  umask.c = lp.mask.c || lp.backbone.has_value();
  umask.H = lp.mask.H;
  umask.A = lp.mask.A;
  umask.b = lp.mask.b || (lp.mask.A && lp.feasible_point.has_value());

  Optimizer opt(config.optimizer);
  OptState s_c, s_W, s_u, s_H, s_A, s_b;
  if (lp.backbone) {
    s_W.init(lp.backbone->W.size());
    s_u.init(lp.backbone->u.size());
  } else if (lp.mask.c) {
    s_c.init(n);
  }
  if (lp.mask.H) s_H.init(n * n);
  if (lp.mask.A) s_A.init(m * n);
  if (lp.mask.b) s_b.init(m);

  TrainTrace trace;
  try {
    trace.initial_train_mse =
        evaluate(lp, train_data, {"mse"}, config.solver_tol,
                 config.workers)["mse"];
  } catch (const std::exception& e) {
    trace.diverged = true;
    trace.divergence_reason = e.what();
    trace.final_params = lp;
    return trace;
  }

  std::vector<std::optional<PrimalDualSolution>> warm(train_data.size());
  Rng shuffler(config.seed);

  auto mark_diverged = [&](const std::string& why) {
    trace.diverged = true;
    trace.divergence_reason = why;
  };

  for (int epoch = 1; epoch <= config.epochs && !trace.diverged; ++epoch) {
    std::vector<std::size_t> order(train_data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffler.shuffle(order);

    EpochStats stats;
    stats.epoch = epoch;
    double mse_sum = 0.0;
    long fwd_iters = 0, bwd_iters = 0;
    long fwd_solves = 0, bwd_solves = 0;

    for (std::size_t start = 0; start < order.size() && !trace.diverged;
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(),
                   start + static_cast<std::size_t>(config.batch_size));
      const std::size_t bsize = end - start;
      std::vector<ItemResult> results(bsize);

      parallel_for(static_cast<std::ptrdiff_t>(bsize), config.workers,
                   [&](std::ptrdiff_t k) {
        ItemResult& res = results[k];
        try {
          const std::size_t idx = order[start + k];
          const TrainExample& ex = train_data[idx];
          ProblemParameters p = lp.params;
          p.c = effective_cost(lp, ex);

          auto t0 = Clock::now();
          SolverReport fwd = solve(p, config.solver_tol, warm[idx]);
          res.t_forward = seconds_since(t0);
          res.forward_iters = fwd.iterations;
          // Training proceeds on the best iterate when the iteration budget
          // runs out close to tolerance; learned constraint matrices drift
          // toward degeneracy and occasional near-misses are expected.
          if (!fwd.converged &&
              std::max(fwd.primal_residual, fwd.dual_residual) >
                  50.0 * config.solver_tol)
            throw SolverFailure(
                "forward solve did not converge (iters=" +
                std::to_string(fwd.iterations) +
                ", rp=" + std::to_string(fwd.primal_residual) +
                ", rd=" + std::to_string(fwd.dual_residual) + ")");
          warm[idx] = fwd.solution;

          res.mse = instance_mse(fwd.solution.x, ex.target);
          VectorXd grad =
              2.0 * (fwd.solution.x - ex.target) / static_cast<double>(n);

          t0 = Clock::now();
          switch (config.method) {
            case TrainMethod::LPGD_Lower:
            case TrainMethod::LPGD_Upper:
            case TrainMethod::LPGD_Average: {
              EnvelopeConfig env = config.envelope;
              env.variant = config.method == TrainMethod::LPGD_Lower
                                ? Variant::Lower
                            : config.method == TrainMethod::LPGD_Upper
                                ? Variant::Upper
                                : Variant::Average;
              BackwardDiagnostics diag;
              res.update = lpgd_update(p, fwd.solution, grad, env,
                                       config.solver_tol, umask,
                                       UpdateForm::Gradient, &diag);
              res.backward_iters = diag.iterations;
              res.backward_solves = diag.solves;
              break;
            }
            case TrainMethod::LPPM: {
              EnvelopeConfig env = config.envelope;
              env.variant = Variant::Lower;
              BackwardDiagnostics diag;
              res.update = lppm_update(
                  p, fwd.solution,
                  LossSpec::quadratic(ex.target, 1.0 / static_cast<double>(n)),
                  env, config.solver_tol, umask, UpdateForm::Gradient, &diag);
              res.backward_iters = diag.iterations;
              res.backward_solves = diag.solves;
              break;
            }
            case TrainMethod::Implicit:
              res.update =
                  implicit_gradient_qp(p, fwd.solution, grad,
                                       config.envelope.rho,
                                       config.solver_tol, umask);
              break;
          }
          res.t_backward = seconds_since(t0);
          if (!res.update.all_finite())
            throw SolverFailure("non-finite update");
        } catch (const std::exception& e) {
          res.failed = true;
          res.error = e.what();
        }
      });

      // Deterministic serial reduction in batch order.
      UpdateVector total;
      bool first = true;
      for (std::size_t k = 0; k < bsize; ++k) {
        ItemResult& res = results[k];
        if (res.failed) {
          mark_diverged(res.error);
          break;
        }
        mse_sum += res.mse;
        stats.t_forward_s += res.t_forward;
        stats.t_backward_s += res.t_backward;
        fwd_iters += res.forward_iters;
        ++fwd_solves;
        bwd_iters += res.backward_iters;
        bwd_solves += res.backward_solves;
        if (first) {
          total = res.update;
          first = false;
        } else {
          total += res.update;
        }
      }
      if (trace.diverged) break;
      total *= 1.0 / static_cast<double>(bsize);

      opt.begin_step();
      if (lp.backbone) {
        // Chain rule through the affine map: d_W = d_c input^T, d_u = d_c.
        MatrixXd d_W = MatrixXd::Zero(lp.backbone->W.rows(),
                                      lp.backbone->W.cols());
        VectorXd d_u = VectorXd::Zero(n);
        for (std::size_t k = 0; k < bsize; ++k) {
          const TrainExample& ex = train_data[order[start + k]];
          d_W += *results[k].update.d_c * ex.input->transpose();
          d_u += *results[k].update.d_c;
        }
        d_W /= static_cast<double>(bsize);
        d_u /= static_cast<double>(bsize);
        VectorXd wflat = Eigen::Map<VectorXd>(lp.backbone->W.data(),
                                              lp.backbone->W.size());
        VectorXd gflat = Eigen::Map<VectorXd>(d_W.data(), d_W.size());
        opt.step(wflat, gflat, s_W);
        lp.backbone->W =
            Eigen::Map<MatrixXd>(wflat.data(), d_W.rows(), d_W.cols());
        opt.step(lp.backbone->u, d_u, s_u);
      } else if (lp.mask.c) {
        opt.step(lp.params.c, *total.d_c, s_c);
      }
      if (lp.mask.A) {
        MatrixXd d_A = *total.d_A;
        if (lp.feasible_point)
          d_A -= *total.d_b * lp.feasible_point->transpose();
        VectorXd aflat =
            Eigen::Map<VectorXd>(lp.params.A.data(), lp.params.A.size());
        VectorXd gflat = Eigen::Map<VectorXd>(d_A.data(), d_A.size());
        opt.step(aflat, gflat, s_A);
        lp.params.A = Eigen::Map<MatrixXd>(aflat.data(), m, n);
        if (lp.feasible_point)
          lp.params.b = -lp.params.A * (*lp.feasible_point);
      }
      if (lp.mask.b && !lp.feasible_point) {
        opt.step(lp.params.b, *total.d_b, s_b);
      }
      if (lp.mask.H) {
        MatrixXd H = *lp.params.H;
        VectorXd hflat = Eigen::Map<VectorXd>(H.data(), H.size());
        VectorXd gflat = Eigen::Map<VectorXd>(total.d_H->data(),
                                              total.d_H->size());
        opt.step(hflat, gflat, s_H);
        H = Eigen::Map<MatrixXd>(hflat.data(), n, n);
        H = 0.5 * (H + H.transpose());
        // Project back onto the PSD cone.
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(H);
        VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
        lp.params.H = eig.eigenvectors() * ev.asDiagonal() *
                      eig.eigenvectors().transpose();
      }

      bool finite = lp.params.c.allFinite() && lp.params.A.allFinite() &&
                    lp.params.b.allFinite();
      if (lp.params.H) finite = finite && lp.params.H->allFinite();
      if (lp.backbone)
        finite = finite && lp.backbone->W.allFinite() &&
                 lp.backbone->u.allFinite();
      if (!finite) mark_diverged("non-finite parameters");
    }
    if (trace.diverged) break;

    stats.train_mse = mse_sum / static_cast<double>(train_data.size());
    stats.forward_iters_mean =
        fwd_solves > 0 ? static_cast<double>(fwd_iters) / fwd_solves : 0.0;
    stats.backward_iters_mean =
        bwd_solves > 0 ? static_cast<double>(bwd_iters) / bwd_solves : 0.0;

    const Dataset& eval_set = test_data.empty() ? train_data : test_data;
    std::set<std::string> metrics{"mse"};
    if (n == kSudokuVars) {
      metrics.insert("exact_err");
      metrics.insert("constraint_err");
    }
    try {
      auto vals =
          evaluate(lp, eval_set, metrics, config.solver_tol, config.workers);
      stats.test_mse = vals["mse"];
      if (n == kSudokuVars) {
        stats.exact_err = vals["exact_err"];
        stats.constraint_err = vals["constraint_err"];
      }
    } catch (const std::exception& e) {
      mark_diverged(e.what());
      break;
    }
    trace.epochs.push_back(stats);
  }

  trace.final_params = lp;
  return trace;
}

}  // namespace lpgd
