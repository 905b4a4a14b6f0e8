#pragma once

#include "lpgd/types.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace lpgd {

enum class TrainMethod { LPGD_Lower, LPGD_Upper, LPGD_Average, LPPM, Implicit };

enum class OptimizerKind { SGD, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  TrainMethod method = TrainMethod::LPGD_Average;
  EnvelopeConfig envelope;  // tau and rho; rho is also the Implicit
                            // baseline's KKT regularizer
  OptimizerConfig optimizer;
  int epochs = 10;
  int batch_size = 32;
  double solver_tol = 1e-6;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

struct TrainExample {
  std::optional<VectorXd> input;       // backbone features
  std::optional<VectorXd> fixed_cost;  // per-instance cost when c is data
  VectorXd target;
};
using Dataset = std::vector<TrainExample>;

// c = W * input + u
struct AffineBackbone {
  MatrixXd W;
  VectorXd u;
};

struct LearnableParams {
  LearnableMask mask;
  ProblemParameters params;
  std::optional<AffineBackbone> backbone;
  // When set, b is kept equal to -A * feasible_point so the constraint set
  // always contains this point; the b-block gradient is chained into A.
  std::optional<VectorXd> feasible_point;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;
  double exact_err = 0.0;
  double constraint_err = 0.0;
  double t_forward_s = 0.0;
  double t_backward_s = 0.0;
  double forward_iters_mean = 0.0;
  double backward_iters_mean = 0.0;
};

struct TrainTrace {
  double initial_train_mse = 0.0;
  std::vector<EpochStats> epochs;
  bool diverged = false;
  std::string divergence_reason;
  LearnableParams final_params;
};

// MSE is ||x - target||^2 / n averaged over the dataset. "exact_err" and
// "constraint_err" are the argmax-rounded board errors; they require n = 64.
std::map<std::string, double> evaluate(const LearnableParams& learnable,
                                       const Dataset& dataset,
                                       const std::set<std::string>& metrics,
                                       double tol, int workers = 1);

// Epochs x batches of: forward solve (per-instance warm starts), loss,
// backward through the chosen method, chain rule through the backbone,
// optimizer step. Deterministic for a fixed seed and tolerance. A diverged
// run (infeasible perturbed problem, non-finite update) stops early with the
// trace marked accordingly.
TrainTrace train(const Dataset& train_data, const Dataset& test_data,
                 const LearnableParams& learnable, const TrainConfig& config);

}  // namespace lpgd
