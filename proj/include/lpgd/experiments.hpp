#pragma once

#include "lpgd/envelope.hpp"
#include "lpgd/pipeline.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace lpgd {

enum class ExperimentKind { Envelope, Sudoku, Sweep, QpBench };

struct EnvelopeExperiment {
  std::optional<ProblemParameters> problem;  // random box LP when absent
  int n = 2;
  double t_min = -1.0;
  double t_max = 1.0;
  int steps = 41;
  SweepLossMode mode = SweepLossMode::Linearized;
  std::vector<EnvelopeConfig> configs;
  std::optional<VectorXd> direction;  // random unit direction when absent
  std::optional<VectorXd> target;     // quadratic loss target
};

struct SudokuExperiment {
  int train_instances = 200;
  int test_instances = 50;
  int givens = 10;
  int constraints = 40;
  double init_scale = 0.05;
  // Full-scale (9x9) reference settings: LPGD tau=1e4, rho=0.1, alpha=0.1;
  // GD rho=1e-3, alpha=0.1. The runs default to their 4x4 rescaling.
  std::vector<TrainConfig> runs;
};

struct SweepExperiment {
  TrainConfig base;
  std::vector<double> taus, rhos, alphas, epsilons;  // empty = base value
  int n = 4;
  int instances = 16;
  bool quadratic = true;  // strongly convex toy vs box LP
};

struct QpBenchExperiment {
  int instances = 64;
  int n = 32;
  int m = 8;
  int repeats = 3;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Envelope;
  std::string out_dir = "results";
  std::uint64_t seed = 0;
  int workers = 1;
  double tol = 1e-6;

  EnvelopeExperiment envelope;
  SudokuExperiment sudoku;
  SweepExperiment sweep;
  QpBenchExperiment qp_bench;
};

// Parses the JSON schema documented in the README. The kind, when present in
// the file, may be overridden by the caller.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);

TrainConfig parse_train_config(const nlohmann::json& j);

// Dispatches to the experiment runners, writes CSV/JSON artifacts under
// out_dir and returns a process exit code (0 on success, 2 on a diverged
// training run).
int run_experiment(const ExperimentConfig& config);

}  // namespace lpgd
