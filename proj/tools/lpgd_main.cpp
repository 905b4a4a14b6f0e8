#include "lpgd/experiments.hpp"
#include "lpgd/serialize.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>

using namespace lpgd;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  int workers = 0;
  double tol = 0.0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file")
      ->envname("LPGD_CONFIG");
  cmd->add_option("--out", flags.out_dir, "output directory")
      ->envname("LPGD_OUT");
  cmd->add_option("--seed", flags.seed, "random seed")->envname("LPGD_SEED");
  cmd->add_option("--workers", flags.workers, "worker threads")
      ->envname("LPGD_WORKERS");
  cmd->add_option("--tol", flags.tol, "solver tolerance")
      ->envname("LPGD_TOL");
}

ExperimentConfig load_config(const CommonFlags& flags, ExperimentKind kind) {
  nlohmann::json j = nlohmann::json::object();
  if (!flags.config_path.empty())
    j = nlohmann::json::parse(read_file(flags.config_path));
  ExperimentConfig cfg = parse_experiment_config(j);
  cfg.kind = kind;  // the subcommand wins over the file
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.workers > 0) cfg.workers = flags.workers;
  if (flags.tol > 0.0) cfg.tol = flags.tol;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Differentiable optimization layers via Lagrangian proximal updates"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* envelope =
      app.add_subcommand("envelope", "1-D envelope visualization sweep");
  auto* sudoku = app.add_subcommand("sudoku", "learn 4x4 board rules as LP "
                                              "constraints");
  auto* sweep =
      app.add_subcommand("sweep", "hyperparameter grid on a synthetic task");
  auto* bench = app.add_subcommand(
      "qp-bench", "batch-solve benchmark, serial vs OpenMP");
  for (auto* cmd : {envelope, sudoku, sweep, bench}) add_common(cmd, flags);

  CLI11_PARSE(app, argc, argv);

  ExperimentKind kind = ExperimentKind::Envelope;
  if (sudoku->parsed()) kind = ExperimentKind::Sudoku;
  if (sweep->parsed()) kind = ExperimentKind::Sweep;
  if (bench->parsed()) kind = ExperimentKind::QpBench;

  try {
    ExperimentConfig cfg = load_config(flags, kind);
    const int code = run_experiment(cfg);
    if (code == 0)
      std::cout << "done; outputs in " << cfg.out_dir << "\n";
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
