#include "lpgd/experiments.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "lpgd/serialize.hpp"

#include <filesystem>
#include <sstream>

using namespace lpgd;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "lpgd_exp_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

TEST_CASE("config parsing rejects unknown values") {
  CHECK_THROWS_AS(
      parse_experiment_config(nlohmann::json{{"experiment", "nope"}}),
      ConfigError);
  CHECK_THROWS_AS(parse_train_config(nlohmann::json{{"method", "magic"}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_train_config(nlohmann::json{{"alpha", -1.0}}),
                  ConfigError);
}

TEST_CASE("envelope experiment: zero direction gives identical rows") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Envelope;
  cfg.out_dir = temp_dir("env_zero");
  cfg.seed = 4;
  cfg.tol = 1e-8;
  cfg.envelope.steps = 2;
  cfg.envelope.direction = VectorXd::Zero(2);
  REQUIRE(run_experiment(cfg) == 0);
  auto rows = parse_csv(read_file(cfg.out_dir + "/envelope.csv"));
  REQUIRE(rows.size() == 3);  // header + 2 steps
  CHECK(rows[0][0] == "t");
  CHECK(rows[0][1] == "true_loss");
  // All value columns identical between the two rows.
  for (std::size_t c = 1; c < rows[1].size(); ++c)
    CHECK(rows[1][c] == rows[2][c]);
}

TEST_CASE("envelope CSV round trip equals emitted values") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Envelope;
  cfg.out_dir = temp_dir("env_roundtrip");
  cfg.seed = 11;
  cfg.tol = 1e-8;
  cfg.envelope.steps = 5;
  REQUIRE(run_experiment(cfg) == 0);
  auto rows = parse_csv(read_file(cfg.out_dir + "/envelope.csv"));
  REQUIRE(rows.size() == 6);
  // Re-parse as doubles and re-format: byte-identical (17 digit contract).
  for (std::size_t r = 1; r < rows.size(); ++r)
    for (const auto& cell : rows[r])
      CHECK(format_double(std::stod(cell)) == cell);
}

TEST_CASE("sweep experiment: one trace file per grid point") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Sweep;
  cfg.out_dir = temp_dir("sweep_count");
  cfg.seed = 1;
  cfg.sweep.taus = {0.1, 1.0, 100.0};
  cfg.sweep.base.epochs = 2;
  cfg.sweep.base.batch_size = 4;
  cfg.sweep.base.solver_tol = 1e-8;
  cfg.sweep.instances = 6;
  cfg.sweep.n = 3;
  REQUIRE(run_experiment(cfg) == 0);
  int csvs = 0;
  bool summary = false;
  for (const auto& entry : fs::directory_iterator(cfg.out_dir)) {
    if (entry.path().extension() == ".csv") ++csvs;
    if (entry.path().filename() == "summary.json") summary = true;
  }
  CHECK(csvs == 3);
  CHECK(summary);
  CHECK(fs::exists(fs::path(cfg.out_dir) /
                   "lpgd_average_tau0.1_rho0_alpha0.1_eps1e-08.csv"));
}

TEST_CASE("sweep with empty grids is a config error") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Sweep;
  cfg.out_dir = temp_dir("sweep_empty");
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}

TEST_CASE("qp-bench emits identical serial and parallel solutions") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::QpBench;
  cfg.out_dir = temp_dir("bench");
  cfg.seed = 2;
  cfg.workers = 3;
  cfg.tol = 1e-8;
  cfg.qp_bench.instances = 8;
  cfg.qp_bench.n = 8;
  cfg.qp_bench.m = 2;
  cfg.qp_bench.repeats = 1;
  REQUIRE(run_experiment(cfg) == 0);
  auto bench = nlohmann::json::parse(read_file(cfg.out_dir + "/bench.json"));
  CHECK(bench["identical_solutions"].get<bool>());
  CHECK(fs::exists(fs::path(cfg.out_dir) / "bench_solutions.csv"));
}

TEST_CASE("experiment outputs are byte-identical across repeated runs") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Envelope;
  cfg.seed = 21;
  cfg.tol = 1e-8;
  cfg.envelope.steps = 7;
  cfg.out_dir = temp_dir("repro_a");
  REQUIRE(run_experiment(cfg) == 0);
  const std::string first = read_file(cfg.out_dir + "/envelope.csv");
  cfg.out_dir = temp_dir("repro_b");
  REQUIRE(run_experiment(cfg) == 0);
  CHECK(first == read_file(cfg.out_dir + "/envelope.csv"));
}
