#include "lpgd/experiments.hpp"

#include "lpgd/parallel.hpp"
#include "lpgd/rng.hpp"
#include "lpgd/serialize.hpp"
#include "lpgd/solver.hpp"
#include "lpgd/sudoku.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

namespace lpgd {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

Variant parse_variant(const std::string& s) {
  if (s == "lower") return Variant::Lower;
  if (s == "upper") return Variant::Upper;
  if (s == "average") return Variant::Average;
  throw ConfigError("unknown variant: " + s);
}

TrainMethod parse_method(const std::string& s) {
  if (s == "lpgd_lower") return TrainMethod::LPGD_Lower;
  if (s == "lpgd_upper") return TrainMethod::LPGD_Upper;
  if (s == "lpgd_average") return TrainMethod::LPGD_Average;
  if (s == "lppm") return TrainMethod::LPPM;
  if (s == "implicit") return TrainMethod::Implicit;
  throw ConfigError("unknown method: " + s);
}

std::string method_name(TrainMethod m) {
  switch (m) {
    case TrainMethod::LPGD_Lower: return "lpgd_lower";
    case TrainMethod::LPGD_Upper: return "lpgd_upper";
    case TrainMethod::LPGD_Average: return "lpgd_average";
    case TrainMethod::LPPM: return "lppm";
    case TrainMethod::Implicit: return "implicit";
  }
  return "unknown";
}

std::string run_id(const TrainConfig& c) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s_tau%g_rho%g_alpha%g_eps%g",
                method_name(c.method).c_str(), c.envelope.tau,
                c.envelope.rho, c.optimizer.learning_rate, c.solver_tol);
  return buf;
}

EnvelopeConfig parse_envelope_config(const json& j) {
  EnvelopeConfig cfg;
  cfg.variant = parse_variant(j.value("variant", std::string("lower")));
  cfg.tau = j.value("tau", 1.0);
  cfg.rho = j.value("rho", 0.0);
  return cfg;
}

json train_summary(const TrainConfig& cfg, const TrainTrace& trace) {
  json j = trace_summary_json(trace);
  j["method"] = method_name(cfg.method);
  j["tau"] = cfg.envelope.tau;
  j["rho"] = cfg.envelope.rho;
  j["alpha"] = cfg.optimizer.learning_rate;
  j["solver_tol"] = cfg.solver_tol;
  j["seed"] = cfg.seed;
  return j;
}

// --- envelope ---------------------------------------------------------------

int run_envelope(const ExperimentConfig& config) {
  const auto& e = config.envelope;
  Rng rng(config.seed);
  ProblemParameters p;
  if (e.problem) {
    p = *e.problem;
  } else {
    p.c = rng.normal_vector(e.n);
    p.lo = VectorXd::Zero(e.n);
    p.hi = VectorXd::Ones(e.n);
    p.A = MatrixXd::Zero(0, e.n);
    p.b = VectorXd(0);
  }
  const Eigen::Index n = p.primal_dim();
  VectorXd target = e.target ? *e.target : rng.uniform_vector(n, 0.0, 1.0);
  VectorXd direction = e.direction ? *e.direction : rng.normal_vector(n);
  if (!e.direction && direction.norm() > 0) direction /= direction.norm();

  std::vector<EnvelopeConfig> configs = e.configs;
  if (configs.empty()) {
    for (double tau : {0.3, 1.0})
      for (Variant v : {Variant::Lower, Variant::Average, Variant::Upper})
        configs.push_back({v, tau, 0.0});
    configs.push_back({Variant::Average, 1.0, 0.5});
  }

  SweepTable table =
      envelope_sweep(p, direction, e.t_min, e.t_max, e.steps,
                     LossSpec::quadratic(target), configs, config.tol,
                     e.mode, config.workers);
  write_file((fs::path(config.out_dir) / "envelope.csv").string(),
             sweep_to_csv(table));

  json meta;
  meta["problem"] = problem_to_json(p);
  meta["target"] = json::array();
  for (Eigen::Index i = 0; i < n; ++i) meta["target"].push_back(target[i]);
  meta["direction"] = json::array();
  for (Eigen::Index i = 0; i < n; ++i)
    meta["direction"].push_back(direction[i]);
  meta["mode"] =
      e.mode == SweepLossMode::Linearized ? "linearized" : "exact";
  meta["steps"] = e.steps;
  meta["t_min"] = e.t_min;
  meta["t_max"] = e.t_max;
  write_file((fs::path(config.out_dir) / "envelope_meta.json").string(),
             meta.dump(2) + "\n");
  return 0;
}

// --- sudoku ------------------------------------------------------------------

Dataset to_dataset(const std::vector<SudokuInstance>& instances) {
  Dataset out;
  out.reserve(instances.size());
  for (const auto& inst : instances)
    out.push_back(
        TrainExample{std::nullopt, VectorXd(-inst.x_inc), inst.x_true});
  return out;
}

int run_sudoku(const ExperimentConfig& config) {
  const auto& s = config.sudoku;
  if (s.constraints < 1) throw ConfigError("constraints must be >= 1");
  auto train_set =
      generate_sudoku_dataset(s.train_instances, s.givens, config.seed);
  auto test_set = generate_sudoku_dataset(s.test_instances, s.givens,
                                          config.seed + 1);
  Dataset train_data = to_dataset(train_set);
  Dataset test_data = to_dataset(test_set);

  std::vector<TrainConfig> runs = s.runs;
  if (runs.empty()) {
    // 4x4 rescaling of the full-scale 9x9 settings (LPGD tau=1e4, rho=0.1,
    // alpha=0.1; GD rho=1e-3, alpha=0.1).
    TrainConfig lpgd;
    lpgd.method = TrainMethod::LPGD_Average;
    lpgd.envelope = EnvelopeConfig{Variant::Average, 100.0, 0.1};
    lpgd.optimizer.learning_rate = 0.1;
    lpgd.epochs = 30;
    lpgd.batch_size = 16;
    lpgd.solver_tol = config.tol;
    lpgd.seed = config.seed;
    TrainConfig gd = lpgd;
    gd.method = TrainMethod::Implicit;
    gd.envelope = EnvelopeConfig{Variant::Average, 100.0, 1e-3};
    runs = {lpgd, gd};
  }

  json summary = json::array();
  int exit_code = 0;
  for (auto cfg : runs) {
    cfg.workers = config.workers;
    Rng rng(config.seed + 17);
    LearnableParams lp;
    lp.mask.c = false;
    lp.mask.A = true;
    lp.params.c = VectorXd::Zero(kSudokuVars);
    lp.params.A = rng.normal_matrix(s.constraints, kSudokuVars, s.init_scale);
    lp.params.lo = VectorXd::Zero(kSudokuVars);
    lp.params.hi = VectorXd::Ones(kSudokuVars);
    lp.feasible_point = VectorXd::Constant(kSudokuVars, 0.25);
    lp.params.b = -lp.params.A * (*lp.feasible_point);

    TrainTrace trace = train(train_data, test_data, lp, cfg);
    const std::string name = "trace_" + method_name(cfg.method);
    write_file((fs::path(config.out_dir) / (name + ".csv")).string(),
               trace_to_csv(trace));
    summary.push_back(train_summary(cfg, trace));
    if (trace.diverged) {
      std::cerr << "run " << method_name(cfg.method)
                << " diverged: " << trace.divergence_reason << "\n";
      exit_code = 2;
    }
  }
  write_file((fs::path(config.out_dir) / "summary.json").string(),
             summary.dump(2) + "\n");
  return exit_code;
}

// --- hyperparameter sweep -----------------------------------------------------

int run_sweep(const ExperimentConfig& config) {
  const auto& s = config.sweep;
  if (s.taus.empty() && s.rhos.empty() && s.alphas.empty() &&
      s.epsilons.empty())
    throw ConfigError("sweep grids are all empty");

  // Synthetic regression task: learn c so the layer output matches random
  // targets.
  Rng rng(config.seed);
  LearnableParams lp;
  lp.params.c = VectorXd::Zero(s.n);
  lp.params.A = MatrixXd::Zero(0, s.n);
  lp.params.b = VectorXd(0);
  if (s.quadratic) {
    lp.params.H = MatrixXd::Identity(s.n, s.n);
    lp.params.lo = VectorXd::Constant(s.n, -2.0);
    lp.params.hi = VectorXd::Constant(s.n, 2.0);
  } else {
    lp.params.lo = VectorXd::Zero(s.n);
    lp.params.hi = VectorXd::Ones(s.n);
  }
  Dataset data;
  for (int i = 0; i < s.instances; ++i) {
    VectorXd t = s.quadratic
                     ? rng.uniform_vector(s.n, -1.0, 1.0)
                     : VectorXd(rng.uniform_vector(s.n, 0.0, 1.0)
                                    .unaryExpr([](double v) {
                                      return v > 0.5 ? 1.0 : 0.0;
                                    }));
    data.push_back(TrainExample{std::nullopt, std::nullopt, t});
  }

  auto axis = [](const std::vector<double>& v, double base) {
    return v.empty() ? std::vector<double>{base} : v;
  };
  const auto taus = axis(s.taus, s.base.envelope.tau);
  const auto rhos = axis(s.rhos, s.base.envelope.rho);
  const auto alphas = axis(s.alphas, s.base.optimizer.learning_rate);
  const auto eps = axis(s.epsilons, s.base.solver_tol);

  std::vector<TrainConfig> combos;
  for (double tau : taus)
    for (double rho : rhos)
      for (double alpha : alphas)
        for (double e : eps) {
          TrainConfig cfg = s.base;
          cfg.envelope.tau = tau;
          cfg.envelope.rho = rho;
          cfg.optimizer.learning_rate = alpha;
          cfg.solver_tol = e;
          cfg.workers = 1;  // grid points are the parallel unit
          combos.push_back(cfg);
        }

  std::vector<json> rows(combos.size());
  std::vector<std::exception_ptr> errors(combos.size());
  parallel_for(static_cast<std::ptrdiff_t>(combos.size()), config.workers,
               [&](std::ptrdiff_t i) {
                 try {
                   TrainTrace trace = train(data, {}, lp, combos[i]);
                   write_file((fs::path(config.out_dir) /
                               (run_id(combos[i]) + ".csv"))
                                  .string(),
                              trace_to_csv(trace));
                   rows[i] = train_summary(combos[i], trace);
                 } catch (...) {
                   errors[i] = std::current_exception();
                 }
               });
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  json summary = json::array();
  int exit_code = 0;
  for (auto& r : rows) {
    if (r.value("diverged", false)) exit_code = 2;
    summary.push_back(std::move(r));
  }
  write_file((fs::path(config.out_dir) / "summary.json").string(),
             summary.dump(2) + "\n");
  return exit_code;
}

// --- solver benchmark ----------------------------------------------------------

int run_qp_bench(const ExperimentConfig& config) {
  const auto& b = config.qp_bench;
  Rng rng(config.seed);
  std::vector<ProblemParameters> problems;
  for (int i = 0; i < b.instances; ++i) {
    ProblemParameters p;
    MatrixXd G = rng.normal_matrix(b.n, b.n);
    p.H = MatrixXd(G.transpose() * G / b.n);
    p.H->diagonal().array() += 0.5;
    p.c = rng.normal_vector(b.n);
    p.lo = VectorXd::Constant(b.n, -1.0);
    p.hi = VectorXd::Constant(b.n, 1.0);
    p.A = rng.normal_matrix(b.m, b.n);
    p.b = -p.A * rng.uniform_vector(b.n, -0.5, 0.5);
    problems.push_back(std::move(p));
  }

  auto solve_batch = [&](int workers, std::vector<VectorXd>& out) {
    out.assign(problems.size(), VectorXd());
    const auto t0 = std::chrono::steady_clock::now();
    parallel_for(static_cast<std::ptrdiff_t>(problems.size()), workers,
                 [&](std::ptrdiff_t i) {
                   out[i] = solve(problems[i], config.tol).solution.x;
                 });
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
  };

  const int par_workers = std::max(2, config.workers);
  double serial_s = 0.0, parallel_s = 0.0;
  std::vector<VectorXd> serial_x, parallel_x;
  for (int r = 0; r < b.repeats; ++r) {
    serial_s += solve_batch(1, serial_x);
    parallel_s += solve_batch(par_workers, parallel_x);
  }
  bool identical = true;
  for (std::size_t i = 0; i < serial_x.size(); ++i)
    identical = identical &&
                (serial_x[i] - parallel_x[i]).cwiseAbs().maxCoeff() == 0.0;

  // Deterministic artifact: the per-instance solutions; timings go to JSON.
  std::ostringstream csv;
  csv << "instance,x_norm,objective\n";
  for (std::size_t i = 0; i < serial_x.size(); ++i)
    csv << i << "," << format_double(serial_x[i].norm()) << ","
        << format_double(objective_value(problems[i], serial_x[i])) << "\n";
  write_file((fs::path(config.out_dir) / "bench_solutions.csv").string(),
             csv.str());

  json j;
  j["instances"] = b.instances;
  j["n"] = b.n;
  j["m"] = b.m;
  j["repeats"] = b.repeats;
  j["workers"] = par_workers;
  j["serial_s"] = serial_s;
  j["parallel_s"] = parallel_s;
  j["speedup"] = parallel_s > 0 ? serial_s / parallel_s : 0.0;
  j["identical_solutions"] = identical;
  write_file((fs::path(config.out_dir) / "bench.json").string(),
             j.dump(2) + "\n");

  std::printf("qp-bench: %d instances (n=%d, m=%d), %d repeats\n",
              b.instances, b.n, b.m, b.repeats);
  std::printf("  serial   %.3f s\n", serial_s);
  std::printf("  %d workers %.3f s (speedup %.2fx, identical=%s)\n",
              par_workers, parallel_s,
              parallel_s > 0 ? serial_s / parallel_s : 0.0,
              identical ? "yes" : "no");
  return identical ? 0 : 2;
}

}  // namespace

TrainConfig parse_train_config(const json& j) {
  TrainConfig cfg;
  cfg.method = parse_method(j.value("method", std::string("lpgd_average")));
  cfg.envelope.variant = Variant::Average;
  cfg.envelope.tau = j.value("tau", 1.0);
  cfg.envelope.rho = j.value("rho", 0.0);
  const std::string opt = j.value("optimizer", std::string("adam"));
  if (opt == "sgd")
    cfg.optimizer.kind = OptimizerKind::SGD;
  else if (opt == "adam")
    cfg.optimizer.kind = OptimizerKind::Adam;
  else
    throw ConfigError("unknown optimizer: " + opt);
  cfg.optimizer.learning_rate = j.value("alpha", 0.1);
  cfg.optimizer.beta1 = j.value("beta1", 0.9);
  cfg.optimizer.beta2 = j.value("beta2", 0.999);
  cfg.optimizer.epsilon = j.value("adam_epsilon", 1e-8);
  cfg.epochs = j.value("epochs", 10);
  cfg.batch_size = j.value("batch_size", 32);
  cfg.solver_tol = j.value("solver_tol", 1e-6);
  cfg.seed = j.value("seed", 0);
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_experiment_config(const json& j) {
  ExperimentConfig cfg;
  const std::string kind = j.value("experiment", std::string("envelope"));
  if (kind == "envelope")
    cfg.kind = ExperimentKind::Envelope;
  else if (kind == "sudoku")
    cfg.kind = ExperimentKind::Sudoku;
  else if (kind == "sweep")
    cfg.kind = ExperimentKind::Sweep;
  else if (kind == "qp-bench")
    cfg.kind = ExperimentKind::QpBench;
  else
    throw ConfigError("unknown experiment kind: " + kind);

  cfg.out_dir = j.value("out", std::string("results"));
  cfg.seed = j.value("seed", 0);
  cfg.workers = j.value("workers", 1);
  cfg.tol = j.value("tol", 1e-6);

  if (j.contains("envelope")) {
    const json& e = j.at("envelope");
    auto& dst = cfg.envelope;
    if (e.contains("problem"))
      dst.problem = problem_from_json(e.at("problem"));
    dst.n = e.value("n", 2);
    dst.t_min = e.value("t_min", -1.0);
    dst.t_max = e.value("t_max", 1.0);
    dst.steps = e.value("steps", 41);
    const std::string mode = e.value("mode", std::string("linearized"));
    if (mode == "linearized")
      dst.mode = SweepLossMode::Linearized;
    else if (mode == "exact")
      dst.mode = SweepLossMode::Exact;
    else
      throw ConfigError("unknown sweep mode: " + mode);
    if (e.contains("configs")) {
      for (const auto& c : e.at("configs"))
        dst.configs.push_back(parse_envelope_config(c));
    }
    if (e.contains("target")) {
      const auto& t = e.at("target");
      VectorXd v(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) v[i] = t[i].get<double>();
      dst.target = v;
    }
    if (e.contains("direction")) {
      const auto& d = e.at("direction");
      VectorXd v(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) v[i] = d[i].get<double>();
      dst.direction = v;
    }
  }
  if (j.contains("sudoku")) {
    const json& s = j.at("sudoku");
    auto& dst = cfg.sudoku;
    dst.train_instances = s.value("train_instances", 200);
    dst.test_instances = s.value("test_instances", 50);
    dst.givens = s.value("givens", 10);
    dst.constraints = s.value("constraints", 40);
    dst.init_scale = s.value("init_scale", 0.05);
    if (s.contains("runs"))
      for (const auto& r : s.at("runs"))
        dst.runs.push_back(parse_train_config(r));
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    auto& dst = cfg.sweep;
    if (s.contains("base")) dst.base = parse_train_config(s.at("base"));
    auto grid = [&](const char* key) {
      std::vector<double> v;
      if (s.contains(key))
        for (const auto& x : s.at(key)) v.push_back(x.get<double>());
      return v;
    };
    dst.taus = grid("taus");
    dst.rhos = grid("rhos");
    dst.alphas = grid("alphas");
    dst.epsilons = grid("epsilons");
    dst.n = s.value("n", 4);
    dst.instances = s.value("instances", 16);
    dst.quadratic = s.value("quadratic", true);
  }
  if (j.contains("qp_bench")) {
    const json& q = j.at("qp_bench");
    auto& dst = cfg.qp_bench;
    dst.instances = q.value("instances", 64);
    dst.n = q.value("n", 32);
    dst.m = q.value("m", 8);
    dst.repeats = q.value("repeats", 3);
  }
  return cfg;
}

int run_experiment(const ExperimentConfig& config) {
  fs::create_directories(config.out_dir);
  switch (config.kind) {
    case ExperimentKind::Envelope:
      return run_envelope(config);
    case ExperimentKind::Sudoku:
      return run_sudoku(config);
    case ExperimentKind::Sweep:
      return run_sweep(config);
    case ExperimentKind::QpBench:
      return run_qp_bench(config);
  }
  throw ConfigError("unknown experiment kind");
}

}  // namespace lpgd
