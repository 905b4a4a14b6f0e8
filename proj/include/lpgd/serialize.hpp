#pragma once

#include "lpgd/envelope.hpp"
#include "lpgd/pipeline.hpp"
#include "lpgd/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>

namespace lpgd {

// Problem instances as JSON objects with keys c, H (optional, dense
// row-major), A, b, lo, hi. Swapped problems additionally carry dual_lo,
// dual_hi and optional dual_H.
nlohmann::json problem_to_json(const ProblemParameters& p);
ProblemParameters problem_from_json(const nlohmann::json& j);

nlohmann::json update_to_json(const UpdateVector& u);

// Fixed "%.17g" formatting so repeated runs emit byte-identical files.
std::string format_double(double v);

std::string sweep_to_csv(const SweepTable& table);

// Header: epoch,train_mse,test_mse,exact_err,constraint_err. Wall-clock
// per-phase times live in the JSON summary, keeping every CSV reproducible
// byte for byte.
std::string trace_to_csv(const TrainTrace& trace);

nlohmann::json trace_summary_json(const TrainTrace& trace);

void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

}  // namespace lpgd
