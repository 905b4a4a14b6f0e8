#include "lpgd/serialize.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace lpgd {

using nlohmann::json;

namespace {

json vec_to_json(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

VectorXd vec_from_json(const json& a) {
  if (!a.is_array()) throw ConfigError("expected an array");
  VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
  return v;
}

MatrixXd mat_from_json(const json& a, Eigen::Index cols_hint = -1) {
  if (!a.is_array()) throw ConfigError("expected an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(a.size());
  if (rows == 0)
    return MatrixXd::Zero(0, cols_hint >= 0 ? cols_hint : 0);
  const Eigen::Index cols = static_cast<Eigen::Index>(a[0].size());
  MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(a[r].size()) != cols)
      throw ConfigError("ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = a[r][c].get<double>();
  }
  return m;
}

}  // namespace

json problem_to_json(const ProblemParameters& p) {
  json j;
  j["c"] = vec_to_json(p.c);
  if (p.H) j["H"] = mat_to_json(*p.H);
  j["A"] = mat_to_json(p.A);
  j["b"] = vec_to_json(p.b);
  j["lo"] = vec_to_json(p.lo);
  j["hi"] = vec_to_json(p.hi);
  if (p.has_dual_box()) {
    j["dual_lo"] = vec_to_json(p.dual_lo);
    j["dual_hi"] = vec_to_json(p.dual_hi);
    if (p.dual_H) j["dual_H"] = mat_to_json(*p.dual_H);
  }
  return j;
}

ProblemParameters problem_from_json(const json& j) {
  ProblemParameters p;
  p.c = vec_from_json(j.at("c"));
  if (j.contains("H")) p.H = mat_from_json(j.at("H"));
  p.A = j.contains("A") ? mat_from_json(j.at("A"), p.c.size())
                        : MatrixXd::Zero(0, p.c.size());
  p.b = j.contains("b") ? vec_from_json(j.at("b")) : VectorXd(0);
  p.lo = vec_from_json(j.at("lo"));
  p.hi = vec_from_json(j.at("hi"));
  if (j.contains("dual_lo")) {
    p.dual_lo = vec_from_json(j.at("dual_lo"));
    p.dual_hi = vec_from_json(j.at("dual_hi"));
    if (j.contains("dual_H")) p.dual_H = mat_from_json(j.at("dual_H"));
  }
  p.validate();
  return p;
}

json update_to_json(const UpdateVector& u) {
  json j;
  if (u.d_c) j["d_c"] = vec_to_json(*u.d_c);
  if (u.d_H) j["d_H"] = mat_to_json(*u.d_H);
  if (u.d_A) j["d_A"] = mat_to_json(*u.d_A);
  if (u.d_b) j["d_b"] = vec_to_json(*u.d_b);
  return j;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string sweep_to_csv(const SweepTable& table) {
  std::ostringstream out;
  out << "t,true_loss";
  for (const auto& id : table.config_ids) out << "," << id;
  out << "\n";
  for (std::size_t s = 0; s < table.t.size(); ++s) {
    out << format_double(table.t[s]) << ","
        << format_double(table.true_loss[s]);
    for (const auto& col : table.envelope)
      out << "," << format_double(col[s]);
    out << "\n";
  }
  return out.str();
}

std::string trace_to_csv(const TrainTrace& trace) {
  std::ostringstream out;
  out << "epoch,train_mse,test_mse,exact_err,constraint_err\n";
  for (const auto& e : trace.epochs) {
    out << e.epoch << "," << format_double(e.train_mse) << ","
        << format_double(e.test_mse) << "," << format_double(e.exact_err)
        << "," << format_double(e.constraint_err) << "\n";
  }
  return out.str();
}

json trace_summary_json(const TrainTrace& trace) {
  json j;
  j["initial_train_mse"] = trace.initial_train_mse;
  j["diverged"] = trace.diverged;
  if (trace.diverged) j["divergence_reason"] = trace.divergence_reason;
  j["epochs"] = trace.epochs.size();
  if (!trace.epochs.empty()) {
    const auto& last = trace.epochs.back();
    j["final_train_mse"] = last.train_mse;
    j["final_test_mse"] = last.test_mse;
    j["final_exact_err"] = last.exact_err;
    j["final_constraint_err"] = last.constraint_err;
  }
  json tf = json::array(), tb = json::array(), fi = json::array(),
       bi = json::array();
  for (const auto& e : trace.epochs) {
    tf.push_back(e.t_forward_s);
    tb.push_back(e.t_backward_s);
    fi.push_back(e.forward_iters_mean);
    bi.push_back(e.backward_iters_mean);
  }
  j["t_forward_s"] = std::move(tf);
  j["t_backward_s"] = std::move(tb);
  j["forward_iters_mean"] = std::move(fi);
  j["backward_iters_mean"] = std::move(bi);
  return j;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << contents;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace lpgd
