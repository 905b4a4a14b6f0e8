#include "lpgd/types.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace lpgd {

namespace {

bool all_finite(const VectorXd& v) { return v.allFinite(); }

void check_box(const VectorXd& lo, const VectorXd& hi, bool require_finite,
               const char* what) {
  if (lo.size() != hi.size())
    throw DimensionMismatch(std::string(what) + ": bound sizes differ");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (std::isnan(lo[i]) || std::isnan(hi[i]))
      throw Error(std::string(what) + ": NaN bound");
    if (require_finite && (!std::isfinite(lo[i]) || !std::isfinite(hi[i])))
      throw Error(std::string(what) + ": bounds must be finite");
    if (lo[i] > hi[i])
      throw Error(std::string(what) + ": lo > hi at index " +
                  std::to_string(i));
  }
}

void check_quadratic_term(const MatrixXd& H, Eigen::Index n,
                          const char* what) {
  if (H.rows() != n || H.cols() != n)
    throw DimensionMismatch(std::string(what) + ": quadratic term is " +
                            std::to_string(H.rows()) + "x" +
                            std::to_string(H.cols()) + ", expected " +
                            std::to_string(n) + "x" + std::to_string(n));
  const double scale = H.cwiseAbs().maxCoeff();
  if (!H.allFinite()) throw Error(std::string(what) + ": non-finite entries");
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + scale))
    throw Error(std::string(what) + ": quadratic term not symmetric");
  // min eigenvalue >= -1e-8 * ||H|| iff H + slack*I admits a Cholesky factor.
  const double slack = 1e-8 * scale + 1e-12;
  MatrixXd shifted = 0.5 * (H + H.transpose());
  shifted.diagonal().array() += slack;
  Eigen::LLT<MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success)
    throw Error(std::string(what) + ": quadratic term not positive "
                                    "semi-definite");
}

}  // namespace

void ProblemParameters::validate() const {
  const Eigen::Index n = primal_dim();
  const Eigen::Index m = dual_dim();
  if (n == 0) throw DimensionMismatch("problem has no primal variables");
  if (!all_finite(c)) throw Error("c has non-finite entries");
  if (m > 0) {
    if (A.rows() != m || A.cols() != n)
      throw DimensionMismatch("A is " + std::to_string(A.rows()) + "x" +
                              std::to_string(A.cols()) + ", expected " +
                              std::to_string(m) + "x" + std::to_string(n));
    if (!A.allFinite() || !all_finite(b))
      throw Error("equality constraints have non-finite entries");
  } else if (A.size() != 0 && A.cols() != n) {
    throw DimensionMismatch("A has inconsistent column count");
  }
  if (lo.size() != n || hi.size() != n)
    throw DimensionMismatch("box bounds must have length n");
  // Swapped problems keep the finite box on the dual side.
  check_box(lo, hi, /*require_finite=*/!has_dual_box(), "box");
  if (H) check_quadratic_term(*H, n, "H");
  if (has_dual_box()) {
    if (dual_lo.size() != m || dual_hi.size() != m)
      throw DimensionMismatch("dual box must have length m");
    check_box(dual_lo, dual_hi, /*require_finite=*/true, "dual box");
    if (dual_H) check_quadratic_term(*dual_H, m, "dual_H");
  } else if (dual_H) {
    throw Error("dual_H without a dual box");
  }
}

double LossSpec::value(const VectorXd& x, const VectorXd& x_star) const {
  if (payload.size() != x.size())
    throw DimensionMismatch("loss payload length does not match x");
  switch (kind) {
    case LossKind::LinearizedAtSolution:
      // Reported relative to the anchor: l(x*) := 0.
      return weight * (x - x_star).dot(payload);
    case LossKind::QuadraticMSE:
      return weight * (x - payload).squaredNorm();
  }
  throw Error("unknown loss kind");
}

VectorXd LossSpec::gradient_at(const VectorXd& x) const {
  if (payload.size() != x.size())
    throw DimensionMismatch("loss payload length does not match x");
  switch (kind) {
    case LossKind::LinearizedAtSolution:
      return weight * payload;
    case LossKind::QuadraticMSE:
      return 2.0 * weight * (x - payload);
  }
  throw Error("unknown loss kind");
}

double UpdateVector::inf_norm() const {
  double r = 0.0;
  if (d_c && d_c->size() > 0) r = std::max(r, d_c->cwiseAbs().maxCoeff());
  if (d_H && d_H->size() > 0) r = std::max(r, d_H->cwiseAbs().maxCoeff());
  if (d_A && d_A->size() > 0) r = std::max(r, d_A->cwiseAbs().maxCoeff());
  if (d_b && d_b->size() > 0) r = std::max(r, d_b->cwiseAbs().maxCoeff());
  return r;
}

bool UpdateVector::all_finite() const {
  if (d_c && !d_c->allFinite()) return false;
  if (d_H && !d_H->allFinite()) return false;
  if (d_A && !d_A->allFinite()) return false;
  if (d_b && !d_b->allFinite()) return false;
  return true;
}

UpdateVector& UpdateVector::operator*=(double s) {
  if (d_c) *d_c *= s;
  if (d_H) *d_H *= s;
  if (d_A) *d_A *= s;
  if (d_b) *d_b *= s;
  return *this;
}

UpdateVector& UpdateVector::operator+=(const UpdateVector& other) {
  if (d_c.has_value() != other.d_c.has_value() ||
      d_H.has_value() != other.d_H.has_value() ||
      d_A.has_value() != other.d_A.has_value() ||
      d_b.has_value() != other.d_b.has_value())
    throw DimensionMismatch("update blocks do not match");
  if (d_c) *d_c += *other.d_c;
  if (d_H) *d_H += *other.d_H;
  if (d_A) *d_A += *other.d_A;
  if (d_b) *d_b += *other.d_b;
  return *this;
}

double inf_norm_diff(const UpdateVector& a, const UpdateVector& u) {
  if (a.d_c.has_value() != u.d_c.has_value() ||
      a.d_H.has_value() != u.d_H.has_value() ||
      a.d_A.has_value() != u.d_A.has_value() ||
      a.d_b.has_value() != u.d_b.has_value())
    throw DimensionMismatch("update blocks do not match");
  double r = 0.0;
  if (a.d_c) r = std::max(r, (*a.d_c - *u.d_c).cwiseAbs().maxCoeff());
  if (a.d_H) r = std::max(r, (*a.d_H - *u.d_H).cwiseAbs().maxCoeff());
  if (a.d_A) r = std::max(r, (*a.d_A - *u.d_A).cwiseAbs().maxCoeff());
  if (a.d_b) r = std::max(r, (*a.d_b - *u.d_b).cwiseAbs().maxCoeff());
  return r;
}

}  // namespace lpgd
