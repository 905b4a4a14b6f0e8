#include "lpgd/implicit_diff.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>

namespace lpgd {

UpdateVector KktSystem::apply_adjoint(const PrimalDualSolution& z_star,
                                      const VectorXd& u,
                                      const LearnableMask& mask) const {
  if (u.size() != size())
    throw DimensionMismatch("adjoint vector has wrong dimension");
  const VectorXd dx = -u.head(n);
  const VectorXd dnu = m > 0 ? VectorXd(-u.segment(n, m)) : VectorXd(0);
  UpdateVector out;
  if (mask.c) out.d_c = dx;
  if (mask.H)
    out.d_H = 0.5 * (dx * z_star.x.transpose() + z_star.x * dx.transpose());
  if (mask.A)
    out.d_A = z_star.y * dx.transpose() + dnu * z_star.x.transpose();
  if (mask.b) out.d_b = dnu;
  return out;
}

double KktSystem::condition_number() const {
  if (jacobian.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(jacobian);
  const auto& s = svd.singularValues();
  const double smin = s[s.size() - 1];
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / smin;
}

KktSystem build_kkt_system(const ProblemParameters& params,
                           const PrimalDualSolution& z_star, double rho,
                           double tol) {
  params.validate();
  if (params.has_dual_box())
    throw Error("implicit differentiation expects a standard problem");
  if (rho < 0.0) throw Error("rho must be nonnegative");
  const Eigen::Index n = params.primal_dim();
  const Eigen::Index m = params.dual_dim();
  if (z_star.x.size() != n || z_star.y.size() != m)
    throw DimensionMismatch("z_star has wrong dimensions");

  KktSystem sys;
  sys.n = n;
  sys.m = m;
  sys.rho = rho;
  const double act_tol =
      std::max(tol * 10.0, 1e-9) * (1.0 + z_star.x.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (z_star.x[i] - params.lo[i] <= act_tol)
      sys.active_lower.push_back(i);
    else if (params.hi[i] - z_star.x[i] <= act_tol)
      sys.active_upper.push_back(i);
  }
  const Eigen::Index a =
      static_cast<Eigen::Index>(sys.active_lower.size() +
                                sys.active_upper.size());
  const Eigen::Index dim = n + m + a;
  MatrixXd K = MatrixXd::Zero(dim, dim);
  if (params.H) K.topLeftCorner(n, n) = *params.H;
  if (rho > 0.0) K.topLeftCorner(n, n).diagonal().array() += 1.0 / rho;
  if (m > 0) {
    K.block(0, n, n, m) = params.A.transpose();
    K.block(n, 0, m, n) = params.A;
  }
  Eigen::Index row = n + m;
  for (Eigen::Index i : sys.active_lower) {
    K(row, i) = 1.0;
    K(i, row) = 1.0;
    ++row;
  }
  for (Eigen::Index i : sys.active_upper) {
    K(row, i) = 1.0;
    K(i, row) = 1.0;
    ++row;
  }
  sys.jacobian = std::move(K);
  return sys;
}

UpdateVector implicit_gradient_qp(const ProblemParameters& params,
                                  const PrimalDualSolution& z_star,
                                  const VectorXd& grad_loss, double rho,
                                  double tol, const LearnableMask& mask) {
  if (grad_loss.size() != params.primal_dim())
    throw DimensionMismatch("grad_loss has wrong dimension");
  KktSystem sys = build_kkt_system(params, z_star, rho, tol);
  const Eigen::Index n = sys.n;
  const Eigen::Index m = sys.m;

  if (rho == 0.0) {
    // Strict complementarity: every active coordinate must carry a nonzero
    // bound multiplier -(H x + c + A^T y)_i.
    VectorXd r = params.c;
    if (params.H) r += *params.H * z_star.x;
    if (m > 0) r += params.A.transpose() * z_star.y;
    const double weak_tol = 1e-9 * (1.0 + r.cwiseAbs().maxCoeff());
    auto weakly_active = [&](Eigen::Index i) {
      return std::abs(r[i]) <= weak_tol;
    };
    for (Eigen::Index i : sys.active_lower)
      if (weakly_active(i))
        throw StrictComplementarityViolated(
            "active coordinate " + std::to_string(i) +
            " has a vanishing multiplier; consider rho > 0");
    for (Eigen::Index i : sys.active_upper)
      if (weakly_active(i))
        throw StrictComplementarityViolated(
            "active coordinate " + std::to_string(i) +
            " has a vanishing multiplier; consider rho > 0");
  }

  VectorXd rhs = VectorXd::Zero(sys.size());
  rhs.head(n) = grad_loss;

  Eigen::PartialPivLU<MatrixXd> lu(sys.jacobian);
  VectorXd u = lu.solve(rhs);
  // One round of iterative refinement.
  u += lu.solve(rhs - sys.jacobian * u);
  const double resid = (sys.jacobian * u - rhs).cwiseAbs().maxCoeff();
  if (!u.allFinite() || resid > 1e-8 * (1.0 + rhs.cwiseAbs().maxCoeff()))
    throw SingularSystem(
        "linearized optimality system is singular (active-set degeneracy); "
        "consider rho > 0");

  return sys.apply_adjoint(z_star, u, mask);
}

UpdateVector implicit_gradient_qp(const ProblemParameters& params,
                                  const PrimalDualSolution& z_star,
                                  const VectorXd& grad_loss, double rho,
                                  double tol) {
  return implicit_gradient_qp(params, z_star, grad_loss, rho, tol,
                              LearnableMask::all_of(params));
}

}  // namespace lpgd
