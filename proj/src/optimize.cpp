#include "hesitancy/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hesitancy/error.hpp"

namespace hesitancy {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd numerical_hessian(const LogDensityFn& f, const VectorXd& at) {
  const Eigen::Index n = at.size();
  MatrixXd h(n, n);
  VectorXd gp(n), gm(n);
  VectorXd x = at;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double step = 1e-5 * std::max(1.0, std::abs(at[j]));
    x[j] = at[j] + step;
    const double fp = f(x, gp);
    x[j] = at[j] - step;
    const double fm = f(x, gm);
    x[j] = at[j];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericalError("log density is not finite next to the Hessian point");
    h.col(j) = (gp - gm) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

MatrixXd regularized_covariance(const MatrixXd& precision, double floor) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(precision);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of the precision failed");
  const VectorXd inv = eig.eigenvalues().cwiseMax(floor).cwiseInverse();
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

ModeResult find_mode(const LogDensityFn& f, const VectorXd& start, const ModeOptions& opt) {
  ModeResult r;
  r.point = start;
  VectorXd grad(start.size());
  r.log_density = f(r.point, grad);
  if (!std::isfinite(r.log_density)) throw NumericalError("log density is not finite at the optimizer start");
  VectorXd trial_grad(start.size());
  for (r.iterations = 0; r.iterations < opt.max_iterations; ++r.iterations) {
    const MatrixXd neg_h = -numerical_hessian(f, r.point);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(neg_h);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of the Hessian failed");
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    const VectorXd curv = eig.eigenvalues().cwiseAbs().cwiseMax(1e-10 * scale);
    VectorXd step = eig.eigenvectors() * (eig.eigenvectors().transpose() * grad).cwiseQuotient(curv);
    if (step.norm() > opt.max_step) step *= opt.max_step / step.norm();

    double gained = -1.0;
    for (int halvings = 0; halvings < 40; ++halvings) {
      const VectorXd trial = r.point + step;
      const double lp = f(trial, trial_grad);
      if (std::isfinite(lp) && lp >= r.log_density) {
        gained = lp - r.log_density;
        r.point = trial;
        r.log_density = lp;
        grad = trial_grad;
        break;
      }
      step *= 0.5;
    }
    if (gained < 0.0 || gained < opt.tolerance) {
      r.converged = true;
      break;
    }
  }
  r.precision = -numerical_hessian(f, r.point);
  return r;
}

}  // namespace hesitancy
