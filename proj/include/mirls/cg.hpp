#pragma once

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "mirls/errors.hpp"

namespace mirls {

/// Vector-space hooks for Eigen vectors; TangentCoefficients provides its own.
inline double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b); }
inline void axpy(Eigen::VectorXd& y, double alpha, const Eigen::VectorXd& x) { y += alpha * x; }
inline void xpby(Eigen::VectorXd& p, const Eigen::VectorXd& r, double beta) { p = r + beta * p; }

template <class Vec>
struct CgResult {
  Vec solution;
  int iterations = 0;
  double relative_residual = 0.0;  // ||b - A x|| / ||b|| (recursive residual)
  int best_iteration = 0;          // step at which `solution` was reached
};

/// Unpreconditioned conjugate gradients for a self-adjoint positive definite
/// operator. Stops once ||r|| <= tol ||b||; otherwise returns, after max_iter
/// steps, the iterate with the smallest residual seen. In floating point the
/// residual of a tightly converged run can drift back up, so the last iterate
/// is not always the best one.
template <class Vec, class Apply>
CgResult<Vec> cg_solve(const Apply& A, const Vec& b, const Vec& x0, double tol, int max_iter) {
  CgResult<Vec> res;
  const double bnorm = std::sqrt(inner(b, b));
  if (!std::isfinite(bnorm)) throw NumericalError("cg_solve: right-hand side is not finite");
  if (bnorm == 0.0) {
    res.solution = b;  // zero of the right shape
    return res;
  }
  Vec x = x0;
  Vec r = b;
  axpy(r, -1.0, A(x));
  double rr = inner(r, r);
  res.relative_residual = std::sqrt(rr) / bnorm;
  if (!std::isfinite(rr)) throw NumericalError("cg_solve: initial residual is not finite");
  Vec p = r;
  Vec best = x;
  double best_res = res.relative_residual;
  int best_it = 0;
  int it = 0;
  while (res.relative_residual > tol && it < max_iter) {
    const Vec Ap = A(p);
    const double pAp = inner(p, Ap);
    if (!std::isfinite(pAp)) throw NumericalError("cg_solve: non-finite curvature at iteration " + std::to_string(it));
    if (pAp <= 0.0) break;  // exact solution reached or loss of definiteness
    const double alpha = rr / pAp;
    axpy(x, alpha, p);
    axpy(r, -alpha, Ap);
    const double rr_new = inner(r, r);
    ++it;
    res.relative_residual = std::sqrt(rr_new) / bnorm;
    if (!std::isfinite(rr_new)) throw NumericalError("cg_solve: non-finite residual at iteration " + std::to_string(it));
    if (res.relative_residual < best_res) {
      best_res = res.relative_residual;
      best_it = it;
      best = x;
    }
    xpby(p, r, rr_new / rr);
    rr = rr_new;
  }
  res.iterations = it;
  if (best_res < res.relative_residual) {
    res.solution = std::move(best);
    res.relative_residual = best_res;
    res.best_iteration = best_it;
  } else {
    res.solution = std::move(x);
    res.best_iteration = it;
  }
  return res;
}

}  // namespace mirls
