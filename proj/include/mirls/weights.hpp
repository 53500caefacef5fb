#pragma once

#include <Eigen/Dense>

#include "mirls/operators.hpp"

namespace mirls {

/// Smoothed logarithm: log(sigma) for sigma >= eps, quadratic below.
double f_eps(double sigma, double eps);

/// Derivative of f_eps in sigma: sigma / max(sigma, eps)^2.
double f_eps_derivative(double sigma, double eps);

/// F_eps over an explicit spectrum; `dim` pads with zero singular values
/// up to min(d1, d2) when the spectrum is shorter.
double F_eps(const Eigen::VectorXd& spectrum, double eps, Index dim = -1);

/// F_eps(X) via a full SVD. O(d^3): a test / diagnostic oracle only.
double F_eps(const Eigen::MatrixXd& X, double eps);

/// Gradient U diag(sigma_i / max(sigma_i, eps)^2) V^T via a full SVD.
Eigen::MatrixXd grad_F_eps(const Eigen::MatrixXd& X, double eps);

/// Everything that defines the weight operator W^(k): the r_k leading
/// singular triplets of X^(k) and the smoothing parameter eps_k.
///
/// Invariants (checked on construction): sigma strictly above eps and
/// nonincreasing, orthonormal U / V columns, and eps not so small relative
/// to sigma_1 that eps^-2 scaled quantities would lose all precision.
class WeightState {
 public:
  WeightState(Eigen::MatrixXd U_top, Eigen::MatrixXd V_top, Eigen::VectorXd sigma_top, double eps);

  /// Isotropic state (r_k = 0): W = eps^-2 Id.
  static WeightState isotropic(Index d1, Index d2, double eps);

  const TangentBasis& basis() const { return basis_; }
  const Eigen::MatrixXd& U() const { return basis_.U(); }
  const Eigen::MatrixXd& V() const { return basis_.V(); }
  const Eigen::VectorXd& sigma() const { return sigma_; }
  double eps() const { return eps_; }
  Index rank() const { return sigma_.size(); }
  Index rows() const { return basis_.rows(); }
  Index cols() const { return basis_.cols(); }

  /// H_ij = 1 / (sigma_i sigma_j), r_k x r_k.
  Eigen::MatrixXd H() const;
  /// D_ii = 1 / (sigma_i eps).
  Eigen::VectorXd D() const;

 private:
  TangentBasis basis_;
  Eigen::VectorXd sigma_;
  double eps_;
};

/// W(Z) through the thin-basis simplification. Dense; tests only.
Eigen::MatrixXd apply_weight(const WeightState& W, const Eigen::MatrixXd& Z);
/// W^{-1}(Z): the same structure with H, D, eps^-2 replaced by reciprocals.
Eigen::MatrixXd apply_weight_inverse(const WeightState& W, const Eigen::MatrixXd& Z);

/// eps^2 (D_S^{-1} - eps^2 I)^{-1} laid out over S_k:
///   Gamma1(i,j): eps^2 / (sigma_i sigma_j - eps^2)
///   Gamma2 row i: eps^2 / (sigma_i eps - eps^2)
///   Gamma3 col j: eps^2 / (sigma_j eps - eps^2)
TangentCoefficients shifted_diag(const WeightState& W);

}  // namespace mirls
