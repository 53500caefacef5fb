#include "mirls/weights.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mirls/errors.hpp"

namespace mirls {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double f_eps(double sigma, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("f_eps: eps must be positive");
  sigma = std::abs(sigma);
  if (sigma >= eps) return std::log(sigma);
  const double t = sigma / eps;
  return std::log(eps) + 0.5 * (t * t - 1.0);
}

double f_eps_derivative(double sigma, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("f_eps: eps must be positive");
  const double m = std::max(std::abs(sigma), eps);
  return sigma / (m * m);
}

double F_eps(const VectorXd& spectrum, double eps, Index dim) {
  if (dim < 0) dim = spectrum.size();
  if (dim < spectrum.size()) throw DimensionError("F_eps: spectrum longer than dimension");
  double s = 0.0;
  for (Index i = 0; i < spectrum.size(); ++i) s += f_eps(spectrum[i], eps);
  s += static_cast<double>(dim - spectrum.size()) * f_eps(0.0, eps);
  return s;
}

double F_eps(const MatrixXd& X, double eps) {
  Eigen::JacobiSVD<MatrixXd> svd(X);
  return F_eps(VectorXd(svd.singularValues()), eps);
}

MatrixXd grad_F_eps(const MatrixXd& X, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("grad_F_eps: eps must be positive");
  Eigen::JacobiSVD<MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  VectorXd g = svd.singularValues();
  for (Index i = 0; i < g.size(); ++i) g[i] = f_eps_derivative(g[i], eps);
  return svd.matrixU() * g.asDiagonal() * svd.matrixV().transpose();
}

WeightState::WeightState(MatrixXd U_top, MatrixXd V_top, VectorXd sigma_top, double eps)
    : basis_(std::move(U_top), std::move(V_top)), sigma_(std::move(sigma_top)), eps_(eps) {
  if (!(eps_ > 0.0) || !std::isfinite(eps_)) throw InvariantError("weight state: eps must be positive and finite");
  const Index r = sigma_.size();
  if (basis_.rank() != r) throw DimensionError("weight state: basis rank differs from sigma length");
  for (Index i = 0; i < r; ++i) {
    if (!(sigma_[i] > eps_)) {
      throw InvariantError("weight state: sigma_" + std::to_string(i + 1) + " = " +
                           std::to_string(sigma_[i]) + " is not above eps = " + std::to_string(eps_));
    }
    if (i > 0 && sigma_[i] > sigma_[i - 1]) throw InvariantError("weight state: sigma must be nonincreasing");
  }
  if (r > 0) {
    const double floor = 1e-2 * std::numeric_limits<double>::epsilon() * sigma_[0];
    if (eps_ < floor) throw InvariantError("weight state: eps below the representable floor");
    const MatrixXd I = MatrixXd::Identity(r, r);
    const double ou = (basis_.Ut() * basis_.U() - I).cwiseAbs().maxCoeff();
    const double ov = (basis_.Vt() * basis_.V() - I).cwiseAbs().maxCoeff();
    if (ou > 1e-10 || ov > 1e-10) throw InvariantError("weight state: singular vectors not orthonormal");
  }
}

WeightState WeightState::isotropic(Index d1, Index d2, double eps) {
  return WeightState(MatrixXd(d1, 0), MatrixXd(d2, 0), VectorXd(0), eps);
}

MatrixXd WeightState::H() const {
  const VectorXd inv = sigma_.cwiseInverse();
  return inv * inv.transpose();
}

VectorXd WeightState::D() const { return (sigma_ * eps_).cwiseInverse(); }

namespace {

// U (A o (U^T Z V)) V^T + U diag(b) U^T Z (I - VV^T) + (I - UU^T) Z V diag(b) V^T + c Z
MatrixXd structured_apply(const WeightState& W, const MatrixXd& Z, const MatrixXd& A,
                          const VectorXd& b, double c) {
  if (Z.rows() != W.rows() || Z.cols() != W.cols()) throw DimensionError("weight operator: Z has wrong shape");
  if (W.rank() == 0) return c * Z;
  const MatrixXd& U = W.U();
  const MatrixXd& V = W.V();
  const MatrixXd ZV = Z * V;
  const MatrixXd UtZ = U.transpose() * Z;
  const MatrixXd core = U.transpose() * ZV;
  const MatrixXd UtZP = UtZ - core * V.transpose();  // U^T Z (I - VV^T)
  const MatrixXd PZV = ZV - U * core;               // (I - UU^T) Z V
  return U * A.cwiseProduct(core) * V.transpose() + U * b.asDiagonal() * UtZP +
         PZV * b.asDiagonal() * V.transpose() + c * Z;
}

}  // namespace

MatrixXd apply_weight(const WeightState& W, const MatrixXd& Z) {
  const double e2 = 1.0 / (W.eps() * W.eps());
  const Index r = W.rank();
  return structured_apply(W, Z, W.H() - MatrixXd::Constant(r, r, e2), W.D().array() - e2, e2);
}

MatrixXd apply_weight_inverse(const WeightState& W, const MatrixXd& Z) {
  const double e2 = W.eps() * W.eps();
  const VectorXd& s = W.sigma();
  const MatrixXd Hinv = s * s.transpose();
  const VectorXd Dinv = s * W.eps();
  const Index r = W.rank();
  return structured_apply(W, Z, Hinv - MatrixXd::Constant(r, r, e2), Dinv.array() - e2, e2);
}

TangentCoefficients shifted_diag(const WeightState& W) {
  const Index r = W.rank();
  const double eps = W.eps();
  const double e2 = eps * eps;
  const VectorXd& s = W.sigma();
  for (Index i = 0; i < r; ++i) {
    if (!(s[i] > eps)) throw InvariantError("shifted_diag: sigma not above eps");
  }
  TangentCoefficients d = TangentCoefficients::zeros(r, W.rows(), W.cols());
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < r; ++i) d.gamma1(i, j) = e2 / (s[i] * s[j] - e2);
  for (Index i = 0; i < r; ++i) {
    // eps^2 / (sigma_i eps - eps^2) = eps / (sigma_i - eps)
    const double v = eps / (s[i] - eps);
    d.gamma2.row(i).setConstant(v);
    d.gamma3.col(i).setConstant(v);
  }
  return d;
}

}  // namespace mirls
