#include "mirls/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "mirls/errors.hpp"

namespace mirls {

using Eigen::MatrixXd;
using Eigen::VectorXd;

LinearOperator as_operator(const SparsePlusLowRank& X) {
  return {X.rows(), X.cols(), [&X](const MatrixXd& Z) { return X.apply(Z); },
          [&X](const MatrixXd& Z) { return X.apply_adjoint(Z); }};
}

LinearOperator as_operator(const MatrixXd& A) {
  return {A.rows(), A.cols(), [&A](const MatrixXd& Z) -> MatrixXd { return A * Z; },
          [&A](const MatrixXd& Z) -> MatrixXd { return A.transpose() * Z; }};
}

namespace {

MatrixXd gaussian(Index rows, Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  MatrixXd G(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) G(i, j) = normal(gen);
  return G;
}

// Growing orthonormal basis with two rounds of classical Gram-Schmidt per
// incoming column. Columns that collapse in the second round are dropped.
class KrylovBasis {
 public:
  KrylovBasis(Index n, Index capacity) : Q_(n, capacity), size_(0) {}

  Index size() const { return size_; }
  bool full() const { return size_ == Q_.cols(); }
  auto basis() const { return Q_.leftCols(size_); }

  // Returns the newly accepted columns.
  MatrixXd extend(const MatrixXd& Y) {
    const Index first = size_;
    for (Index c = 0; c < Y.cols() && !full(); ++c) {
      VectorXd y = Y.col(c);
      if (!(y.norm() > 0.0)) continue;
      double n1 = 0.0, n2 = 0.0;
      for (int pass = 0; pass < 2; ++pass) {
        if (size_ > 0) {
          const VectorXd h = Q_.leftCols(size_).transpose() * y;
          y.noalias() -= Q_.leftCols(size_) * h;
        }
        (pass == 0 ? n1 : n2) = y.norm();
      }
      if (!(n2 > 0.0) || n2 < 0.5 * n1) continue;
      Q_.col(size_++) = y / n2;
    }
    return Q_.middleCols(first, size_ - first);
  }

 private:
  MatrixXd Q_;
  Index size_;
};

void check_adjoint(const LinearOperator& op, std::mt19937_64& gen) {
  const MatrixXd x = gaussian(op.cols, 1, gen);
  const MatrixXd y = gaussian(op.rows, 1, gen);
  const MatrixXd Ax = op.apply(x);
  const MatrixXd Aty = op.apply_adjoint(y);
  if (Ax.rows() != op.rows || Ax.cols() != 1 || Aty.rows() != op.cols || Aty.cols() != 1) {
    throw DimensionError("linear operator returned blocks of the wrong shape");
  }
  const double lhs = y.col(0).dot(Ax.col(0));
  const double rhs = Aty.col(0).dot(x.col(0));
  const double scale = y.norm() * Ax.norm() + x.norm() * Aty.norm();
  if (std::abs(lhs - rhs) > 1e-8 * scale) {
    throw std::invalid_argument("linear operator: apply and apply_adjoint are not adjoint");
  }
}

}  // namespace

SpectralResult top_singular_triplets(const LinearOperator& op, Index k, int iters,
                                     std::uint64_t seed) {
  const Index d1 = op.rows;
  const Index d2 = op.cols;
  const Index dmin = std::min(d1, d2);
  if (d1 <= 0 || d2 <= 0) throw DimensionError("top_singular_triplets: empty operator");
  if (k < 1 || k > dmin) {
    throw std::invalid_argument("top_singular_triplets: k = " + std::to_string(k) +
                                " outside [1, min(d1, d2) = " + std::to_string(dmin) + "]");
  }
  if (iters < 0) throw std::invalid_argument("top_singular_triplets: iters must be >= 0");
  SpectralResult out;
  if (k == 0) {
    out.U.resize(d1, 0);
    out.V.resize(d2, 0);
    return out;
  }

  std::mt19937_64 gen(seed * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL);
  check_adjoint(op, gen);

  KrylovBasis K(d1, dmin);
  MatrixXd block = K.extend(op.apply(gaussian(d2, k, gen)));
  for (int it = 0; it < iters && !K.full() && block.cols() > 0; ++it) {
    block = K.extend(op.apply(op.apply_adjoint(block)));
  }
  // range exhausted before k directions were found: complete with random ones
  for (int guard = 0; K.size() < k && guard < 100; ++guard) K.extend(gaussian(d1, k - K.size(), gen));
  if (K.size() < k) throw NumericalError("top_singular_triplets: could not build a basis");

  const MatrixXd Q = K.basis();
  const Index p = Q.cols();
  const MatrixXd Bt = op.apply_adjoint(Q);  // (Q^T A)^T, d2 x p

  // Bt = Qb R P^T  =>  Q^T A = (P R^T) Qb^T
  Eigen::ColPivHouseholderQR<MatrixXd> qr(Bt);
  MatrixXd R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const MatrixXd C = (R * qr.colsPermutation().transpose()).transpose();  // p x p
  const MatrixXd Qb = qr.householderQ() * MatrixXd::Identity(d2, p);

  Eigen::JacobiSVD<MatrixXd> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.sigma = svd.singularValues().head(k);
  out.U = Q * svd.matrixU().leftCols(k);
  out.V = Qb * svd.matrixV().leftCols(k);

  for (Index i = 0; i < k; ++i) {
    for (Index a = 0; a < d1; ++a) {
      const double x = out.U(a, i);
      if (std::abs(x) > 1e-10) {
        if (x < 0) {
          out.U.col(i) *= -1.0;
          out.V.col(i) *= -1.0;
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace mirls
