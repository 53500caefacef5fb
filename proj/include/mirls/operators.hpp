#pragma once

#include <Eigen/Dense>

#include "mirls/observation.hpp"

namespace mirls {

/// Thin orthonormal bases U (d1 x r) and V (d2 x r) spanning the tangent
/// space at a rank-r point. Transposed copies are kept so that the per-entry
/// kernels read contiguous r-vectors.
class TangentBasis {
 public:
  TangentBasis() = default;
  TangentBasis(Eigen::MatrixXd U, Eigen::MatrixXd V);

  const Eigen::MatrixXd& U() const { return U_; }
  const Eigen::MatrixXd& V() const { return V_; }
  const Eigen::MatrixXd& Ut() const { return Ut_; }
  const Eigen::MatrixXd& Vt() const { return Vt_; }
  Index rank() const { return U_.cols(); }
  Index rows() const { return U_.rows(); }
  Index cols() const { return V_.rows(); }

 private:
  Eigen::MatrixXd U_, V_, Ut_, Vt_;
};

/// Element (Gamma1, Gamma2, Gamma3) of the coefficient space S_k.
///
/// Gamma1 is r x r, Gamma2 is r x d2 with Gamma2 * V = 0, Gamma3 is d1 x r
/// with U^T * Gamma3 = 0. The blocks are stored in full rectangular form.
struct TangentCoefficients {
  Eigen::MatrixXd gamma1;
  Eigen::MatrixXd gamma2;
  Eigen::MatrixXd gamma3;

  static TangentCoefficients zeros(Index r, Index d1, Index d2);
  static TangentCoefficients constant(Index r, Index d1, Index d2, double value);

  Index rank() const { return gamma1.rows(); }
  Index rows() const { return gamma3.rows(); }
  Index cols() const { return gamma2.cols(); }
  /// r(d1 + d2 + r)
  Index size() const { return gamma1.size() + gamma2.size() + gamma3.size(); }

  double squared_norm() const;
  double norm() const;
  bool all_finite() const;

  TangentCoefficients& operator+=(const TangentCoefficients& o);
  TangentCoefficients& operator-=(const TangentCoefficients& o);
  TangentCoefficients& operator*=(double s);
  /// Blockwise Hadamard product.
  TangentCoefficients cwise_product(const TangentCoefficients& o) const;
};

TangentCoefficients operator+(TangentCoefficients a, const TangentCoefficients& b);
TangentCoefficients operator-(TangentCoefficients a, const TangentCoefficients& b);
TangentCoefficients operator*(double s, TangentCoefficients a);

/// Euclidean inner product of the three stacked blocks.
double inner(const TangentCoefficients& a, const TangentCoefficients& b);
// y += alpha * x
void axpy(TangentCoefficients& y, double alpha, const TangentCoefficients& x);
// p = r + beta * p
void xpby(TangentCoefficients& p, const TangentCoefficients& r, double beta);

/// max(||Gamma2 V||_F, ||U^T Gamma3||_F)
double constraint_violation(const TangentCoefficients& g, const TangentBasis& basis);
/// Removes the components of Gamma2 along V and of Gamma3 along U.
void project_constraints(TangentCoefficients& g, const TangentBasis& basis);

/// Implicit d1 x d2 matrix X = P_Omega^*(residual) + U_left M1^T + M2 V_right^T.
///
/// Storage is O(m + r (d1 + d2)); nothing of size d1 * d2 is ever formed.
/// The pattern may be null, in which case the sparse part is absent.
class SparsePlusLowRank {
 public:
  SparsePlusLowRank() = default;
  SparsePlusLowRank(Index d1, Index d2, PatternPtr pattern, Eigen::VectorXd residual,
                    Eigen::MatrixXd U_left, Eigen::MatrixXd M1, Eigen::MatrixXd M2,
                    Eigen::MatrixXd V_right);

  static SparsePlusLowRank zero(Index d1, Index d2);
  static SparsePlusLowRank sparse(PatternPtr pattern, Eigen::VectorXd residual);
  /// U diag(s) V^T with no sparse part.
  static SparsePlusLowRank factored(const Eigen::MatrixXd& U, const Eigen::VectorXd& s,
                                    const Eigen::MatrixXd& V);

  Index rows() const { return d1_; }
  Index cols() const { return d2_; }
  const PatternPtr& pattern() const { return pattern_; }
  const Eigen::VectorXd& residual() const { return residual_; }
  const Eigen::MatrixXd& U_left() const { return U_left_; }
  const Eigen::MatrixXd& M1() const { return M1_; }
  const Eigen::MatrixXd& M2() const { return M2_; }
  const Eigen::MatrixXd& V_right() const { return V_right_; }
  bool has_sparse_part() const { return pattern_ != nullptr; }

  /// X z for z of length d2.
  Eigen::VectorXd matvec(const Eigen::VectorXd& z) const;
  /// X^T z for z of length d1.
  Eigen::VectorXd rmatvec(const Eigen::VectorXd& z) const;
  /// X Z for a block Z (d2 x k).
  Eigen::MatrixXd apply(const Eigen::MatrixXd& Z) const;
  /// X^T Z for a block Z (d1 x k).
  Eigen::MatrixXd apply_adjoint(const Eigen::MatrixXd& Z) const;

  /// Values of X at the entries of `omega` (P_Omega(X)).
  Eigen::VectorXd sample(const SamplingPattern& omega) const;

 private:
  Index d1_ = 0;
  Index d2_ = 0;
  PatternPtr pattern_;
  Eigen::VectorXd residual_;
  Eigen::MatrixXd U_left_, M1_, M2_, V_right_;
};

/// ||X||_F, evaluated from the factors via orthogonal-triangular reduction.
double frobenius_norm(const SparsePlusLowRank& X);
/// ||A - B||_F without materializing either matrix. Sparse parts must live
/// on the same pattern (or be absent).
double difference_norm(const SparsePlusLowRank& A, const SparsePlusLowRank& B);

/// P_T(gamma) = U Gamma1 V^T + U Gamma2 (I - V V^T) + (I - U U^T) Gamma3 V^T,
/// packed as U M1^T + M2 V^T with M1 = V Gamma1^T + Gamma2^T and M2 = Gamma3.
/// Throws InvariantError when gamma violates its constraints.
SparsePlusLowRank tangent_apply(const TangentCoefficients& gamma, const TangentBasis& basis);

/// P_T^*(Z) = (U^T Z V, U^T Z (I - V V^T), (I - U U^T) Z V).
TangentCoefficients tangent_adjoint(const SparsePlusLowRank& Z, const TangentBasis& basis);

/// P_Omega P_T(gamma), length m. Cost O(m r + r^2 d2).
Eigen::VectorXd omega_tangent_apply(const TangentCoefficients& gamma, const TangentBasis& basis,
                                    const SamplingPattern& omega);

/// P_T^* P_Omega^*(v). Cost O(m r + r^2 (d1 + d2)).
TangentCoefficients omega_tangent_adjoint(const Eigen::VectorXd& v, const TangentBasis& basis,
                                          const SamplingPattern& omega);

}  // namespace mirls
