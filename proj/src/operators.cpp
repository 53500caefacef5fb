#include "mirls/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mirls/errors.hpp"

namespace mirls {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

double dot_r(const double* a, const double* b, Index r) {
  double s = 0.0;
  for (Index k = 0; k < r; ++k) s += a[k] * b[k];
  return s;
}

void axpy_r(double* y, double alpha, const double* x, Index r) {
  for (Index k = 0; k < r; ++k) y[k] += alpha * x[k];
}

bool same_pattern(const PatternPtr& a, const PatternPtr& b) {
  return a == b || (a && b && *a == *b);
}

// R factor of a thin QR; upper trapezoidal when L has more columns than rows.
MatrixXd triangular_factor(const MatrixXd& L) {
  Eigen::HouseholderQR<MatrixXd> qr(L);
  const Index p = std::min(L.rows(), L.cols());
  MatrixXd R = qr.matrixQR().topRows(p);
  for (Index j = 0; j < R.cols(); ++j)
    for (Index i = j + 1; i < p; ++i) R(i, j) = 0.0;
  return R;
}

// ||P_Omega^*(s) + L R^T||_F
double factored_norm(const SamplingPattern* omega, const VectorXd& s, const MatrixXd& L,
                     const MatrixXd& R) {
  double low2 = 0.0;
  if (L.cols() > 0) {
    const MatrixXd core = triangular_factor(L) * triangular_factor(R).transpose();
    low2 = core.squaredNorm();
  }
  double sparse2 = 0.0;
  double cross = 0.0;
  if (omega != nullptr && s.size() > 0) {
    sparse2 = s.squaredNorm();
    if (L.cols() > 0) {
      const MatrixXd Lt = L.transpose();
      const MatrixXd Rt = R.transpose();
      const auto& rows = omega->row_indices();
      const auto& cols = omega->col_indices();
      const Index c = L.cols();
      for (Index l = 0; l < omega->size(); ++l) {
        cross += s[l] * dot_r(Lt.data() + rows[l] * c, Rt.data() + cols[l] * c, c);
      }
    }
  }
  return std::sqrt(std::max(0.0, sparse2 + 2.0 * cross + low2));
}

}  // namespace

// ---------------------------------------------------------------- TangentBasis

TangentBasis::TangentBasis(MatrixXd U, MatrixXd V) : U_(std::move(U)), V_(std::move(V)) {
  require(U_.cols() == V_.cols(), "tangent basis: U and V need the same number of columns");
  Ut_ = U_.transpose();
  Vt_ = V_.transpose();
}

// ---------------------------------------------------------- TangentCoefficients

TangentCoefficients TangentCoefficients::zeros(Index r, Index d1, Index d2) {
  return {MatrixXd::Zero(r, r), MatrixXd::Zero(r, d2), MatrixXd::Zero(d1, r)};
}

TangentCoefficients TangentCoefficients::constant(Index r, Index d1, Index d2, double value) {
  return {MatrixXd::Constant(r, r, value), MatrixXd::Constant(r, d2, value),
          MatrixXd::Constant(d1, r, value)};
}

double TangentCoefficients::squared_norm() const {
  return gamma1.squaredNorm() + gamma2.squaredNorm() + gamma3.squaredNorm();
}

double TangentCoefficients::norm() const { return std::sqrt(squared_norm()); }

bool TangentCoefficients::all_finite() const {
  return gamma1.allFinite() && gamma2.allFinite() && gamma3.allFinite();
}

TangentCoefficients& TangentCoefficients::operator+=(const TangentCoefficients& o) {
  gamma1 += o.gamma1;
  gamma2 += o.gamma2;
  gamma3 += o.gamma3;
  return *this;
}

TangentCoefficients& TangentCoefficients::operator-=(const TangentCoefficients& o) {
  gamma1 -= o.gamma1;
  gamma2 -= o.gamma2;
  gamma3 -= o.gamma3;
  return *this;
}

TangentCoefficients& TangentCoefficients::operator*=(double s) {
  gamma1 *= s;
  gamma2 *= s;
  gamma3 *= s;
  return *this;
}

TangentCoefficients TangentCoefficients::cwise_product(const TangentCoefficients& o) const {
  return {gamma1.cwiseProduct(o.gamma1), gamma2.cwiseProduct(o.gamma2),
          gamma3.cwiseProduct(o.gamma3)};
}

TangentCoefficients operator+(TangentCoefficients a, const TangentCoefficients& b) {
  a += b;
  return a;
}

TangentCoefficients operator-(TangentCoefficients a, const TangentCoefficients& b) {
  a -= b;
  return a;
}

TangentCoefficients operator*(double s, TangentCoefficients a) {
  a *= s;
  return a;
}

double inner(const TangentCoefficients& a, const TangentCoefficients& b) {
  if (a.rank() != b.rank() || a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("inner: coefficient shapes differ");
  return a.gamma1.cwiseProduct(b.gamma1).sum() + a.gamma2.cwiseProduct(b.gamma2).sum() +
         a.gamma3.cwiseProduct(b.gamma3).sum();
}

void axpy(TangentCoefficients& y, double alpha, const TangentCoefficients& x) {
  y.gamma1 += alpha * x.gamma1;
  y.gamma2 += alpha * x.gamma2;
  y.gamma3 += alpha * x.gamma3;
}

void xpby(TangentCoefficients& p, const TangentCoefficients& r, double beta) {
  p.gamma1 = r.gamma1 + beta * p.gamma1;
  p.gamma2 = r.gamma2 + beta * p.gamma2;
  p.gamma3 = r.gamma3 + beta * p.gamma3;
}

double constraint_violation(const TangentCoefficients& g, const TangentBasis& basis) {
  if (g.rank() == 0) return 0.0;
  return std::max((g.gamma2 * basis.V()).norm(), (basis.Ut() * g.gamma3).norm());
}

void project_constraints(TangentCoefficients& g, const TangentBasis& basis) {
  if (g.rank() == 0) return;
  g.gamma2 -= (g.gamma2 * basis.V()) * basis.Vt();
  g.gamma3 -= basis.U() * (basis.Ut() * g.gamma3);
}

// ------------------------------------------------------------ SparsePlusLowRank

SparsePlusLowRank::SparsePlusLowRank(Index d1, Index d2, PatternPtr pattern, VectorXd residual,
                                     MatrixXd U_left, MatrixXd M1, MatrixXd M2,
                                     MatrixXd V_right)
    : d1_(d1),
      d2_(d2),
      pattern_(std::move(pattern)),
      residual_(std::move(residual)),
      U_left_(std::move(U_left)),
      M1_(std::move(M1)),
      M2_(std::move(M2)),
      V_right_(std::move(V_right)) {
  require(d1_ > 0 && d2_ > 0, "sparse-plus-low-rank: dimensions must be positive");
  if (pattern_) {
    require(pattern_->rows() == d1_ && pattern_->cols() == d2_,
            "sparse-plus-low-rank: pattern dimensions differ");
    require(residual_.size() == pattern_->size(),
            "sparse-plus-low-rank: residual length must equal pattern size");
  } else {
    require(residual_.size() == 0, "sparse-plus-low-rank: residual without pattern");
  }
  if (U_left_.size() == 0 && M1_.size() == 0) {
    U_left_.resize(d1_, 0);
    M1_.resize(d2_, 0);
  }
  if (M2_.size() == 0 && V_right_.size() == 0) {
    M2_.resize(d1_, 0);
    V_right_.resize(d2_, 0);
  }
  require(U_left_.rows() == d1_ && M1_.rows() == d2_ && U_left_.cols() == M1_.cols(),
          "sparse-plus-low-rank: U_left / M1 shapes");
  require(M2_.rows() == d1_ && V_right_.rows() == d2_ && M2_.cols() == V_right_.cols(),
          "sparse-plus-low-rank: M2 / V_right shapes");
}

SparsePlusLowRank SparsePlusLowRank::zero(Index d1, Index d2) {
  return SparsePlusLowRank(d1, d2, nullptr, VectorXd(), MatrixXd(), MatrixXd(), MatrixXd(),
                           MatrixXd());
}

SparsePlusLowRank SparsePlusLowRank::sparse(PatternPtr pattern, VectorXd residual) {
  require(pattern != nullptr, "sparse-plus-low-rank: null pattern");
  const Index d1 = pattern->rows();
  const Index d2 = pattern->cols();
  return SparsePlusLowRank(d1, d2, std::move(pattern), std::move(residual), MatrixXd(),
                           MatrixXd(), MatrixXd(), MatrixXd());
}

SparsePlusLowRank SparsePlusLowRank::factored(const MatrixXd& U, const VectorXd& s,
                                              const MatrixXd& V) {
  require(U.cols() == s.size() && V.cols() == s.size(), "factored: rank mismatch");
  return SparsePlusLowRank(U.rows(), V.rows(), nullptr, VectorXd(), U, V * s.asDiagonal(),
                           MatrixXd(), MatrixXd());
}

VectorXd SparsePlusLowRank::matvec(const VectorXd& z) const {
  require(z.size() == d2_, "matvec: vector length must equal cols");
  VectorXd out = U_left_ * (M1_.transpose() * z) + M2_ * (V_right_.transpose() * z);
  if (pattern_) {
    const auto& rows = pattern_->row_indices();
    const auto& cols = pattern_->col_indices();
    for (Index l = 0; l < residual_.size(); ++l) out[rows[l]] += residual_[l] * z[cols[l]];
  }
  return out;
}

VectorXd SparsePlusLowRank::rmatvec(const VectorXd& z) const {
  require(z.size() == d1_, "rmatvec: vector length must equal rows");
  VectorXd out = M1_ * (U_left_.transpose() * z) + V_right_ * (M2_.transpose() * z);
  if (pattern_) {
    const auto& rows = pattern_->row_indices();
    const auto& cols = pattern_->col_indices();
    for (Index l = 0; l < residual_.size(); ++l) out[cols[l]] += residual_[l] * z[rows[l]];
  }
  return out;
}

MatrixXd SparsePlusLowRank::apply(const MatrixXd& Z) const {
  require(Z.rows() == d2_, "apply: block rows must equal cols");
  const Index k = Z.cols();
  MatrixXd outT = MatrixXd::Zero(k, d1_);
  if (pattern_ && k > 0) {
    const MatrixXd Zt = Z.transpose();
    const auto& rows = pattern_->row_indices();
    const auto& cols = pattern_->col_indices();
    for (Index l = 0; l < residual_.size(); ++l) {
      axpy_r(outT.data() + rows[l] * k, residual_[l], Zt.data() + cols[l] * k, k);
    }
  }
  MatrixXd out = outT.transpose();
  out.noalias() += U_left_ * (M1_.transpose() * Z);
  out.noalias() += M2_ * (V_right_.transpose() * Z);
  return out;
}

MatrixXd SparsePlusLowRank::apply_adjoint(const MatrixXd& Z) const {
  require(Z.rows() == d1_, "apply_adjoint: block rows must equal rows");
  const Index k = Z.cols();
  MatrixXd outT = MatrixXd::Zero(k, d2_);
  if (pattern_ && k > 0) {
    const MatrixXd Zt = Z.transpose();
    const auto& rows = pattern_->row_indices();
    const auto& cols = pattern_->col_indices();
    for (Index l = 0; l < residual_.size(); ++l) {
      axpy_r(outT.data() + cols[l] * k, residual_[l], Zt.data() + rows[l] * k, k);
    }
  }
  MatrixXd out = outT.transpose();
  out.noalias() += M1_ * (U_left_.transpose() * Z);
  out.noalias() += V_right_ * (M2_.transpose() * Z);
  return out;
}

VectorXd SparsePlusLowRank::sample(const SamplingPattern& omega) const {
  require(omega.rows() == d1_ && omega.cols() == d2_, "sample: pattern dimensions differ");
  const Index m = omega.size();
  const auto& rows = omega.row_indices();
  const auto& cols = omega.col_indices();
  VectorXd out = VectorXd::Zero(m);

  if (pattern_) {
    if (pattern_.get() == &omega || *pattern_ == omega) {
      out = residual_;
    } else {
      // both patterns are sorted row-major: merge walk
      const auto& pr = pattern_->row_indices();
      const auto& pc = pattern_->col_indices();
      Index a = 0;
      for (Index l = 0; l < m; ++l) {
        const IndexPair want{rows[l], cols[l]};
        while (a < pattern_->size() && IndexPair{pr[a], pc[a]} < want) ++a;
        if (a < pattern_->size() && pr[a] == want.row && pc[a] == want.col) out[l] = residual_[a];
      }
    }
  }

  const Index r1 = U_left_.cols();
  const Index r2 = M2_.cols();
  if (r1 > 0) {
    const MatrixXd At = U_left_.transpose();
    const MatrixXd Bt = M1_.transpose();
    for (Index l = 0; l < m; ++l)
      out[l] += dot_r(At.data() + rows[l] * r1, Bt.data() + cols[l] * r1, r1);
  }
  if (r2 > 0) {
    const MatrixXd At = M2_.transpose();
    const MatrixXd Bt = V_right_.transpose();
    for (Index l = 0; l < m; ++l)
      out[l] += dot_r(At.data() + rows[l] * r2, Bt.data() + cols[l] * r2, r2);
  }
  return out;
}

double frobenius_norm(const SparsePlusLowRank& X) {
  MatrixXd L(X.rows(), X.U_left().cols() + X.M2().cols());
  MatrixXd R(X.cols(), L.cols());
  L << X.U_left(), X.M2();
  R << X.M1(), X.V_right();
  return factored_norm(X.pattern().get(), X.residual(), L, R);
}

double difference_norm(const SparsePlusLowRank& A, const SparsePlusLowRank& B) {
  require(A.rows() == B.rows() && A.cols() == B.cols(), "difference_norm: dimensions differ");
  const PatternPtr* pattern = nullptr;
  VectorXd s;
  if (A.has_sparse_part() && B.has_sparse_part()) {
    if (!same_pattern(A.pattern(), B.pattern())) {
      throw std::invalid_argument("difference_norm: sparse parts live on different patterns");
    }
    pattern = &A.pattern();
    s = A.residual() - B.residual();
  } else if (A.has_sparse_part()) {
    pattern = &A.pattern();
    s = A.residual();
  } else if (B.has_sparse_part()) {
    pattern = &B.pattern();
    s = -B.residual();
  }
  const Index c = A.U_left().cols() + A.M2().cols() + B.U_left().cols() + B.M2().cols();
  MatrixXd L(A.rows(), c);
  MatrixXd R(A.cols(), c);
  L << A.U_left(), A.M2(), -B.U_left(), -B.M2();
  R << A.M1(), A.V_right(), B.M1(), B.V_right();
  return factored_norm(pattern ? pattern->get() : nullptr, s, L, R);
}

// ------------------------------------------------------------- tangent kernels

namespace {

void check_gamma_shape(const TangentCoefficients& g, const TangentBasis& basis) {
  const Index r = basis.rank();
  require(g.gamma1.rows() == r && g.gamma1.cols() == r, "tangent coefficients: Gamma1 shape");
  require(g.gamma2.rows() == r && g.gamma2.cols() == basis.cols(),
          "tangent coefficients: Gamma2 shape");
  require(g.gamma3.rows() == basis.rows() && g.gamma3.cols() == r,
          "tangent coefficients: Gamma3 shape");
}

void check_pattern(const SamplingPattern& omega, const TangentBasis& basis) {
  require(omega.rows() == basis.rows() && omega.cols() == basis.cols(),
          "sampling pattern does not match tangent basis dimensions");
}

}  // namespace

SparsePlusLowRank tangent_apply(const TangentCoefficients& gamma, const TangentBasis& basis) {
  check_gamma_shape(gamma, basis);
  const double scale = gamma.norm();
  const double violation = constraint_violation(gamma, basis);
  if (violation > 1e-8 * scale) {
    throw InvariantError("tangent_apply: coefficient constraints violated (" +
                         std::to_string(violation) + " vs scale " + std::to_string(scale) + ")");
  }
  MatrixXd M1 = basis.V() * gamma.gamma1.transpose() + gamma.gamma2.transpose();
  return SparsePlusLowRank(basis.rows(), basis.cols(), nullptr, VectorXd(), basis.U(),
                           std::move(M1), gamma.gamma3, basis.V());
}

TangentCoefficients tangent_adjoint(const SparsePlusLowRank& Z, const TangentBasis& basis) {
  require(Z.rows() == basis.rows() && Z.cols() == basis.cols(),
          "tangent_adjoint: operator and basis dimensions differ");
  const MatrixXd ZV = Z.apply(basis.V());
  const MatrixXd ZtU = Z.apply_adjoint(basis.U());
  TangentCoefficients g;
  g.gamma1 = basis.Ut() * ZV;
  g.gamma2 = ZtU.transpose() - g.gamma1 * basis.Vt();
  g.gamma3 = ZV - basis.U() * g.gamma1;
  return g;
}

VectorXd omega_tangent_apply(const TangentCoefficients& gamma, const TangentBasis& basis,
                             const SamplingPattern& omega) {
  check_gamma_shape(gamma, basis);
  check_pattern(omega, basis);
  const Index r = basis.rank();
  const Index m = omega.size();
  VectorXd out = VectorXd::Zero(m);
  if (r == 0) return out;

  const MatrixXd A = gamma.gamma1 * basis.Vt() + gamma.gamma2;  // r x d2
  const MatrixXd G3t = gamma.gamma3.transpose();                // r x d1
  const double* Ut = basis.Ut().data();
  const double* Vt = basis.Vt().data();
  const auto& rows = omega.row_indices();
  const auto& cols = omega.col_indices();
  for (Index l = 0; l < m; ++l) {
    const Index i = rows[l] * r;
    const Index j = cols[l] * r;
    out[l] = dot_r(Ut + i, A.data() + j, r) + dot_r(G3t.data() + i, Vt + j, r);
  }
  return out;
}

TangentCoefficients omega_tangent_adjoint(const VectorXd& v, const TangentBasis& basis,
                                          const SamplingPattern& omega) {
  check_pattern(omega, basis);
  require(v.size() == omega.size(), "omega_tangent_adjoint: vector length must equal m");
  const Index r = basis.rank();
  if (r == 0) return TangentCoefficients::zeros(0, basis.rows(), basis.cols());

  MatrixXd ZVt = MatrixXd::Zero(r, basis.rows());   // (Z V)^T
  MatrixXd UtZ = MatrixXd::Zero(r, basis.cols());   // U^T Z
  const double* Ut = basis.Ut().data();
  const double* Vt = basis.Vt().data();
  const auto& rows = omega.row_indices();
  const auto& cols = omega.col_indices();
  for (Index l = 0; l < omega.size(); ++l) {
    const Index i = rows[l] * r;
    const Index j = cols[l] * r;
    axpy_r(ZVt.data() + i, v[l], Vt + j, r);
    axpy_r(UtZ.data() + j, v[l], Ut + i, r);
  }
  TangentCoefficients g;
  g.gamma1 = basis.Ut() * ZVt.transpose();
  g.gamma2 = UtZ - g.gamma1 * basis.Vt();
  g.gamma3 = ZVt.transpose() - basis.U() * g.gamma1;
  return g;
}

}  // namespace mirls
