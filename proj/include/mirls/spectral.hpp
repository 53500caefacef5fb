#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "mirls/operators.hpp"

namespace mirls {

/// Matrix-free operator accessed only through block products A Z and A^T Z.
struct LinearOperator {
  Index rows = 0;
  Index cols = 0;
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> apply;
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> apply_adjoint;
};

/// The returned operator refers to X; X must outlive it.
LinearOperator as_operator(const SparsePlusLowRank& X);
/// The returned operator refers to A; A must outlive it.
LinearOperator as_operator(const Eigen::MatrixXd& A);

struct SpectralResult {
  Eigen::MatrixXd U;      // d1 x k
  Eigen::VectorXd sigma;  // nonincreasing
  Eigen::MatrixXd V;      // d2 x k
};

/// Leading k singular triplets by a seeded randomized block Krylov method.
///
/// Block size is k with a Gaussian start block; the Krylov basis is built
/// from `iters` further block steps (A A^T) applied to the previous block,
/// each re-orthogonalized against the full basis twice. The Ritz values come
/// from a pivoted QR of A^T Q followed by a one-sided Jacobi SVD, which keeps
/// relative accuracy on strongly graded spectra.
///
/// The first nonzero entry of each u_i is made nonnegative.
SpectralResult top_singular_triplets(const LinearOperator& op, Index k, int iters = 20,
                                     std::uint64_t seed = 0);

}  // namespace mirls
