#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "mirls/errors.hpp"
#include "mirls/weights.hpp"
#include "support/dense_oracles.hpp"

using namespace mirls;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// top r_k triplets of a random matrix, eps strictly between sigma_rk and sigma_rk+1
WeightState random_state(oracle::Rng& rng, Index d1, Index d2, Index rk, double eps_frac = 0.5) {
  const MatrixXd A = rng.gaussian(d1, d2);
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd s = svd.singularValues();
  const double eps = s[rk] + eps_frac * (s[rk - 1] - s[rk]);
  return WeightState(svd.matrixU().leftCols(rk), svd.matrixV().leftCols(rk), s.head(rk), eps);
}

MatrixXd dense_operator(const WeightState& W, bool inverse) {
  const Index d1 = W.rows(), d2 = W.cols();
  MatrixXd M(d1 * d2, d1 * d2);
  for (Index c = 0; c < d1 * d2; ++c) {
    MatrixXd E = MatrixXd::Zero(d1, d2);
    E(c % d1, c / d1) = 1.0;
    M.col(c) = oracle::vec(inverse ? apply_weight_inverse(W, E) : apply_weight(W, E));
  }
  return M;
}

}  // namespace

TEST_CASE("f_eps") {
  const double eps = 0.7;
  CHECK(f_eps(eps, eps) == doctest::Approx(std::log(eps)));
  CHECK(f_eps(std::nextafter(eps, 0.0), eps) == doctest::Approx(std::log(eps)).epsilon(1e-14));
  CHECK(f_eps(0.0, eps) == doctest::Approx(std::log(eps) - 0.5));
  CHECK(f_eps(3.0, eps) == doctest::Approx(std::log(3.0)));
  const double h = 1e-6;
  const double left = (f_eps(eps, eps) - f_eps(eps - h, eps)) / h;
  const double right = (f_eps(eps + h, eps) - f_eps(eps, eps)) / h;
  CHECK(left == doctest::Approx(1.0 / eps).epsilon(1e-5));
  CHECK(right == doctest::Approx(1.0 / eps).epsilon(1e-5));
  CHECK(f_eps_derivative(eps, eps) == doctest::Approx(1.0 / eps));
  CHECK(f_eps_derivative(0.1, eps) == doctest::Approx(0.1 / (eps * eps)));
}

TEST_CASE("F_eps") {
  const double eps = 0.3;
  CHECK(F_eps(MatrixXd(MatrixXd::Zero(4, 6)), eps) == doctest::Approx(4 * (std::log(eps) - 0.5)));
  VectorXd s(3);
  s << 2.0, 0.5, 0.1;
  MatrixXd D = MatrixXd::Zero(3, 5);
  D.diagonal() = s;
  const double ref = f_eps(2.0, eps) + f_eps(0.5, eps) + f_eps(0.1, eps);
  CHECK(F_eps(D, eps) == doctest::Approx(ref));
  CHECK(F_eps(s, eps) == doctest::Approx(ref));
  CHECK(F_eps(s.head(2), eps, 3) == doctest::Approx(f_eps(2.0, eps) + f_eps(0.5, eps) + f_eps(0.0, eps)));

  oracle::Rng rng(1);
  const MatrixXd A = rng.gaussian(15, 12);
  const VectorXd sv = Eigen::BDCSVD<MatrixXd>(A).singularValues();
  double acc = 0.0;
  for (Index i = 0; i < sv.size(); ++i) acc += f_eps(sv[i], 1.1);
  CHECK(F_eps(A, 1.1) == doctest::Approx(acc).epsilon(1e-13));
}

TEST_CASE("grad_F_eps") {
  CHECK(grad_F_eps(MatrixXd::Zero(5, 4), 0.2).norm() == 0.0);

  oracle::Rng rng(2);
  SUBCASE("all singular values above eps") {
    const MatrixXd A = rng.gaussian(6, 6) + 10.0 * MatrixXd::Identity(6, 6);
    Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const MatrixXd ref = svd.matrixU() * svd.singularValues().cwiseInverse().asDiagonal() * svd.matrixV().transpose();
    CHECK((grad_F_eps(A, 1e-3) - ref).norm() <= 1e-12 * ref.norm());
  }
  SUBCASE("central differences") {
    for (int trial = 0; trial < 5; ++trial) {
      const MatrixXd X = rng.gaussian(10, 10);
      const double eps = Eigen::JacobiSVD<MatrixXd>(X).singularValues()[5];
      const MatrixXd G = grad_F_eps(X, eps);
      const MatrixXd E = rng.gaussian(10, 10);
      const double h = 1e-5;
      const double fd = (F_eps(MatrixXd(X + h * E), eps) - F_eps(MatrixXd(X - h * E), eps)) / (2 * h);
      const double an = (G.array() * E.array()).sum();
      CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST_CASE("weight state invariants") {
  oracle::Rng rng(3);
  const MatrixXd U = rng.orthonormal(8, 2), V = rng.orthonormal(9, 2);
  VectorXd s(2);
  s << 3.0, 1.0;
  CHECK_NOTHROW(WeightState(U, V, s, 0.5));
  CHECK_THROWS_AS(WeightState(U, V, s, 1.0), InvariantError);  // tie goes to the eps block
  CHECK_THROWS_AS(WeightState(U, V, s, -1.0), InvariantError);
  VectorXd up(2);
  up << 1.0, 3.0;
  CHECK_THROWS_AS(WeightState(U, V, up, 0.5), InvariantError);
  CHECK_THROWS_AS(WeightState(2.0 * U, V, s, 0.5), InvariantError);
  CHECK_THROWS_AS(WeightState(U, V, s, 1e-2 * std::numeric_limits<double>::epsilon()), InvariantError);
  CHECK_THROWS(WeightState(U, rng.orthonormal(9, 3), s, 0.5));

  const WeightState W(U, V, s, 0.5);
  CHECK(W.H()(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(W.D()[1] == doctest::Approx(2.0));
  CHECK((W.H().array() < 1.0 / 0.25).all());
  CHECK((W.D().array() < 1.0 / 0.25).all());
}

TEST_CASE("apply_weight") {
  oracle::Rng rng(4);
  const WeightState W = random_state(rng, 20, 25, 3);
  const double eps = W.eps();
  SUBCASE("top pair is an eigenvector") {
    const MatrixXd Z = W.U().col(0) * W.V().col(0).transpose();
    const double s1 = W.sigma()[0];
    CHECK((apply_weight(W, Z) - Z / (s1 * s1)).norm() <= 1e-13 * Z.norm() / (s1 * s1));
  }
  SUBCASE("orthogonal complement scales by eps^-2") {
    const MatrixXd PU = MatrixXd::Identity(20, 20) - W.U() * W.U().transpose();
    const MatrixXd PV = MatrixXd::Identity(25, 25) - W.V() * W.V().transpose();
    const MatrixXd Z = PU * rng.gaussian(20, 25) * PV;
    CHECK((apply_weight(W, Z) - Z / (eps * eps)).norm() <= 1e-12 * Z.norm() / (eps * eps));
    CHECK((apply_weight_inverse(W, Z) - eps * eps * Z).norm() <= 1e-12 * Z.norm() * eps * eps);
  }
  SUBCASE("full-basis dense definition") {
    const MatrixXd Wd = oracle::weight_matrix(W.U(), W.V(), W.sigma(), eps);
    const MatrixXd Wi = oracle::weight_matrix(W.U(), W.V(), W.sigma(), eps, -1.0);
    for (int trial = 0; trial < 3; ++trial) {
      const MatrixXd Z = rng.gaussian(20, 25);
      const VectorXd ref = Wd * oracle::vec(Z);
      CHECK((oracle::vec(apply_weight(W, Z)) - ref).norm() <= 1e-11 * ref.norm());
      const VectorXd refi = Wi * oracle::vec(Z);
      CHECK((oracle::vec(apply_weight_inverse(W, Z)) - refi).norm() <= 1e-11 * refi.norm());
    }
  }
  SUBCASE("inverse composes to identity and W is self-adjoint") {
    const MatrixXd Z1 = rng.gaussian(20, 25), Z2 = rng.gaussian(20, 25);
    CHECK((apply_weight_inverse(W, apply_weight(W, Z1)) - Z1).norm() <= 1e-10 * Z1.norm());
    const double a = (apply_weight(W, Z1).array() * Z2.array()).sum();
    const double b = (Z1.array() * apply_weight(W, Z2).array()).sum();
    CHECK(std::abs(a - b) <= 1e-11 * std::abs(a) + 1e-11 * apply_weight(W, Z1).norm() * Z2.norm());
  }
  CHECK_THROWS_AS(apply_weight(W, MatrixXd::Zero(20, 24)), DimensionError);
  CHECK_THROWS_AS(apply_weight_inverse(W, MatrixXd::Zero(21, 25)), DimensionError);
}

TEST_CASE("weight spectrum equals the H entries") {
  oracle::Rng rng(5);
  const WeightState W = random_state(rng, 12, 12, 3);
  const MatrixXd M = dense_operator(W, false);
  CHECK((M - M.transpose()).norm() <= 1e-12 * M.norm());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()));
  std::vector<double> got(es.eigenvalues().data(), es.eigenvalues().data() + 144);
  std::vector<double> want;
  auto smax = [&](Index i) { return i < 3 ? W.sigma()[i] : W.eps(); };
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 12; ++j) want.push_back(1.0 / (smax(i) * smax(j)));
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  for (std::size_t k = 0; k < want.size(); ++k) CHECK(std::abs(got[k] - want[k]) <= 1e-9 * want.back());
  CHECK(got.front() > 0.0);
}

TEST_CASE("shifted_diag") {
  oracle::Rng rng(6);
  SUBCASE("sigma twice eps") {
    const double eps = 0.25;
    const WeightState W(rng.orthonormal(7, 3), rng.orthonormal(6, 3), VectorXd::Constant(3, 2 * eps), eps);
    const auto s = shifted_diag(W);
    CHECK((s.gamma2.array() - 1.0).abs().maxCoeff() <= 1e-15);
    CHECK((s.gamma3.array() - 1.0).abs().maxCoeff() <= 1e-15);
    CHECK((s.gamma1.array() - 1.0 / 3.0).abs().maxCoeff() <= 1e-15);
  }
  SUBCASE("decreasing in sigma") {
    double prev = std::numeric_limits<double>::infinity();
    for (double sig : {1.1, 2.0, 10.0, 1e3, 1e8}) {
      const WeightState W(rng.orthonormal(5, 1), rng.orthonormal(5, 1), VectorXd::Constant(1, sig), 1.0);
      const double v = shifted_diag(W).gamma2(0, 0);
      CHECK(v < prev);
      CHECK(v > 0.0);
      prev = v;
    }
    CHECK(prev < 1e-7);
  }
  SUBCASE("scalar oracle") {
    const WeightState W = random_state(rng, 9, 11, 4);
    const auto s = shifted_diag(W);
    const double e2 = W.eps() * W.eps();
    const MatrixXd H = W.H();
    const VectorXd D = W.D();
    for (Index i = 0; i < 4; ++i) {
      for (Index j = 0; j < 4; ++j) CHECK(s.gamma1(i, j) == doctest::Approx(e2 / (1.0 / H(i, j) - e2)).epsilon(1e-13));
      for (Index j = 0; j < 11; ++j) CHECK(s.gamma2(i, j) == doctest::Approx(e2 / (1.0 / D[i] - e2)).epsilon(1e-13));
      for (Index j = 0; j < 9; ++j) CHECK(s.gamma3(j, i) == doctest::Approx(e2 / (1.0 / D[i] - e2)).epsilon(1e-13));
    }
    CHECK(s.all_finite());
  }
}

TEST_CASE("isotropic state") {
  const WeightState W = WeightState::isotropic(4, 5, 0.5);
  CHECK(W.rank() == 0);
  const MatrixXd Z = MatrixXd::Ones(4, 5);
  CHECK((apply_weight(W, Z) - 4.0 * Z).norm() <= 1e-14);
  CHECK((apply_weight_inverse(W, Z) - 0.25 * Z).norm() <= 1e-14);
}
