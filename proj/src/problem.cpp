#include "mirls/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>

#include "mirls/errors.hpp"

namespace mirls {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(SpectrumDecay decay) {
  return decay == SpectrumDecay::exponential ? "exp" : "lin";
}

SpectrumDecay parse_decay(const std::string& name) {
  if (name == "exp" || name == "exponential") return SpectrumDecay::exponential;
  if (name == "lin" || name == "linear") return SpectrumDecay::linear;
  throw std::invalid_argument("unknown spectrum decay '" + name + "' (expected exp or lin)");
}

Index oversampling_to_m(double rho, Index r, Index d1, Index d2) {
  if (!(rho >= 1.0)) throw std::invalid_argument("oversampling factor must be >= 1");
  if (r <= 0 || d1 <= 0 || d2 <= 0) throw std::invalid_argument("rank and dimensions must be positive");
  if (r > std::min(d1, d2)) throw std::invalid_argument("rank exceeds min(d1, d2)");
  const double dof = static_cast<double>(r) * static_cast<double>(d1 + d2 - r);
  const double x = rho * dof;
  // absorb representation error of rho (e.g. 1.1) before flooring
  const Index m = static_cast<Index>(std::floor(x * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())));
  return std::min(m, d1 * d2);
}

VectorXd interpolated_spectrum(Index r, double kappa, SpectrumDecay decay) {
  if (r <= 0) throw std::invalid_argument("rank must be positive");
  if (!(kappa >= 1.0)) throw std::invalid_argument("condition number must be >= 1");
  if (r == 1) {
    if (kappa != 1.0) throw std::invalid_argument("rank 1 admits only kappa = 1");
    return VectorXd::Ones(1);
  }
  VectorXd s(r);
  const double rr = static_cast<double>(r - 1);
  for (Index i = 0; i < r; ++i) {
    const double t = static_cast<double>(i) / rr;
    s[i] = decay == SpectrumDecay::exponential ? kappa * std::exp(-std::log(kappa) * t)
                                               : kappa - (kappa - 1.0) * t;
  }
  s[r - 1] = 1.0;
  return s;
}

namespace {

MatrixXd random_orthonormal(Index d, Index r, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  MatrixXd G(d, r);
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < d; ++i) G(i, j) = normal(gen);
  Eigen::HouseholderQR<MatrixXd> qr(G);
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(d, r);
  // fix signs so that R has a positive diagonal (Haar-distributed span basis)
  for (Index j = 0; j < r; ++j)
    if (qr.matrixQR()(j, j) < 0) Q.col(j) *= -1.0;
  return Q;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::vector<IndexPair> draw_uniform(Index d1, Index d2, Index m, std::mt19937_64& gen) {
  const Index total = d1 * d2;
  std::vector<Index> lin;
  lin.reserve(static_cast<std::size_t>(m));
  if (2 * m <= total) {
    std::uniform_int_distribution<Index> pick(0, total - 1);
    std::unordered_set<Index> seen;
    seen.reserve(static_cast<std::size_t>(2 * m));
    while (static_cast<Index>(lin.size()) < m) {
      const Index x = pick(gen);
      if (seen.insert(x).second) lin.push_back(x);
    }
  } else {
    std::vector<Index> all(static_cast<std::size_t>(total));
    std::iota(all.begin(), all.end(), Index{0});
    for (Index i = 0; i < m; ++i) {
      std::uniform_int_distribution<Index> pick(i, total - 1);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(gen))]);
    }
    lin.assign(all.begin(), all.begin() + m);
  }
  std::sort(lin.begin(), lin.end());
  std::vector<IndexPair> out(lin.size());
  for (std::size_t l = 0; l < lin.size(); ++l) out[l] = {lin[l] / d2, lin[l] % d2};
  return out;
}

bool covers(Index d1, Index d2, const std::vector<IndexPair>& e, Index need) {
  if (need <= 0) return true;
  std::vector<Index> rc(static_cast<std::size_t>(d1), 0), cc(static_cast<std::size_t>(d2), 0);
  for (const auto& p : e) {
    ++rc[static_cast<std::size_t>(p.row)];
    ++cc[static_cast<std::size_t>(p.col)];
  }
  return *std::min_element(rc.begin(), rc.end()) >= need &&
         *std::min_element(cc.begin(), cc.end()) >= need;
}

}  // namespace

GroundTruth generate_ground_truth(Index d1, Index d2, Index r, double kappa, SpectrumDecay decay,
                                  std::uint64_t seed) {
  if (d1 <= 0 || d2 <= 0) throw std::invalid_argument("dimensions must be positive");
  if (r <= 0 || r > std::min(d1, d2)) throw std::invalid_argument("rank must lie in [1, min(d1, d2)]");
  GroundTruth t;
  t.spectrum = interpolated_spectrum(r, kappa, decay);
  std::mt19937_64 gen(splitmix64(seed));
  t.U = random_orthonormal(d1, r, gen);
  t.V = random_orthonormal(d2, r, gen);
  t.kappa = kappa;
  t.decay = decay;
  t.seed = seed;
  return t;
}

SamplingOutcome sample_omega_best_effort(Index d1, Index d2, Index m, Index min_per_line,
                                         std::uint64_t seed, int max_attempts) {
  if (d1 <= 0 || d2 <= 0) throw std::invalid_argument("dimensions must be positive");
  if (m < 0 || m > d1 * d2) throw std::invalid_argument("sample size must lie in [0, d1*d2]");
  if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  if (min_per_line > 0 &&
      (m < min_per_line * std::max(d1, d2) || min_per_line > std::min(d1, d2))) {
    throw CoverageInfeasible("coverage infeasible: " + std::to_string(m) +
                             " entries cannot give every row and column " +
                             std::to_string(min_per_line) + " samples");
  }
  std::mt19937_64 gen(splitmix64(seed ^ 0x5A3C0FFEE1234567ULL));
  SamplingOutcome out;
  for (int a = 1; a <= max_attempts; ++a) {
    out.entries = draw_uniform(d1, d2, m, gen);
    out.attempts = a;
    if (covers(d1, d2, out.entries, min_per_line)) {
      out.coverage_met = true;
      return out;
    }
  }
  return out;
}

std::vector<IndexPair> sample_omega(Index d1, Index d2, Index m, Index min_per_line,
                                    std::uint64_t seed, int max_attempts) {
  auto res = sample_omega_best_effort(d1, d2, m, min_per_line, seed, max_attempts);
  if (!res.coverage_met) {
    throw CoverageUnattainable("coverage unattainable: no draw out of " +
                               std::to_string(max_attempts) + " had >= " +
                               std::to_string(min_per_line) + " entries per row and column");
  }
  return std::move(res.entries);
}

ObservationSet observe(const GroundTruth& truth, PatternPtr omega) {
  if (!omega) throw std::invalid_argument("observe: null pattern");
  if (omega->rows() != truth.rows() || omega->cols() != truth.cols()) {
    throw DimensionError("observe: pattern dimensions differ from ground truth");
  }
  const Index r = truth.rank();
  const MatrixXd A = (truth.U * truth.spectrum.asDiagonal()).transpose();  // r x d1
  const MatrixXd B = truth.V.transpose();                                  // r x d2
  VectorXd y(omega->size());
  const auto& rows = omega->row_indices();
  const auto& cols = omega->col_indices();
  for (Index l = 0; l < omega->size(); ++l) {
    const double* a = A.data() + rows[l] * r;
    const double* b = B.data() + cols[l] * r;
    double s = 0.0;
    for (Index k = 0; k < r; ++k) s += a[k] * b[k];
    y[l] = s;
  }
  return ObservationSet(std::move(omega), std::move(y));
}

ObservationSet observe(const GroundTruth& truth, const std::vector<IndexPair>& omega) {
  return observe(truth, std::make_shared<const SamplingPattern>(truth.rows(), truth.cols(), omega));
}

double relative_error(const SparsePlusLowRank& estimate, const GroundTruth& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
    throw DimensionError("relative_error: estimate and truth dimensions differ");
  }
  const double denom = truth.frobenius_norm();
  if (!(denom > 0.0)) throw std::invalid_argument("relative_error: ground truth is zero");
  return difference_norm(estimate, truth.as_operator()) / denom;
}

}  // namespace mirls
