#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mirls/observation.hpp"
#include "mirls/operators.hpp"

namespace mirls {

enum class SpectrumDecay { exponential, linear };

std::string to_string(SpectrumDecay decay);
SpectrumDecay parse_decay(const std::string& name);  // "exp"/"exponential", "lin"/"linear"

/// Synthetic rank-r ground truth X0 = U diag(spectrum) V^T.
struct GroundTruth {
  Eigen::MatrixXd U;         // d1 x r, orthonormal columns
  Eigen::MatrixXd V;         // d2 x r, orthonormal columns
  Eigen::VectorXd spectrum;  // nonincreasing, spectrum[0] / spectrum[r-1] = kappa
  double kappa = 1.0;
  SpectrumDecay decay = SpectrumDecay::exponential;
  std::uint64_t seed = 0;

  Index rows() const { return U.rows(); }
  Index cols() const { return V.rows(); }
  Index rank() const { return spectrum.size(); }
  double frobenius_norm() const { return spectrum.norm(); }
  SparsePlusLowRank as_operator() const { return SparsePlusLowRank::factored(U, spectrum, V); }
};

/// floor(rho * r * (d1 + d2 - r)).
Index oversampling_to_m(double rho, Index r, Index d1, Index d2);

/// Singular values kappa ... 1, exponentially or linearly interpolated.
Eigen::VectorXd interpolated_spectrum(Index r, double kappa, SpectrumDecay decay);

GroundTruth generate_ground_truth(Index d1, Index d2, Index r, double kappa, SpectrumDecay decay,
                                  std::uint64_t seed);

/// Uniform sampling of m distinct entries without replacement, redrawn until
/// every row and every column holds at least `min_per_line` entries.
///
/// Throws CoverageInfeasible when the bound can never hold and
/// CoverageUnattainable after `max_attempts` unsuccessful draws.
std::vector<IndexPair> sample_omega(Index d1, Index d2, Index m, Index min_per_line,
                                    std::uint64_t seed, int max_attempts = 1000);

struct SamplingOutcome {
  std::vector<IndexPair> entries;
  int attempts = 0;
  bool coverage_met = false;
};

/// Same draw sequence as sample_omega, but hands back the last draw instead
/// of throwing when the attempt budget runs out.
SamplingOutcome sample_omega_best_effort(Index d1, Index d2, Index m, Index min_per_line,
                                         std::uint64_t seed, int max_attempts = 1000);

/// P_Omega(X0) evaluated from the factors in O(m r).
ObservationSet observe(const GroundTruth& truth, const std::vector<IndexPair>& omega);
ObservationSet observe(const GroundTruth& truth, PatternPtr omega);

/// ||X - X0||_F / ||X0||_F computed from the factors.
double relative_error(const SparsePlusLowRank& estimate, const GroundTruth& truth);

}  // namespace mirls
