#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mirls/cg.hpp"
#include "mirls/observation.hpp"
#include "mirls/operators.hpp"
#include "mirls/problem.hpp"
#include "mirls/weights.hpp"

namespace mirls {

struct IRLSConfig {
  Index rank_estimate = 1;                 // r~
  int max_outer = 400;                     // N_0
  double rel_change_tol = 1e-9;
  int cg_max_inner = 500;
  double cg_tol_scale = 1e-5;
  std::optional<double> kappa_hint;        // replaces sigma_1 in the CG tolerance
  int krylov_iters = 20;
  double eps_floor_scale = 1e2 * std::numeric_limits<double>::epsilon();
  Index active_rank_cap = 0;               // 0: every sigma_i > eps enters the weight
  std::uint64_t seed = 0;
  // called after every outer iteration with its record and the new iterate
  std::function<void(const struct IterationRecord&, const SparsePlusLowRank&)> on_iteration;

  void validate() const;
};

enum class StopReason { rel_change, max_outer, eps_floor };
std::string to_string(StopReason reason);

struct IterationRecord {
  int iteration = 0;
  double eps = 0.0;
  Index active_rank = 0;
  int cg_iterations = 0;
  double cg_residual = 0.0;
  double cg_tolerance = 0.0;
  double rel_change = 0.0;
  std::optional<double> rel_error;
  double wall_time_s = 0.0;
};

struct ConvergenceRecord {
  std::vector<IterationRecord> iterations;
  StopReason stop = StopReason::max_outer;
};

/// One JSON object per outer iteration, newline separated.
std::string to_json_lines(const ConvergenceRecord& record);

/// With W = Id the minimum-norm interpolant is P_Omega^*(y).
SparsePlusLowRank initial_iterate(const ObservationSet& y);

/// The Woodbury-reduced operator on S_k:
///   gamma -> eps^2 (D_S^{-1} - eps^2 I)^{-1} gamma + P_T^* P_Omega^* P_Omega P_T gamma.
class GammaSystem {
 public:
  GammaSystem(const WeightState& W, PatternPtr omega);

  TangentCoefficients operator()(const TangentCoefficients& gamma) const { return apply(gamma); }
  TangentCoefficients apply(const TangentCoefficients& gamma) const;
  /// P_T^* P_Omega^*(y)
  TangentCoefficients rhs(const Eigen::VectorXd& y) const;

  const TangentCoefficients& shift() const { return shift_; }
  const TangentBasis& basis() const { return basis_; }
  const SamplingPattern& pattern() const { return *omega_; }

 private:
  TangentBasis basis_;
  PatternPtr omega_;
  TangentCoefficients shift_;
};

GammaSystem build_gamma_system(const WeightState& W, PatternPtr omega);

/// Warm start D_S (D_S^{-1} - eps^2 I) P_T^*(X_prev), i.e. each coefficient
/// of P_T^*(X_prev) scaled by (1 - eps^2 h) with h the matching H / D entry.
TangentCoefficients initial_gamma_guess(const WeightState& W, const SparsePlusLowRank& X_prev);

struct CgOptions {
  double tol = 1e-10;
  int max_iter = 500;
};

struct WlsResult {
  SparsePlusLowRank iterate;
  int cg_iterations = 0;
  double cg_residual = 0.0;
};

/// argmin <X, W X> subject to P_Omega(X) = y, returned in sparse-plus-low-rank form.
WlsResult wls_step(const WeightState& W, const ObservationSet& y,
                   const TangentCoefficients& guess, const CgOptions& cg);

/// min(eps_prev, sigma_next); eps_prev may be +infinity.
double update_smoothing(double eps_prev, double sigma_next);

/// Number of leading sigma strictly above eps, capped at `cap`.
Index determine_active_rank(const Eigen::VectorXd& sigma, double eps, Index cap);

struct IrlsResult {
  SparsePlusLowRank estimate;
  ConvergenceRecord history;
};

/// MatrixIRLS outer loop. When `truth` is given, each record carries the
/// relative error against it.
IrlsResult matrix_irls(const ObservationSet& y, const IRLSConfig& cfg,
                       const GroundTruth* truth = nullptr);

}  // namespace mirls
