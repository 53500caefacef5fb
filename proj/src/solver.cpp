#include "mirls/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "mirls/errors.hpp"
#include "mirls/spectral.hpp"

namespace mirls {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void IRLSConfig::validate() const {
  if (rank_estimate < 1) throw std::invalid_argument("IRLSConfig: rank_estimate must be >= 1");
  if (max_outer < 1) throw std::invalid_argument("IRLSConfig: max_outer must be >= 1");
  if (cg_max_inner < 1) throw std::invalid_argument("IRLSConfig: cg_max_inner must be >= 1");
  if (krylov_iters < 0) throw std::invalid_argument("IRLSConfig: krylov_iters must be >= 0");
  if (!(rel_change_tol > 0.0) || !(cg_tol_scale > 0.0) || !(eps_floor_scale > 0.0)) {
    throw std::invalid_argument("IRLSConfig: tolerances must be positive");
  }
  if (active_rank_cap < 0) throw std::invalid_argument("IRLSConfig: active_rank_cap must be >= 0");
  if (kappa_hint && !(*kappa_hint > 0.0)) throw std::invalid_argument("IRLSConfig: kappa_hint must be positive");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::rel_change: return "rel_change";
    case StopReason::max_outer: return "max_outer";
    case StopReason::eps_floor: return "eps_floor";
  }
  return "unknown";
}

std::string to_json_lines(const ConvergenceRecord& record) {
  std::ostringstream os;
  for (const auto& it : record.iterations) {
    nlohmann::json j = {{"iteration", it.iteration},
                        {"eps", it.eps},
                        {"r_k", it.active_rank},
                        {"cg_iterations", it.cg_iterations},
                        {"cg_residual", it.cg_residual},
                        {"cg_tolerance", it.cg_tolerance},
                        {"rel_change", it.rel_change},
                        {"wall_time_s", it.wall_time_s}};
    j["rel_error"] = it.rel_error ? nlohmann::json(*it.rel_error) : nlohmann::json(nullptr);
    os << j.dump() << '\n';
  }
  return os.str();
}

SparsePlusLowRank initial_iterate(const ObservationSet& y) {
  return SparsePlusLowRank::sparse(y.pattern(), y.values());
}

GammaSystem::GammaSystem(const WeightState& W, PatternPtr omega)
    : basis_(W.basis()), omega_(std::move(omega)), shift_(shifted_diag(W)) {
  if (!omega_) throw std::invalid_argument("GammaSystem: null sampling pattern");
  if (omega_->rows() != W.rows() || omega_->cols() != W.cols()) {
    throw DimensionError("GammaSystem: pattern and weight state dimensions differ");
  }
}

TangentCoefficients GammaSystem::apply(const TangentCoefficients& gamma) const {
  TangentCoefficients out =
      omega_tangent_adjoint(omega_tangent_apply(gamma, basis_, *omega_), basis_, *omega_);
  out += shift_.cwise_product(gamma);
  return out;
}

TangentCoefficients GammaSystem::rhs(const VectorXd& y) const {
  return omega_tangent_adjoint(y, basis_, *omega_);
}

GammaSystem build_gamma_system(const WeightState& W, PatternPtr omega) {
  return GammaSystem(W, std::move(omega));
}

TangentCoefficients initial_gamma_guess(const WeightState& W, const SparsePlusLowRank& X_prev) {
  TangentCoefficients g = tangent_adjoint(X_prev, W.basis());
  const Index r = W.rank();
  const double eps = W.eps();
  const VectorXd& s = W.sigma();
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < r; ++i) g.gamma1(i, j) *= 1.0 - eps * eps / (s[i] * s[j]);
  for (Index i = 0; i < r; ++i) {
    const double f = 1.0 - eps / s[i];
    g.gamma2.row(i) *= f;
    g.gamma3.col(i) *= f;
  }
  return g;
}

WlsResult wls_step(const WeightState& W, const ObservationSet& y,
                   const TangentCoefficients& guess, const CgOptions& cg) {
  if (W.rows() != y.rows() || W.cols() != y.cols()) {
    throw DimensionError("wls_step: weight state and observations differ in dimensions");
  }
  WlsResult out;
  if (W.rank() == 0) {
    // W = eps^-2 Id: the minimum-norm interpolant again
    out.iterate = initial_iterate(y);
    return out;
  }
  if (guess.rank() != W.rank() || guess.rows() != W.rows() || guess.cols() != W.cols()) {
    throw DimensionError("wls_step: initial guess does not live on S_k");
  }
  const GammaSystem A(W, y.pattern());
  const TangentBasis& basis = A.basis();
  const SamplingPattern& omega = *y.pattern();

  const TangentCoefficients b = A.rhs(y.values());
  auto sol = cg_solve(A, b, guess, cg.tol, cg.max_iter);
  const TangentCoefficients& gamma = sol.solution;

  VectorXd r = y.values() - omega_tangent_apply(gamma, basis, omega);

  // gamma~ = D_S^{-1} (D_S^{-1} - eps^2 I)^{-1} gamma - P_T^* P_Omega^*(r);
  // the first factor equals 1 + shift entrywise.
  TangentCoefficients gt = gamma + A.shift().cwise_product(gamma);
  gt -= omega_tangent_adjoint(r, basis, omega);
  project_constraints(gt, basis);

  MatrixXd M1 = basis.V() * gt.gamma1.transpose() + gt.gamma2.transpose();
  out.iterate = SparsePlusLowRank(W.rows(), W.cols(), y.pattern(), std::move(r), basis.U(),
                                  std::move(M1), std::move(gt.gamma3), basis.V());
  out.cg_iterations = sol.iterations;
  out.cg_residual = sol.relative_residual;
  return out;
}

double update_smoothing(double eps_prev, double sigma_next) {
  if (sigma_next < 0.0 || eps_prev < 0.0) throw std::invalid_argument("update_smoothing: negative input");
  return std::min(eps_prev, sigma_next);
}

Index determine_active_rank(const VectorXd& sigma, double eps, Index cap) {
  Index n = 0;
  while (n < sigma.size() && sigma[n] > eps) ++n;
  return std::min(n, cap);
}

IrlsResult matrix_irls(const ObservationSet& y, const IRLSConfig& cfg, const GroundTruth* truth) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  const Index d1 = y.rows();
  const Index d2 = y.cols();
  const Index dmin = std::min(d1, d2);
  const Index rt = std::min(cfg.rank_estimate, dmin);

  IrlsResult res;
  SparsePlusLowRank X = initial_iterate(y);
  double eps_prev = std::numeric_limits<double>::infinity();
  Index prev_rank = 0;
  res.history.stop = StopReason::max_outer;

  for (int it = 1; it <= cfg.max_outer; ++it) {
    const auto t0 = clock::now();
    Index k = std::min(std::max(rt, prev_rank) + 1, dmin);
    SpectralResult sp = top_singular_triplets(as_operator(X), k, cfg.krylov_iters,
                                              cfg.seed + static_cast<std::uint64_t>(it));
    const double sigma1 = sp.sigma[0];
    const double sigma_next = k > rt ? sp.sigma[rt] : 0.0;
    const double eps = update_smoothing(eps_prev, sigma_next);
    if (!(eps > cfg.eps_floor_scale * sigma1)) {
      res.history.stop = StopReason::eps_floor;
      break;
    }
    const Index cap = cfg.active_rank_cap > 0 ? std::min(cfg.active_rank_cap, dmin) : dmin;
    while (sp.sigma[k - 1] > eps && k < std::min(cap + 1, dmin)) {
      k = std::min(k + 2, std::min(cap + 1, dmin));
      sp = top_singular_triplets(as_operator(X), k, cfg.krylov_iters,
                                 cfg.seed + static_cast<std::uint64_t>(it));
    }
    const Index rk = determine_active_rank(sp.sigma, eps, cap);
    const WeightState W(sp.U.leftCols(rk), sp.V.leftCols(rk), sp.sigma.head(rk), eps);

    CgOptions cg;
    cg.max_iter = cfg.cg_max_inner;
    cg.tol = cfg.cg_tol_scale * eps / (cfg.kappa_hint ? *cfg.kappa_hint : sigma1);

    WlsResult step = wls_step(W, y, initial_gamma_guess(W, X), cg);

    IterationRecord rec;
    rec.iteration = it;
    rec.eps = eps;
    rec.active_rank = rk;
    rec.cg_iterations = step.cg_iterations;
    rec.cg_residual = step.cg_residual;
    rec.cg_tolerance = cg.tol;
    const double xn = frobenius_norm(X);
    rec.rel_change = xn > 0.0 ? difference_norm(step.iterate, X) / xn : 0.0;
    X = std::move(step.iterate);
    rec.wall_time_s = std::chrono::duration<double>(clock::now() - t0).count();
    if (truth) rec.rel_error = relative_error(X, *truth);
    res.history.iterations.push_back(rec);
    if (cfg.on_iteration) cfg.on_iteration(rec, X);
    eps_prev = eps;
    prev_rank = rk;

    if (rec.rel_change <= cfg.rel_change_tol) {
      res.history.stop = StopReason::rel_change;
      break;
    }
  }
  res.estimate = std::move(X);
  return res;
}

}  // namespace mirls
