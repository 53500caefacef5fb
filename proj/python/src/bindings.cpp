#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mirls/experiment.hpp"
#include "mirls/problem.hpp"
#include "mirls/solver.hpp"
#include "mirls/spectral.hpp"

namespace py = pybind11;
using namespace mirls;

namespace {

using EntryArray = Eigen::Matrix<Index, Eigen::Dynamic, 2, Eigen::RowMajor>;

std::vector<IndexPair> to_entries(const EntryArray& a) {
  std::vector<IndexPair> out(static_cast<std::size_t>(a.rows()));
  for (Index l = 0; l < a.rows(); ++l) out[l] = {a(l, 0), a(l, 1)};
  return out;
}

EntryArray from_entries(const std::vector<IndexPair>& e) {
  EntryArray a(static_cast<Index>(e.size()), 2);
  for (std::size_t l = 0; l < e.size(); ++l) {
    a(l, 0) = e[l].row;
    a(l, 1) = e[l].col;
  }
  return a;
}

IRLSConfig make_config(Index rank, int max_outer, double rel_change_tol, int cg_max_inner, double cg_tol_scale,
                       std::optional<double> kappa_hint, int krylov_iters, std::uint64_t seed) {
  IRLSConfig cfg;
  cfg.rank_estimate = rank;
  cfg.max_outer = max_outer;
  cfg.rel_change_tol = rel_change_tol;
  cfg.cg_max_inner = cg_max_inner;
  cfg.cg_tol_scale = cg_tol_scale;
  cfg.kappa_hint = kappa_hint;
  cfg.krylov_iters = krylov_iters;
  cfg.seed = seed;
  return cfg;
}

py::dict record_to_dict(const IterationRecord& r) {
  py::dict d;
  d["iteration"] = r.iteration;
  d["eps"] = r.eps;
  d["r_k"] = r.active_rank;
  d["cg_iterations"] = r.cg_iterations;
  d["cg_residual"] = r.cg_residual;
  d["cg_tolerance"] = r.cg_tolerance;
  d["rel_change"] = r.rel_change;
  d["rel_error"] = r.rel_error ? py::cast(*r.rel_error) : py::none();
  d["wall_time_s"] = r.wall_time_s;
  return d;
}

py::dict row_to_dict(const SweepRow& r) {
  py::dict d;
  d["rho"] = r.rho;
  d["m"] = r.m;
  d["trials"] = r.trials;
  d["median_rel_error"] = r.median_rel_error;
  d["q25"] = r.q25;
  d["q75"] = r.q75;
  d["median_iters"] = r.median_iters;
  d["median_wall_time_s"] = r.median_wall_time_s;
  d["failed"] = r.failed;
  d["note"] = r.note;
  return d;
}

struct Solution {
  SparsePlusLowRank estimate;
  ConvergenceRecord history;
};

#define MIRLS_SOLVER_ARGS                                                                    \
  py::arg("max_outer") = 400, py::arg("rel_change_tol") = 1e-9, py::arg("cg_max_inner") = 500, \
      py::arg("cg_tol_scale") = 1e-5, py::arg("kappa_hint") = py::none(), py::arg("krylov_iters") = 20

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "MatrixIRLS low-rank matrix completion";

  py::register_exception<CoverageInfeasible>(m, "CoverageInfeasible", PyExc_ValueError);
  py::register_exception<CoverageUnattainable>(m, "CoverageUnattainable", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("oversampling_to_m", &oversampling_to_m, py::arg("rho"), py::arg("r"), py::arg("d1"), py::arg("d2"));
  m.def(
      "interpolated_spectrum",
      [](Index r, double kappa, const std::string& decay) { return interpolated_spectrum(r, kappa, parse_decay(decay)); },
      py::arg("r"), py::arg("kappa"), py::arg("decay") = "exp");
  m.def(
      "ground_truth",
      [](Index d1, Index d2, Index r, double kappa, const std::string& decay, std::uint64_t seed) {
        const GroundTruth t = generate_ground_truth(d1, d2, r, kappa, parse_decay(decay), seed);
        return py::make_tuple(t.U, t.spectrum, t.V);
      },
      py::arg("d1"), py::arg("d2"), py::arg("r"), py::arg("kappa"), py::arg("decay") = "exp", py::arg("seed") = 0,
      "Factors (U, spectrum, V) of the synthetic rank-r ground truth.");
  m.def(
      "sample_omega",
      [](Index d1, Index d2, Index mm, Index min_per_line, std::uint64_t seed, int max_attempts) {
        return from_entries(sample_omega(d1, d2, mm, min_per_line, seed, max_attempts));
      },
      py::arg("d1"), py::arg("d2"), py::arg("m"), py::arg("min_per_line"), py::arg("seed") = 0,
      py::arg("max_attempts") = 1000, "m distinct (row, col) pairs with every line holding min_per_line entries.");

  py::class_<Solution>(m, "Solution")
      .def_property_readonly("shape", [](const Solution& s) { return py::make_tuple(s.estimate.rows(), s.estimate.cols()); })
      .def_property_readonly("stop", [](const Solution& s) { return to_string(s.history.stop); })
      .def_property_readonly("iterations", [](const Solution& s) { return s.history.iterations.size(); })
      .def_property_readonly("history",
                             [](const Solution& s) {
                               py::list out;
                               for (const auto& r : s.history.iterations) out.append(record_to_dict(r));
                               return out;
                             })
      .def("matvec", [](const Solution& s, const Eigen::VectorXd& z) { return s.estimate.matvec(z); })
      .def("rmatvec", [](const Solution& s, const Eigen::VectorXd& z) { return s.estimate.rmatvec(z); })
      .def(
          "entries",
          [](const Solution& s, const EntryArray& e) {
            return s.estimate.sample(SamplingPattern(s.estimate.rows(), s.estimate.cols(), to_entries(e)));
          },
          py::arg("entries"), "Values of the estimate at the given (row, col) pairs, in canonical order.")
      .def("to_dense", [](const Solution& s) { return s.estimate.apply(Eigen::MatrixXd::Identity(s.estimate.cols(), s.estimate.cols())); })
      .def(
          "svd",
          [](const Solution& s, Index k, int iters, std::uint64_t seed) {
            const SpectralResult sp = top_singular_triplets(as_operator(s.estimate), k, iters, seed);
            return py::make_tuple(sp.U, sp.sigma, sp.V);
          },
          py::arg("k"), py::arg("iters") = 20, py::arg("seed") = 0);

  m.def(
      "complete",
      [](Index d1, Index d2, const EntryArray& entries, const Eigen::VectorXd& values, Index rank, int max_outer,
         double rel_change_tol, int cg_max_inner, double cg_tol_scale, std::optional<double> kappa_hint,
         int krylov_iters, std::uint64_t seed) {
        const ObservationSet y = ObservationSet::from_entries(d1, d2, to_entries(entries), values);
        const IRLSConfig cfg =
            make_config(rank, max_outer, rel_change_tol, cg_max_inner, cg_tol_scale, kappa_hint, krylov_iters, seed);
        IrlsResult res;
        {
          py::gil_scoped_release release;
          res = matrix_irls(y, cfg);
        }
        return Solution{std::move(res.estimate), std::move(res.history)};
      },
      py::arg("d1"), py::arg("d2"), py::arg("entries"), py::arg("values"), py::arg("rank"), MIRLS_SOLVER_ARGS,
      py::arg("seed") = 0, "Run MatrixIRLS on observed entries.");

  m.def(
      "run_sweep",
      [](Index d1, Index d2, Index r, double kappa, const std::string& decay, std::vector<double> rho, int trials,
         std::uint64_t seed, const std::string& coverage, int threads, int max_outer, double rel_change_tol,
         int cg_max_inner, double cg_tol_scale, std::optional<double> kappa_hint, int krylov_iters) {
        ExperimentSpec s;
        s.d1 = d1;
        s.d2 = d2;
        s.r = r;
        s.kappa = kappa;
        s.decay = parse_decay(decay);
        s.rho_list = std::move(rho);
        s.trials = trials;
        s.seed_base = seed;
        s.coverage = parse_coverage_policy(coverage);
        s.threads = threads;
        s.solver = make_config(r, max_outer, rel_change_tol, cg_max_inner, cg_tol_scale, kappa_hint, krylov_iters, 0);
        SweepResult res;
        {
          py::gil_scoped_release release;
          res = run_sweep(s);
        }
        py::list rows;
        for (const auto& row : res.rows) rows.append(row_to_dict(row));
        py::list per_trial;
        for (const auto& t : res.trials) {
          py::dict d;
          d["rho"] = t.rho;
          d["seed"] = t.seed;
          d["ok"] = t.ok;
          d["failure"] = t.failure;
          d["coverage_met"] = t.coverage_met;
          d["rel_error"] = t.rel_error;
          d["iterations"] = t.iterations;
          d["wall_time_s"] = t.wall_time_s;
          d["stop"] = to_string(t.stop);
          d["recovered_spectrum"] = t.recovered_spectrum;
          per_trial.append(d);
        }
        return py::make_tuple(rows, per_trial);
      },
      py::arg("d1") = 1000, py::arg("d2") = 1000, py::arg("r") = 5, py::arg("kappa") = 10.0,
      py::arg("decay") = "exp", py::arg("rho") = std::vector<double>{2.0}, py::arg("trials") = 10,
      py::arg("seed") = 0, py::arg("coverage") = "strict", py::arg("threads") = 1, MIRLS_SOLVER_ARGS,
      "Seeded recovery sweep; returns (rows, trials).");
}
