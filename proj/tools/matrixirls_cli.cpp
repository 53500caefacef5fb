#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mirls/experiment.hpp"
#include "mirls/instance_io.hpp"
#include "mirls/problem.hpp"
#include "mirls/solver.hpp"

using namespace mirls;

namespace {

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

int solve_instance(const std::string& path, const IRLSConfig& base, const std::string& history_path) {
  const ProblemInstance inst = load_instance(path);
  IRLSConfig cfg = base;
  cfg.rank_estimate = inst.truth.rank();
  cfg.seed = inst.truth.seed;
  const IrlsResult res = matrix_irls(inst.observations, cfg, &inst.truth);
  const double err = relative_error(res.estimate, inst.truth);
  std::printf("rel_error=%.17g iterations=%zu stop=%s\n", err, res.history.iterations.size(),
              to_string(res.history.stop).c_str());
  if (!history_path.empty()) write_text(history_path, to_json_lines(res.history));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MatrixIRLS low-rank matrix completion benchmark"};

  ExperimentSpec spec;
  std::string decay = "exp";
  std::string format = "csv";
  std::string coverage = "strict";
  std::string out;
  std::string instance_path;
  std::string dump_path;
  std::string history_path;
  bool no_timing = false;
  double kappa_hint = 0.0;

  app.add_option("--d1", spec.d1, "rows")->check(CLI::PositiveNumber);
  app.add_option("--d2", spec.d2, "columns")->check(CLI::PositiveNumber);
  app.add_option("--rank", spec.r, "target rank")->check(CLI::PositiveNumber);
  app.add_option("--kappa", spec.kappa, "condition number")->check(CLI::Range(1.0, 1e300));
  app.add_option("--decay", decay, "spectrum interpolation")->check(CLI::IsMember({"exp", "lin"}));
  app.add_option("--rho", spec.rho_list, "oversampling factors")->delimiter(',');
  app.add_option("--trials", spec.trials, "trials per rho")->check(CLI::PositiveNumber);
  app.add_option("--seed", spec.seed_base, "base seed");
  app.add_option("--out", out, "report path (stdout if omitted)");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--max-outer", spec.solver.max_outer, "outer iteration cap")->check(CLI::PositiveNumber);
  app.add_option("--cg-max", spec.solver.cg_max_inner, "CG iteration cap")->check(CLI::PositiveNumber);
  app.add_option("--cg-tol-scale", spec.solver.cg_tol_scale, "CG tolerance factor")->check(CLI::PositiveNumber);
  app.add_option("--krylov-iters", spec.solver.krylov_iters, "block Krylov iterations")->check(CLI::PositiveNumber);
  auto* hint = app.add_option("--kappa-hint", kappa_hint, "scale used in place of sigma_1 in the CG tolerance")
                   ->check(CLI::PositiveNumber);
  app.add_option("--coverage-policy", coverage, "strict: fail on unmet coverage; accept: use last draw")
      ->check(CLI::IsMember({"strict", "accept"}));
  app.add_flag("--no-timing", no_timing, "write zero wall times");
  app.add_option("--instance", instance_path, "solve a saved instance instead of sweeping");
  app.add_option("--dump-instance", dump_path, "save the instance for the first rho and seed, then exit");
  app.add_option("--history", history_path, "with --instance, write per-iteration JSON lines here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    spec.decay = parse_decay(decay);
    spec.coverage = parse_coverage_policy(coverage);
    spec.record_timing = !no_timing;
    spec.threads = threads_from_env();
    if (hint->count() > 0) spec.solver.kappa_hint = kappa_hint;

    if (!instance_path.empty()) return solve_instance(instance_path, spec.solver, history_path);

    spec.validate();

    if (!dump_path.empty()) {
      const double rho = spec.rho_list.front();
      const Index m = oversampling_to_m(rho, spec.r, spec.d1, spec.d2);
      GroundTruth truth = generate_ground_truth(spec.d1, spec.d2, spec.r, spec.kappa, spec.decay, spec.seed_base);
      const SamplingOutcome draw =
          sample_omega_best_effort(spec.d1, spec.d2, m, spec.r, spec.seed_base, spec.max_resamples);
      if (!draw.coverage_met && spec.coverage == CoveragePolicy::strict) {
        std::cerr << "error: coverage unattainable\n";
        return 2;
      }
      ObservationSet y = observe(truth, draw.entries);
      save_instance(ProblemInstance{std::move(truth), std::move(y)}, dump_path);
      return 0;
    }

    const SweepResult res = run_sweep(spec);
    const ReportFormat fmt = parse_report_format(format);
    if (out.empty())
      std::cout << format_report(res.rows, fmt);
    else
      emit_report(res.rows, fmt, out);
    for (const auto& tr : res.trials)
      if (!tr.ok) return 2;
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
