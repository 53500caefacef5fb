#include "mirls/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "mirls/errors.hpp"
#include "mirls/spectral.hpp"

namespace mirls {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan" || s == "null" || s.empty()) return kNaN;
  std::size_t pos = 0;
  const double x = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("malformed number '" + s + "'");
  return x;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '"') c = ';';
  return s;
}

const char* kHeader = "rho,m,trials,median_rel_error,q25,q75,median_iters,median_wall_time_s,failed,note";

}  // namespace

std::string to_string(CoveragePolicy policy) {
  return policy == CoveragePolicy::strict ? "strict" : "accept";
}

CoveragePolicy parse_coverage_policy(const std::string& name) {
  if (name == "strict") return CoveragePolicy::strict;
  if (name == "accept" || name == "accept_last") return CoveragePolicy::accept_last;
  throw std::invalid_argument("unknown coverage policy '" + name + "'");
}

void ExperimentSpec::validate() const {
  if (d1 <= 0 || d2 <= 0) throw std::invalid_argument("dimensions must be positive");
  if (r < 1 || r > std::min(d1, d2)) throw std::invalid_argument("rank must lie in [1, min(d1, d2)]");
  if (!(kappa >= 1.0)) throw std::invalid_argument("kappa must be >= 1");
  if (rho_list.empty()) throw std::invalid_argument("rho list is empty");
  for (double rho : rho_list)
    if (!(rho >= 1.0)) throw std::invalid_argument("every rho must be >= 1");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (max_resamples < 1) throw std::invalid_argument("max_resamples must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  IRLSConfig cfg = solver;
  cfg.rank_estimate = r;
  cfg.validate();
}

TrialResult run_single(const ExperimentSpec& spec, double rho, std::uint64_t seed) {
  spec.validate();
  TrialResult tr;
  tr.rho = rho;
  tr.seed = seed;
  tr.m = oversampling_to_m(rho, spec.r, spec.d1, spec.d2);

  const GroundTruth truth = generate_ground_truth(spec.d1, spec.d2, spec.r, spec.kappa, spec.decay, seed);
  SamplingOutcome draw;
  try {
    draw = sample_omega_best_effort(spec.d1, spec.d2, tr.m, spec.r, seed, spec.max_resamples);
  } catch (const CoverageInfeasible& e) {
    tr.failure = "coverage infeasible";
    tr.rel_error = kNaN;
    return tr;
  }
  tr.coverage_met = draw.coverage_met;
  tr.sampling_attempts = draw.attempts;
  if (!draw.coverage_met && spec.coverage == CoveragePolicy::strict) {
    tr.failure = "coverage unattainable";
    tr.rel_error = kNaN;
    return tr;
  }
  const ObservationSet y = observe(truth, draw.entries);

  IRLSConfig cfg = spec.solver;
  cfg.rank_estimate = spec.r;
  cfg.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    IrlsResult res = matrix_irls(y, cfg);
    tr.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    tr.rel_error = relative_error(res.estimate, truth);
    tr.iterations = static_cast<int>(res.history.iterations.size());
    tr.stop = res.history.stop;
    const SpectralResult sp = top_singular_triplets(as_operator(res.estimate), spec.r,
                                                    cfg.krylov_iters, seed ^ 0xABCDEFULL);
    tr.recovered_spectrum.assign(sp.sigma.data(), sp.sigma.data() + sp.sigma.size());
    tr.ok = true;
  } catch (const std::exception& e) {
    tr.failure = std::string("solver error: ") + e.what();
    tr.rel_error = kNaN;
  }
  if (!spec.record_timing) tr.wall_time_s = 0.0;
  return tr;
}

double quantile(std::vector<double> v, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must lie in [0, 1]");
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

SweepResult run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  struct Job {
    double rho;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double rho : spec.rho_list)
    for (int t = 0; t < spec.trials; ++t) jobs.push_back({rho, spec.seed_base + static_cast<std::uint64_t>(t)});

  std::vector<TrialResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = run_single(spec, jobs[i].rho, jobs[i].seed);
      } catch (const std::exception& e) {
        results[i].rho = jobs[i].rho;
        results[i].seed = jobs[i].seed;
        results[i].failure = e.what();
        results[i].rel_error = kNaN;
      }
    }
  };
  const int nthreads = std::min<int>(spec.threads, static_cast<int>(jobs.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SweepResult out;
  for (double rho : spec.rho_list) {
    SweepRow row;
    row.rho = rho;
    row.m = oversampling_to_m(rho, spec.r, spec.d1, spec.d2);
    row.trials = spec.trials;
    std::vector<double> err, iters, wall;
    for (const auto& tr : results) {
      if (tr.rho != rho) continue;
      if (!tr.ok) {
        ++row.failed;
        if (row.note.empty()) row.note = sanitize(tr.failure);
        continue;
      }
      err.push_back(tr.rel_error);
      iters.push_back(tr.iterations);
      wall.push_back(tr.wall_time_s);
      if (!tr.coverage_met && row.note.empty()) row.note = "coverage not met (last draw used)";
    }
    row.median_rel_error = quantile(err, 0.5);
    row.q25 = quantile(err, 0.25);
    row.q75 = quantile(err, 0.75);
    row.median_iters = quantile(iters, 0.5);
    row.median_wall_time_s = quantile(wall, 0.5);
    out.rows.push_back(std::move(row));
  }
  std::sort(results.begin(), results.end(), [](const TrialResult& a, const TrialResult& b) {
    return a.rho != b.rho ? a.rho < b.rho : a.seed < b.seed;
  });
  out.trials = std::move(results);
  return out;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "csv") return ReportFormat::csv;
  if (name == "json") return ReportFormat::json;
  throw std::invalid_argument("unknown report format '" + name + "'");
}

std::string format_report(const std::vector<SweepRow>& rows, ReportFormat format) {
  if (rows.empty()) throw std::invalid_argument("format_report: no results");
  std::ostringstream os;
  if (format == ReportFormat::csv) {
    os << kHeader << '\n';
    for (const auto& r : rows) {
      os << fmt17(r.rho) << ',' << r.m << ',' << r.trials << ',' << fmt17(r.median_rel_error) << ','
         << fmt17(r.q25) << ',' << fmt17(r.q75) << ',' << fmt17(r.median_iters) << ','
         << fmt17(r.median_wall_time_s) << ',' << r.failed << ',' << sanitize(r.note) << '\n';
    }
    return os.str();
  }
  auto num = [](double x) { return std::isnan(x) ? std::string("null") : fmt17(x); };
  os << "[\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    os << "  {\"rho\": " << num(r.rho) << ", \"m\": " << r.m << ", \"trials\": " << r.trials
       << ", \"median_rel_error\": " << num(r.median_rel_error) << ", \"q25\": " << num(r.q25)
       << ", \"q75\": " << num(r.q75) << ", \"median_iters\": " << num(r.median_iters)
       << ", \"median_wall_time_s\": " << num(r.median_wall_time_s) << ", \"failed\": " << r.failed
       << ", \"note\": " << nlohmann::json(r.note).dump() << "}" << (i + 1 < rows.size() ? "," : "")
       << '\n';
  }
  os << "]\n";
  return os.str();
}

std::vector<SweepRow> parse_report(const std::string& text, ReportFormat format) {
  std::vector<SweepRow> rows;
  if (format == ReportFormat::csv) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != kHeader) throw std::invalid_argument("parse_report: bad CSV header");
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) f.push_back(cell);
      if (!line.empty() && line.back() == ',') f.emplace_back();
      if (f.size() != 10) throw std::invalid_argument("parse_report: expected 10 columns");
      SweepRow r;
      r.rho = parse_double(f[0]);
      r.m = std::stoll(f[1]);
      r.trials = std::stoi(f[2]);
      r.median_rel_error = parse_double(f[3]);
      r.q25 = parse_double(f[4]);
      r.q75 = parse_double(f[5]);
      r.median_iters = parse_double(f[6]);
      r.median_wall_time_s = parse_double(f[7]);
      r.failed = std::stoi(f[8]);
      r.note = f[9];
      rows.push_back(std::move(r));
    }
    return rows;
  }
  const auto j = nlohmann::json::parse(text);
  auto num = [](const nlohmann::json& v) { return v.is_null() ? kNaN : v.get<double>(); };
  for (const auto& o : j) {
    SweepRow r;
    r.rho = num(o.at("rho"));
    r.m = o.at("m").get<Index>();
    r.trials = o.at("trials").get<int>();
    r.median_rel_error = num(o.at("median_rel_error"));
    r.q25 = num(o.at("q25"));
    r.q75 = num(o.at("q75"));
    r.median_iters = num(o.at("median_iters"));
    r.median_wall_time_s = num(o.at("median_wall_time_s"));
    r.failed = o.at("failed").get<int>();
    r.note = o.at("note").get<std::string>();
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit_report(const std::vector<SweepRow>& rows, ReportFormat format, const std::string& path) {
  const std::string text = format_report(rows, format);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << text;
  os.flush();
  if (!os) throw std::runtime_error("failed writing report to '" + path + "'");
}

int threads_from_env() {
  const char* v = std::getenv("MIRLS_THREADS");
  if (v == nullptr || *v == '\0') return 1;
  try {
    return std::max(1, std::stoi(v));
  } catch (const std::exception&) {
    return 1;
  }
}

}  // namespace mirls
