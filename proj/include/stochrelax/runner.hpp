#pragma once
// Executes a RunConfig: builds the problem, runs every replicate on its own
// thread with child_seed(run.seed, replicate), writes one trace per
// replicate and a summary table.
//
// Output layout under run.output:
//   replicate_<r>.csv / replicate_<r>.jsonl   per-iteration traces
//   summary.csv                               one row per replicate

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <string>
#include <vector>

#include "stochrelax/config.hpp"
#include "stochrelax/expfam.hpp"
#include "stochrelax/optim.hpp"
#include "stochrelax/problems.hpp"
#include "stochrelax/trace_io.hpp"

namespace stochrelax::cli {

inline const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols{"replicate", "seed",      "algorithm", "status",      "iterations",
                                             "final_best", "final_E_f", "optimum",   "wall_time_s", "error"};
  return cols;
}

struct ReplicateResult {
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  optim::RunTrace trace;
  double wall_time_s = 0.0;
  std::string error;  // empty on success
};

inline expfam::MonomialBasis make_basis(const RunConfig& c, const PseudoBooleanFunction& f) {
  return c.basis == BasisKind::singletons ? expfam::MonomialBasis::singletons(f.n())
                                          : expfam::MonomialBasis::from_support(f, true);
}

/// One replicate with an explicit seed; no I/O.
inline optim::RunTrace run_replicate(const RunConfig& c, const ProblemInstance& problem, std::uint64_t seed) {
  const auto basis = make_basis(c, problem.f);
  optim::RunTrace trace;
  switch (c.algorithm) {
    case Algorithm::sngd: {
      optim::SNGDConfig s;
      s.population = c.population;
      s.selected = c.selected;
      s.learning_rate = c.learning_rate;
      s.max_iters = c.max_iters;
      s.seed = seed;
      s.direction = c.direction;
      s.ridge = c.ridge;
      s.grad_tolerance = c.grad_tolerance;
      s.stall_window = c.stall_window;
      s.stall_tolerance = c.stall_tolerance;
      s.burn_in = c.burn_in;
      s.thinning = c.thinning;
      s.scan = c.scan;
      trace = optim::sngd_run(problem.f, basis, s);
      break;
    }
    case Algorithm::eda: {
      optim::EDAConfig e;
      e.population = c.population;
      e.selected = c.selected.value_or(c.population / 2 > 0 ? c.population / 2 : 1);
      e.max_iters = c.max_iters;
      e.seed = seed;
      e.estimator = c.estimator;
      e.direction = c.direction;
      e.clip = c.clip;
      e.burn_in = c.burn_in;
      e.thinning = c.thinning;
      trace = optim::eda_run(problem.f, basis, e);
      break;
    }
    case Algorithm::exact: {
      optim::ExactDescentConfig x;
      x.learning_rate = c.learning_rate;
      x.max_iters = c.max_iters;
      x.direction = c.direction;
      x.grad_tolerance = c.grad_tolerance;
      x.ridge = c.ridge.value_or(0.0);
      trace = optim::exact_descent_run(problem.f, basis, x);
      break;
    }
  }
  trace.config = config_entries(c);
  trace.config.emplace_back("replicate.seed", std::to_string(seed));
  return trace;
}

/// Runs all replicates concurrently; results come back in replicate order.
inline std::vector<ReplicateResult> run_replicates(const RunConfig& c, const ProblemInstance& problem) {
  std::vector<std::future<ReplicateResult>> jobs;
  for (std::size_t r = 0; r < c.replicates; ++r) {
    jobs.push_back(std::async(std::launch::async, [&c, &problem, r] {
      ReplicateResult res;
      res.replicate = r;
      res.seed = child_seed(c.seed, r);
      const auto t0 = std::chrono::steady_clock::now();
      try {
        res.trace = run_replicate(c, problem, res.seed);
      } catch (const std::exception& e) {
        res.error = e.what();
      }
      res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return res;
    }));
  }
  std::vector<ReplicateResult> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

/// Exit status 0 iff every replicate finished and every file was written.
inline int run_command(const RunConfig& c, std::ostream& log) {
  namespace fs = std::filesystem;
  ProblemInstance problem;
  try {
    validate(c);
    problem = registry_build(c.problem, c.params, c.instance_seed);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 2;
  }

  std::error_code ec;
  fs::create_directories(c.output, ec);
  if (ec) {
    log << "error: cannot create output directory '" << c.output << "': " << ec.message() << '\n';
    return 3;
  }

  const auto results = run_replicates(c, problem);
  int status = 0;
  auto write = [&](const fs::path& path, auto&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (out) writer(out);
    if (!out) {
      log << "error: failed writing " << path.string() << '\n';
      status = 3;
    }
  };

  for (const auto& r : results) {
    if (!r.error.empty()) {
      log << "replicate " << r.replicate << " failed: " << r.error << '\n';
      status = status ? status : 1;
      continue;
    }
    const fs::path stem = fs::path(c.output) / ("replicate_" + std::to_string(r.replicate));
    if (c.format != TraceFormat::jsonl)
      write(stem.string() + ".csv", [&](std::ostream& o) { optim::write_csv(o, r.trace); });
    if (c.format != TraceFormat::csv)
      write(stem.string() + ".jsonl", [&](std::ostream& o) { optim::write_jsonl(o, r.trace); });
  }

  write(fs::path(c.output) / "summary.csv", [&](std::ostream& o) {
    const auto& cols = summary_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) o << (i ? "," : "") << cols[i];
    o << '\n';
    for (const auto& r : results) {
      const bool ok = r.error.empty() && !r.trace.records.empty();
      o << r.replicate << ',' << r.seed << ',' << detail::kAlgorithms.name(c.algorithm) << ','
        << (ok ? optim::to_string(r.trace.status) : "error") << ',' << r.trace.iterations() << ','
        << (ok ? optim::format_real(r.trace.final_best()) : "") << ','
        << (ok ? optim::format_real(r.trace.records.back().f_exact.value_or(r.trace.records.back().f_est)) : "")
        << ',' << (problem.optimum ? optim::format_real(*problem.optimum) : "") << ','
        << optim::format_real(r.wall_time_s) << ',';
      // error text is quoted; embedded quotes doubled
      if (!r.error.empty()) {
        std::string e = r.error;
        for (std::size_t p = 0; (p = e.find('"', p)) != std::string::npos; p += 2) e.insert(p, "\"");
        o << '"' << e << '"';
      }
      o << '\n';
    }
  });

  for (const auto& r : results)
    if (r.error.empty())
      log << "replicate " << r.replicate << ": " << optim::to_string(r.trace.status) << " after "
          << r.trace.iterations() << " iterations, best " << optim::format_real(r.trace.final_best()) << '\n';
  return status;
}

}  // namespace stochrelax::cli
