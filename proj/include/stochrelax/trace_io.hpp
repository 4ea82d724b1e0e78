#pragma once
// RunTrace export.
//
// CSV: leading '#' lines carry the algorithm and the resolved configuration
// ("# key = value"), then a header row
//   iter,E_f_est,E_f_exact,best_f,grad_norm,theta_0,...,theta_{d-1}
// and one row per iteration. Unavailable values are empty cells. A final
// "# status = <status>" line closes the file. Reals use %.17g.
//
// JSONL: a {"type":"header",...} object with algorithm, config and columns,
// one {"type":"iteration",...} object per iteration (null for unavailable
// values), and a closing {"type":"status",...} object.

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stochrelax/optim.hpp"

namespace stochrelax::optim {

inline std::vector<std::string> trace_columns(Eigen::Index d) {
  std::vector<std::string> cols{"iter", "E_f_est", "E_f_exact", "best_f", "grad_norm"};
  for (Eigen::Index j = 0; j < d; ++j) cols.push_back("theta_" + std::to_string(j));
  return cols;
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& out, const RunTrace& trace) {
  out << "# algorithm = " << trace.algorithm << '\n';
  for (const auto& [k, v] : trace.config) out << "# " << k << " = " << v << '\n';
  const Eigen::Index d = trace.records.empty() ? 0 : trace.records.front().theta.size();
  const auto cols = trace_columns(d);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  for (const auto& r : trace.records) {
    out << r.iter << ',' << format_real(r.f_est) << ',' << opt(r.f_exact) << ',' << format_real(r.best_f) << ','
        << opt(r.grad_norm);
    for (Eigen::Index j = 0; j < r.theta.size(); ++j) out << ',' << format_real(r.theta[j]);
    out << '\n';
  }
  out << "# status = " << to_string(trace.status) << '\n';
}

inline void write_jsonl(std::ostream& out, const RunTrace& trace) {
  using nlohmann::json;
  json cfg = json::object();
  for (const auto& [k, v] : trace.config) cfg[k] = v;
  const Eigen::Index d = trace.records.empty() ? 0 : trace.records.front().theta.size();
  out << json{{"type", "header"}, {"algorithm", trace.algorithm}, {"config", cfg}, {"columns", trace_columns(d)}}.dump()
      << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  for (const auto& r : trace.records) {
    json row = {{"type", "iteration"},      {"iter", r.iter},       {"E_f_est", r.f_est},
                {"E_f_exact", opt(r.f_exact)}, {"best_f", r.best_f}, {"grad_norm", opt(r.grad_norm)}};
    row["theta"] = std::vector<double>(r.theta.data(), r.theta.data() + r.theta.size());
    out << row.dump() << '\n';
  }
  out << json{{"type", "status"}, {"status", to_string(trace.status)}, {"iterations", trace.iterations()}}.dump()
      << '\n';
}

}  // namespace stochrelax::optim
