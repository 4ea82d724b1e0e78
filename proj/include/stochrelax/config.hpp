#pragma once
// Declarative run configuration: an INI-style file with [problem],
// [algorithm] and [run] sections. Unknown keys are rejected; every error
// names the offending field as section.key.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stochrelax/error.hpp"
#include "stochrelax/optim.hpp"
#include "stochrelax/problems.hpp"
#include "stochrelax/trace_io.hpp"

namespace stochrelax::cli {

struct ConfigError : ParseError {
  ConfigError(const std::string& field, const std::string& why)
      : ParseError(field + ": " + why), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class Algorithm { sngd, eda, exact };
enum class BasisKind { singletons, support };
enum class TraceFormat { csv, jsonl, both };

struct RunConfig {
  // [problem]
  std::string problem = "onemax";
  ProblemParams params;
  std::uint64_t instance_seed = 1;

  // [algorithm]
  Algorithm algorithm = Algorithm::sngd;
  optim::Direction direction = optim::Direction::maximize;
  BasisKind basis = BasisKind::singletons;
  std::size_t population = 100;
  std::optional<std::size_t> selected;
  double learning_rate = 0.1;
  std::size_t max_iters = 100;
  std::optional<double> ridge;
  std::size_t burn_in = 100;
  std::size_t thinning = 1;
  expfam::ScanOrder scan = expfam::ScanOrder::systematic;
  optim::Estimator estimator = optim::Estimator::independence;
  double clip = 1e-3;
  double grad_tolerance = 1e-8;
  std::size_t stall_window = 20;
  double stall_tolerance = 1e-9;

  // [run]
  std::uint64_t seed = 42;
  std::size_t replicates = 1;
  std::string output = "traces";
  TraceFormat format = TraceFormat::both;

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

template <class E>
struct EnumNames {
  std::vector<std::pair<E, const char*>> items;

  const char* name(E e) const {
    for (const auto& [v, s] : items)
      if (v == e) return s;
    return "?";
  }
  E parse(const std::string& field, const std::string& s) const {
    for (const auto& [v, n] : items)
      if (s == n) return v;
    std::string allowed;
    for (const auto& [v, n] : items) allowed += (allowed.empty() ? "" : "|") + std::string(n);
    throw ConfigError(field, "'" + s + "' is not one of " + allowed);
  }
};

inline const EnumNames<Algorithm> kAlgorithms{{{Algorithm::sngd, "sngd"}, {Algorithm::eda, "eda"}, {Algorithm::exact, "exact"}}};
inline const EnumNames<optim::Direction> kDirections{
    {{optim::Direction::maximize, "maximize"}, {optim::Direction::minimize, "minimize"}}};
inline const EnumNames<BasisKind> kBases{{{BasisKind::singletons, "singletons"}, {BasisKind::support, "support"}}};
inline const EnumNames<expfam::ScanOrder> kScans{
    {{expfam::ScanOrder::systematic, "systematic"}, {expfam::ScanOrder::random, "random"}}};
inline const EnumNames<optim::Estimator> kEstimators{
    {{optim::Estimator::independence, "independence"}, {optim::Estimator::moment_matching, "moment_matching"}}};
inline const EnumNames<TraceFormat> kFormats{
    {{TraceFormat::csv, "csv"}, {TraceFormat::jsonl, "jsonl"}, {TraceFormat::both, "both"}}};

template <class T>
T parse_number(const std::string& field, const std::string& s) {
  std::istringstream is(s);
  T v{};
  std::string rest;
  if constexpr (std::is_unsigned_v<T>) {
    if (!s.empty() && s[0] == '-') throw ConfigError(field, "must be non-negative");
  }
  if (!(is >> v) || (is >> rest)) throw ConfigError(field, "'" + s + "' is not a valid number");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  }
  return v;
}

}  // namespace detail

/// Resolved settings as ordered (section.key, value) pairs; this is what
/// serialize_config writes and what traces embed.
inline std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  using optim::format_real;
  std::vector<std::pair<std::string, std::string>> e;
  e.emplace_back("problem.name", c.problem);
  e.emplace_back("problem.n", std::to_string(c.params.n));
  e.emplace_back("problem.k", std::to_string(c.params.k));
  e.emplace_back("problem.terms", std::to_string(c.params.terms));
  e.emplace_back("problem.seed", std::to_string(c.instance_seed));
  e.emplace_back("algorithm.name", detail::kAlgorithms.name(c.algorithm));
  e.emplace_back("algorithm.direction", detail::kDirections.name(c.direction));
  e.emplace_back("algorithm.basis", detail::kBases.name(c.basis));
  e.emplace_back("algorithm.population", std::to_string(c.population));
  e.emplace_back("algorithm.selected", c.selected ? std::to_string(*c.selected) : "auto");
  e.emplace_back("algorithm.learning_rate", format_real(c.learning_rate));
  e.emplace_back("algorithm.max_iters", std::to_string(c.max_iters));
  e.emplace_back("algorithm.ridge", c.ridge ? format_real(*c.ridge) : "auto");
  e.emplace_back("algorithm.burn_in", std::to_string(c.burn_in));
  e.emplace_back("algorithm.thinning", std::to_string(c.thinning));
  e.emplace_back("algorithm.scan", detail::kScans.name(c.scan));
  e.emplace_back("algorithm.estimator", detail::kEstimators.name(c.estimator));
  e.emplace_back("algorithm.clip", format_real(c.clip));
  e.emplace_back("algorithm.grad_tolerance", format_real(c.grad_tolerance));
  e.emplace_back("algorithm.stall_window", std::to_string(c.stall_window));
  e.emplace_back("algorithm.stall_tolerance", format_real(c.stall_tolerance));
  e.emplace_back("run.seed", std::to_string(c.seed));
  e.emplace_back("run.replicates", std::to_string(c.replicates));
  e.emplace_back("run.output", c.output);
  e.emplace_back("run.format", detail::kFormats.name(c.format));
  return e;
}

inline std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, value] : config_entries(c)) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    out << key.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

/// Field-level validation beyond parsing.
inline void validate(const RunConfig& c) {
  const auto& names = problem_names();
  if (std::find(names.begin(), names.end(), c.problem) == names.end())
    throw ConfigError("problem.name", "unknown problem '" + c.problem + "'");
  if (c.params.n < 1 || c.params.n > kMaxVariables) throw ConfigError("problem.n", "must be in [1, 64]");
  if (c.problem == "trap-k" && (c.params.k < 2 || c.params.n % c.params.k != 0))
    throw ConfigError("problem.k", "must be >= 2 and divide problem.n");
  if (c.params.terms < 0) throw ConfigError("problem.terms", "must be non-negative");
  if (c.algorithm != Algorithm::exact && c.population < 2) throw ConfigError("algorithm.population", "must be at least 2");
  if (c.selected && (*c.selected < 1 || *c.selected > c.population))
    throw ConfigError("algorithm.selected", "must satisfy 1 <= selected <= population");
  if (c.algorithm == Algorithm::sngd && c.selected && *c.selected < 2)
    throw ConfigError("algorithm.selected", "sngd needs at least 2 selected samples");
  if (!(c.learning_rate > 0.0)) throw ConfigError("algorithm.learning_rate", "must be positive");
  if (c.max_iters < 1) throw ConfigError("algorithm.max_iters", "must be at least 1");
  if (c.ridge && *c.ridge < 0.0) throw ConfigError("algorithm.ridge", "must be non-negative");
  if (!(c.clip > 0.0 && c.clip < 1.0)) throw ConfigError("algorithm.clip", "must lie in (0, 1)");
  if (c.grad_tolerance < 0.0) throw ConfigError("algorithm.grad_tolerance", "must be non-negative");
  if (c.replicates < 1) throw ConfigError("run.replicates", "must be at least 1");
  if (c.output.empty()) throw ConfigError("run.output", "must not be empty");
}

inline RunConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.message(), e.line());
  }

  static const std::set<std::string> known = [] {
    std::set<std::string> k;
    for (const auto& [key, v] : config_entries(RunConfig{})) k.insert(key);
    return k;
  }();
  for (const auto& [sec, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(sec, "keys must live inside a [section]");
    for (const auto& [key, v] : body)
      if (!known.count(sec + "." + key)) throw ConfigError(sec + "." + key, "unknown setting");
  }

  RunConfig c;
  auto get = [&](const std::string& field) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(field, '.'))) return *v;
    return std::nullopt;
  };
  auto num = [&]<class T>(const std::string& field, T& out) {
    if (auto v = get(field)) out = detail::parse_number<T>(field, *v);
  };

  if (auto v = get("problem.name")) c.problem = *v;
  num("problem.n", c.params.n);
  num("problem.k", c.params.k);
  num("problem.terms", c.params.terms);
  num("problem.seed", c.instance_seed);
  if (auto v = get("algorithm.name")) c.algorithm = detail::kAlgorithms.parse("algorithm.name", *v);
  if (auto v = get("algorithm.direction")) c.direction = detail::kDirections.parse("algorithm.direction", *v);
  if (auto v = get("algorithm.basis")) c.basis = detail::kBases.parse("algorithm.basis", *v);
  num("algorithm.population", c.population);
  if (auto v = get("algorithm.selected"); v && *v != "auto")
    c.selected = detail::parse_number<std::size_t>("algorithm.selected", *v);
  num("algorithm.learning_rate", c.learning_rate);
  num("algorithm.max_iters", c.max_iters);
  if (auto v = get("algorithm.ridge"); v && *v != "auto") c.ridge = detail::parse_number<double>("algorithm.ridge", *v);
  num("algorithm.burn_in", c.burn_in);
  num("algorithm.thinning", c.thinning);
  if (auto v = get("algorithm.scan")) c.scan = detail::kScans.parse("algorithm.scan", *v);
  if (auto v = get("algorithm.estimator")) c.estimator = detail::kEstimators.parse("algorithm.estimator", *v);
  num("algorithm.clip", c.clip);
  num("algorithm.grad_tolerance", c.grad_tolerance);
  num("algorithm.stall_window", c.stall_window);
  num("algorithm.stall_tolerance", c.stall_tolerance);
  num("run.seed", c.seed);
  num("run.replicates", c.replicates);
  if (auto v = get("run.output")) c.output = *v;
  if (auto v = get("run.format")) c.format = detail::kFormats.parse("run.format", *v);

  validate(c);
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace stochrelax::cli
