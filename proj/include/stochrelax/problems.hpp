#pragma once
// Benchmark problem registry. Every instance is a deterministic function of
// (name, params, seed).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stochrelax/error.hpp"
#include "stochrelax/rng.hpp"
#include "stochrelax/walsh.hpp"

namespace stochrelax::cli {

inline const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"onemax", "weighted-linear", "two-local-ising", "trap-k",
                                              "random-sparse"};
  return names;
}

struct ProblemParams {
  int n = 10;
  int k = 4;       // trap-k block size
  int terms = 0;   // random-sparse monomial count; 0 means n
  bool operator==(const ProblemParams&) const = default;
};

struct ProblemInstance {
  std::string name;
  PseudoBooleanFunction f;
  std::optional<double> optimum;  // max_x f(x) when known
};

/// max_x f(x) by enumeration (n <= exact limit).
inline double brute_force_maximum(const PseudoBooleanFunction& f) {
  const auto table = walsh::synthesize(f);
  return *std::max_element(table.begin(), table.end());
}

/// Whether the recorded optimum is attained by some state (n <= exact limit).
inline bool verify_optimum(const ProblemInstance& p) {
  if (!p.optimum) return true;
  return std::abs(brute_force_maximum(p.f) - *p.optimum) <= 1e-9 * std::max(1.0, std::abs(*p.optimum));
}

namespace detail {

// Deceptive trap on one block, as a function of the number u of +1 spins.
inline double trap_value(int u, int k) { return u == k ? k : k - 1 - u; }

inline PseudoBooleanFunction trap_blocks(int n, int k) {
  std::vector<double> block(std::size_t{1} << k);
  for (std::size_t s = 0; s < block.size(); ++s) block[s] = trap_value(k - std::popcount(s), k);
  const auto local = walsh::walsh_transform(block, {.exact_limit = 16, .drop_tolerance = 1e-12});
  PseudoBooleanFunction f(n);
  for (int start = 0; start < n; start += k)
    for (const auto& [a, c] : local.terms()) f.add(MultiIndex(a.bits() << start), c);
  return f;
}

}  // namespace detail

/// Builds a named instance:
///   onemax            sum_i x_i, optimum n
///   weighted-linear   sum_i w_i x_i, |w_i| in [0.5, 1.5), random signs, optimum sum |w_i|
///   two-local-ising   ring couplings J in [-1, 1) and fields h in [-0.5, 0.5)
///   trap-k            concatenated k-bit deceptive traps (k divides n), optimum n
///   random-sparse     `terms` monomials of degree 1..3 with coefficients in [-1, 1)
/// Optima of the last three come from enumeration when n <= 20.
inline ProblemInstance registry_build(const std::string& name, const ProblemParams& params, std::uint64_t seed) {
  const int n = params.n;
  if (n < 1 || n > kMaxVariables) throw DomainError("problem.n must be in [1, 64]");
  Engine rng(mix64(seed));
  ProblemInstance p{name, PseudoBooleanFunction(n), std::nullopt};
  const bool enumerable = n <= kDefaultExactLimit;

  if (name == "onemax") {
    for (int i = 0; i < n; ++i) p.f.add(MultiIndex::singleton(i), 1.0);
    p.optimum = n;
  } else if (name == "weighted-linear") {
    double opt = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = uniform(rng, 0.5, 1.5) * ((rng() >> 63) ? -1.0 : 1.0);
      p.f.add(MultiIndex::singleton(i), w);
      opt += std::abs(w);
    }
    p.optimum = opt;
  } else if (name == "two-local-ising") {
    if (n < 2) throw DomainError("problem.n must be at least 2 for two-local-ising");
    for (int i = 0; i < n; ++i) p.f.add(MultiIndex::singleton(i), uniform(rng, -0.5, 0.5));
    for (int i = 0; i < n; ++i) {
      const int j = (i + 1) % n;
      if (n == 2 && i == 1) break;
      p.f.add(MultiIndex::of({i, j}), uniform(rng, -1.0, 1.0));
    }
    if (enumerable) p.optimum = brute_force_maximum(p.f);
  } else if (name == "trap-k") {
    const int k = params.k;
    if (k < 2 || k > 12) throw DomainError("problem.k must be in [2, 12]");
    if (n % k != 0) throw DomainError("problem.k must divide problem.n");
    p.f = detail::trap_blocks(n, k);
    p.optimum = enumerable ? brute_force_maximum(p.f) : static_cast<double>(n);
  } else if (name == "random-sparse") {
    const int terms = params.terms > 0 ? params.terms : n;
    for (int t = 0; t < terms; ++t) {
      const int degree = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(std::min(3, n))));
      std::uint64_t bits = 0;
      while (std::popcount(bits) < degree) bits |= std::uint64_t{1} << uniform_index(rng, static_cast<std::uint64_t>(n));
      p.f.add(MultiIndex(bits), uniform(rng, -1.0, 1.0));
    }
    if (enumerable) p.optimum = brute_force_maximum(p.f);
  } else {
    throw DomainError("unknown problem '" + name + "'");
  }
  return p;
}

}  // namespace stochrelax::cli
