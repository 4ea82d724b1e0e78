#pragma once
// Exponential families on {-1,+1}^n with monomial sufficient statistics and
// the uniform reference density:
//
//   q_theta(x) = exp(sum_j theta_j x^{alpha_j} - psi(theta)) 2^{-n}.
//
// The exact engine enumerates all 2^n states (n <= exact limit). Above the
// limit only the Gibbs sampler applies; the caller picks the path.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stochrelax/error.hpp"
#include "stochrelax/rng.hpp"
#include "stochrelax/walsh.hpp"

namespace stochrelax {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace expfam {

/// Ordered, distinct, non-constant monomials T_j(x) = x^{alpha_j}.
/// Excluding the constant monomial makes every statistic centered under the
/// uniform reference.
class MonomialBasis {
 public:
  MonomialBasis() = default;
  MonomialBasis(int n, std::vector<MultiIndex> stats) : n_(n), stats_(std::move(stats)) {
    if (n < 1 || n > kMaxVariables) throw LimitError("basis dimension must be in [1, 64]");
    std::set<MultiIndex> seen;
    for (MultiIndex a : stats_) {
      if (a.is_zero()) throw DomainError("basis may not contain the constant monomial");
      if (a.min_width() > n) throw DimensionError("basis monomial uses a variable beyond n");
      if (!seen.insert(a).second) throw DomainError("basis monomials must be distinct");
    }
  }

  static MonomialBasis singletons(int n) {
    std::vector<MultiIndex> s;
    for (int i = 0; i < n; ++i) s.push_back(MultiIndex::singleton(i));
    return {n, std::move(s)};
  }

  /// Non-constant support of f, optionally preceded by all singletons.
  static MonomialBasis from_support(const PseudoBooleanFunction& f, bool with_singletons) {
    std::vector<MultiIndex> s;
    std::set<MultiIndex> seen;
    if (with_singletons)
      for (int i = 0; i < f.n(); ++i)
        if (seen.insert(MultiIndex::singleton(i)).second) s.push_back(MultiIndex::singleton(i));
    for (MultiIndex a : f.support())
      if (!a.is_zero() && seen.insert(a).second) s.push_back(a);
    return {f.n(), std::move(s)};
  }

  int n() const noexcept { return n_; }
  int d() const noexcept { return static_cast<int>(stats_.size()); }
  const std::vector<MultiIndex>& stats() const noexcept { return stats_; }
  MultiIndex operator[](int j) const { return stats_[static_cast<std::size_t>(j)]; }

  /// T(x) at an encoded state.
  Vector statistics(State s) const {
    Vector t(d());
    for (int j = 0; j < d(); ++j) t[j] = character(stats_[static_cast<std::size_t>(j)], s);
    return t;
  }

  bool operator==(const MonomialBasis&) const = default;

 private:
  int n_ = 0;
  std::vector<MultiIndex> stats_;
};

/// Strictly positive probability table over 2^n states summing to one.
class FiniteDensity {
 public:
  explicit FiniteDensity(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty() || !std::has_single_bit(probs_.size()))
      throw DimensionError("density table length must be a power of two");
    double sum = 0.0;
    for (double p : probs_) {
      if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("density entries must be positive");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw DomainError("density does not sum to one");
  }

  /// Normalizes strictly positive weights.
  static FiniteDensity from_weights(std::vector<double> w) {
    double sum = 0.0;
    for (double x : w) sum += x;
    for (double& x : w) x /= sum;
    return FiniteDensity(std::move(w));
  }

  static FiniteDensity uniform(int n) {
    return FiniteDensity(std::vector<double>(std::size_t{1} << n, std::ldexp(1.0, -n)));
  }

  std::size_t size() const noexcept { return probs_.size(); }
  int n() const noexcept { return std::countr_zero(probs_.size()); }
  double operator[](std::size_t s) const { return probs_[s]; }
  std::span<const double> probabilities() const noexcept { return probs_; }

  double expectation(std::span<const double> u) const {
    check(u.size());
    double acc = 0.0;
    for (std::size_t s = 0; s < probs_.size(); ++s) acc += probs_[s] * u[s];
    return acc;
  }

  double inner_product(std::span<const double> u, std::span<const double> w) const {
    check(u.size());
    check(w.size());
    double acc = 0.0;
    for (std::size_t s = 0; s < probs_.size(); ++s) acc += probs_[s] * u[s] * w[s];
    return acc;
  }

 private:
  void check(std::size_t len) const {
    if (len != probs_.size()) throw DimensionError("table length does not match density");
  }
  std::vector<double> probs_;
};

namespace detail {

inline void check_theta(const MonomialBasis& basis, const Vector& theta) {
  if (theta.size() != basis.d())
    throw DimensionError("theta has " + std::to_string(theta.size()) + " entries, basis has " +
                         std::to_string(basis.d()));
  if (!theta.allFinite()) throw DomainError("theta must be finite");
}

inline void check_exact(int n, int exact_limit) {
  if (n > exact_limit)
    throw LimitError("n = " + std::to_string(n) + " exceeds the exact-engine limit " +
                     std::to_string(exact_limit) + "; use the Gibbs sampler");
}

}  // namespace detail

/// q_theta tabulated over all 2^n states, with psi(theta) and the moments
/// derived from the table.
class ExactModel {
 public:
  ExactModel(MonomialBasis basis, Vector theta, int exact_limit = kDefaultExactLimit)
      : basis_(std::move(basis)), theta_(std::move(theta)) {
    detail::check_theta(basis_, theta_);
    detail::check_exact(basis_.n(), exact_limit);
    const std::size_t states = std::size_t{1} << basis_.n();
    probs_.resize(states);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < states; ++s) {
      double e = 0.0;
      for (int j = 0; j < basis_.d(); ++j) e += theta_[j] * character(basis_[j], s);
      probs_[s] = e;
      top = std::max(top, e);
    }
    double sum = 0.0;
    for (double& p : probs_) {
      p = std::exp(p - top);
      sum += p;
    }
    for (double& p : probs_) p /= sum;
    log_partition_ = top + std::log(sum) - basis_.n() * std::log(2.0);
  }

  const MonomialBasis& basis() const noexcept { return basis_; }
  const Vector& theta() const noexcept { return theta_; }
  double log_partition() const noexcept { return log_partition_; }
  std::span<const double> probabilities() const noexcept { return probs_; }

  FiniteDensity density() const { return FiniteDensity(probs_); }

  /// eta = E_theta[T].
  Vector mean_params() const {
    Vector eta = Vector::Zero(basis_.d());
    for (std::size_t s = 0; s < probs_.size(); ++s)
      for (int j = 0; j < basis_.d(); ++j) eta[j] += probs_[s] * character(basis_[j], s);
    return eta;
  }

  /// Var_theta(T), accumulated from centered statistics.
  Matrix fisher_information() const {
    const int d = basis_.d();
    const Vector eta = mean_params();
    Matrix info = Matrix::Zero(d, d);
    Vector c(d);
    for (std::size_t s = 0; s < probs_.size(); ++s) {
      for (int j = 0; j < d; ++j) c[j] = character(basis_[j], s) - eta[j];
      info.selfadjointView<Eigen::Lower>().rankUpdate(c, probs_[s]);
    }
    return info.selfadjointView<Eigen::Lower>();
  }

  double expectation(std::span<const double> table) const {
    if (table.size() != probs_.size()) throw DimensionError("table length does not match model");
    double acc = 0.0;
    for (std::size_t s = 0; s < probs_.size(); ++s) acc += probs_[s] * table[s];
    return acc;
  }

  double expectation(const PseudoBooleanFunction& f) const {
    check_function(f);
    return expectation(walsh::synthesize(f, basis_.n()));
  }

  /// (Cov_theta(f, T_1), ..., Cov_theta(f, T_d)).
  Vector sr_gradient(const PseudoBooleanFunction& f) const {
    check_function(f);
    return sr_gradient(walsh::synthesize(f, basis_.n()));
  }

  /// Same, for f given as a table over the states.
  Vector sr_gradient(std::span<const double> table) const {
    const double mean_f = expectation(table);
    const Vector eta = mean_params();
    Vector g = Vector::Zero(basis_.d());
    for (std::size_t s = 0; s < probs_.size(); ++s) {
      const double w = probs_[s] * (table[s] - mean_f);
      for (int j = 0; j < basis_.d(); ++j) g[j] += w * (character(basis_[j], s) - eta[j]);
    }
    return g;
  }

 private:
  void check_function(const PseudoBooleanFunction& f) const {
    if (f.n() != basis_.n())
      throw DimensionError("function has n = " + std::to_string(f.n()) + ", basis has n = " +
                           std::to_string(basis_.n()));
  }

  MonomialBasis basis_;
  Vector theta_;
  std::vector<double> probs_;
  double log_partition_ = 0.0;
};

inline double log_partition(const MonomialBasis& basis, const Vector& theta,
                            int exact_limit = kDefaultExactLimit) {
  return ExactModel(basis, theta, exact_limit).log_partition();
}

inline FiniteDensity density(const MonomialBasis& basis, const Vector& theta,
                             int exact_limit = kDefaultExactLimit) {
  return ExactModel(basis, theta, exact_limit).density();
}

inline Vector mean_params(const MonomialBasis& basis, const Vector& theta,
                          int exact_limit = kDefaultExactLimit) {
  return ExactModel(basis, theta, exact_limit).mean_params();
}

inline Matrix fisher_information(const MonomialBasis& basis, const Vector& theta,
                                 int exact_limit = kDefaultExactLimit) {
  return ExactModel(basis, theta, exact_limit).fisher_information();
}

inline Vector sr_gradient_exact(const MonomialBasis& basis, const Vector& theta,
                                const PseudoBooleanFunction& f, int exact_limit = kDefaultExactLimit) {
  return ExactModel(basis, theta, exact_limit).sr_gradient(f);
}

inline double expected_value(const MonomialBasis& basis, const Vector& theta,
                             const PseudoBooleanFunction& f, int exact_limit = kDefaultExactLimit) {
  return ExactModel(basis, theta, exact_limit).expectation(f);
}

// ---------------------------------------------------------------------------
// Gibbs sampling

enum class ScanOrder { systematic, random };

struct GibbsOptions {
  std::size_t count = 1000;
  std::size_t burn_in = 100;  // sweeps discarded before the first record
  std::size_t thinning = 1;   // sweeps between consecutive records
  std::uint64_t seed = 0;
  ScanOrder scan = ScanOrder::systematic;
};

/// Single-site Gibbs sampler for q_theta. One sweep updates every site once,
/// in order 1..n (systematic) or n uniformly drawn sites (random). Site i is
/// set to +1 with probability e^h / (e^h + e^-h), where h is the sum of
/// theta_j x^{alpha_j \ {i}} over the statistics containing i. The chain
/// starts from a uniform random state. With thinning = 0 every record repeats
/// the post-burn-in state.
inline std::vector<State> gibbs_sampler(const MonomialBasis& basis, const Vector& theta,
                                        const GibbsOptions& opt) {
  detail::check_theta(basis, theta);
  if (opt.count < 1) throw DomainError("sample count must be at least 1");

  const int n = basis.n();
  struct Coupling {
    MultiIndex rest;
    double weight;
  };
  std::vector<std::vector<Coupling>> field(static_cast<std::size_t>(n));
  for (int j = 0; j < basis.d(); ++j) {
    const MultiIndex a = basis[j];
    for (int i = 0; i < n; ++i)
      if (a.contains(i) && theta[j] != 0.0)
        field[static_cast<std::size_t>(i)].push_back({MultiIndex(a.bits() & ~(State{1} << i)), theta[j]});
  }

  Engine rng(opt.seed);
  State x = 0;
  for (int i = 0; i < n; ++i)
    if (rng() >> 63) x |= State{1} << i;

  auto update = [&](int i) {
    double h = 0.0;
    for (const auto& c : field[static_cast<std::size_t>(i)]) h += c.weight * character(c.rest, x);
    const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * h));
    if (uniform01(rng) < p_plus)
      x &= ~(State{1} << i);
    else
      x |= State{1} << i;
  };
  auto sweep = [&] {
    if (opt.scan == ScanOrder::systematic) {
      for (int i = 0; i < n; ++i) update(i);
    } else {
      for (int k = 0; k < n; ++k) update(static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n))));
    }
  };

  for (std::size_t b = 0; b < opt.burn_in; ++b) sweep();
  std::vector<State> out;
  out.reserve(opt.count);
  for (std::size_t k = 0; k < opt.count; ++k) {
    for (std::size_t t = 0; t < opt.thinning; ++t) sweep();
    out.push_back(x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hilbert-bundle transport

/// Isometric transport L^2_0(p) -> L^2_0(q):
///   u -> r u - (1 + E_q[r])^{-1} (1 + r) E_q[r u],   r = sqrt(p / q).
/// Requires E_p[u] = 0 (to 1e-10, scaled by max |u|).
inline std::vector<double> hilbert_transport(const FiniteDensity& p, const FiniteDensity& q,
                                             std::span<const double> u) {
  if (p.size() != q.size()) throw DimensionError("p and q live on different spaces");
  if (u.size() != p.size()) throw DimensionError("u does not match the density table");
  double scale = 1.0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  if (std::abs(p.expectation(u)) > 1e-10 * scale) throw DomainError("u is not centered under p");

  std::vector<double> r(p.size());
  for (std::size_t s = 0; s < r.size(); ++s) r[s] = std::sqrt(p[s] / q[s]);
  const double mean_r = q.expectation(r);
  double mean_ru = 0.0;
  for (std::size_t s = 0; s < r.size(); ++s) mean_ru += q[s] * r[s] * u[s];
  const double k = mean_ru / (1.0 + mean_r);

  std::vector<double> v(r.size());
  for (std::size_t s = 0; s < r.size(); ++s) v[s] = r[s] * u[s] - k * (1.0 + r[s]);
  return v;
}

// ---------------------------------------------------------------------------
// Text formats: a basis is one monomial per line ("i1 i2 ... ik", 1-based);
// theta vectors are comma-separated rows.

inline MonomialBasis parse_basis(std::istream& in, int n) {
  std::vector<MultiIndex> stats;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    std::uint64_t bits = 0;
    long v = 0;
    bool any = false;
    while (is >> v) {
      if (v < 1 || v > n) throw ParseError("variable index out of range", lineno);
      bits |= State{1} << (v - 1);
      any = true;
    }
    if (!is.eof()) throw ParseError("expected integer variable indices", lineno);
    if (any) stats.emplace_back(bits);
  }
  try {
    return {n, std::move(stats)};
  } catch (const std::exception& e) {
    throw ParseError(e.what());
  }
}

inline std::string format_basis(const MonomialBasis& basis) {
  std::ostringstream out;
  for (MultiIndex a : basis.stats()) {
    bool first = true;
    for (int i = 0; i < basis.n(); ++i)
      if (a.contains(i)) {
        out << (first ? "" : " ") << (i + 1);
        first = false;
      }
    out << '\n';
  }
  return out.str();
}

inline std::vector<Vector> parse_theta_csv(std::istream& in) {
  std::vector<Vector> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> vals;
    std::istringstream is(line);
    std::string cell;
    while (std::getline(is, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ParseError("bad theta entry '" + cell + "'", lineno);
      }
    }
    rows.push_back(Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size())));
  }
  return rows;
}

inline std::string format_theta_csv(const Vector& theta) {
  std::ostringstream out;
  out.precision(17);
  for (Eigen::Index j = 0; j < theta.size(); ++j) out << (j ? "," : "") << theta[j];
  out << '\n';
  return out.str();
}

}  // namespace expfam
}  // namespace stochrelax
