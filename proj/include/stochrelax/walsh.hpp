#pragma once
// Sparse multilinear (Walsh) representation of pseudo-Boolean functions on
// {-1,+1}^n, the fast Walsh-Hadamard transform, and closed-form moment
// generating functions under the uniform density.
//
// State encoding used throughout the library: a configuration x is stored as
// a 64-bit word whose bit i is 0 when x_i = +1 and 1 when x_i = -1. Tables
// over {-1,+1}^n are indexed by that word, so the character x^alpha at state
// s is (-1)^popcount(alpha & s).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>
#include <span>

#include "stochrelax/error.hpp"

namespace stochrelax {

inline constexpr int kMaxVariables = 64;
inline constexpr int kDefaultExactLimit = 20;
inline constexpr int kDefaultEnumerationLimit = 24;
inline constexpr double kDefaultDropTolerance = 1e-14;

using Spin = std::int8_t;
using State = std::uint64_t;

/// alpha in {0,1}^n as a bit mask; bit i set means x_{i+1} appears.
class MultiIndex {
 public:
  constexpr MultiIndex() = default;
  constexpr explicit MultiIndex(std::uint64_t bits) : bits_(bits) {}

  /// From 0-based variable positions.
  static MultiIndex of(std::initializer_list<int> vars) {
    std::uint64_t b = 0;
    for (int v : vars) {
      if (v < 0 || v >= kMaxVariables) throw DimensionError("variable index out of range");
      b |= std::uint64_t{1} << v;
    }
    return MultiIndex(b);
  }
  static constexpr MultiIndex singleton(int var) { return MultiIndex(std::uint64_t{1} << var); }

  constexpr std::uint64_t bits() const noexcept { return bits_; }
  constexpr bool contains(int var) const noexcept { return (bits_ >> var) & 1U; }
  constexpr int degree() const noexcept { return std::popcount(bits_); }
  constexpr bool is_zero() const noexcept { return bits_ == 0; }
  /// Smallest n this index fits in.
  constexpr int min_width() const noexcept { return 64 - std::countl_zero(bits_); }

  /// Componentwise sum mod 2.
  constexpr MultiIndex operator^(MultiIndex o) const noexcept { return MultiIndex(bits_ ^ o.bits_); }
  constexpr auto operator<=>(const MultiIndex&) const = default;

  /// 0/1 string, alpha_1 first ("10" is x_1 for n = 2).
  std::string to_string(int n) const {
    std::string s(static_cast<std::size_t>(n), '0');
    for (int i = 0; i < n; ++i)
      if (contains(i)) s[static_cast<std::size_t>(i)] = '1';
    return s;
  }

 private:
  std::uint64_t bits_ = 0;
};

/// x^alpha evaluated at an encoded state.
constexpr int character(MultiIndex alpha, State s) noexcept {
  return (std::popcount(alpha.bits() & s) & 1) ? -1 : 1;
}

inline State encode_spins(std::span<const Spin> x) {
  if (x.size() > static_cast<std::size_t>(kMaxVariables)) throw LimitError("more than 64 spins");
  State s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == -1)
      s |= State{1} << i;
    else if (x[i] != 1)
      throw DomainError("spin values must be +1 or -1");
  }
  return s;
}

inline std::vector<Spin> decode_state(State s, int n) {
  std::vector<Spin> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = ((s >> i) & 1U) ? Spin{-1} : Spin{1};
  return x;
}

/// f(x) = sum_alpha coef(alpha) x^alpha with no stored zero coefficients.
class PseudoBooleanFunction {
 public:
  using Terms = std::map<MultiIndex, double>;

  PseudoBooleanFunction() = default;
  explicit PseudoBooleanFunction(int n) : n_(n) {
    if (n < 0 || n > kMaxVariables) throw LimitError("dimension must be in [0, 64]");
  }

  int n() const noexcept { return n_; }
  const Terms& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  /// Accumulates into the coefficient of alpha; an exact zero result is erased.
  PseudoBooleanFunction& add(MultiIndex alpha, double coef) {
    check_width(alpha);
    const double v = coefficient(alpha) + coef;
    if (v == 0.0)
      terms_.erase(alpha);
    else
      terms_[alpha] = v;
    return *this;
  }

  PseudoBooleanFunction& set(MultiIndex alpha, double coef) {
    check_width(alpha);
    if (coef == 0.0)
      terms_.erase(alpha);
    else
      terms_[alpha] = coef;
    return *this;
  }

  double coefficient(MultiIndex alpha) const {
    auto it = terms_.find(alpha);
    return it == terms_.end() ? 0.0 : it->second;
  }
  double constant() const { return coefficient(MultiIndex{}); }

  /// supp(f), in ascending mask order.
  std::vector<MultiIndex> support() const {
    std::vector<MultiIndex> s;
    s.reserve(terms_.size());
    for (const auto& [a, c] : terms_) s.push_back(a);
    return s;
  }

  /// f evaluated at an encoded state.
  double operator()(State s) const noexcept {
    double acc = 0.0;
    for (const auto& [a, c] : terms_) acc += c * character(a, s);
    return acc;
  }

  double max_abs_coefficient() const noexcept {
    double m = 0.0;
    for (const auto& [a, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  friend PseudoBooleanFunction operator*(double k, const PseudoBooleanFunction& f) {
    PseudoBooleanFunction g(f.n_);
    for (const auto& [a, c] : f.terms_) g.set(a, k * c);
    return g;
  }

  bool operator==(const PseudoBooleanFunction&) const = default;

 private:
  void check_width(MultiIndex alpha) const {
    if (alpha.min_width() > n_) throw DimensionError("monomial uses a variable beyond n");
  }

  int n_ = 0;
  Terms terms_;
};

/// sum_alpha coef(alpha) prod_{i in alpha} x_i.
inline double evaluate(const PseudoBooleanFunction& f, std::span<const Spin> x) {
  if (x.size() != static_cast<std::size_t>(f.n()))
    throw DimensionError("spin vector length " + std::to_string(x.size()) + " does not match n = " +
                         std::to_string(f.n()));
  return f(encode_spins(x));
}

namespace walsh {

struct TransformOptions {
  int exact_limit = kDefaultExactLimit;
  double drop_tolerance = kDefaultDropTolerance;
};

namespace detail {

// Unnormalized in-place Walsh-Hadamard butterfly: v[a] <- sum_s v[s] (-1)^|a & s|.
inline void butterfly(std::span<double> v) {
  const std::size_t size = v.size();
  for (std::size_t len = 1; len < size; len <<= 1) {
    for (std::size_t i = 0; i < size; i += len << 1) {
      for (std::size_t j = i; j < i + len; ++j) {
        const double a = v[j];
        const double b = v[j + len];
        v[j] = a + b;
        v[j + len] = a - b;
      }
    }
  }
}

inline int log2_exact(std::size_t size) {
  if (size == 0 || !std::has_single_bit(size))
    throw DomainError("table length " + std::to_string(size) + " is not a power of two");
  return std::countr_zero(size);
}

}  // namespace detail

/// Walsh coefficients of a table over {-1,+1}^n in canonical state order.
/// Coefficients with magnitude <= drop_tolerance are not stored.
inline PseudoBooleanFunction walsh_transform(std::span<const double> table,
                                             const TransformOptions& opt = {}) {
  const int n = detail::log2_exact(table.size());
  if (n > opt.exact_limit)
    throw LimitError("n = " + std::to_string(n) + " exceeds the exact limit " +
                     std::to_string(opt.exact_limit));
  std::vector<double> v(table.begin(), table.end());
  detail::butterfly(v);
  const double scale = std::ldexp(1.0, -n);
  PseudoBooleanFunction f(n);
  for (std::size_t a = 0; a < v.size(); ++a) {
    const double c = v[a] * scale;
    if (std::abs(c) > opt.drop_tolerance) f.set(MultiIndex(a), c);
  }
  return f;
}

/// Table of f over all 2^n states; exact inverse of walsh_transform.
inline std::vector<double> synthesize(const PseudoBooleanFunction& f,
                                      int exact_limit = kDefaultExactLimit) {
  if (f.n() > exact_limit)
    throw LimitError("n = " + std::to_string(f.n()) + " exceeds the exact limit " +
                     std::to_string(exact_limit));
  std::vector<double> v(std::size_t{1} << f.n(), 0.0);
  for (const auto& [a, c] : f.terms()) v[a.bits()] = c;
  detail::butterfly(v);
  return v;
}

/// Subsets B of an ordered support list, each a bit mask over support
/// positions, satisfying sum_{alpha in B} alpha = 0 (mod 2) and, when
/// even_cardinality is set, |B| even.
struct SubsetFamily {
  std::vector<MultiIndex> support;
  bool even_cardinality = false;
  std::vector<std::uint32_t> members;

  std::size_t size() const noexcept { return members.size(); }

  /// Re-substitutes every member into its defining constraints.
  bool verify() const {
    for (std::uint32_t b : members) {
      std::uint64_t sum = 0;
      for (std::size_t j = 0; j < support.size(); ++j)
        if ((b >> j) & 1U) sum ^= support[j].bits();
      if (sum != 0) return false;
      if (even_cardinality && (std::popcount(b) & 1)) return false;
    }
    return true;
  }
};

/// Solves S b = 0 over GF(2), where column j of S is support[j], by
/// Gaussian elimination, then enumerates the whole nullspace. The parity
/// row (1,...,1) is appended when even_cardinality is set.
inline SubsetFamily gf2_constraint_sets(std::span<const MultiIndex> support, bool even_cardinality,
                                        int enumeration_limit = kDefaultEnumerationLimit) {
  if (support.empty()) throw DomainError("support must be non-empty");
  const std::size_t m = support.size();
  if (m > static_cast<std::size_t>(std::min(enumeration_limit, 32)))
    throw LimitError("support size " + std::to_string(m) + " exceeds the enumeration limit " +
                     std::to_string(enumeration_limit));

  // One row per variable; each row is a mask over the m columns.
  std::vector<std::uint32_t> rows;
  for (int i = 0; i < kMaxVariables; ++i) {
    std::uint32_t row = 0;
    for (std::size_t j = 0; j < m; ++j)
      if (support[j].contains(i)) row |= std::uint32_t{1} << j;
    if (row) rows.push_back(row);
  }
  if (even_cardinality) rows.push_back(static_cast<std::uint32_t>((std::uint64_t{1} << m) - 1));

  // Reduced row echelon form.
  std::vector<int> pivot_of_row;
  std::size_t rank = 0;
  for (std::size_t col = 0; col < m && rank < rows.size(); ++col) {
    const std::uint32_t bit = std::uint32_t{1} << col;
    std::size_t r = rank;
    while (r < rows.size() && !(rows[r] & bit)) ++r;
    if (r == rows.size()) continue;
    std::swap(rows[rank], rows[r]);
    for (std::size_t k = 0; k < rows.size(); ++k)
      if (k != rank && (rows[k] & bit)) rows[k] ^= rows[rank];
    pivot_of_row.push_back(static_cast<int>(col));
    ++rank;
  }

  std::uint32_t pivot_cols = 0;
  for (int p : pivot_of_row) pivot_cols |= std::uint32_t{1} << p;

  // Each free column gives one nullspace basis vector.
  std::vector<std::uint32_t> basis;
  for (std::size_t free = 0; free < m; ++free) {
    const std::uint32_t fbit = std::uint32_t{1} << free;
    if (pivot_cols & fbit) continue;
    std::uint32_t v = fbit;
    for (std::size_t r = 0; r < rank; ++r)
      if (rows[r] & fbit) v |= std::uint32_t{1} << pivot_of_row[r];
    basis.push_back(v);
  }

  SubsetFamily fam;
  fam.support.assign(support.begin(), support.end());
  fam.even_cardinality = even_cardinality;
  const std::uint64_t count = std::uint64_t{1} << basis.size();
  fam.members.reserve(count);
  std::uint32_t cur = 0;
  fam.members.push_back(cur);
  for (std::uint64_t g = 1; g < count; ++g) {  // Gray-code walk
    cur ^= basis[static_cast<std::size_t>(std::countr_zero(g))];
    fam.members.push_back(cur);
  }
  std::sort(fam.members.begin(), fam.members.end());
  return fam;
}

namespace detail {

struct NonConstantPart {
  std::vector<MultiIndex> support;
  std::vector<double> coefs;
};

inline NonConstantPart split_constant(const PseudoBooleanFunction& f) {
  NonConstantPart p;
  for (const auto& [a, c] : f.terms()) {
    if (a.is_zero()) continue;
    p.support.push_back(a);
    p.coefs.push_back(c);
  }
  return p;
}

// sum_{B in family} prod_{j not in B} cosh(t c_j) prod_{j in B} sinh(t c_j)
inline double cosh_sinh_sum(const SubsetFamily& fam, std::span<const double> coefs, double t) {
  const std::size_t m = coefs.size();
  std::vector<double> ch(m), sh(m);
  for (std::size_t j = 0; j < m; ++j) {
    ch[j] = std::cosh(t * coefs[j]);
    sh[j] = std::sinh(t * coefs[j]);
  }
  double total = 0.0;
  for (std::uint32_t b : fam.members) {
    double prod = 1.0;
    for (std::size_t j = 0; j < m; ++j) prod *= ((b >> j) & 1U) ? sh[j] : ch[j];
    total += prod;
  }
  return total;
}

}  // namespace detail

/// E_uniform[exp(t f)] from the cosh/sinh expansion over the GF(2) family
/// B(f); the constant term enters as the factor exp(t f_0).
inline double mgf_uniform(const PseudoBooleanFunction& f, double t,
                          int enumeration_limit = kDefaultEnumerationLimit) {
  const double shift = std::exp(t * f.constant());
  auto part = detail::split_constant(f);
  if (part.support.empty()) return shift;
  auto fam = gf2_constraint_sets(part.support, false, enumeration_limit);
  return shift * detail::cosh_sinh_sum(fam, part.coefs, t);
}

/// E_uniform[cosh(t f)] - 1 from the even-cardinality subfamily B_0(f).
///
/// The displayed condition for B_0 in the source text has a second clause
/// that does not involve B; expanding E[cosh(t f)] = (M(t) + M(-t)) / 2
/// keeps exactly the members of B(f) with an even number of sinh factors,
/// so the extra constraint implemented here is |B| even. Requires a zero
/// constant term.
inline double phi_expectation_uniform(const PseudoBooleanFunction& f, double t,
                                      int enumeration_limit = kDefaultEnumerationLimit) {
  if (f.constant() != 0.0) throw DomainError("phi expectation requires a zero constant term");
  auto part = detail::split_constant(f);
  if (part.support.empty()) return 0.0;
  auto fam = gf2_constraint_sets(part.support, true, enumeration_limit);
  return detail::cosh_sinh_sum(fam, part.coefs, t) - 1.0;
}

// ---------------------------------------------------------------------------
// Text format: one monomial per line, "coefficient: i1 i2 ... ik" with
// 1-based variable indices; an empty index list is the constant term.
// Blank lines and '#' comments are ignored.

inline PseudoBooleanFunction parse_function(std::istream& in, std::optional<int> n = std::nullopt) {
  struct Entry {
    MultiIndex alpha;
    double coef;
  };
  std::vector<Entry> entries;
  std::map<MultiIndex, std::size_t> seen;
  int max_var = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ParseError("expected 'coefficient: indices'", lineno);
    double coef = 0.0;
    {
      std::istringstream cs(line.substr(0, colon));
      std::string extra;
      if (!(cs >> coef) || (cs >> extra)) throw ParseError("bad coefficient", lineno);
      if (!std::isfinite(coef)) throw ParseError("coefficient must be finite", lineno);
    }
    std::istringstream is(line.substr(colon + 1));
    std::uint64_t bits = 0;
    std::string tok;
    while (is >> tok) {
      std::size_t used = 0;
      long v = 0;
      try {
        v = std::stol(tok, &used);
      } catch (const std::exception&) {
        throw ParseError("bad variable index '" + tok + "'", lineno);
      }
      if (used != tok.size() || v < 1 || v > kMaxVariables)
        throw ParseError("variable index '" + tok + "' out of range", lineno);
      const std::uint64_t bit = std::uint64_t{1} << (v - 1);
      if (bits & bit) throw ParseError("variable repeated within a monomial", lineno);
      bits |= bit;
      max_var = std::max(max_var, static_cast<int>(v));
    }
    MultiIndex alpha(bits);
    if (auto [it, fresh] = seen.emplace(alpha, lineno); !fresh)
      throw ParseError("duplicate monomial (first seen on line " + std::to_string(it->second) + ")",
                       lineno);
    entries.push_back({alpha, coef});
  }
  const int dim = n.value_or(max_var);
  if (max_var > dim)
    throw ParseError("variable " + std::to_string(max_var) + " exceeds n = " + std::to_string(dim));
  PseudoBooleanFunction f(dim);
  for (const auto& e : entries) f.set(e.alpha, e.coef);
  return f;
}

inline PseudoBooleanFunction parse_function(const std::string& text, std::optional<int> n = std::nullopt) {
  std::istringstream in(text);
  return parse_function(in, n);
}

inline std::string format_function(const PseudoBooleanFunction& f) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& [a, c] : f.terms()) {
    out << c << ':';
    for (int i = 0; i < f.n(); ++i)
      if (a.contains(i)) out << ' ' << (i + 1);
    out << '\n';
  }
  return out.str();
}

}  // namespace walsh
}  // namespace stochrelax

template <>
struct std::hash<stochrelax::MultiIndex> {
  std::size_t operator()(const stochrelax::MultiIndex& a) const noexcept {
    return std::hash<std::uint64_t>{}(a.bits());
  }
};
