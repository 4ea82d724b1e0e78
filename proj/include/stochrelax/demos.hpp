#pragma once
// Verification tables behind the mgf, binomial-demo and orlicz-demo
// subcommands. Each report carries its own pass/fail verdict.

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stochrelax/orlicz.hpp"
#include "stochrelax/scalarfam.hpp"
#include "stochrelax/walsh.hpp"

namespace stochrelax::cli {

inline std::string fmt(double v, const char* spec = "%.12g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// ---------------------------------------------------------------------------

struct MgfReport {
  double t = 0.0;
  double mgf = 0.0;
  std::optional<double> enumerated;    // 2^-n sum_x e^{t f(x)}, n <= 20
  std::optional<double> relative_error;
  std::optional<double> phi_expectation;  // when f has no constant term
  bool ok = true;
};

inline MgfReport mgf_report(const PseudoBooleanFunction& f, double t) {
  MgfReport r;
  r.t = t;
  r.mgf = walsh::mgf_uniform(f, t);
  if (f.n() <= kDefaultExactLimit) {
    const auto table = walsh::synthesize(f);
    double acc = 0.0;
    for (double v : table) acc += std::exp(t * v);
    r.enumerated = std::ldexp(acc, -f.n());
    r.relative_error = std::abs(r.mgf - *r.enumerated) / std::abs(*r.enumerated);
    r.ok = *r.relative_error <= 1e-9;
  }
  if (f.constant() == 0.0) r.phi_expectation = walsh::phi_expectation_uniform(f, t);
  return r;
}

inline void print(std::ostream& out, const MgfReport& r) {
  out << "t                 " << fmt(r.t, "%.17g") << '\n';
  out << "mgf_uniform       " << fmt(r.mgf, "%.17g") << '\n';
  if (r.enumerated) {
    out << "enumerated mean   " << fmt(*r.enumerated, "%.17g") << '\n';
    out << "relative error    " << fmt(*r.relative_error, "%.3e") << '\n';
  }
  if (r.phi_expectation) out << "E[Phi(t f)]       " << fmt(*r.phi_expectation, "%.17g") << '\n';
  out << (r.ok ? "check: ok" : "check: FAILED") << '\n';
}

// ---------------------------------------------------------------------------

struct BinomialRow {
  double eta = 0.0;
  double theta = 0.0;
  double exp_vs_std = 0.0;      // max_x |log p_exp - log p_std|
  double bregman_vs_std = 0.0;  // max_x |log p_bregman - log p_std|
  double fenchel = 0.0;         // |psi*(eta) + psi(theta) - theta eta|
  double normalization = 0.0;   // |sum_x mu(x) p_std(x) - 1|
  double min_divergence = 0.0;
};

struct BinomialDemo {
  int n = 0;
  std::vector<BinomialRow> rows;
  std::vector<scalarfam::BoundaryLimitReport> boundaries;
  bool ok = true;
};

/// Identity residuals on eta = n j / 20, j = 1..19, and boundary scans for
/// x = 0, 1, n.
inline BinomialDemo binomial_demo(int n) {
  using namespace scalarfam;
  const BinomialModel m(n);
  BinomialDemo demo;
  demo.n = n;
  for (int j = 1; j < 20; ++j) {
    BinomialRow row;
    row.eta = n * j / 20.0;
    row.theta = theta_from_eta(m, row.eta);
    row.min_divergence = std::numeric_limits<double>::infinity();
    double mass = 0.0;
    for (int x = 0; x <= n; ++x) {
      const double ls = log_density_std(m, x, row.eta);
      row.exp_vs_std = std::max(row.exp_vs_std, std::abs(log_density_exp(m, x, row.theta) - ls));
      row.bregman_vs_std = std::max(row.bregman_vs_std, std::abs(log_density_bregman(m, x, row.eta) - ls));
      row.min_divergence = std::min(row.min_divergence, bregman_divergence(m, x, row.eta));
      mass += std::exp(std::lgamma(n + 1.0) - std::lgamma(x + 1.0) - std::lgamma(n - x + 1.0) + ls);
    }
    row.fenchel = std::abs(psi_star(m, row.eta) + psi(m, row.theta) - row.theta * row.eta);
    row.normalization = std::abs(mass - 1.0);
    demo.ok = demo.ok && row.exp_vs_std <= 1e-12 && row.bregman_vs_std <= 1e-12 && row.fenchel <= 1e-10 &&
              row.normalization <= 1e-12 && row.min_divergence >= -1e-12;
    demo.rows.push_back(row);
  }
  for (int x : {0, 1, n}) {
    if (x > n || (x == 1 && n == 1)) continue;
    auto rep = boundary_limit_check(m, x);
    const bool interior = x != 0 && x != n;
    const auto want_zero = interior ? LimitKind::diverges_to_minus_infinity
                                    : (x == 0 ? LimitKind::converges_to_zero : LimitKind::diverges_to_minus_infinity);
    const auto want_n = interior ? LimitKind::diverges_to_minus_infinity
                                 : (x == n ? LimitKind::converges_to_zero : LimitKind::diverges_to_minus_infinity);
    demo.ok = demo.ok && rep.toward_zero.limit == want_zero && rep.toward_n.limit == want_n;
    demo.boundaries.push_back(std::move(rep));
  }
  return demo;
}

inline void print(std::ostream& out, const BinomialDemo& d) {
  out << "binomial n = " << d.n << '\n';
  out << "       eta       theta   |exp-std|   |breg-std|   fenchel   |mass-1|   min D\n";
  for (const auto& r : d.rows) {
    out << fmt(r.eta, "%10.4f") << ' ' << fmt(r.theta, "%11.5f") << ' ' << fmt(r.exp_vs_std, "%11.2e") << ' '
        << fmt(r.bregman_vs_std, "%11.2e") << ' ' << fmt(r.fenchel, "%10.2e") << ' '
        << fmt(r.normalization, "%10.2e") << ' ' << fmt(r.min_divergence, "%9.2e") << '\n';
  }
  out << "boundary scans (log p(x; eta) at k = 12):\n";
  for (const auto& b : d.boundaries) {
    out << "  x = " << b.x << ": eta -> 0 gives " << fmt(b.toward_zero.log_p.back(), "%.6g") << " ("
        << scalarfam::to_string(b.toward_zero.limit) << "), eta -> n gives " << fmt(b.toward_n.log_p.back(), "%.6g")
        << " (" << scalarfam::to_string(b.toward_n.limit) << ")\n";
  }
  out << (d.ok ? "check: ok" : "check: FAILED") << '\n';
}

// ---------------------------------------------------------------------------

struct OrliczRow {
  double alpha = 0.0;
  double value = 0.0;  // E_p[Phi(alpha u)], possibly +inf
};

struct OrliczDemo {
  double a = 0.0;
  std::vector<OrliczRow> rows;
  double norm = 0.0;        // Orlicz norm of u(x) = x
  double phi_at_one = 0.0;  // E_p[Phi(u)]
  bool ok = true;
};

/// Non-steepness table of alpha -> E_p[Phi(alpha x)] under the gamma-tail
/// density on alpha = -1.5, -1.25, ..., 1.5.
inline OrliczDemo orlicz_demo(double a) {
  using namespace orlicz;
  OrliczDemo d;
  d.a = a;
  for (int k = -6; k <= 6; ++k) {
    const double alpha = 0.25 * k;
    d.rows.push_back({alpha, gamma_tail_phi_expectation(alpha, a)});
  }
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const auto& r = d.rows[i];
    const auto& mirror = d.rows[d.rows.size() - 1 - i];
    const bool finite_expected = std::abs(r.alpha) <= 1.0;
    d.ok = d.ok && (std::isfinite(r.value) == finite_expected);
    d.ok = d.ok && (r.value == mirror.value || std::abs(r.value - mirror.value) <= 1e-12 * std::abs(r.value));
    if (r.alpha == 0.0) d.ok = d.ok && r.value == 0.0;
    if (i > 0 && i + 1 < d.rows.size() && finite_expected && std::abs(r.alpha) < 1.0)
      d.ok = d.ok && r.value <= 0.5 * (d.rows[i - 1].value + d.rows[i + 1].value) + 1e-12;
  }
  d.phi_at_one = gamma_tail_phi_expectation(1.0, a);
  d.norm = orlicz_norm(gamma_tail_functional(a));
  if (d.norm > 1.0) d.ok = d.ok && d.norm <= d.phi_at_one + 1e-9;
  if (d.phi_at_one <= 1.0) d.ok = d.ok && d.norm <= 1.0 + 1e-9;
  return d;
}

inline void print(std::ostream& out, const OrliczDemo& d) {
  out << "gamma-tail family a = " << fmt(d.a, "%.6g") << ", u(x) = x\n";
  out << "   alpha   E[Phi(alpha u)]\n";
  for (const auto& r : d.rows) out << fmt(r.alpha, "%8.2f") << "   " << fmt(r.value, "%.12g") << '\n';
  out << "E[Phi(u)]     = " << fmt(d.phi_at_one, "%.12g") << '\n';
  out << "Orlicz norm   = " << fmt(d.norm, "%.12g") << '\n';
  out << (d.ok ? "check: ok" : "check: FAILED") << '\n';
}

}  // namespace stochrelax::cli
