#pragma once
// Binomial exponential family on {0, ..., n} with reference measure
// mu(x) = C(n, x):
//
//   p(x; theta) = exp(theta x - psi(theta)),   psi(theta) = n log(1 + e^theta),
//   p(x; eta)   = (eta/n)^x (1 - eta/n)^(n-x), eta = n e^theta / (1 + e^theta).
//
// Densities are with respect to mu. psi_star is extended-real valued and
// returns +infinity (IEEE) outside [0, n].

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "stochrelax/error.hpp"

namespace stochrelax::scalarfam {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class BinomialModel {
 public:
  explicit BinomialModel(int n) : n_(n) {
    if (n < 1) throw DomainError("binomial model needs n >= 1");
  }
  int n() const noexcept { return n_; }
  double size() const noexcept { return static_cast<double>(n_); }

 private:
  int n_;
};

namespace detail {

inline void check_x(const BinomialModel& m, int x) {
  if (x < 0 || x > m.n()) throw DomainError("x = " + std::to_string(x) + " outside {0..n}");
}

// a log b with 0 log 0 = 0.
inline double xlogy(double a, double b) { return a == 0.0 ? 0.0 : a * std::log(b); }

// a log1p(b) with 0 log1p(-1) = 0.
inline double xlog1py(double a, double b) { return a == 0.0 ? 0.0 : a * std::log1p(b); }

}  // namespace detail

/// n log(1 + e^theta), evaluated as n softplus(theta).
inline double psi(const BinomialModel& m, double theta) {
  return m.size() * (std::max(theta, 0.0) + std::log1p(std::exp(-std::abs(theta))));
}

inline double eta_from_theta(const BinomialModel& m, double theta) {
  return m.size() / (1.0 + std::exp(-theta));
}

inline double theta_from_eta(const BinomialModel& m, double eta) {
  if (!(eta > 0.0 && eta < m.size())) throw DomainError("eta must lie in (0, n)");
  return std::log(eta / (m.size() - eta));
}

/// Convex conjugate of psi:
///   +inf outside [0, n],  0 at eta = 0 or n,
///   eta log(eta / (n - eta)) - n log(n / (n - eta)) inside.
inline double psi_star(const BinomialModel& m, double eta) {
  const double n = m.size();
  if (std::isnan(eta)) return eta;
  if (eta < 0.0 || eta > n) return kInfinity;
  if (eta == 0.0 || eta == n) return 0.0;
  return eta * std::log(eta / (n - eta)) - n * std::log(n / (n - eta));
}

/// psi_star'(eta) = log(eta / (n - eta)) on (0, n).
inline double psi_star_derivative(const BinomialModel& m, double eta) { return theta_from_eta(m, eta); }

/// log of the standard presentation; eta in [0, n], 0^0 = 1.
inline double log_density_std(const BinomialModel& m, int x, double eta) {
  detail::check_x(m, x);
  const double n = m.size();
  if (!(eta >= 0.0 && eta <= n)) throw DomainError("eta must lie in [0, n]");
  return detail::xlogy(x, eta / n) + detail::xlog1py(n - x, -eta / n);
}

inline double density_std(const BinomialModel& m, int x, double eta) { return std::exp(log_density_std(m, x, eta)); }

inline double log_density_exp(const BinomialModel& m, int x, double theta) {
  detail::check_x(m, x);
  if (!std::isfinite(theta)) throw DomainError("theta must be finite");
  return theta * x - psi(m, theta);
}

inline double density_exp(const BinomialModel& m, int x, double theta) { return std::exp(log_density_exp(m, x, theta)); }

/// D(x || eta) = psi*(x) - psi*(eta) - psi*'(eta)(x - eta), eta in (0, n).
inline double bregman_divergence(const BinomialModel& m, int x, double eta) {
  detail::check_x(m, x);
  if (!(eta > 0.0 && eta < m.size())) throw DomainError("Bregman form needs eta in (0, n)");
  return psi_star(m, x) - psi_star(m, eta) - psi_star_derivative(m, eta) * (x - eta);
}

/// log of e^{-D(x || eta)} e^{psi*(x)}.
inline double log_density_bregman(const BinomialModel& m, int x, double eta) {
  return psi_star(m, x) - bregman_divergence(m, x, eta);
}

inline double density_bregman(const BinomialModel& m, int x, double eta) {
  return std::exp(log_density_bregman(m, x, eta));
}

// ---------------------------------------------------------------------------

enum class LimitKind { diverges_to_minus_infinity, converges_to_zero, inconclusive };

inline const char* to_string(LimitKind k) noexcept {
  switch (k) {
    case LimitKind::diverges_to_minus_infinity: return "-inf";
    case LimitKind::converges_to_zero: return "0";
    case LimitKind::inconclusive: return "inconclusive";
  }
  return "?";
}

struct EndpointScan {
  std::vector<double> eta;       // eta_k, k = 1..12
  std::vector<double> log_p;     // log density_std(x, eta_k)
  LimitKind limit = LimitKind::inconclusive;
};

struct BoundaryLimitReport {
  int x = 0;
  EndpointScan toward_zero;  // eta = 10^-k
  EndpointScan toward_n;     // eta = n - 10^-k
};

/// Scans log p(x; eta) along eta = 10^-k and n - 10^-k, k = 1..12.
/// "-inf": strictly decreasing and below -20 at k = 12.
/// "0":    non-decreasing and within 1e-9 of zero at k = 12.
inline BoundaryLimitReport boundary_limit_check(const BinomialModel& m, int x) {
  detail::check_x(m, x);
  BoundaryLimitReport rep;
  rep.x = x;
  auto classify = [](EndpointScan& s) {
    bool decreasing = true, nondecreasing = true;
    for (std::size_t k = 1; k < s.log_p.size(); ++k) {
      decreasing = decreasing && s.log_p[k] < s.log_p[k - 1];
      nondecreasing = nondecreasing && s.log_p[k] >= s.log_p[k - 1];
    }
    const double last = s.log_p.back();
    if (decreasing && last < -20.0)
      s.limit = LimitKind::diverges_to_minus_infinity;
    else if (nondecreasing && std::abs(last) <= 1e-9)
      s.limit = LimitKind::converges_to_zero;
  };
  for (int k = 1; k <= 12; ++k) {
    const double h = std::pow(10.0, -k);
    rep.toward_zero.eta.push_back(h);
    rep.toward_zero.log_p.push_back(log_density_std(m, x, h));
    rep.toward_n.eta.push_back(m.size() - h);
    rep.toward_n.log_p.push_back(log_density_std(m, x, m.size() - h));
  }
  classify(rep.toward_zero);
  classify(rep.toward_n);
  return rep;
}

}  // namespace stochrelax::scalarfam
