#pragma once
// Orlicz Phi-space numerics for Phi(y) = cosh(y) - 1: the Luxemburg-type
// norm from the unit ball {E[Phi(u)] <= 1}, and two concrete families whose
// Phi-expectation has a closed form.
//
// Extended reals: +infinity is the IEEE value and appears in-band.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "stochrelax/error.hpp"
#include "stochrelax/walsh.hpp"

namespace stochrelax::orlicz {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// cosh(y) - 1, evaluated as 2 sinh^2(y/2) to keep relative accuracy near 0.
inline double phi(double y) {
  const double s = std::sinh(0.5 * y);
  return 2.0 * s * s;
}

/// rho -> E_p[Phi(u / rho)], non-increasing in rho and possibly +infinity.
struct PhiExpectationFunctional {
  std::function<double(double)> at;
  std::string description;

  double operator()(double rho) const { return at(rho); }
};

/// inf{rho > 0 : F(rho) <= 1}, by geometric bracketing from `hint` (x2 up to
/// 2^60 steps outward, /2 inward) and bisection to relative width rel_tol.
/// Returns the upper end of the final bracket, so F(result) <= 1 holds.
/// A functional that stays <= 1 down to hint * 2^-120 is treated as zero.
inline double orlicz_norm(const PhiExpectationFunctional& f, double hint = 1.0, double rel_tol = 1e-10) {
  if (!(hint > 0.0) || !std::isfinite(hint)) throw DomainError("bracket hint must be positive");
  auto inside = [&](double rho) { return f(rho) <= 1.0; };  // NaN counts as outside

  double lo, hi;
  if (inside(hint)) {
    hi = hint;
    lo = hint / 2.0;
    for (int k = 0; inside(lo); ++k) {
      if (k == 120) return 0.0;
      hi = lo;
      lo /= 2.0;
    }
  } else {
    lo = hint;
    hi = hint * 2.0;
    for (int k = 0; !inside(hi); ++k) {
      if (k == 60)
        throw DomainError("no finite scale with E[Phi(u/rho)] <= 1 (" + f.description + " is not in L^Phi)");
      lo = hi;
      hi *= 2.0;
    }
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi) break;
    (inside(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// rho -> E_uniform[Phi(f / rho)] for a pseudo-Boolean f with zero constant term.
inline PhiExpectationFunctional boolean_functional(const PseudoBooleanFunction& f) {
  if (f.constant() != 0.0) throw DomainError("Boolean Phi functional needs a zero constant term");
  return {[f](double rho) { return walsh::phi_expectation_uniform(f, 1.0 / rho); }, "pseudo-Boolean function"};
}

// ---------------------------------------------------------------------------
// Gamma-tail family: p(x) proportional to (a + x)^{-3/2} e^{-x} on x > 0.

/// Survival function of the Gamma(1/2, 1) law: erfc(sqrt(y)).
inline double gamma_half_survival(double y) { return y <= 0.0 ? 1.0 : std::erfc(std::sqrt(y)); }

/// e^y Gamma(-1/2, y) for y > 0.
///
/// Small y: Gamma(-1/2, y) = 2 (y^{-1/2} e^{-y} - sqrt(pi) erfc(sqrt(y))).
/// Large y: Legendre continued fraction for Gamma(s, y) (modified Lentz),
/// which avoids both the overflow of e^y and the cancellation above.
inline double scaled_upper_gamma_minus_half(double y) {
  if (!(y > 0.0)) throw DomainError("upper incomplete gamma needs y > 0");
  constexpr double s = -0.5;
  if (y < 1.5) {
    return 2.0 * (1.0 / std::sqrt(y) - std::sqrt(std::numbers::pi) * std::exp(y) * std::erfc(std::sqrt(y)));
  }
  constexpr double tiny = 1e-300;
  double b = y + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::pow(y, s) * h;
}

/// C(theta, a) = integral_0^inf (a + x)^{-3/2} e^{-theta x} dx:
///   sqrt(theta) e^{theta a} Gamma(-1/2, theta a)  for theta > 0,
///   2 / sqrt(a)                                   for theta = 0,
///   +inf                                          for theta < 0.
inline double gamma_tail_C(double theta, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("gamma-tail family needs a > 0");
  if (std::isnan(theta)) return theta;
  if (theta < 0.0) return kInfinity;
  if (theta == 0.0) return 2.0 / std::sqrt(a);
  return std::sqrt(theta) * scaled_upper_gamma_minus_half(theta * a);
}

/// Same integral through the Gamma(1/2) survival function:
///   2 a^{-1/2} - 2 sqrt(pi theta) e^{theta a} R(theta a),  theta >= 0.
/// Loses accuracy to cancellation for large theta a.
inline double gamma_tail_C_survival_form(double theta, double a) {
  if (!(a > 0.0)) throw DomainError("gamma-tail family needs a > 0");
  if (theta < 0.0) return kInfinity;
  return 2.0 / std::sqrt(a) -
         2.0 * std::sqrt(std::numbers::pi * theta) * std::exp(theta * a) * gamma_half_survival(theta * a);
}

/// E_p[Phi(alpha u)] for u(x) = x under the gamma-tail density:
///   (C(1 - alpha, a) + C(1 + alpha, a)) / (2 C(1, a)) - 1,
/// finite exactly on [-1, 1].
inline double gamma_tail_phi_expectation(double alpha, double a) {
  if (!(a > 0.0)) throw DomainError("gamma-tail family needs a > 0");
  if (std::isnan(alpha)) return alpha;
  if (std::abs(alpha) > 1.0) return kInfinity;
  return (gamma_tail_C(1.0 - alpha, a) + gamma_tail_C(1.0 + alpha, a)) / (2.0 * gamma_tail_C(1.0, a)) - 1.0;
}

/// Normalized gamma-tail density.
inline double gamma_tail_density(double x, double a) {
  if (x <= 0.0) return 0.0;
  return std::pow(a + x, -1.5) * std::exp(-x) / gamma_tail_C(1.0, a);
}

inline PhiExpectationFunctional gamma_tail_functional(double a) {
  if (!(a > 0.0)) throw DomainError("gamma-tail family needs a > 0");
  return {[a](double rho) { return gamma_tail_phi_expectation(1.0 / rho, a); },
          "u(x) = x under the gamma-tail density"};
}

// ---------------------------------------------------------------------------
// Quadratic polynomials of a standard normal variable.

/// u(x) = a + b x + c x^2 / 2.
struct NormalQuadratic {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double operator()(double x) const { return a + b * x + 0.5 * c * x * x; }
  NormalQuadratic scaled(double k) const { return {k * a, k * b, k * c}; }
};

/// E[exp(t u(X))], X ~ N(0, 1). Completing the square gives
///   exp(t a + t^2 b^2 / (2 (1 - t c))) / sqrt(1 - t c)  for t c < 1,
/// and +inf for t c >= 1.
inline double normal_quadratic_mgf(double t, const NormalQuadratic& q) {
  const double s = 1.0 - t * q.c;
  if (!(s > 0.0)) return kInfinity;
  return std::exp(t * q.a + t * t * q.b * q.b / (2.0 * s) - 0.5 * std::log(s));
}

/// E[Phi(u(X))] = (M(1) + M(-1)) / 2 - 1 when |c| < 1, +inf otherwise.
inline double normal_quadratic_phi_expectation(const NormalQuadratic& q) {
  if (!(std::abs(q.c) < 1.0)) return kInfinity;
  return 0.5 * (normal_quadratic_mgf(1.0, q) + normal_quadratic_mgf(-1.0, q)) - 1.0;
}

inline PhiExpectationFunctional normal_quadratic_functional(const NormalQuadratic& q) {
  return {[q](double rho) { return normal_quadratic_phi_expectation(q.scaled(1.0 / rho)); },
          "quadratic polynomial of a standard normal"};
}

}  // namespace stochrelax::orlicz
