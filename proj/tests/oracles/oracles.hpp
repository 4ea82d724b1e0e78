#pragma once
// Independent reference computations used by the tests. Nothing here calls
// the routines under test beyond plain data accessors (terms(), stats()).

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "stochrelax/expfam.hpp"
#include "stochrelax/walsh.hpp"

namespace oracle {

using stochrelax::MultiIndex;
using stochrelax::PseudoBooleanFunction;

// Spin vector for state index s: bit i set means x_i = -1.
inline std::vector<int> spins(std::uint64_t s, int n) {
  std::vector<int> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = ((s >> i) & 1u) ? -1 : 1;
  return x;
}

inline int monomial(std::uint64_t alpha, const std::vector<int>& x) {
  int v = 1;
  for (std::size_t i = 0; i < x.size(); ++i)
    if ((alpha >> i) & 1u) v *= x[i];
  return v;
}

inline double eval(const PseudoBooleanFunction& f, const std::vector<int>& x) {
  double acc = 0.0;
  for (const auto& [a, c] : f.terms()) acc += c * monomial(a.bits(), x);
  return acc;
}

inline std::vector<double> table(const PseudoBooleanFunction& f) {
  std::vector<double> t(std::size_t{1} << f.n());
  for (std::size_t s = 0; s < t.size(); ++s) t[s] = eval(f, spins(s, f.n()));
  return t;
}

// 2^-n sum_x exp(t f(x)), accumulated in long double.
inline double brute_mgf(const PseudoBooleanFunction& f, double t) {
  long double acc = 0.0L;
  const std::size_t states = std::size_t{1} << f.n();
  for (std::size_t s = 0; s < states; ++s) acc += std::exp(static_cast<long double>(t) * eval(f, spins(s, f.n())));
  return static_cast<double>(acc / states);
}

// u_hat(alpha) = 2^-n sum_x u(x) x^alpha, every alpha, O(4^n).
inline std::vector<double> naive_walsh(const std::vector<double>& tab, int n) {
  std::vector<double> out(tab.size());
  for (std::size_t a = 0; a < tab.size(); ++a) {
    long double acc = 0.0L;
    for (std::size_t s = 0; s < tab.size(); ++s) acc += tab[s] * monomial(a, spins(s, n));
    out[a] = static_cast<double>(acc / tab.size());
  }
  return out;
}

// Every subset of the support passing the parity test, by exhaustion.
inline std::vector<std::uint32_t> brute_subsets(const std::vector<MultiIndex>& support, bool even_cardinality) {
  std::vector<std::uint32_t> out;
  const std::uint32_t m = static_cast<std::uint32_t>(support.size());
  for (std::uint32_t b = 0; b < (1u << m); ++b) {
    std::uint64_t acc = 0;
    int count = 0;
    for (std::uint32_t j = 0; j < m; ++j)
      if ((b >> j) & 1u) {
        acc ^= support[j].bits();
        ++count;
      }
    if (acc == 0 && (!even_cardinality || count % 2 == 0)) out.push_back(b);
  }
  return out;
}

// Exponential family quantities straight from the definition.
struct Family {
  int n;
  std::vector<std::uint64_t> stats;
  std::vector<double> theta;

  Family(const stochrelax::expfam::MonomialBasis& basis, const Eigen::VectorXd& th) : n(basis.n()) {
    for (auto a : basis.stats()) stats.push_back(a.bits());
    theta.assign(th.data(), th.data() + th.size());
  }

  long double energy(const std::vector<int>& x) const {
    long double e = 0.0L;
    for (std::size_t j = 0; j < stats.size(); ++j) e += theta[j] * monomial(stats[j], x);
    return e;
  }

  double log_partition() const {
    long double z = 0.0L;
    const std::size_t states = std::size_t{1} << n;
    for (std::size_t s = 0; s < states; ++s) z += std::exp(energy(spins(s, n)));
    return static_cast<double>(std::log(z / states));
  }

  std::vector<double> probabilities() const {
    const std::size_t states = std::size_t{1} << n;
    std::vector<long double> w(states);
    long double z = 0.0L;
    for (std::size_t s = 0; s < states; ++s) z += (w[s] = std::exp(energy(spins(s, n))));
    std::vector<double> p(states);
    for (std::size_t s = 0; s < states; ++s) p[s] = static_cast<double>(w[s] / z);
    return p;
  }

  double expectation(const std::function<double(const std::vector<int>&)>& g) const {
    const auto p = probabilities();
    long double acc = 0.0L;
    for (std::size_t s = 0; s < p.size(); ++s) acc += p[s] * g(spins(s, n));
    return static_cast<double>(acc);
  }
};

// Central differences of a scalar function of a vector.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& fn, Eigen::VectorXd x,
                                   double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double x0 = x[j];
    x[j] = x0 + h;
    const double up = fn(x);
    x[j] = x0 - h;
    const double dn = fn(x);
    x[j] = x0;
    g[j] = (up - dn) / (2.0 * h);
  }
  return g;
}

inline Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& fn, Eigen::VectorXd x,
                                  double h) {
  const Eigen::Index d = x.size();
  Eigen::MatrixXd hess(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index k = j; k < d; ++k) {
      auto at = [&](double sj, double sk) {
        Eigen::VectorXd y = x;
        y[j] += sj * h;
        y[k] += sk * h;
        return fn(y);
      };
      const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
      hess(j, k) = hess(k, j) = v;
    }
  return hess;
}

// Maximum of a unimodal function on [lo, hi].
inline double golden_section_max(const std::function<double(double)>& fn, double lo, double hi, double tol = 1e-12) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = fn(c), fd = fn(d);
  while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = fn(d);
    }
  }
  return std::max(fn(0.5 * (a + b)), std::max(fc, fd));
}

// Integral over (0, inf); the integrand may be called at 0 or at non-finite
// abscissae, which are treated as zero contributions.
inline double integrate_half_line(const std::function<double(double)>& g) {
  boost::math::quadrature::exp_sinh<double> q;
  auto safe = [&](double x) {
    if (!std::isfinite(x)) return 0.0;
    const double v = g(x);
    return std::isfinite(v) ? v : 0.0;
  };
  return q.integrate(safe, 1e-15);
}

inline double integrate_real_line(const std::function<double(double)>& g) {
  boost::math::quadrature::sinh_sinh<double> q;
  auto safe = [&](double x) {
    if (!std::isfinite(x)) return 0.0;
    const double v = g(x);
    return std::isfinite(v) ? v : 0.0;
  };
  return q.integrate(safe, 1e-15);
}

// int_0^inf (a + x)^{-3/2} e^{-theta x} dx, theta >= 0.
inline double gamma_tail_C(double theta, double a) {
  return integrate_half_line([=](double x) { return std::pow(a + x, -1.5) * std::exp(-theta * x); });
}

// E_p[cosh(alpha X) - 1] for p(x) proportional to (a + x)^{-3/2} e^{-x}, |alpha| <= 1.
inline double gamma_tail_phi_expectation(double alpha, double a) {
  const double z = gamma_tail_C(1.0, a);
  const double num = integrate_half_line([=](double x) {
    const double w = std::pow(a + x, -1.5);
    return w * (0.5 * (std::exp((alpha - 1.0) * x) + std::exp((-alpha - 1.0) * x)) - std::exp(-x));
  });
  return num / z;
}

// E[exp(t (a + b X + c X^2 / 2))], X ~ N(0, 1), t c < 1.
inline double normal_quadratic_mgf(double t, double a, double b, double c) {
  const double s = 1.0 - t * c;
  return integrate_real_line([=](double x) {
    return std::exp(-0.5 * s * x * x + t * (a + b * x)) / std::sqrt(2.0 * std::numbers::pi);
  });
}

// Standard error of a statistic by batch means: `estimate` is applied to
// each of `batches` contiguous blocks of [0, count).
inline double batch_means_se(std::size_t count, std::size_t batches,
                             const std::function<double(std::size_t, std::size_t)>& estimate) {
  const std::size_t len = count / batches;
  std::vector<double> v;
  double mean = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    v.push_back(estimate(b * len, (b + 1) * len));
    mean += v.back();
  }
  mean /= static_cast<double>(batches);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
}

// Random sparse pseudo-Boolean function.
inline PseudoBooleanFunction random_function(std::mt19937_64& rng, int n, int max_terms, double coef_range,
                                             bool allow_constant = true) {
  std::uniform_int_distribution<int> count(1, max_terms);
  std::uniform_int_distribution<std::uint64_t> mask(allow_constant ? 0 : 1, (std::uint64_t{1} << n) - 1);
  std::uniform_real_distribution<double> coef(-coef_range, coef_range);
  PseudoBooleanFunction f(n);
  const auto available = (std::uint64_t{1} << n) - (allow_constant ? 0 : 1);
  const int m = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(count(rng)), available));
  while (static_cast<int>(f.terms().size()) < m) {
    const MultiIndex a(mask(rng));
    if (f.coefficient(a) == 0.0) f.set(a, coef(rng));
  }
  return f;
}

// Random basis of d distinct nonzero monomials of degree <= max_degree.
inline stochrelax::expfam::MonomialBasis random_basis(std::mt19937_64& rng, int n, int d, int max_degree = 3) {
  std::vector<MultiIndex> stats;
  std::uniform_int_distribution<int> var(0, n - 1), deg(1, std::min(max_degree, n));
  while (static_cast<int>(stats.size()) < d) {
    std::uint64_t bits = 0;
    const int k = deg(rng);
    while (std::popcount(bits) < k) bits |= std::uint64_t{1} << var(rng);
    if (std::find(stats.begin(), stats.end(), MultiIndex(bits)) == stats.end()) stats.emplace_back(bits);
  }
  return {n, stats};
}

}  // namespace oracle
