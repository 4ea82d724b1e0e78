#pragma once
// Stochastic-relaxation optimizers over a monomial exponential family:
// stochastic natural gradient (sampled covariances, Gibbs resampling), an
// estimation-of-distribution loop, and a noiseless natural-gradient reference
// driven by the exact engine.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stochrelax/error.hpp"
#include "stochrelax/expfam.hpp"
#include "stochrelax/rng.hpp"
#include "stochrelax/walsh.hpp"

namespace stochrelax::optim {

using expfam::MonomialBasis;

enum class Direction { maximize, minimize };

constexpr double sign(Direction d) noexcept { return d == Direction::maximize ? 1.0 : -1.0; }

/// true when a is strictly better than b in direction d.
constexpr bool better(double a, double b, Direction d) noexcept {
  return d == Direction::maximize ? a > b : a < b;
}

/// Sampled configurations with cached fitness values.
struct Population {
  int n = 0;
  std::vector<State> samples;
  std::vector<double> fitness;

  static Population evaluate(const PseudoBooleanFunction& f, std::vector<State> samples) {
    Population p{f.n(), std::move(samples), {}};
    p.fitness.reserve(p.samples.size());
    for (State s : p.samples) p.fitness.push_back(f(s));
    return p;
  }

  /// n i.i.d. uniform spins per sample.
  static std::vector<State> uniform_states(int n, std::size_t count, std::uint64_t seed) {
    Engine rng(seed);
    const State mask = n == 64 ? ~State{0} : ((State{1} << n) - 1);
    std::vector<State> out(count);
    for (auto& s : out) s = rng() & mask;
    return out;
  }

  std::size_t size() const noexcept { return samples.size(); }
  std::vector<Spin> spins(std::size_t i) const { return decode_state(samples[i], n); }

  /// Re-evaluates every cached fitness entry.
  bool consistent_with(const PseudoBooleanFunction& f) const {
    if (f.n() != n || fitness.size() != samples.size()) return false;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (f(samples[i]) != fitness[i]) return false;
    return true;
  }

  double mean_fitness() const {
    return std::accumulate(fitness.begin(), fitness.end(), 0.0) / static_cast<double>(fitness.size());
  }
};

/// Indices of the M best samples, ties to the lower index, returned in
/// ascending index order.
inline std::vector<std::size_t> select_truncation_indices(std::span<const double> fitness, std::size_t m,
                                                          Direction dir) {
  if (m > fitness.size())
    throw DomainError("cannot select " + std::to_string(m) + " of " + std::to_string(fitness.size()) +
                      " samples");
  std::vector<std::size_t> order(fitness.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return better(fitness[a], fitness[b], dir); });
  order.resize(m);
  std::sort(order.begin(), order.end());
  return order;
}

inline Population select_truncation(const Population& pop, std::size_t m, Direction dir) {
  Population out{pop.n, {}, {}};
  for (std::size_t i : select_truncation_indices(pop.fitness, m, dir)) {
    out.samples.push_back(pop.samples[i]);
    out.fitness.push_back(pop.fitness[i]);
  }
  return out;
}

/// Covariance divisor: N - 1 (unbiased) or N (plug-in; equals the exact
/// covariance when the population is a census of the state space).
enum class Divisor { unbiased, population };

namespace detail {

inline double divisor_value(std::size_t n, Divisor d) {
  if (n < 2) throw DomainError("at least two samples are needed for a covariance");
  return d == Divisor::unbiased ? static_cast<double>(n - 1) : static_cast<double>(n);
}

inline Matrix statistics_matrix(const Population& pop, const MonomialBasis& basis) {
  if (pop.n != basis.n()) throw DimensionError("population and basis disagree on n");
  Matrix t(static_cast<Eigen::Index>(pop.size()), basis.d());
  for (std::size_t i = 0; i < pop.size(); ++i)
    for (int j = 0; j < basis.d(); ++j) t(static_cast<Eigen::Index>(i), j) = character(basis[j], pop.samples[i]);
  return t;
}

}  // namespace detail

/// Sample covariances Cov(f, T_j).
inline Vector empirical_sr_gradient(const Population& pop, const MonomialBasis& basis,
                                    Divisor div = Divisor::unbiased) {
  const double denom = detail::divisor_value(pop.size(), div);
  const Matrix t = detail::statistics_matrix(pop, basis);
  Eigen::Map<const Vector> f(pop.fitness.data(), static_cast<Eigen::Index>(pop.fitness.size()));
  const Vector fc = f.array() - f.mean();
  const Matrix tc = t.rowwise() - t.colwise().mean();
  return tc.transpose() * fc / denom;
}

/// Sample covariance matrix of T, symmetrized.
inline Matrix empirical_fisher(const Population& pop, const MonomialBasis& basis,
                               Divisor div = Divisor::unbiased) {
  const double denom = detail::divisor_value(pop.size(), div);
  const Matrix t = detail::statistics_matrix(pop, basis);
  const Matrix tc = t.rowwise() - t.colwise().mean();
  Matrix info = tc.transpose() * tc / denom;
  return (info + info.transpose()) / 2.0;
}

/// Solves (I + ridge Id) v = g by Cholesky. On failure the ridge is raised
/// tenfold (from 1e-10 * max(1, mean diagonal) when it starts at zero), at
/// most three times.
inline Vector natural_gradient_solve(const Matrix& info, const Vector& grad, double ridge) {
  if (info.rows() != info.cols() || info.rows() != grad.size())
    throw DimensionError("Fisher matrix and gradient sizes disagree");
  if (!(ridge >= 0.0)) throw DomainError("ridge must be non-negative");
  if (grad.size() == 0) return Vector(0);
  const double floor = 1e-10 * std::max(1.0, info.trace() / static_cast<double>(info.rows()));
  const Matrix id = Matrix::Identity(info.rows(), info.cols());
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Eigen::LLT<Matrix> llt(info + ridge * id);
    if (llt.info() == Eigen::Success) {
      Vector v = llt.solve(grad);
      if (v.allFinite()) return v;
    }
    ridge = ridge > 0.0 ? ridge * 10.0 : floor;
  }
  throw SingularSystemError("Fisher system is singular even after ridge escalation");
}

// ---------------------------------------------------------------------------
// Run traces

enum class Status { max_iters, gradient_converged, stalled, fitness_converged };

inline const char* to_string(Status s) noexcept {
  switch (s) {
    case Status::max_iters: return "max_iters";
    case Status::gradient_converged: return "gradient_converged";
    case Status::stalled: return "stalled";
    case Status::fitness_converged: return "fitness_converged";
  }
  return "unknown";
}

struct TraceRecord {
  std::size_t iter = 0;
  Vector theta;                      // parameter that generated this iteration
  double f_est = 0.0;                // population mean fitness (exact E for the exact runner)
  std::optional<double> f_exact;     // E_theta[f] when the exact engine applies
  double best_f = 0.0;               // best value seen so far in the run direction
  std::optional<double> grad_norm;   // max-norm of the gradient estimate
};

struct RunTrace {
  std::string algorithm;
  std::vector<std::pair<std::string, std::string>> config;  // resolved settings, in order
  std::vector<TraceRecord> records;
  Status status = Status::max_iters;
  std::optional<State> best_state;

  std::size_t iterations() const noexcept { return records.size(); }
  double final_best() const { return records.empty() ? std::numeric_limits<double>::quiet_NaN() : records.back().best_f; }
};

// ---------------------------------------------------------------------------
// Stochastic natural gradient

struct SNGDConfig {
  std::size_t population = 100;           // N
  std::optional<std::size_t> selected;    // M, defaults to N
  double learning_rate = 0.1;             // lambda
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
  Direction direction = Direction::maximize;
  std::optional<double> ridge;            // default 1e-6 * trace(I) / d
  double grad_tolerance = 1e-8;
  std::size_t stall_window = 20;
  double stall_tolerance = 1e-9;
  std::size_t burn_in = 100;
  std::size_t thinning = 1;
  expfam::ScanOrder scan = expfam::ScanOrder::systematic;
  Divisor divisor = Divisor::unbiased;
  bool track_exact = true;                // record E_theta[f] when n <= exact_limit
  int exact_limit = kDefaultExactLimit;

  std::size_t m() const noexcept { return selected.value_or(population); }

  void validate() const {
    if (population < 2) throw DomainError("population size N must be at least 2");
    if (m() < 2 || m() > population) throw DomainError("selected size M must satisfy 2 <= M <= N");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw DomainError("learning rate must be positive");
    if (ridge && !(*ridge >= 0.0)) throw DomainError("ridge must be non-negative");
  }
};

struct StepResult {
  Vector gradient;
  Matrix fisher;
  double ridge = 0.0;
  Vector direction;  // (I + ridge)^{-1} g
  Vector next_theta;
};

/// One natural-gradient update from an already selected population:
/// theta + s lambda (I + ridge)^{-1} g.
inline StepResult sngd_step(const Vector& theta, const Population& selected, const MonomialBasis& basis,
                            const SNGDConfig& cfg) {
  StepResult r;
  r.gradient = empirical_sr_gradient(selected, basis, cfg.divisor);
  r.fisher = empirical_fisher(selected, basis, cfg.divisor);
  r.ridge = cfg.ridge.value_or(1e-6 * r.fisher.trace() / static_cast<double>(std::max(1, basis.d())));
  r.direction = natural_gradient_solve(r.fisher, r.gradient, r.ridge);
  r.next_theta = theta + sign(cfg.direction) * cfg.learning_rate * r.direction;
  return r;
}

namespace detail {

struct BestTracker {
  explicit BestTracker(Direction d) : dir(d) {}

  Direction dir;
  double value = 0.0;
  std::optional<State> state;

  void offer(double v, std::optional<State> s) {
    if (!seen_ || better(v, value, dir)) {
      value = v;
      state = s;
      seen_ = true;
    }
  }
  void offer(const Population& pop) {
    for (std::size_t i = 0; i < pop.size(); ++i) offer(pop.fitness[i], pop.samples[i]);
  }

 private:
  bool seen_ = false;
};

inline bool stalled(const std::vector<TraceRecord>& recs, std::size_t window, double tol, Direction dir) {
  if (window == 0 || recs.size() <= window) return false;
  const double now = recs.back().f_est;
  const double then = recs[recs.size() - 1 - window].f_est;
  return sign(dir) * (now - then) < tol;
}

}  // namespace detail

/// Stochastic natural gradient descent. theta starts at 0 with a uniform
/// random population; each iteration optionally truncation-selects M of N,
/// estimates gradient and Fisher matrix on the selection, takes one
/// natural-gradient step and resamples N points with the Gibbs sampler.
/// Stops on max_iters, max-norm of the gradient below grad_tolerance, or no
/// improvement of the mean fitness over stall_window iterations.
///
/// Seeds: the initial population uses child_seed(seed, 0); the sampler at
/// iteration t uses child_seed(seed, t + 1).
inline RunTrace sngd_run(const PseudoBooleanFunction& f, const MonomialBasis& basis, const SNGDConfig& cfg) {
  cfg.validate();
  if (f.n() != basis.n()) throw DimensionError("function and basis disagree on n");

  RunTrace trace;
  trace.algorithm = "sngd";
  const bool exact = cfg.track_exact && basis.n() <= cfg.exact_limit;
  std::vector<double> table;
  if (exact) table = walsh::synthesize(f, cfg.exact_limit);

  Vector theta = Vector::Zero(basis.d());
  auto states = Population::uniform_states(basis.n(), cfg.population, child_seed(cfg.seed, 0));
  detail::BestTracker best{cfg.direction};
  trace.status = Status::max_iters;

  for (std::size_t t = 0; t < cfg.max_iters; ++t) {
    const Population pop = Population::evaluate(f, std::move(states));
    best.offer(pop);
    const Population sel = cfg.m() < pop.size() ? select_truncation(pop, cfg.m(), cfg.direction) : pop;

    TraceRecord rec;
    rec.iter = t;
    rec.theta = theta;
    rec.f_est = pop.mean_fitness();
    if (exact) rec.f_exact = expfam::ExactModel(basis, theta, cfg.exact_limit).expectation(table);
    rec.best_f = best.value;
    const Vector g = empirical_sr_gradient(sel, basis, cfg.divisor);
    rec.grad_norm = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    trace.records.push_back(rec);

    if (*rec.grad_norm < cfg.grad_tolerance) {
      trace.status = Status::gradient_converged;
      break;
    }
    if (detail::stalled(trace.records, cfg.stall_window, cfg.stall_tolerance, cfg.direction)) {
      trace.status = Status::stalled;
      break;
    }
    if (t + 1 == cfg.max_iters) break;

    theta = sngd_step(theta, sel, basis, cfg).next_theta;
    states = expfam::gibbs_sampler(
        basis, theta, {cfg.population, cfg.burn_in, cfg.thinning, child_seed(cfg.seed, t + 1), cfg.scan});
  }
  trace.best_state = best.state;
  return trace;
}

// ---------------------------------------------------------------------------
// Exact natural gradient reference

struct ExactDescentConfig {
  double learning_rate = 0.5;
  std::size_t max_iters = 200;
  Direction direction = Direction::maximize;
  double grad_tolerance = 1e-8;
  double ridge = 0.0;
  int exact_limit = kDefaultExactLimit;
};

/// Natural-gradient iteration on the exact relaxation theta -> E_theta[f]
/// using exact covariances. best_f is the best E_theta[f] reached.
inline RunTrace exact_descent_run(const PseudoBooleanFunction& f, const MonomialBasis& basis,
                                  const ExactDescentConfig& cfg) {
  if (f.n() != basis.n()) throw DimensionError("function and basis disagree on n");
  if (!(cfg.learning_rate >= 0.0)) throw DomainError("learning rate must be non-negative");
  const auto table = walsh::synthesize(f, cfg.exact_limit);

  RunTrace trace;
  trace.algorithm = "exact";
  trace.status = Status::max_iters;
  Vector theta = Vector::Zero(basis.d());
  detail::BestTracker best{cfg.direction};

  for (std::size_t t = 0; t < cfg.max_iters; ++t) {
    const expfam::ExactModel model(basis, theta, cfg.exact_limit);
    const double ef = model.expectation(table);
    const Vector g = model.sr_gradient(table);
    best.offer(ef, std::nullopt);

    TraceRecord rec;
    rec.iter = t;
    rec.theta = theta;
    rec.f_est = ef;
    rec.f_exact = ef;
    rec.best_f = best.value;
    rec.grad_norm = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    trace.records.push_back(rec);

    if (*rec.grad_norm < cfg.grad_tolerance) {
      trace.status = Status::gradient_converged;
      break;
    }
    if (t + 1 == cfg.max_iters) break;
    theta += sign(cfg.direction) * cfg.learning_rate *
             natural_gradient_solve(model.fisher_information(), g, cfg.ridge);
  }
  return trace;
}

inline RunTrace exact_descent_run(const PseudoBooleanFunction& f, const MonomialBasis& basis, double lambda,
                                  std::size_t max_iters) {
  ExactDescentConfig cfg;
  cfg.learning_rate = lambda;
  cfg.max_iters = max_iters;
  return exact_descent_run(f, basis, cfg);
}

// ---------------------------------------------------------------------------
// Estimation of distribution

enum class Estimator { independence, moment_matching };

struct EDAConfig {
  std::size_t population = 200;  // N
  std::size_t selected = 100;    // M
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
  Estimator estimator = Estimator::independence;
  Direction direction = Direction::maximize;
  double clip = 1e-3;             // delta: eta kept in [-1 + delta, 1 - delta]
  std::size_t burn_in = 100;      // ignored for the independence model
  std::size_t thinning = 1;
  bool track_exact = true;
  int exact_limit = kDefaultExactLimit;

  void validate() const {
    if (selected < 1 || selected > population) throw DomainError("selected size M must satisfy 1 <= M <= N");
    if (!(clip > 0.0 && clip < 1.0)) throw DomainError("clip delta must lie in (0, 1)");
  }
};

inline bool is_independence_basis(const MonomialBasis& basis) {
  return std::all_of(basis.stats().begin(), basis.stats().end(), [](MultiIndex a) { return a.degree() == 1; });
}

/// Independence-model estimate: theta_i = atanh(mean of x_i over the
/// selection, clipped to [-1 + delta, 1 - delta]).
inline Vector estimate_independence(const Population& selected, const MonomialBasis& basis, double clip) {
  if (!is_independence_basis(basis))
    throw DomainError("the independence estimator requires a basis of single variables");
  const double bound = 1.0 - clip;
  const Vector eta_hat = detail::statistics_matrix(selected, basis).colwise().mean().transpose();
  Vector theta(basis.d());
  for (int j = 0; j < basis.d(); ++j) theta[j] = std::atanh(std::clamp(eta_hat[j], -bound, bound));
  return theta;
}

/// Maximum-likelihood theta with E_theta[T] = eta (damped Newton on the
/// convex objective psi(theta) - theta . eta, exact engine). Returns the last
/// iterate if the target is not reached within max_iters.
inline Vector moment_match(const MonomialBasis& basis, const Vector& eta, Vector theta,
                           int exact_limit = kDefaultExactLimit, std::size_t max_iters = 100,
                           double tolerance = 1e-10) {
  if (eta.size() != basis.d()) throw DimensionError("eta and basis disagree");
  auto objective = [&](const expfam::ExactModel& m) { return m.log_partition() - m.theta().dot(eta); };
  expfam::ExactModel model(basis, theta, exact_limit);
  for (std::size_t it = 0; it < max_iters; ++it) {
    const Vector resid = model.mean_params() - eta;
    if (resid.cwiseAbs().maxCoeff() < tolerance) break;
    const Vector step = natural_gradient_solve(model.fisher_information(), resid, 0.0);
    const double current = objective(model);
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k, t /= 2.0) {
      expfam::ExactModel trial(basis, model.theta() - t * step, exact_limit);
      if (objective(trial) <= current) {
        model = std::move(trial);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return model.theta();
}

/// Sample -> truncation-select -> estimate -> resample. The independence
/// estimator sets theta_i = atanh(clipped mean of x_i over the selection)
/// and requires a degree-one basis. The moment-matching estimator shrinks
/// the selected means toward the uniform point by (1 - delta) and solves
/// for the matching theta with the exact engine. Stops on max_iters or when
/// every selected sample has the same fitness.
///
/// Seeds follow sngd_run: child_seed(seed, 0) for the initial population,
/// child_seed(seed, t + 1) for generation t + 1.
inline RunTrace eda_run(const PseudoBooleanFunction& f, const MonomialBasis& basis, const EDAConfig& cfg) {
  cfg.validate();
  if (f.n() != basis.n()) throw DimensionError("function and basis disagree on n");
  const bool independence = cfg.estimator == Estimator::independence;
  if (independence && !is_independence_basis(basis))
    throw DomainError("the independence estimator requires a basis of single variables");
  if (!independence && basis.n() > cfg.exact_limit)
    throw LimitError("moment matching needs the exact engine (n <= exact limit)");

  RunTrace trace;
  trace.algorithm = "eda";
  trace.status = Status::max_iters;
  const bool exact = cfg.track_exact && basis.n() <= cfg.exact_limit;
  std::vector<double> table;
  if (exact) table = walsh::synthesize(f, cfg.exact_limit);

  Vector theta = Vector::Zero(basis.d());
  auto states = Population::uniform_states(basis.n(), cfg.population, child_seed(cfg.seed, 0));
  detail::BestTracker best{cfg.direction};
  const double bound = 1.0 - cfg.clip;

  for (std::size_t t = 0; t < cfg.max_iters; ++t) {
    const Population pop = Population::evaluate(f, std::move(states));
    best.offer(pop);

    TraceRecord rec;
    rec.iter = t;
    rec.theta = theta;
    rec.f_est = pop.mean_fitness();
    if (exact) rec.f_exact = expfam::ExactModel(basis, theta, cfg.exact_limit).expectation(table);
    rec.best_f = best.value;
    trace.records.push_back(rec);

    const Population sel = select_truncation(pop, cfg.selected, cfg.direction);
    const auto [lo, hi] = std::minmax_element(sel.fitness.begin(), sel.fitness.end());
    if (*lo == *hi) {
      trace.status = Status::fitness_converged;
      break;
    }
    if (t + 1 == cfg.max_iters) break;

    if (independence) {
      theta = estimate_independence(sel, basis, cfg.clip);
    } else {
      const Vector eta_hat = detail::statistics_matrix(sel, basis).colwise().mean().transpose();
      theta = moment_match(basis, bound * eta_hat, theta, cfg.exact_limit);
    }
    states = expfam::gibbs_sampler(basis, theta,
                                   {cfg.population, independence ? 0 : cfg.burn_in,
                                    independence ? 1 : cfg.thinning, child_seed(cfg.seed, t + 1),
                                    expfam::ScanOrder::systematic});
  }
  trace.best_state = best.state;
  return trace;
}

}  // namespace stochrelax::optim
