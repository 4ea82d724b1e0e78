#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles/oracles.hpp"
#include "stochrelax/expfam.hpp"

using namespace stochrelax;
using namespace stochrelax::expfam;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double a : v) x[i++] = a;
  return x;
}

Vector random_theta(std::mt19937_64& rng, int d, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector t(d);
  for (int j = 0; j < d; ++j) t[j] = u(rng);
  return t;
}

const MonomialBasis x1 = MonomialBasis::singletons(1);

}  // namespace

TEST(MonomialBasis, Validation) {
  EXPECT_THROW(MonomialBasis(3, {MultiIndex{}}), DomainError);
  EXPECT_THROW(MonomialBasis(3, {MultiIndex(1), MultiIndex(1)}), DomainError);
  EXPECT_THROW(MonomialBasis(2, {MultiIndex(0b100)}), DimensionError);
  EXPECT_THROW(MonomialBasis(0, {}), LimitError);
  PseudoBooleanFunction f(3);
  f.add(MultiIndex{}, 1).add(MultiIndex::of({0, 1}), 2).add(MultiIndex::singleton(2), 1);
  const auto b = MonomialBasis::from_support(f, true);
  EXPECT_EQ(b.d(), 4);
  EXPECT_EQ(MonomialBasis::from_support(f, false).d(), 2);
}

TEST(LogPartition, WorkedExamples) {
  EXPECT_EQ(log_partition(x1, vec({0.0})), 0.0);
  EXPECT_NEAR(log_partition(x1, vec({1.0})), std::log(std::cosh(1.0)), 1e-15);
  EXPECT_NEAR(log_partition(x1, vec({1.0})), 0.4337808304830271, 1e-15);
  const MonomialBasis b(2, {MultiIndex(1), MultiIndex(2), MultiIndex(3)});
  EXPECT_EQ(log_partition(b, Vector::Zero(3)), 0.0);
}

TEST(LogPartition, MatchesDirectSumAndIsStable) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 8;
    const auto b = oracle::random_basis(rng, n, std::min(10, (1 << n) - 1));
    const Vector th = random_theta(rng, b.d(), 1.5);
    EXPECT_NEAR(log_partition(b, th), oracle::Family(b, th).log_partition(), 1e-12);
  }
  // Large parameters: psi(theta) ~ |theta| without overflow.
  EXPECT_NEAR(log_partition(x1, vec({800.0})), 800.0 - std::log(2.0), 1e-12);
}

TEST(LogPartition, Errors) {
  EXPECT_THROW(log_partition(MonomialBasis::singletons(21), Vector::Zero(21)), LimitError);
  EXPECT_THROW(log_partition(MonomialBasis::singletons(5), Vector::Zero(5), 4), LimitError);
  EXPECT_THROW(log_partition(x1, Vector::Zero(2)), DimensionError);
  EXPECT_THROW(log_partition(x1, vec({NAN})), DomainError);
}

TEST(LogPartition, MidpointConvex) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto b = oracle::random_basis(rng, 5, 6);
    const Vector t1 = random_theta(rng, 6, 2.0), t2 = random_theta(rng, 6, 2.0);
    EXPECT_LE(log_partition(b, (t1 + t2) / 2), (log_partition(b, t1) + log_partition(b, t2)) / 2 + 1e-12);
  }
}

TEST(Density, WorkedExamples) {
  const auto b = MonomialBasis::singletons(3);
  const auto u = density(b, Vector::Zero(3));
  for (std::size_t s = 0; s < 8; ++s) EXPECT_DOUBLE_EQ(u[s], 0.125);
  const auto p = density(x1, vec({1.0}));
  EXPECT_NEAR(p[0], std::exp(1.0) / (std::exp(1.0) + std::exp(-1.0)), 1e-15);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto bb = oracle::random_basis(rng, 7, 8);
    const auto q = density(bb, random_theta(rng, 8, 3.0));
    double sum = 0.0;
    for (double v : q.probabilities()) {
      EXPECT_GT(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Density, MatchesDirectDefinition) {
  std::mt19937_64 rng(4);
  const auto b = oracle::random_basis(rng, 6, 9);
  const Vector th = random_theta(rng, 9, 1.0);
  const auto p = density(b, th);
  const auto ref = oracle::Family(b, th).probabilities();
  for (std::size_t s = 0; s < ref.size(); ++s) EXPECT_NEAR(p[s], ref[s], 1e-15);
}

TEST(FiniteDensity, Validation) {
  EXPECT_THROW(FiniteDensity({0.5, 0.25, 0.25}), DimensionError);
  EXPECT_THROW(FiniteDensity({0.5, 0.5, 0.0, 0.0}), DomainError);
  EXPECT_THROW(FiniteDensity({0.5, 0.6}), DomainError);
  EXPECT_NO_THROW(FiniteDensity::from_weights({1, 2, 3, 4}));
}

TEST(MeanParams, WorkedExamples) {
  EXPECT_TRUE(mean_params(MonomialBasis::singletons(4), Vector::Zero(4)).isZero(0.0));
  std::mt19937_64 rng(5);
  const auto b = oracle::random_basis(rng, 6, 10);
  EXPECT_LE(mean_params(b, Vector::Zero(10)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(mean_params(x1, vec({1.0}))[0], std::tanh(1.0), 1e-15);
}

TEST(MeanParams, FiniteDifferenceAndRange) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + trial % 7;
    const auto b = oracle::random_basis(rng, n, std::min(10, (1 << n) - 1));
    const Vector th = random_theta(rng, b.d(), 1.0);
    const Vector eta = mean_params(b, th);
    EXPECT_LT(eta.cwiseAbs().maxCoeff(), 1.0);
    auto psi = [&](const Vector& t) { return oracle::Family(b, t).log_partition(); };
    for (double h : {1e-4, 1e-3}) {
      const Vector fd = oracle::fd_gradient(psi, th, h);
      EXPECT_LE((fd - eta).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, eta.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(MeanParams, MonotoneMap) {
  std::mt19937_64 rng(7);
  const auto b = oracle::random_basis(rng, 6, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector t1 = random_theta(rng, 8, 2.0), t2 = random_theta(rng, 8, 2.0);
    EXPECT_GT((t1 - t2).dot(mean_params(b, t1) - mean_params(b, t2)), 0.0);
  }
}

TEST(FisherInformation, WorkedExamples) {
  for (double th : {-2.0, 0.0, 0.7}) {
    const double t = std::tanh(th);
    EXPECT_NEAR(fisher_information(x1, vec({th}))(0, 0), 1 - t * t, 1e-15);
  }
  EXPECT_TRUE(fisher_information(MonomialBasis::singletons(5), Vector::Zero(5)).isIdentity(1e-15));
}

TEST(FisherInformation, FiniteDifferenceHessianAndPsd) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 7;
    const auto b = oracle::random_basis(rng, n, std::min(10, (1 << n) - 1));
    const Vector th = random_theta(rng, b.d(), 1.0);
    const Matrix info = fisher_information(b, th);
    EXPECT_TRUE(info.isApprox(info.transpose(), 0.0));
    auto psi = [&](const Vector& t) { return oracle::Family(b, t).log_partition(); };
    const Matrix fd = oracle::fd_hessian(psi, th, 1e-3);
    EXPECT_LE((fd - info).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, info.cwiseAbs().maxCoeff()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(info);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(FisherInformation, NearlySingularAtPointMass) {
  // Full interaction basis on n = 2: positive definite at moderate theta,
  // numerically singular once the model is nearly a point mass.
  const MonomialBasis b(2, {MultiIndex(1), MultiIndex(2), MultiIndex(3)});
  Eigen::SelfAdjointEigenSolver<Matrix> es(fisher_information(b, vec({0.2, -0.4, 0.3})));
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> hard(fisher_information(b, vec({30.0, 30.0, 30.0})));
  EXPECT_LT(hard.eigenvalues().minCoeff(), 1e-20);
}

TEST(SrGradient, WorkedExamples) {
  PseudoBooleanFunction f(1);
  f.add(MultiIndex::singleton(0), 1.0);
  for (double th : {-1.0, 0.3, 2.0}) {
    const double t = std::tanh(th);
    EXPECT_NEAR(sr_gradient_exact(x1, vec({th}), f)[0], 1 - t * t, 1e-15);
  }
  PseudoBooleanFunction c(4);
  c.add(MultiIndex{}, 3.0);
  std::mt19937_64 rng(9);
  const auto b = oracle::random_basis(rng, 4, 6);
  EXPECT_LE(sr_gradient_exact(b, random_theta(rng, 6, 1.0), c).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(sr_gradient_exact(b, Vector::Zero(6), PseudoBooleanFunction(3)), DimensionError);
}

TEST(SrGradient, FiniteDifferenceOfExpectedValue) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + trial % 7;
    const auto b = oracle::random_basis(rng, n, std::min(8, (1 << n) - 1));
    const auto f = oracle::random_function(rng, n, 10, 2.0);
    const Vector th = random_theta(rng, b.d(), 1.0);
    const Vector g = sr_gradient_exact(b, th, f);
    auto ef = [&](const Vector& t) {
      return oracle::Family(b, t).expectation([&](const std::vector<int>& x) { return oracle::eval(f, x); });
    };
    const Vector fd = oracle::fd_gradient(ef, th, 1e-4);
    EXPECT_LE((fd - g).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, g.cwiseAbs().maxCoeff()));
    EXPECT_NEAR(expected_value(b, th, f), ef(th), 1e-12);
  }
}

TEST(Gibbs, UniformTarget) {
  const auto b = MonomialBasis::singletons(6);
  const std::size_t N = 20000;
  const auto states = gibbs_sampler(b, Vector::Zero(6), {.count = N, .seed = 3});
  ASSERT_EQ(states.size(), N);
  for (int i = 0; i < 6; ++i) {
    double m = 0.0;
    for (State s : states) m += character(MultiIndex::singleton(i), s);
    EXPECT_LE(std::abs(m / N), 5.0 / std::sqrt(double(N)));
  }
}

TEST(Gibbs, SingleSiteMarginal) {
  const std::size_t N = 100000;
  const auto states = gibbs_sampler(x1, vec({1.0}), {.count = N, .seed = 5});
  double m = 0.0;
  for (State s : states) m += character(MultiIndex(1), s);
  m /= N;
  const double t = std::tanh(1.0);
  EXPECT_LE(std::abs(m - t), 5.0 * std::sqrt((1 - t * t) / N));
}

TEST(Gibbs, MomentsMatchExactEngine) {
  std::mt19937_64 rng(12);
  const auto b = oracle::random_basis(rng, 8, 10);
  const Vector th = random_theta(rng, 10, 0.6);
  const oracle::Family fam(b, th);
  Vector eta(b.d());
  for (int j = 0; j < b.d(); ++j)
    eta[j] = fam.expectation([&](const std::vector<int>& x) { return oracle::monomial(b[j].bits(), x); });
  for (auto scan : {ScanOrder::systematic, ScanOrder::random}) {
    const std::size_t N = 100000;
    const auto states = gibbs_sampler(b, th, {.count = N, .seed = 77, .scan = scan});
    for (int j = 0; j < b.d(); ++j) {
      auto mean_on = [&](std::size_t lo, std::size_t hi) {
        double m = 0.0;
        for (std::size_t k = lo; k < hi; ++k) m += character(b[j], states[k]);
        return m / double(hi - lo);
      };
      const double se = oracle::batch_means_se(N, 50, mean_on);
      EXPECT_LE(std::abs(mean_on(0, N) - eta[j]), 5.0 * se) << "statistic " << j;
    }
  }
}

TEST(Gibbs, DeterministicAndSeedSensitive) {
  std::mt19937_64 rng(13);
  const auto b = oracle::random_basis(rng, 10, 12);
  const Vector th = random_theta(rng, 12, 0.5);
  const GibbsOptions opt{.count = 500, .burn_in = 10, .thinning = 2, .seed = 42};
  EXPECT_EQ(gibbs_sampler(b, th, opt), gibbs_sampler(b, th, opt));
  auto other = opt;
  other.seed = 43;
  EXPECT_NE(gibbs_sampler(b, th, opt), gibbs_sampler(b, th, other));
}

TEST(Gibbs, ThinningZeroRepeatsState) {
  const auto s = gibbs_sampler(MonomialBasis::singletons(5), Vector::Zero(5), {.count = 10, .thinning = 0, .seed = 1});
  for (State x : s) EXPECT_EQ(x, s.front());
}

TEST(Gibbs, Errors) {
  EXPECT_THROW(gibbs_sampler(x1, vec({0.0}), {.count = 0}), DomainError);
  EXPECT_THROW(gibbs_sampler(x1, Vector::Zero(2), {}), DimensionError);
}

TEST(Gibbs, WorksBeyondExactLimit) {
  const auto b = MonomialBasis::singletons(40);
  const auto s = gibbs_sampler(b, Vector::Constant(40, 3.0), {.count = 200, .seed = 9});
  double m = 0.0;
  for (State x : s) m += character(MultiIndex::singleton(39), x);
  EXPECT_GT(m / 200, 0.9);
}

TEST(HilbertTransport, IdentityWhenEqual) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> w(0.1, 1.0), v(-1.0, 1.0);
  std::vector<double> wt(32), u(32);
  for (double& x : wt) x = w(rng);
  const auto p = FiniteDensity::from_weights(wt);
  for (double& x : u) x = v(rng);
  const double m = p.expectation(u);
  for (double& x : u) x -= m;
  const auto out = hilbert_transport(p, p, u);
  for (std::size_t s = 0; s < u.size(); ++s) EXPECT_NEAR(out[s], u[s], 1e-15);
}

TEST(HilbertTransport, CenteredAndIsometric) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> w(0.05, 1.0), v(-2.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t size = std::size_t{1} << (1 + trial % 6);
    std::vector<double> pw(size), qw(size), u(size), z(size);
    for (std::size_t s = 0; s < size; ++s) {
      pw[s] = w(rng);
      qw[s] = w(rng);
      u[s] = v(rng);
      z[s] = v(rng);
    }
    const auto p = FiniteDensity::from_weights(pw), q = FiniteDensity::from_weights(qw);
    const double mu = p.expectation(u), mz = p.expectation(z);
    for (std::size_t s = 0; s < size; ++s) {
      u[s] -= mu;
      z[s] -= mz;
    }
    const auto tu = hilbert_transport(p, q, u), tz = hilbert_transport(p, q, z);
    EXPECT_NEAR(q.expectation(tu), 0.0, 1e-12);
    EXPECT_NEAR(q.inner_product(tu, tz), p.inner_product(u, z), 1e-10);
    EXPECT_NEAR(q.inner_product(tu, tu), p.inner_product(u, u), 1e-10);
  }
}

TEST(HilbertTransport, Errors) {
  const auto p = FiniteDensity::uniform(2), q = FiniteDensity::uniform(3);
  EXPECT_THROW(hilbert_transport(p, q, std::vector<double>(4, 0.0)), DimensionError);
  EXPECT_THROW(hilbert_transport(p, p, std::vector<double>(8, 0.0)), DimensionError);
  EXPECT_THROW(hilbert_transport(p, p, std::vector<double>{1, 1, 1, 1}), DomainError);
}

TEST(TextFormat, BasisAndTheta) {
  std::istringstream in("1\n2 3\n# comment\n\n1 3\n");
  const auto b = parse_basis(in, 3);
  EXPECT_EQ(b.d(), 3);
  EXPECT_EQ(b[1], MultiIndex(0b110));
  std::istringstream back(format_basis(b));
  EXPECT_EQ(parse_basis(back, 3), b);

  std::istringstream bad1("1 4\n"), bad2("1 x\n"), bad3("1\n1\n");
  EXPECT_THROW(parse_basis(bad1, 3), ParseError);
  EXPECT_THROW(parse_basis(bad2, 3), ParseError);
  EXPECT_THROW(parse_basis(bad3, 3), ParseError);

  const Vector th = vec({0.1, -2.5, 1e-17});
  std::istringstream csv(format_theta_csv(th) + format_theta_csv(-th));
  const auto rows = parse_theta_csv(csv);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], th);
  EXPECT_EQ(rows[1], -th);
  std::istringstream badcsv("0.1,abc\n");
  EXPECT_THROW(parse_theta_csv(badcsv), ParseError);
}
