#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <random>

#include "brbvs/error.hpp"
#include "brbvs/fit.hpp"
#include "brbvs/likelihood.hpp"
#include "brbvs/measures.hpp"
#include "brbvs/simulate.hpp"

using namespace brbvs;

namespace {

std::pair<std::vector<double>, std::vector<double>> gaussian_pair(int n, double rho, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    const double z1 = normal(rng), z2 = normal(rng);
    a[i] = z1;
    b[i] = rho * z1 + std::sqrt(1.0 - rho * rho) * z2;
  }
  return {a, b};
}

// Kozachenko-Leonenko entropy of the rank pseudo-observations, brute force.
double kl_oracle(const std::vector<double>& a, const std::vector<double>& b, int k) {
  const std::size_t n = a.size();
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto x, auto y) { return v[x] < v[y]; });
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[idx[i]] = (i + 1.0) / (n + 1.0);
    return r;
  };
  const auto u = ranks(a), v = ranks(b);
  double sum_log = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> dist;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.push_back(std::hypot(u[i] - u[j], v[i] - v[j]));
    }
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
    sum_log += std::log(dist[static_cast<std::size_t>(k - 1)]);
  }
  const double h = boost::math::digamma(static_cast<double>(n)) - boost::math::digamma(static_cast<double>(k)) +
                   std::log(M_PI) + 2.0 * sum_log / static_cast<double>(n);
  return -h;
}

}  // namespace

TEST(PseudoObservations, AverageRanksForTies) {
  const std::vector<double> v{3.0, 1.0, 2.0, 2.0};
  const Eigen::VectorXd p = pseudo_observations(v);
  EXPECT_DOUBLE_EQ(p[0], 4.0 / 5.0);
  EXPECT_DOUBLE_EQ(p[1], 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(p[2], 2.5 / 5.0);
  EXPECT_DOUBLE_EQ(p[3], 2.5 / 5.0);
}

TEST(CopulaEntropy, MatchesBruteForceOracle) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto [a, b] = gaussian_pair(300, 0.4, seed);
    EXPECT_NEAR(ce_measure(a, b), kl_oracle(a, b, 3), 1e-10);
    EXPECT_NEAR(ce_measure(a, b, 5), kl_oracle(a, b, 5), 1e-10);
  }
}

// On the unit square the nearest-neighbour balls of points near the edges
// are truncated, which lowers the estimate by roughly 0.065 at n = 1000 and
// k = 3 whatever the dependence. The contrast with independent data removes
// that offset and recovers the Gaussian mutual information.
TEST(CopulaEntropy, GaussianMutualInformationUpToBoundaryOffset) {
  const double truth = -0.5 * std::log(1.0 - 0.25);
  double mean = 0.0, mean_indep = 0.0;
  for (int s = 0; s < 20; ++s) {
    const auto [a, b] = gaussian_pair(1000, 0.5, 100 + s);
    mean += ce_measure(a, b) / 20.0;
    const auto [c, e] = gaussian_pair(1000, 0.0, 200 + s);
    mean_indep += ce_measure(c, e) / 20.0;
  }
  EXPECT_NEAR(mean - mean_indep, truth, 0.02);
  EXPECT_NEAR(mean_indep, -0.065, 0.02);
}

TEST(CopulaEntropy, BoundaryOffsetShrinksWithSampleSize) {
  auto offset = [](int n) {
    double m = 0.0;
    for (int s = 0; s < 10; ++s) {
      const auto [a, b] = gaussian_pair(n, 0.0, 300 + s);
      m += ce_measure(a, b) / 10.0;
    }
    return m;
  };
  const double small = offset(250), large = offset(2000);
  EXPECT_LT(small, large);
  EXPECT_LT(large, 0.0);
}

TEST(CopulaEntropy, InvariantUnderMonotoneTransforms) {
  const auto [a, b] = gaussian_pair(200, 0.6, 4);
  std::vector<double> ta(a.size()), tb(b.size());
  std::transform(a.begin(), a.end(), ta.begin(), [](double x) { return std::exp(x); });
  std::transform(b.begin(), b.end(), tb.begin(), [](double x) { return 3.0 * x * x * x + 1.0; });
  EXPECT_DOUBLE_EQ(ce_measure(a, b), ce_measure(ta, tb));
  EXPECT_NEAR(ce_measure(a, b), ce_measure(b, a), 1e-12);
}

TEST(CopulaEntropy, DegenerateInputs) {
  const auto [a, b] = gaussian_pair(40, 0.5, 1);
  EXPECT_THROW(ce_measure(a, b), DataError);
  std::vector<double> constant(100, 1.0);
  const auto [c, e] = gaussian_pair(100, 0.5, 1);
  EXPECT_THROW(ce_measure(c, constant), DataError);
  std::vector<double> binary(100);
  for (int i = 0; i < 100; ++i) binary[i] = i % 2;
  EXPECT_THROW(ce_measure(c, binary), DataError);
  std::vector<double> short_x(99, 0.0);
  EXPECT_THROW(ce_measure(c, short_x), DataError);
}

TEST(FitMeasures, FimAndAbsFromEstimates) {
  ScenarioConfig c;
  c.n = 300;
  c.p = 3;
  c.seed = 9;
  const SurvivalDataset d = simulate(c).data;
  const Model m(ModelSpec::margins_with(CopulaFamily::Clayton, SurvivalLink::PH, SurvivalLink::PO, {1}), d);
  const Loglik lik(m, d);
  const FittedModel fit =
      trust_region_fit(lik, Eigen::VectorXd::Ones(m.n_smoothing()), m.initial_point(d), {});
  ASSERT_TRUE(fit.converged);
  for (int nu = 1; nu <= 2; ++nu) {
    const int idx = *m.linear_index(nu, 1);
    const double beta = fit.delta[idx];
    EXPECT_DOUBLE_EQ(abs_measure(fit, m, nu, 1), std::abs(beta));
    EXPECT_NEAR(fim_measure(fit, m, nu, 1), beta * beta * -fit.hessian(idx, idx), 1e-9 * beta * beta * -fit.hessian(idx, idx));
    const Eigen::VectorXd info = fisher_diag(fit);
    EXPECT_DOUBLE_EQ(fim_measure(fit, info, m, nu, 1), beta * beta * info[idx]);
  }
  EXPECT_THROW(fim_measure(fit, m, 1, 0), ConfigError);
  EXPECT_THROW(abs_measure(fit, m, 2, 2), ConfigError);
}

TEST(FitMeasures, ParseNames) {
  EXPECT_EQ(parse_measure("FIM"), MeasureKind::FIM);
  EXPECT_EQ(parse_measure("Abs"), MeasureKind::Abs);
  EXPECT_EQ(parse_measure("CE"), MeasureKind::CE);
  EXPECT_THROW(parse_measure("fim2"), ConfigError);
}
