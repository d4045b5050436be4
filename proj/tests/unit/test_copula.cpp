#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "brbvs/copula.hpp"
#include "brbvs/error.hpp"

using namespace brbvs;

namespace {

using boost::math::quadrature::gauss_kronrod;

template <class F>
double integrate2d(F f) {
  auto inner = [&](double u) {
    return gauss_kronrod<double, 31>::integrate([&](double v) { return f(u, v); }, 0.0, 1.0, 12, 1e-11);
  };
  return gauss_kronrod<double, 31>::integrate(inner, 0.0, 1.0, 12, 1e-10);
}

// Closed forms written independently of the library kernels.
double plackett_cdf(double u, double v, double t) {
  const double a = 1.0 + (t - 1.0) * (u + v);
  return (a - std::sqrt(a * a - 4.0 * t * (t - 1.0) * u * v)) / (2.0 * (t - 1.0));
}

double plackett_density(double u, double v, double t) {
  const double a = 1.0 + (t - 1.0) * (u + v);
  const double disc = a * a - 4.0 * t * (t - 1.0) * u * v;
  return t * (1.0 + (t - 1.0) * (u + v - 2.0 * u * v)) / std::pow(disc, 1.5);
}

double clayton_cdf(double u, double v, double t) {
  return std::pow(std::pow(u, -t) + std::pow(v, -t) - 1.0, -1.0 / t);
}

struct Case {
  CopulaFamily family;
  double theta;
};

const Case kCases[] = {{CopulaFamily::Clayton, 0.5}, {CopulaFamily::Clayton, 2.0},
                       {CopulaFamily::Clayton, 8.0}, {CopulaFamily::Plackett, 0.2},
                       {CopulaFamily::Plackett, 6.44}, {CopulaFamily::Plackett, 30.0},
                       {CopulaFamily::Independence, 1.0}};

}  // namespace

TEST(Copula, DensityIntegratesToOne) {
  for (const auto& c : kCases) {
    const double mass = integrate2d([&](double u, double v) { return copula_density(u, v, c.theta, c.family); });
    EXPECT_NEAR(mass, 1.0, 1e-3) << to_string(c.family) << " theta " << c.theta;
  }
}

TEST(Copula, CdfMatchesClosedForms) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.01, 0.99);
  for (int k = 0; k < 200; ++k) {
    const double u = unif(rng), v = unif(rng);
    EXPECT_NEAR(copula_cdf(u, v, 3.0, CopulaFamily::Clayton), clayton_cdf(u, v, 3.0), 1e-13);
    EXPECT_NEAR(copula_cdf(u, v, 6.44, CopulaFamily::Plackett), plackett_cdf(u, v, 6.44), 1e-12);
    EXPECT_NEAR(copula_density(u, v, 6.44, CopulaFamily::Plackett), plackett_density(u, v, 6.44),
                1e-10 * plackett_density(u, v, 6.44));
    EXPECT_DOUBLE_EQ(copula_cdf(u, v, 1.0, CopulaFamily::Independence), u * v);
  }
}

TEST(Copula, HFunctionsMatchCdfDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.02, 0.98);
  const double h = 1e-5;
  for (const auto& c : kCases) {
    for (int k = 0; k < 50; ++k) {
      const double u = unif(rng), v = unif(rng);
      const double du =
          (copula_cdf(u + h, v, c.theta, c.family) - copula_cdf(u - h, v, c.theta, c.family)) / (2 * h);
      const double dv =
          (copula_cdf(u, v + h, c.theta, c.family) - copula_cdf(u, v - h, c.theta, c.family)) / (2 * h);
      EXPECT_NEAR(copula_partial_u(u, v, c.theta, c.family), du, 1e-6);
      EXPECT_NEAR(copula_partial_v(u, v, c.theta, c.family), dv, 1e-6);
    }
  }
}

TEST(Copula, DensityMatchesMixedDifference) {
  const double h = 1e-4;
  for (const auto& c : kCases) {
    for (double u : {0.2, 0.5, 0.8}) {
      for (double v : {0.3, 0.6}) {
        auto cdf = [&](double a, double b) { return copula_cdf(a, b, c.theta, c.family); };
        const double fd = (cdf(u + h, v + h) - cdf(u + h, v - h) - cdf(u - h, v + h) + cdf(u - h, v - h)) / (4 * h * h);
        EXPECT_NEAR(copula_density(u, v, c.theta, c.family), fd, 1e-4 * std::max(1.0, fd));
      }
    }
  }
}

TEST(Copula, FrechetBoundsAndMargins) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (const auto& c : kCases) {
    for (int k = 0; k < 300; ++k) {
      const double u = unif(rng), v = unif(rng);
      const double cv = copula_cdf(u, v, c.theta, c.family);
      EXPECT_GE(cv, std::max(u + v - 1.0, 0.0) - 1e-12);
      EXPECT_LE(cv, std::min(u, v) + 1e-12);
    }
    EXPECT_NEAR(copula_cdf(0.37, 1.0, c.theta, c.family), 0.37, 1e-12);
    EXPECT_NEAR(copula_cdf(1.0, 0.61, c.theta, c.family), 0.61, 1e-12);
    EXPECT_NEAR(copula_cdf(0.0, 0.61, c.theta, c.family), 0.0, 1e-12);
  }
}

TEST(Copula, ClaytonTauClosedForm) {
  EXPECT_EQ(kendall_tau(2.0, CopulaFamily::Clayton), 0.5);
  EXPECT_DOUBLE_EQ(kendall_tau(std::exp(1.2), CopulaFamily::Clayton), std::exp(1.2) / (std::exp(1.2) + 2.0));
  EXPECT_EQ(kendall_tau(3.0, CopulaFamily::Independence), 0.0);
}

TEST(Copula, PlackettTauMatchesQuadratureOracle) {
  for (double theta : {0.2, 0.5, 2.0, 6.44, 20.0}) {
    // tau = 4 E[C(U, V)] - 1 under the copula.
    const double e = integrate2d([&](double u, double v) {
      return plackett_cdf(u, v, theta) * plackett_density(u, v, theta);
    });
    EXPECT_NEAR(kendall_tau(theta, CopulaFamily::Plackett), 4.0 * e - 1.0, 1e-6) << "theta " << theta;
  }
  EXPECT_NEAR(kendall_tau(6.44, CopulaFamily::Plackett), 0.39519, 1e-4);
  EXPECT_NEAR(kendall_tau(1.0, CopulaFamily::Plackett), 0.0, 1e-12);
  EXPECT_NEAR(kendall_tau(1.0 + 1e-7, CopulaFamily::Plackett), 0.0, 1e-6);
}

TEST(Copula, PlackettTauIsOddInLogTheta) {
  for (double theta : {0.3, 3.0, 12.0}) {
    EXPECT_NEAR(kendall_tau(theta, CopulaFamily::Plackett), -kendall_tau(1.0 / theta, CopulaFamily::Plackett), 1e-9);
  }
}

TEST(Copula, PlackettNearIndependenceIsContinuous) {
  for (double u : {0.1, 0.5, 0.9}) {
    for (double v : {0.2, 0.7}) {
      EXPECT_NEAR(copula_cdf(u, v, 1.0, CopulaFamily::Plackett), u * v, 1e-12);
      EXPECT_NEAR(copula_cdf(u, v, 1.0 + 1e-9, CopulaFamily::Plackett), u * v, 1e-8);
      EXPECT_NEAR(copula_density(u, v, 1.0, CopulaFamily::Plackett), 1.0, 1e-10);
      EXPECT_NEAR(copula_partial_u(u, v, 1.0 - 1e-9, CopulaFamily::Plackett), v, 1e-7);
    }
  }
}

TEST(Copula, ConditionalInverseRoundTrip) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(1e-6, 1.0 - 1e-6);
  for (double theta : {0.1, 1.0, 3.32, 50.0}) {
    for (int k = 0; k < 200; ++k) {
      const double u = unif(rng), w = unif(rng);
      const double v = conditional_inverse(u, w, theta, CopulaFamily::Clayton);
      EXPECT_NEAR(copula_partial_u(u, v, theta, CopulaFamily::Clayton), w, 1e-8);
    }
  }
  EXPECT_DOUBLE_EQ(conditional_inverse(0.3, 0.7, 1.0, CopulaFamily::Independence), 0.7);
  EXPECT_THROW(conditional_inverse(0.3, 0.7, 2.0, CopulaFamily::Plackett), ConfigError);
}

TEST(Copula, DomainErrors) {
  EXPECT_THROW(copula_cdf(0.5, 0.5, -1.0, CopulaFamily::Clayton), DomainError);
  EXPECT_THROW(copula_cdf(0.5, 0.5, 0.0, CopulaFamily::Plackett), DomainError);
  EXPECT_THROW(copula_cdf(1.5, 0.5, 2.0, CopulaFamily::Clayton), DomainError);
  EXPECT_THROW(kendall_tau(std::nan(""), CopulaFamily::Plackett), DomainError);
  EXPECT_THROW(parse_copula("gumbel"), ConfigError);
  EXPECT_EQ(parse_copula("PL"), CopulaFamily::Plackett);
}

TEST(Copula, DependenceLinkClampsWithZeroDerivative) {
  const auto in = dependence_link(1.2);
  EXPECT_DOUBLE_EQ(in.theta, std::exp(1.2));
  EXPECT_DOUBLE_EQ(in.dtheta_deta, std::exp(1.2));
  const auto hi = dependence_link(40.0);
  EXPECT_EQ(hi.theta, 1e8);
  EXPECT_EQ(hi.dtheta_deta, 0.0);
  const auto lo = dependence_link(-40.0);
  EXPECT_EQ(lo.theta, 1e-8);
  EXPECT_EQ(lo.dtheta_deta, 0.0);
}

namespace {

using Big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<250>>;

Big big_cdf(Big u, Big v, Big theta, CopulaFamily f) {
  using boost::multiprecision::pow;
  using boost::multiprecision::sqrt;
  if (f == CopulaFamily::Clayton) return pow(pow(u, -theta) + pow(v, -theta) - 1, -1 / theta);
  const Big e = theta - 1;
  const Big a = 1 + e * (u + v);
  return (a - sqrt(a * a - 4 * u * v * theta * e)) / (2 * e);
}

Big big_h1(Big u, Big v, Big theta, CopulaFamily f) {
  using boost::multiprecision::pow;
  using boost::multiprecision::sqrt;
  if (f == CopulaFamily::Clayton) return pow(u, -1 - theta) * pow(pow(u, -theta) + pow(v, -theta) - 1, -1 - 1 / theta);
  const Big e = theta - 1;
  const Big a = 1 + e * (u + v);
  return Big(0.5) - (a - 2 * v * theta) / (2 * sqrt(a * a - 4 * u * v * theta * e));
}

double relative(double got, const Big& want) {
  return std::abs(static_cast<double>((Big(got) - want) / want));
}

}  // namespace

// Differences of h-functions and rectangle probabilities feed censored
// likelihood terms; they must stay accurate when the terms nearly cancel.
TEST(Copula, HDifferencesKeepRelativePrecision) {
  namespace ck = copula_kernel;
  const double vs[] = {1e-12, 1e-9, 1e-6, 0.01, 0.3, 0.7, 0.99, 1.0 - 1e-9};
  for (auto f : {CopulaFamily::Clayton, CopulaFamily::Plackett}) {
    for (double theta : {0.3, 1.5, 7.0}) {
      for (double u : {1e-12, 1e-6, 0.2, 0.9, 1.0 - 1e-7}) {
        for (double va : vs) {
          for (double vb : vs) {
            if (vb >= va) continue;
            const Big want = big_h1(u, va, theta, f) - big_h1(u, vb, theta, f);
            const double got = ck::h1_difference(u, va, vb, theta, f);
            EXPECT_LT(relative(got, want), 1e-7) << to_string(f) << " theta " << theta << " u " << u << " v "
                                                 << va << "," << vb;
          }
          const double h = ck::h1(u, va, theta, f);
          EXPECT_LT(relative(h, big_h1(u, va, theta, f)), 1e-9) << to_string(f) << " u " << u << " v " << va;
        }
      }
    }
  }
}

TEST(Copula, ClaytonRectangleMassKeepsRelativePrecision) {
  namespace ck = copula_kernel;
  const double ps[] = {1e-12, 1e-8, 1e-5, 0.05, 0.4, 0.9};
  for (double theta : {0.3, 1.5, 7.0}) {
    for (double ua : ps) {
      for (double ub : ps) {
        for (double va : ps) {
          for (double vb : ps) {
            if (ub >= ua || vb >= va) continue;
            const CopulaFamily f = CopulaFamily::Clayton;
            const Big want =
                big_cdf(ua, va, theta, f) - big_cdf(ua, vb, theta, f) - big_cdf(ub, va, theta, f) + big_cdf(ub, vb, theta, f);
            const double got = ck::rectangle_mass(ua, ub, va, vb, theta, f);
            EXPECT_LT(relative(got, want), 1e-6)
                << "theta " << theta << " u " << ua << "," << ub << " v " << va << "," << vb;
          }
        }
      }
    }
  }
}
