#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "brbvs/error.hpp"
#include "brbvs/fit.hpp"
#include "brbvs/likelihood.hpp"
#include "test_support.hpp"

using namespace brbvs;

namespace {

ModelSpec rich_spec(CopulaFamily c, SurvivalLink l1, SurvivalLink l2) {
  ModelSpec s = ModelSpec::margins_with(c, l1, l2, {});
  s.eta1.linear = {0, 1};
  s.eta1.smooth.push_back({2, {}});
  s.eta2.linear = {0, 2};
  s.eta3.linear = {1};
  return s;
}

Eigen::VectorXd random_point(const Model& m, const SurvivalDataset& d, std::mt19937_64& rng, double sd) {
  std::normal_distribution<double> normal(0.0, sd);
  Eigen::VectorXd delta = m.initial_point(d);
  for (Eigen::Index k = 0; k < delta.size(); ++k) delta[k] += normal(rng);
  return delta;
}

// Record likelihood from the joint survival F(t1, t2) = C(S1(t1), S2(t2)):
// event times enter through -dF/dt by central differences (step 1e-4 t keeps
// the roundoff of the mixed difference near 1e-8), censored
// margins through differences of F at their bounds.
double oracle_record(const Model& m, const SurvivalDataset& d, const Eigen::VectorXd& delta, std::size_t i) {
  const Eigen::RowVectorXd x = d.x.row(static_cast<Eigen::Index>(i));
  auto surv = [&](int nu, double t) {
    if (t <= 0.0) return 1.0;
    if (std::isinf(t)) return 0.0;
    const Predictor& p = m.predictor(nu);
    const double eta = p.evaluate(t, x, delta.segment(m.offset(nu), p.n_params())).eta;
    return link_survival(eta, m.link(nu)).survival;
  };
  double theta = 1.0;
  if (m.has_dependence()) theta = dependence_link(m.eta3(x, delta)).theta;
  auto joint = [&](double t1, double t2) {
    return copula_cdf(surv(1, t1), surv(2, t2), theta, m.spec().copula);
  };
  struct Term {
    double t;
    double w;
  };
  auto terms = [](const MarginObservation& o) -> std::vector<Term> {
    if (o.kind == CensorKind::Uncensored) {
      const double h = 1e-4 * o.lower;
      return {{o.lower - h, 1.0 / (2 * h)}, {o.lower + h, -1.0 / (2 * h)}};
    }
    return {{o.lower, 1.0}, {o.upper, -1.0}};
  };
  double value = 0.0;
  for (const auto& a : terms(d.y1[i])) {
    for (const auto& b : terms(d.y2[i])) value += a.w * b.w * joint(a.t, b.t);
  }
  return value;
}

struct Combo {
  CopulaFamily c;
  SurvivalLink l1;
  SurvivalLink l2;
};

std::vector<Combo> all_combos() {
  std::vector<Combo> out;
  for (auto c : {CopulaFamily::Independence, CopulaFamily::Clayton, CopulaFamily::Plackett}) {
    for (auto l1 : {SurvivalLink::PH, SurvivalLink::PO}) {
      for (auto l2 : {SurvivalLink::PH, SurvivalLink::PO}) out.push_back({c, l1, l2});
    }
  }
  return out;
}

std::string label(const Combo& k) {
  return std::string(to_string(k.c)) + "/" + std::string(to_string(k.l1)) + "," + std::string(to_string(k.l2));
}

}  // namespace

TEST(Loglik, MatchesJointSurvivalOracle) {
  const SurvivalDataset d = test::mixed_dataset(48, 21);
  std::mt19937_64 rng(2);
  for (const auto& k : all_combos()) {
    const Model m(rich_spec(k.c, k.l1, k.l2), d);
    const Loglik lik(m, d);
    const Eigen::VectorXd delta = random_point(m, d, rng, 0.1);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double oracle = std::log(oracle_record(m, d, delta, i));
      EXPECT_NEAR(lik.record_value(i, delta), oracle, 1e-6 * std::max(1.0, std::abs(oracle)))
          << label(k) << " record " << i << " (" << to_code(d.y1[i].kind) << to_code(d.y2[i].kind) << ")";
    }
  }
}

TEST(Loglik, GradientMatchesCentralDifferences) {
  const SurvivalDataset d = test::mixed_dataset(50, 5);
  std::mt19937_64 rng(8);
  for (const auto& k : all_combos()) {
    const Model m(rich_spec(k.c, k.l1, k.l2), d);
    const Loglik lik(m, d);
    const Eigen::VectorXd delta = random_point(m, d, rng, 0.2);
    const Eigen::VectorXd g = lik.evaluate(delta, DerivativeOrder::Gradient).gradient;
    Eigen::VectorXd dp = delta;
    for (Eigen::Index j = 0; j < delta.size(); ++j) {
      const double h = 1e-6 * (1.0 + std::abs(delta[j]));
      dp[j] = delta[j] + h;
      const double fp = lik.value(dp);
      dp[j] = delta[j] - h;
      const double fm = lik.value(dp);
      dp[j] = delta[j];
      const double fd = (fp - fm) / (2 * h);
      EXPECT_NEAR(g[j], fd, 1e-5 * std::max(1.0, std::abs(fd))) << label(k) << " parameter " << j;
    }
  }
}

TEST(Loglik, HessianMatchesDifferencedGradient) {
  const SurvivalDataset d = test::mixed_dataset(50, 6);
  std::mt19937_64 rng(4);
  for (const auto& k : all_combos()) {
    const Model m(rich_spec(k.c, k.l1, k.l2), d);
    const Loglik lik(m, d);
    const Eigen::VectorXd delta = random_point(m, d, rng, 0.2);
    const Eigen::MatrixXd h = lik.evaluate(delta, DerivativeOrder::Hessian).hessian;
    const Eigen::MatrixXd fd = finite_difference_hessian(lik, delta);
    EXPECT_TRUE(h.isApprox(h.transpose(), 1e-12)) << label(k);
    const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    EXPECT_LT((h - fd).cwiseAbs().maxCoeff(), 1e-5 * scale) << label(k);
  }
}

TEST(Loglik, ValueOnlyAgreesWithDerivativePasses) {
  const SurvivalDataset d = test::mixed_dataset(40, 7);
  const Model m(rich_spec(CopulaFamily::Plackett, SurvivalLink::PO, SurvivalLink::PH), d);
  const Loglik lik(m, d);
  const Eigen::VectorXd delta = m.initial_point(d);
  const double v = lik.value(delta);
  EXPECT_DOUBLE_EQ(lik.evaluate(delta, DerivativeOrder::Gradient).value, v);
  EXPECT_NEAR(lik.evaluate(delta, DerivativeOrder::Hessian).value, v, 1e-10 * std::abs(v));
  double sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) sum += lik.record_value(i, delta);
  EXPECT_NEAR(sum, v, 1e-10 * std::abs(v));
  EXPECT_DOUBLE_EQ(loglik(d, m.spec(), delta), v);
}

TEST(Loglik, IndependenceFactorises) {
  const SurvivalDataset d = test::mixed_dataset(64, 9);
  const ModelSpec spec = rich_spec(CopulaFamily::Independence, SurvivalLink::PH, SurvivalLink::PO);
  const Model m(spec, d);
  const Loglik lik(m, d);
  const Eigen::VectorXd delta = m.initial_point(d);
  // Plackett at theta = 1 is the independence copula.
  ModelSpec pl = spec;
  pl.copula = CopulaFamily::Plackett;
  pl.eta3 = PredictorSpec{};
  const Model mp(pl, d);
  Eigen::VectorXd dp(mp.n_params());
  dp << delta, 0.0;
  EXPECT_NEAR(Loglik(mp, d).value(dp), lik.value(delta), 1e-8 * std::abs(lik.value(delta)));
}

TEST(Loglik, PenalisedGradientSubtractsPenalty) {
  const SurvivalDataset d = test::mixed_dataset(40, 3);
  const ModelSpec spec = rich_spec(CopulaFamily::Clayton, SurvivalLink::PH, SurvivalLink::PH);
  const Model m(spec, d);
  std::mt19937_64 rng(1);
  const Eigen::VectorXd delta = random_point(m, d, rng, 0.3);
  const Eigen::VectorXd lambdas = Eigen::VectorXd::Constant(m.n_smoothing(), 2.5);
  const Eigen::MatrixXd s = m.penalty_matrix(lambdas);
  EXPECT_NEAR(penalized_loglik(d, spec, delta, lambdas), loglik(d, spec, delta) - 0.5 * delta.dot(s * delta), 1e-9);
  const Eigen::VectorXd g = gradient(d, spec, delta, lambdas);
  const Eigen::VectorXd g0 = Loglik(m, d).evaluate(delta, DerivativeOrder::Gradient).gradient;
  EXPECT_TRUE(g.isApprox(g0 - s * delta, 1e-12));
}

TEST(Loglik, NonFiniteContributionIsNumericalError) {
  const SurvivalDataset d = test::mixed_dataset(20, 3);
  const Model m(rich_spec(CopulaFamily::Clayton, SurvivalLink::PH, SurvivalLink::PH), d);
  const Loglik lik(m, d);
  Eigen::VectorXd delta = m.initial_point(d);
  delta[0] = std::nan("");
  EXPECT_THROW(static_cast<void>(lik.value(delta)), NumericalError);
}

// Far in the tail both bounds of a censoring interval have survival far
// below any probability floor; the contribution must still be finite and
// match a high-precision evaluation of log(S(lower) - S(upper)).
TEST(Loglik, FarTailIntervalsStayFinite) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const SurvivalDataset d = test::mixed_dataset(40, 9);
  for (auto c : {CopulaFamily::Independence, CopulaFamily::Clayton, CopulaFamily::Plackett}) {
    const Model m(rich_spec(c, SurvivalLink::PH, SurvivalLink::PO), d);
    const Loglik lik(m, d);
    Eigen::VectorXd delta = m.initial_point(d);
    // Survivals down to about 1e-100 for the copulas, unbounded otherwise.
    delta[m.offset(1)] += c == CopulaFamily::Independence ? 6.0 : 3.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      EXPECT_TRUE(std::isfinite(lik.record_value(i, delta))) << to_string(c) << " record " << i;
    }
    if (c != CopulaFamily::Independence) continue;
    double deepest = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.y1[i].kind != CensorKind::Interval || d.y2[i].kind == CensorKind::Uncensored) continue;
      const Eigen::RowVectorXd x = d.x.row(static_cast<Eigen::Index>(i));
      auto log_interval = [&](int nu, const MarginObservation& o) {
        const Predictor& p = m.predictor(nu);
        auto s = [&](double t) -> Big {
          if (t <= 0.0) return Big(1);
          if (std::isinf(t)) return Big(0);
          const Big eta = p.evaluate(t, x, delta.segment(m.offset(nu), p.n_params())).eta;
          return m.link(nu) == SurvivalLink::PH ? exp(-exp(eta)) : 1 / (1 + exp(eta));
        };
        return static_cast<double>(log(s(o.lower) - s(o.upper)));
      };
      const double oracle = log_interval(1, d.y1[i]) + log_interval(2, d.y2[i]);
      deepest = std::min(deepest, oracle);
      EXPECT_NEAR(lik.record_value(i, delta), oracle, 1e-9 * std::abs(oracle)) << "record " << i;
    }
    EXPECT_LT(deepest, -500.0);
  }
}
