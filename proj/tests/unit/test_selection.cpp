#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "brbvs/error.hpp"
#include "brbvs/selection.hpp"
#include "brbvs/simulate.hpp"

using namespace brbvs;

namespace {

RankRecord record(std::vector<int> order1, std::vector<int> order2) {
  RankRecord r;
  r.order = {std::move(order1), std::move(order2)};
  return r;
}

const SurvivalDataset& small_data() {
  static const SurvivalDataset d = [] {
    ScenarioConfig c;
    c.n = 300;
    c.p = 6;
    c.seed = 23;
    return simulate(c).data;
  }();
  return d;
}

}  // namespace

TEST(SelectionRule, HandComputedSequence) {
  const std::vector<double> pi{1.0, 0.9, 0.8, 0.1, 0.05};
  const SelectionRule rule = select_s(pi, 0.5, 1e-3);
  EXPECT_EQ(rule.size, 2);
  ASSERT_EQ(rule.ratios.size(), 4u);
  EXPECT_DOUBLE_EQ(rule.ratios[0], std::sqrt(0.9));
  EXPECT_DOUBLE_EQ(rule.ratios[1], std::sqrt(0.8) / 0.9);
  EXPECT_DOUBLE_EQ(rule.ratios[2], std::sqrt(0.1) / 0.8);
  EXPECT_DOUBLE_EQ(rule.ratios[3], std::sqrt(0.05) / 0.1);
  EXPECT_FALSE(rule.floored);
}

TEST(SelectionRule, TiesGoToSmallestSize) {
  const std::vector<double> pi{1.0, 1.0, 1.0, 1.0};
  EXPECT_EQ(select_s(pi, 0.5, 0.01).size, 0);
}

TEST(SelectionRule, ZeroProbabilitiesAreFloored) {
  const std::vector<double> pi{1.0, 0.5, 0.0};
  const SelectionRule rule = select_s(pi, 1.0, 0.025);
  EXPECT_TRUE(rule.floored);
  EXPECT_DOUBLE_EQ(rule.ratios[1], 0.025 / 0.5);
  EXPECT_EQ(rule.size, 1);
  EXPECT_THROW(select_s(std::vector<double>{1.0}, 0.5, 0.1), ConfigError);
}

TEST(TopSets, EmptySetHasProbabilityOne) {
  const std::vector<RankRecord> recs{record({2, 0, 1}, {1, 2, 0})};
  const TopSet t = estimate_pi(recs, 1, 0);
  EXPECT_TRUE(t.set.empty());
  EXPECT_EQ(t.pi, 1.0);
}

TEST(TopSets, OrderFreeCountingAndLexicographicTies) {
  const std::vector<RankRecord> recs{record({0, 1, 2, 3}, {3, 2, 1, 0}), record({1, 0, 3, 2}, {2, 3, 0, 1}),
                                     record({2, 3, 0, 1}, {0, 1, 2, 3}), record({3, 2, 1, 0}, {1, 0, 2, 3})};
  const TopSet t2 = estimate_pi(recs, 1, 2);
  EXPECT_EQ(t2.set, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(t2.pi, 0.5);
  const TopSet t1 = estimate_pi(recs, 1, 1);
  EXPECT_EQ(t1.set, (std::vector<int>{0}));
  EXPECT_DOUBLE_EQ(t1.pi, 0.25);
  const TopSet m2 = estimate_pi(recs, 2, 2);
  EXPECT_EQ(m2.set, (std::vector<int>{0, 1}));
  EXPECT_DOUBLE_EQ(m2.pi, 0.5);
  double total = 0.0;
  for (const auto& f : top_set_frequencies(recs, 1, 3)) total += f.pi;
  EXPECT_DOUBLE_EQ(total, 1.0);
}

TEST(RankRecords, DescendingWithIndexTieBreak) {
  Eigen::MatrixXd m(2, 4);
  m << 0.5, 2.0, 0.5, 1.0,  //
      0.0, 0.0, 3.0, 0.0;
  const RankRecord r = make_rank_record(m, 2);
  EXPECT_EQ(r.order[0], (std::vector<int>{1, 3, 0, 2}));
  EXPECT_EQ(r.order[1], (std::vector<int>{2, 0, 1, 3}));
  EXPECT_EQ(r.nonconverged, 2);
  EXPECT_DOUBLE_EQ(r.measure[0][1], 2.0);
}

TEST(SubsamplePlan, DisjointSortedAndReproducible) {
  const SubsamplePlan plan = subsample_plan(101, 25, 6, 77);
  ASSERT_EQ(plan.size(), 6u);
  for (const auto& rep : plan) {
    ASSERT_EQ(rep.size(), 4u);
    std::set<std::size_t> seen;
    for (const auto& s : rep) {
      ASSERT_EQ(s.size(), 25u);
      EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
      for (auto i : s) {
        EXPECT_LT(i, 101u);
        EXPECT_TRUE(seen.insert(i).second);
      }
    }
  }
  EXPECT_EQ(plan, subsample_plan(101, 25, 6, 77));
  EXPECT_NE(plan, subsample_plan(101, 25, 6, 78));
  // Replicate b depends only on (seed, b).
  EXPECT_EQ(subsample_plan(101, 25, 3, 77)[2], plan[2]);
}

TEST(Aggregate, FrequenciesRanksAndWarnings) {
  std::vector<RankRecord> recs;
  for (int i = 0; i < 10; ++i) recs.push_back(record({0, 1, 2, 3}, {0, 1, 2, 3}));
  BRBVSParams params;
  params.k_max = 3;
  params.B = 10;
  const BRBVSResult res = aggregate_rankings(recs, params, 50, 1, default_covariate_names(4));
  // Perfectly stable rankings: every pi is 1 and ties keep k = 0.
  EXPECT_EQ(res.margins[0].rule.size, 0);
  EXPECT_TRUE(res.margins[0].nested);
  EXPECT_DOUBLE_EQ(res.margins[0].mean_rank[2], 3.0);
  EXPECT_DOUBLE_EQ(res.margins[0].position_freq(1, 1), 1.0);
  EXPECT_TRUE(res.warnings.empty());

  std::vector<RankRecord> mixed;
  for (int i = 0; i < 10; ++i) mixed.push_back(record({0, 1, 2, i % 2 ? 3 : 4, i % 2 ? 4 : 3}, {0, 1, 2, 3, 4}));
  params.k_max = 4;
  const BRBVSResult r2 = aggregate_rankings(mixed, params, 50, 1, default_covariate_names(5));
  EXPECT_EQ(r2.margins[0].s_hat, (std::vector<int>{0, 1, 2}));
  ASSERT_FALSE(r2.warnings.empty());
  EXPECT_NE(r2.warnings[0].find("margin 1"), std::string::npos);
  EXPECT_NE(summary_text(r2).find("Warning"), std::string::npos);
}

TEST(Params, Validation) {
  BRBVSParams p;
  EXPECT_NO_THROW(p.validate(800, 20));
  EXPECT_EQ(p.resolved_m(801), 400);
  p.k_max = 21;
  EXPECT_THROW(p.validate(800, 20), ConfigError);
  p.k_max = 6;
  p.tau = 0.0;
  EXPECT_THROW(p.validate(800, 20), ConfigError);
  p.tau = 0.5;
  p.m = 900;
  EXPECT_THROW(p.validate(800, 20), ConfigError);
  p.m = 30;
  EXPECT_THROW(p.validate(800, 20), ConfigError);
  p.metric = MeasureKind::CE;
  EXPECT_NO_THROW(p.validate(800, 20));
}

TEST(Run, DeterministicAcrossWorkers) {
  BRBVSParams p;
  p.B = 3;
  p.k_max = 4;
  p.seed = 5;
  const std::vector<MeasureKind> metrics{MeasureKind::FIM, MeasureKind::Abs, MeasureKind::CE};
  const auto one = brbvs_run_metrics(small_data(), p, metrics);
  p.workers = 3;
  const auto three = brbvs_run_metrics(small_data(), p, metrics);
  ASSERT_EQ(one.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    for (int nu = 0; nu < 2; ++nu) {
      EXPECT_EQ(one[k].margins[nu].s_hat, three[k].margins[nu].s_hat);
      EXPECT_EQ(one[k].margins[nu].mean_rank, three[k].margins[nu].mean_rank);
    }
    EXPECT_EQ(summary_text(one[k]), summary_text(three[k]));
  }
  EXPECT_EQ(one[0].fits, 3 * 2 * 6);
  EXPECT_EQ(one[2].fits, 0);
  // FIM and Abs are computed from the same fits.
  EXPECT_EQ(one[0].nonconverged, one[1].nonconverged);
}

TEST(Run, StrongSignalIsRankedFirst) {
  BRBVSParams p;
  p.B = 4;
  p.k_max = 4;
  const BRBVSResult res = brbvs_run(small_data(), p);
  const auto& m1 = res.margins[0];
  // x1 and x2 carry margin 1; they hold the two best mean ranks.
  EXPECT_LT(std::max(m1.mean_rank[0], m1.mean_rank[1]), m1.mean_rank.tail(3).minCoeff());
  const std::string text = summary_text(res);
  EXPECT_NE(text.find("Sets of Relevant Covariates"), std::string::npos);
  EXPECT_NE(text.find("Survival Function 2"), std::string::npos);
}
