#pragma once

// Bivariate ranking-based variable selection: subsample plan, single-
// covariate fits per subsample, two-margin rankings, top-ranked set
// probabilities and the ratio rule selecting the relevant sets.

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "brbvs/copula.hpp"
#include "brbvs/dataset.hpp"
#include "brbvs/fit.hpp"
#include "brbvs/margins.hpp"
#include "brbvs/measures.hpp"
#include "brbvs/model.hpp"

namespace brbvs {

struct BRBVSParams {
  int B = 20;
  int m = 0;  // 0 selects floor(n / 2)
  int k_max = 6;
  double tau = 0.5;
  std::uint64_t seed = 1;
  CopulaFamily copula = CopulaFamily::Clayton;
  SurvivalLink link1 = SurvivalLink::PH;
  SurvivalLink link2 = SurvivalLink::PO;
  MeasureKind metric = MeasureKind::FIM;
  int workers = 1;
  int min_fit_size = 50;
  FitOptions fit;

  [[nodiscard]] int resolved_m(std::size_t n) const;
  /// Throws ConfigError on invalid combinations for n records, p covariates.
  void validate(std::size_t n, int p) const;
};

/// plan[b][q]: the q-th of r = floor(n / m) disjoint, ascending index sets of
/// size m for replicate b, drawn from a stream derived from (seed, b).
using SubsamplePlan = std::vector<std::vector<std::vector<std::size_t>>>;
SubsamplePlan subsample_plan(std::size_t n, std::size_t m, int B, std::uint64_t seed);

/// Descending covariate orderings per margin with their measure values.
struct RankRecord {
  std::array<std::vector<int>, 2> order;
  std::array<std::vector<double>, 2> measure;  // indexed by covariate
  int nonconverged = 0;
};

/// Orders covariates by decreasing measure, ties by ascending index.
RankRecord make_rank_record(const Eigen::Ref<const Eigen::MatrixXd>& measures, int nonconverged = 0);

/// Full-data quantities frozen across subsample fits: baseline knots and
/// smoothing parameters of the covariate-free model, and its estimate as a
/// warm start.
struct RankingContext {
  ModelSpec base_spec;
  Eigen::VectorXd lambdas;
  Eigen::VectorXd base_delta;
  bool base_converged = false;
};
RankingContext prepare_ranking(const SurvivalDataset& data, const BRBVSParams& params);

/// Measures of every covariate on one subsample (rows 0/1 = margins).
struct SubsampleScores {
  Eigen::MatrixXd fim;
  Eigen::MatrixXd abs;
  Eigen::MatrixXd ce;
  int fits = 0;
  int nonconverged = 0;
};

/// Fits the p single-covariate models once (when FIM or Abs is requested)
/// and evaluates the requested measures. Non-converged fits score 0; more
/// than half non-converged throws NumericalError.
SubsampleScores score_subsample(const SurvivalDataset& data, std::span<const std::size_t> rows,
                                const RankingContext& context, const BRBVSParams& params,
                                std::span<const MeasureKind> metrics);

RankRecord rank_one_subsample(const SurvivalDataset& data, std::span<const std::size_t> rows,
                              const RankingContext& context, const BRBVSParams& params);

struct TopSet {
  std::vector<int> set;  // ascending covariate indices
  double pi = 0.0;
};

/// Most frequent order-free top-k set across records and its frequency;
/// ties go to the lexicographically smallest set. k = 0 gives (empty, 1).
TopSet estimate_pi(std::span<const RankRecord> records, int nu, int k);

/// Frequencies of every distinct top-k set (sums to 1 for k >= 1).
std::vector<TopSet> top_set_frequencies(std::span<const RankRecord> records, int nu, int k);

struct SelectionRule {
  int size = 0;
  std::vector<double> ratios;  // k = 0 .. k_max - 1
  bool floored = false;        // a zero probability was replaced by the floor
};

/// argmin over k = 0..K-1 of max(pi[k+1], floor)^tau / max(pi[k], floor) for
/// pi of length K + 1; ties go to the smallest k.
SelectionRule select_s(std::span<const double> pi, double tau, double floor);

struct MarginSelection {
  std::vector<TopSet> tops;  // k = 0 .. k_max
  SelectionRule rule;
  std::vector<int> s_hat;
  bool nested = true;  // tops[k] subset of tops[k + 1] for all k
  Eigen::MatrixXd position_freq;  // p x k_max: share of records with covariate j at rank r
  Eigen::VectorXd mean_rank;      // 1-based
};

struct BRBVSResult {
  BRBVSParams params;
  int m = 0;
  int r = 0;
  std::vector<std::string> covariate_names;
  std::array<MarginSelection, 2> margins;
  Eigen::VectorXd lambdas;  // frozen smoothing parameters (empty for CE)
  int fits = 0;
  int nonconverged = 0;
  std::vector<std::string> warnings;
};

/// Aggregates rank records into top sets, selected sets and frequencies.
BRBVSResult aggregate_rankings(std::span<const RankRecord> records, const BRBVSParams& params, int m,
                               int r, const std::vector<std::string>& names);

BRBVSResult brbvs_run(const SurvivalDataset& data, const BRBVSParams& params);

/// Rank records of every subsample, one list per requested metric.
struct RankingRun {
  std::vector<std::vector<RankRecord>> records;
  Eigen::VectorXd lambdas;
  int m = 0;
  int r = 0;
};
RankingRun rank_records(const SurvivalDataset& data, const BRBVSParams& params,
                        std::span<const MeasureKind> metrics);

/// One result per metric, sharing the fits between FIM and Abs.
std::vector<BRBVSResult> brbvs_run_metrics(const SurvivalDataset& data, const BRBVSParams& params,
                                           std::span<const MeasureKind> metrics);

/// Human-readable summary: setup, then per margin the selected covariates
/// ordered by mean rank with their frequency at that position.
std::string summary_text(const BRBVSResult& result);

}  // namespace brbvs
