#pragma once

// Monte Carlo benchmark: simulate, select, and score the selected sets
// against the true supports.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "brbvs/selection.hpp"
#include "brbvs/simulate.hpp"

namespace brbvs {

using SetPair = std::array<std::vector<int>, 2>;

struct SetFrequency {
  std::vector<int> set;
  double share;
};

struct MarginMetrics {
  double fp_raw = 0.0;
  double fn_raw = 0.0;
  double fp_norm = 0.0;  // fp_raw / kmax
  double fn_norm = 0.0;  // fn_raw / (kmax - 2); NaN when kmax <= 2
  double mean_size = 0.0;
  double mean_hits = 0.0;
  std::vector<SetFrequency> set_frequencies;  // by decreasing share, then set
};

struct BenchMetrics {
  std::array<MarginMetrics, 2> margins;
  int n_rep = 0;
};

/// Averages false positives/negatives, sizes and hits over replicates.
BenchMetrics score_selection(const std::vector<SetPair>& s_hat, const SetPair& s_true, int k_max);

struct BenchConfig {
  ScenarioConfig scenario;
  BRBVSParams brbvs;
  int n_rep = 20;
  std::vector<MeasureKind> metrics{MeasureKind::FIM};
  std::uint64_t seed = 1;
  int workers = 1;
};

struct ReplicateLog {
  int replicate = 0;
  std::uint64_t data_seed = 0;
  bool ok = false;
  std::string error;
  std::array<double, 2> censored_fraction{0.0, 0.0};
  std::vector<SetPair> s_hat;  // per metric
  int fits = 0;
  int nonconverged = 0;
};

struct BenchResult {
  BenchConfig config;
  std::vector<BenchMetrics> metrics;  // aligned with config.metrics
  std::vector<ReplicateLog> replicates;
  int failures = 0;
};

/// Seeds of replicate h: its simulated data and its subsample plan.
std::uint64_t replicate_data_seed(std::uint64_t seed, std::size_t h);
std::uint64_t replicate_selection_seed(std::uint64_t seed, std::size_t h);

/// Runs n_rep independent replicates (data and subsample streams derived
/// from config.seed and the replicate index). A failing replicate is logged
/// and excluded from the metrics.
BenchResult run_benchmark(const BenchConfig& config);

}  // namespace brbvs
