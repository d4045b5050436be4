#include "brbvs/bench.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "brbvs/error.hpp"
#include "brbvs/parallel.hpp"
#include "brbvs/rng.hpp"

namespace brbvs {

namespace {

constexpr std::uint64_t kDataTag = 0x64617461ULL;
constexpr std::uint64_t kSelectTag = 0x73656c65ULL;

std::size_t intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t c = 0;
  for (int x : a) c += static_cast<std::size_t>(std::count(b.begin(), b.end(), x));
  return c;
}

}  // namespace

BenchMetrics score_selection(const std::vector<SetPair>& s_hat, const SetPair& s_true, int k_max) {
  BenchMetrics out;
  out.n_rep = static_cast<int>(s_hat.size());
  if (s_hat.empty()) return out;
  const double n = static_cast<double>(s_hat.size());
  for (std::size_t m = 0; m < 2; ++m) {
    MarginMetrics& mm = out.margins[m];
    std::map<std::vector<int>, int> counts;
    for (const auto& pair : s_hat) {
      std::vector<int> s = pair[m];
      std::sort(s.begin(), s.end());
      const auto hits = static_cast<double>(intersection_size(s, s_true[m]));
      mm.mean_size += static_cast<double>(s.size());
      mm.mean_hits += hits;
      ++counts[s];
    }
    mm.mean_size /= n;
    mm.mean_hits /= n;
    mm.fp_raw = mm.mean_size - mm.mean_hits;
    mm.fn_raw = static_cast<double>(s_true[m].size()) - mm.mean_hits;
    mm.fp_norm = mm.fp_raw / k_max;
    mm.fn_norm = k_max > 2 ? mm.fn_raw / (k_max - 2) : std::numeric_limits<double>::quiet_NaN();
    for (const auto& [set, c] : counts) mm.set_frequencies.push_back({set, c / n});
    std::stable_sort(mm.set_frequencies.begin(), mm.set_frequencies.end(),
                     [](const SetFrequency& a, const SetFrequency& b) { return a.share > b.share; });
  }
  return out;
}

std::uint64_t replicate_data_seed(std::uint64_t seed, std::size_t h) { return derive_seed(seed, {kDataTag, h}); }

std::uint64_t replicate_selection_seed(std::uint64_t seed, std::size_t h) {
  return derive_seed(seed, {kSelectTag, h});
}

BenchResult run_benchmark(const BenchConfig& config) {
  if (config.n_rep < 1) throw ConfigError("n_rep must be at least 1");
  if (config.metrics.empty()) throw ConfigError("at least one metric is required");
  if (config.workers < 1) throw ConfigError("workers must be at least 1");
  config.scenario.validate();

  BenchResult result;
  result.config = config;
  result.replicates.resize(static_cast<std::size_t>(config.n_rep));
  // Parallelise across replicates when there are enough of them, otherwise
  // inside each selection run.
  const bool outer = config.n_rep >= config.workers;
  const int inner_workers = outer ? 1 : config.workers;

  parallel_for(static_cast<std::size_t>(config.n_rep), outer ? config.workers : 1, [&](std::size_t h) {
    ReplicateLog& log = result.replicates[h];
    log.replicate = static_cast<int>(h);
    log.data_seed = replicate_data_seed(config.seed, h);
    try {
      ScenarioConfig sc = config.scenario;
      sc.seed = log.data_seed;
      const SimulatedData sim = simulate(sc);
      log.censored_fraction = sim.censored_fraction;
      BRBVSParams bp = config.brbvs;
      bp.seed = replicate_selection_seed(config.seed, h);
      bp.workers = inner_workers;
      const auto runs = brbvs_run_metrics(sim.data, bp, config.metrics);
      for (const auto& run : runs) {
        log.s_hat.push_back({run.margins[0].s_hat, run.margins[1].s_hat});
        log.fits = std::max(log.fits, run.fits);
        log.nonconverged = std::max(log.nonconverged, run.nonconverged);
      }
      log.ok = true;
    } catch (const Error& e) {
      log.ok = false;
      log.error = e.what();
      log.s_hat.clear();
    }
  });

  const SetPair truth{true_support(1), true_support(2)};
  for (std::size_t k = 0; k < config.metrics.size(); ++k) {
    std::vector<SetPair> sets;
    for (const auto& log : result.replicates) {
      if (log.ok) sets.push_back(log.s_hat[k]);
    }
    result.metrics.push_back(score_selection(sets, truth, config.brbvs.k_max));
  }
  for (const auto& log : result.replicates) result.failures += log.ok ? 0 : 1;
  return result;
}

}  // namespace brbvs
