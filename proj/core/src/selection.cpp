#include "brbvs/selection.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "brbvs/error.hpp"
#include "brbvs/likelihood.hpp"
#include "brbvs/parallel.hpp"
#include "brbvs/rng.hpp"

namespace brbvs {

namespace {

constexpr std::uint64_t kPlanTag = 0x706c616eULL;

// Copies each predictor block of a nested model's estimate into the leading
// coefficients of the corresponding block of a larger model.
Eigen::VectorXd extend_estimate(const Model& small, const Model& large,
                                const Eigen::Ref<const Eigen::VectorXd>& delta) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(large.n_params());
  for (int nu = 1; nu <= 3; ++nu) {
    const int k = small.predictor(nu).n_params();
    out.segment(large.offset(nu), k) = delta.segment(small.offset(nu), k);
  }
  return out;
}

bool wants(std::span<const MeasureKind> metrics, MeasureKind kind) {
  return std::find(metrics.begin(), metrics.end(), kind) != metrics.end();
}

std::string ordinal(int k) {
  const int mod100 = k % 100;
  const char* suffix = "th";
  if (mod100 < 11 || mod100 > 13) {
    switch (k % 10) {
      case 1:
        suffix = "st";
        break;
      case 2:
        suffix = "nd";
        break;
      case 3:
        suffix = "rd";
        break;
      default:
        break;
    }
  }
  return std::to_string(k) + suffix;
}

}  // namespace

int BRBVSParams::resolved_m(std::size_t n) const {
  return m > 0 ? m : static_cast<int>(n / 2);
}

void BRBVSParams::validate(std::size_t n, int p) const {
  const int mm = resolved_m(n);
  if (B < 1) throw ConfigError("B must be at least 1");
  if (mm < 1) throw ConfigError("subsample size m must be at least 1");
  if (static_cast<std::size_t>(mm) > n) {
    throw ConfigError("subsample size m = " + std::to_string(mm) + " exceeds n = " + std::to_string(n));
  }
  if (p < 1) throw ConfigError("at least one covariate is required");
  if (k_max < 1 || k_max > p) {
    throw ConfigError("kmax must satisfy 1 <= kmax <= p = " + std::to_string(p));
  }
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (metric != MeasureKind::CE && mm < min_fit_size) {
    throw ConfigError("subsample size m = " + std::to_string(mm) + " is below the minimum fit size " +
                      std::to_string(min_fit_size));
  }
}

SubsamplePlan subsample_plan(std::size_t n, std::size_t m, int B, std::uint64_t seed) {
  if (m < 1 || m > n) throw ConfigError("subsample size must satisfy 1 <= m <= n");
  if (B < 1) throw ConfigError("B must be at least 1");
  const std::size_t r = n / m;
  SubsamplePlan plan(static_cast<std::size_t>(B));
  std::vector<std::size_t> perm(n);
  for (int b = 0; b < B; ++b) {
    Rng rng = make_rng(seed, {kPlanTag, static_cast<std::uint64_t>(b)});
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    // Partial Fisher-Yates: the first r*m positions are a uniform draw
    // without replacement.
    for (std::size_t i = 0; i < r * m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(perm[i], perm[pick(rng)]);
    }
    auto& sets = plan[static_cast<std::size_t>(b)];
    sets.resize(r);
    for (std::size_t q = 0; q < r; ++q) {
      sets[q].assign(perm.begin() + static_cast<std::ptrdiff_t>(q * m),
                     perm.begin() + static_cast<std::ptrdiff_t>((q + 1) * m));
      std::sort(sets[q].begin(), sets[q].end());
    }
  }
  return plan;
}

RankRecord make_rank_record(const Eigen::Ref<const Eigen::MatrixXd>& measures, int nonconverged) {
  RankRecord rec;
  rec.nonconverged = nonconverged;
  const auto p = static_cast<int>(measures.cols());
  for (int m = 0; m < 2; ++m) {
    auto& order = rec.order[static_cast<std::size_t>(m)];
    auto& values = rec.measure[static_cast<std::size_t>(m)];
    values.resize(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) values[static_cast<std::size_t>(j)] = measures(m, j);
    order.resize(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&values](int a, int b) {
      return values[static_cast<std::size_t>(a)] > values[static_cast<std::size_t>(b)];
    });
  }
  return rec;
}

RankingContext prepare_ranking(const SurvivalDataset& data, const BRBVSParams& params) {
  RankingContext ctx;
  ModelSpec spec = ModelSpec::margins_with(params.copula, params.link1, params.link2, {});
  const Model model(spec, data);
  const Loglik lik(model, data);
  const SmoothingSelection sel = select_smoothing(lik, model.initial_point(data), params.fit);
  for (int nu = 1; nu <= 2; ++nu) {
    const BSplineBasis& basis = model.predictor(nu).time_basis();
    MonotoneSplineConfig cfg = *(nu == 1 ? spec.eta1 : spec.eta2).baseline;
    cfg.interior_knots = basis.interior_knots();
    cfg.lower = basis.lower();
    cfg.upper = basis.upper();
    (nu == 1 ? spec.eta1 : spec.eta2).baseline = cfg;
  }
  ctx.base_spec = spec;
  ctx.lambdas = sel.lambdas;
  ctx.base_delta = sel.fit.delta;
  ctx.base_converged = sel.fit.converged;
  return ctx;
}

SubsampleScores score_subsample(const SurvivalDataset& data, std::span<const std::size_t> rows,
                                const RankingContext& context, const BRBVSParams& params,
                                std::span<const MeasureKind> metrics) {
  const SurvivalDataset sub = data.subset(rows);
  const int p = data.n_covariates();
  SubsampleScores out;
  out.fim = Eigen::MatrixXd::Zero(2, p);
  out.abs = Eigen::MatrixXd::Zero(2, p);
  out.ce = Eigen::MatrixXd::Zero(2, p);

  if (wants(metrics, MeasureKind::FIM) || wants(metrics, MeasureKind::Abs)) {
    if (static_cast<int>(sub.size()) < params.min_fit_size) {
      throw ConfigError("subsample of " + std::to_string(sub.size()) +
                        " records is below the minimum fit size " + std::to_string(params.min_fit_size));
    }
    const Model base(context.base_spec, sub);
    Eigen::VectorXd warm = context.base_delta;
    try {
      const Loglik lik(base, sub);
      const FittedModel f = trust_region_fit(lik, context.lambdas, context.base_delta, params.fit);
      if (f.converged) warm = f.delta;
    } catch (const NumericalError&) {
    }
    for (int j = 0; j < p; ++j) {
      ModelSpec spec = context.base_spec;
      spec.eta1.linear = {j};
      spec.eta2.linear = {j};
      ++out.fits;
      try {
        const Model model(spec, sub);
        const Loglik lik(model, sub);
        const FittedModel f =
            trust_region_fit(lik, context.lambdas, extend_estimate(base, model, warm), params.fit);
        if (!f.converged) {
          ++out.nonconverged;
          continue;
        }
        const Eigen::VectorXd info = fisher_diag(f);
        for (int nu = 1; nu <= 2; ++nu) {
          out.fim(nu - 1, j) = fim_measure(f, info, model, nu, j);
          out.abs(nu - 1, j) = abs_measure(f, model, nu, j);
        }
      } catch (const NumericalError&) {
        ++out.nonconverged;
      }
    }
    if (2 * out.nonconverged > out.fits) {
      throw NumericalError(std::to_string(out.nonconverged) + " of " + std::to_string(out.fits) +
                           " single-covariate fits did not converge on a subsample");
    }
  }

  if (wants(metrics, MeasureKind::CE)) {
    std::vector<double> times(sub.size());
    std::vector<double> col(sub.size());
    for (int nu = 1; nu <= 2; ++nu) {
      for (std::size_t i = 0; i < sub.size(); ++i) times[i] = sub.margin(nu, i).observed_time();
      for (int j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < sub.size(); ++i) col[i] = sub.x(static_cast<Eigen::Index>(i), j);
        out.ce(nu - 1, j) = ce_measure(times, col);
      }
    }
  }
  return out;
}

RankRecord rank_one_subsample(const SurvivalDataset& data, std::span<const std::size_t> rows,
                              const RankingContext& context, const BRBVSParams& params) {
  const std::array<MeasureKind, 1> metric{params.metric};
  const SubsampleScores s = score_subsample(data, rows, context, params, metric);
  switch (params.metric) {
    case MeasureKind::FIM:
      return make_rank_record(s.fim, s.nonconverged);
    case MeasureKind::Abs:
      return make_rank_record(s.abs, s.nonconverged);
    case MeasureKind::CE:
      return make_rank_record(s.ce, 0);
  }
  return {};
}

std::vector<TopSet> top_set_frequencies(std::span<const RankRecord> records, int nu, int k) {
  if (k == 0) return {TopSet{{}, 1.0}};
  std::map<std::vector<int>, int> counts;
  for (const auto& rec : records) {
    const auto& order = rec.order.at(static_cast<std::size_t>(nu - 1));
    if (static_cast<std::size_t>(k) > order.size()) throw ConfigError("k exceeds the number of covariates");
    std::vector<int> top(order.begin(), order.begin() + k);
    std::sort(top.begin(), top.end());
    ++counts[top];
  }
  std::vector<TopSet> out;
  const double total = static_cast<double>(records.size());
  for (const auto& [set, c] : counts) out.push_back({set, static_cast<double>(c) / total});
  return out;
}

TopSet estimate_pi(std::span<const RankRecord> records, int nu, int k) {
  if (k == 0) return {{}, 1.0};
  if (records.empty()) return {{}, 0.0};
  const auto all = top_set_frequencies(records, nu, k);
  // Sets come in lexicographic order, so the first maximum is the tie winner.
  const TopSet* best = &all.front();
  for (const auto& t : all) {
    if (t.pi > best->pi) best = &t;
  }
  return *best;
}

SelectionRule select_s(std::span<const double> pi, double tau, double floor) {
  if (pi.size() < 2) throw ConfigError("selection needs probabilities for k = 0 .. kmax with kmax >= 1");
  SelectionRule rule;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < pi.size(); ++k) {
    double num = pi[k + 1];
    double den = pi[k];
    if (num <= 0.0) {
      num = floor;
      rule.floored = true;
    }
    if (den <= 0.0) {
      den = floor;
      rule.floored = true;
    }
    const double ratio = std::pow(num, tau) / den;
    rule.ratios.push_back(ratio);
    if (ratio < best) {
      best = ratio;
      rule.size = static_cast<int>(k);
    }
  }
  return rule;
}

BRBVSResult aggregate_rankings(std::span<const RankRecord> records, const BRBVSParams& params, int m,
                               int r, const std::vector<std::string>& names) {
  BRBVSResult res;
  res.params = params;
  res.m = m;
  res.r = r;
  res.covariate_names = names;
  const int p = static_cast<int>(names.size());
  const double floor = 1.0 / (2.0 * params.B * r);
  for (const auto& rec : records) {
    res.nonconverged += rec.nonconverged;
    if (params.metric != MeasureKind::CE) res.fits += p;
  }
  for (int nu = 1; nu <= 2; ++nu) {
    MarginSelection& ms = res.margins[static_cast<std::size_t>(nu - 1)];
    std::vector<double> pis;
    for (int k = 0; k <= params.k_max; ++k) {
      ms.tops.push_back(estimate_pi(records, nu, k));
      pis.push_back(ms.tops.back().pi);
    }
    ms.rule = select_s(pis, params.tau, floor);
    ms.s_hat = ms.tops[static_cast<std::size_t>(ms.rule.size)].set;
    for (int k = 1; k < params.k_max; ++k) {
      const auto& a = ms.tops[static_cast<std::size_t>(k)].set;
      const auto& b = ms.tops[static_cast<std::size_t>(k + 1)].set;
      if (!std::includes(b.begin(), b.end(), a.begin(), a.end())) ms.nested = false;
    }
    ms.position_freq = Eigen::MatrixXd::Zero(p, params.k_max);
    ms.mean_rank = Eigen::VectorXd::Zero(p);
    for (const auto& rec : records) {
      const auto& order = rec.order[static_cast<std::size_t>(nu - 1)];
      for (int pos = 0; pos < p; ++pos) {
        const int j = order[static_cast<std::size_t>(pos)];
        if (pos < params.k_max) ms.position_freq(j, pos) += 1.0;
        ms.mean_rank[j] += pos + 1.0;
      }
    }
    if (!records.empty()) {
      const double total = static_cast<double>(records.size());
      ms.position_freq /= total;
      ms.mean_rank /= total;
    }
    if (ms.rule.size >= params.k_max - 1 && params.k_max > 1) {
      res.warnings.push_back("margin " + std::to_string(nu) + ": " +
                             std::to_string(ms.rule.size) +
                             " covariates selected, the largest size the rule can return for kmax = " +
                             std::to_string(params.k_max) + "; consider increasing kmax");
    }
  }
  return res;
}

RankingRun rank_records(const SurvivalDataset& data, const BRBVSParams& params,
                        std::span<const MeasureKind> metrics) {
  data.validate();
  const int p = data.n_covariates();
  params.validate(data.size(), p);
  RankingRun run;
  run.m = params.resolved_m(data.size());
  run.r = static_cast<int>(data.size() / static_cast<std::size_t>(run.m));
  const int r = run.r;

  const bool need_fits = wants(metrics, MeasureKind::FIM) || wants(metrics, MeasureKind::Abs);
  RankingContext ctx;
  if (need_fits) ctx = prepare_ranking(data, params);
  run.lambdas = ctx.lambdas;

  const SubsamplePlan plan =
      subsample_plan(data.size(), static_cast<std::size_t>(run.m), params.B, params.seed);
  const std::size_t n_tasks = static_cast<std::size_t>(params.B) * static_cast<std::size_t>(r);
  std::vector<SubsampleScores> scores(n_tasks);
  parallel_for(n_tasks, params.workers, [&](std::size_t t) {
    const auto& rows = plan[t / static_cast<std::size_t>(r)][t % static_cast<std::size_t>(r)];
    scores[t] = score_subsample(data, rows, ctx, params, metrics);
  });

  for (MeasureKind metric : metrics) {
    std::vector<RankRecord> records;
    records.reserve(n_tasks);
    for (const auto& s : scores) {
      switch (metric) {
        case MeasureKind::FIM:
          records.push_back(make_rank_record(s.fim, s.nonconverged));
          break;
        case MeasureKind::Abs:
          records.push_back(make_rank_record(s.abs, s.nonconverged));
          break;
        case MeasureKind::CE:
          records.push_back(make_rank_record(s.ce, 0));
          break;
      }
    }
    run.records.push_back(std::move(records));
  }
  return run;
}

std::vector<BRBVSResult> brbvs_run_metrics(const SurvivalDataset& data, const BRBVSParams& params,
                                           std::span<const MeasureKind> metrics) {
  const RankingRun run = rank_records(data, params, metrics);
  std::vector<BRBVSResult> out;
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    BRBVSParams pm = params;
    pm.metric = metrics[k];
    BRBVSResult res = aggregate_rankings(run.records[k], pm, run.m, run.r, data.covariate_names);
    if (metrics[k] != MeasureKind::CE) res.lambdas = run.lambdas;
    out.push_back(std::move(res));
  }
  return out;
}

BRBVSResult brbvs_run(const SurvivalDataset& data, const BRBVSParams& params) {
  const std::array<MeasureKind, 1> metric{params.metric};
  return std::move(brbvs_run_metrics(data, params, metric).front());
}

std::string summary_text(const BRBVSResult& result) {
  std::ostringstream os;
  os << "Sets of Relevant Covariates\n================================\n\n";
  os << "Metric: " << to_string(result.params.metric) << "\n";
  os << "kmax: " << result.params.k_max << "\n";
  os << "Copula: " << to_string(result.params.copula) << "\n";
  os << "Margins: " << to_string(result.params.link1) << " " << to_string(result.params.link2) << "\n";
  os << "\n================================\n";
  for (int nu = 1; nu <= 2; ++nu) {
    const MarginSelection& ms = result.margins[static_cast<std::size_t>(nu - 1)];
    os << "\nSurvival Function " << nu << " :\n";
    std::vector<int> members = ms.s_hat;
    std::stable_sort(members.begin(), members.end(),
                     [&ms](int a, int b) { return ms.mean_rank[a] < ms.mean_rank[b]; });
    if (members.empty()) os << "  (no covariates selected)\n";
    for (std::size_t pos = 0; pos < members.size(); ++pos) {
      const int j = members[pos];
      const double freq = pos < static_cast<std::size_t>(ms.position_freq.cols())
                              ? ms.position_freq(j, static_cast<Eigen::Index>(pos))
                              : 0.0;
      os << "  -  " << ordinal(static_cast<int>(pos) + 1) << ": "
         << result.covariate_names[static_cast<std::size_t>(j)] << " (" << std::fixed
         << std::setprecision(2) << 100.0 * freq << "%)\n";
    }
  }
  for (const auto& w : result.warnings) os << "\nWarning: " << w << "\n";
  return os.str();
}

}  // namespace brbvs
