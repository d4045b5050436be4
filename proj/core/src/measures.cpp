#include "brbvs/measures.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "brbvs/error.hpp"

namespace brbvs {

namespace {

int linear_slot(const Model& model, int nu, int j) {
  if (nu != 1 && nu != 2) throw ConfigError("margin index must be 1 or 2");
  if (auto idx = model.linear_index(nu, j)) return *idx;
  throw ConfigError("covariate index " + std::to_string(j) + " is not a linear term of margin " +
                    std::to_string(nu));
}

// Fraction of entries that share their value with at least one other entry.
double tied_fraction(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  std::size_t tied = 0;
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i + 1;
    while (j < s.size() && s[j] == s[i]) ++j;
    if (j - i > 1) tied += j - i;
    i = j;
  }
  return s.empty() ? 0.0 : static_cast<double>(tied) / static_cast<double>(s.size());
}

}  // namespace

std::string_view to_string(MeasureKind kind) noexcept {
  switch (kind) {
    case MeasureKind::FIM:
      return "FIM";
    case MeasureKind::Abs:
      return "Abs";
    case MeasureKind::CE:
      return "CE";
  }
  return "?";
}

MeasureKind parse_measure(std::string_view name) {
  if (name == "FIM") return MeasureKind::FIM;
  if (name == "Abs") return MeasureKind::Abs;
  if (name == "CE") return MeasureKind::CE;
  throw ConfigError("unknown metric '" + std::string(name) + "' (expected FIM, Abs or CE)");
}

double fim_measure(const FittedModel& fit, const Eigen::Ref<const Eigen::VectorXd>& info_diag,
                   const Model& model, int nu, int j) {
  const int k = linear_slot(model, nu, j);
  const double beta = fit.delta[k];
  return beta * beta * std::max(0.0, info_diag[k]);
}

double fim_measure(const FittedModel& fit, const Model& model, int nu, int j) {
  return fim_measure(fit, fisher_diag(fit), model, nu, j);
}

double abs_measure(const FittedModel& fit, const Model& model, int nu, int j) {
  return std::abs(fit.delta[linear_slot(model, nu, j)]);
}

Eigen::VectorXd pseudo_observations(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&values](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  const double denom = static_cast<double>(n) + 1.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Ranks i+1 .. j share their average.
    const double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) out[static_cast<Eigen::Index>(order[k])] = avg / denom;
    i = j;
  }
  return out;
}

double ce_measure(std::span<const double> times, std::span<const double> x, int k) {
  const std::size_t n = times.size();
  if (x.size() != n) throw DataError("copula entropy needs columns of equal length");
  if (n < kCeMinSample) {
    throw DataError("copula entropy needs at least " + std::to_string(kCeMinSample) +
                    " paired observations (got " + std::to_string(n) + ")");
  }
  if (k < 1 || static_cast<std::size_t>(k) >= n) throw ConfigError("neighbour count out of range");
  if (tied_fraction(times) > 0.5 || tied_fraction(x) > 0.5) {
    throw DataError("copula entropy input is degenerate: more than half of a column is tied");
  }
  const Eigen::VectorXd u = pseudo_observations(times);
  const Eigen::VectorXd v = pseudo_observations(x);
  // Coincident points (ties in both columns) get half a rank spacing so the
  // log-distance stays finite.
  const double floor = 0.5 / (static_cast<double>(n) + 1.0);

  std::vector<double> dist(n);
  double sum_log = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < n; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double du = u[ii] - u[jj];
      const double dv = v[ii] - v[jj];
      dist[j] = j == i ? std::numeric_limits<double>::infinity() : du * du + dv * dv;
    }
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
    sum_log += std::log(std::max(std::sqrt(dist[static_cast<std::size_t>(k - 1)]), floor));
  }
  const double nd = static_cast<double>(n);
  constexpr double d = 2.0;
  const double entropy = boost::math::digamma(nd) - boost::math::digamma(static_cast<double>(k)) +
                         std::log(std::numbers::pi) + d * sum_log / nd;
  return -entropy;
}

}  // namespace brbvs
