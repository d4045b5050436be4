#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace brbvs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class CensorKind { Uncensored, Right, Left, Interval };

/// 'U', 'R', 'L' or 'I'.
char to_code(CensorKind kind) noexcept;
CensorKind parse_censor_code(std::string_view code);

/// Observed bounds of one event time. Uncensored: lower == upper == t.
/// Right: upper = +inf. Left: lower = 0. Interval: 0 <= lower < upper.
struct MarginObservation {
  CensorKind kind = CensorKind::Uncensored;
  double lower = 0.0;
  double upper = 0.0;

  static MarginObservation uncensored(double t);
  static MarginObservation right(double lower);
  static MarginObservation left(double upper);
  static MarginObservation interval(double lower, double upper);

  [[nodiscard]] bool is_censored() const noexcept { return kind != CensorKind::Uncensored; }
  /// Event time (uncensored) or a representative observed time: the lower
  /// bound when right-censored, the midpoint otherwise.
  [[nodiscard]] double observed_time() const noexcept;
  /// Throws DataError if kind and bounds disagree.
  void validate() const;

  friend bool operator==(const MarginObservation&, const MarginObservation&) = default;
};

/// n paired event-time observations with an n x p covariate matrix.
struct SurvivalDataset {
  std::vector<MarginObservation> y1;
  std::vector<MarginObservation> y2;
  Eigen::MatrixXd x;
  std::vector<std::string> covariate_names;

  [[nodiscard]] std::size_t size() const noexcept { return y1.size(); }
  [[nodiscard]] int n_covariates() const noexcept { return static_cast<int>(x.cols()); }
  [[nodiscard]] const MarginObservation& margin(int nu, std::size_t i) const {
    return nu == 1 ? y1[i] : y2[i];
  }
  /// Index of a named covariate; throws ConfigError when absent.
  [[nodiscard]] int covariate_index(std::string_view name) const;
  [[nodiscard]] std::optional<int> find_covariate(std::string_view name) const;

  /// Rows in the given order.
  [[nodiscard]] SurvivalDataset subset(std::span<const std::size_t> rows) const;
  /// Keeps only the listed covariate columns.
  [[nodiscard]] SurvivalDataset select_covariates(std::span<const int> columns) const;

  /// Finite positive bounds of margin nu, used for knot placement.
  [[nodiscard]] std::vector<double> observed_bounds(int nu) const;

  /// Structural checks (row counts, names, status/bound consistency).
  void validate() const;
};

/// Default covariate names x1..xp.
std::vector<std::string> default_covariate_names(int p);

}  // namespace brbvs
