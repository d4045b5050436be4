#pragma once

// Link-based marginal survival: S(t | x) = G(eta(t, x)) where eta carries a
// monotone B-spline baseline of time plus linear and P-spline covariate
// effects.

#include <Eigen/Core>
#include <cmath>
#include <span>
#include <string_view>
#include <vector>

#include "brbvs/autodiff.hpp"

namespace brbvs {

enum class SurvivalLink { PH, PO };

std::string_view to_string(SurvivalLink link) noexcept;
SurvivalLink parse_link(std::string_view name);

struct LinkEval {
  double survival;    // G(eta)
  double derivative;  // G'(eta) < 0
};

/// PH: G = exp(-exp(eta)). PO: G = 1 / (1 + exp(eta)).
LinkEval link_survival(double eta, SurvivalLink link);

namespace link_kernel {

using ad::value_of;

// log(1 + exp(x)) without overflow.
template <class T>
T softplus(const T& x) {
  using std::exp;
  using std::log1p;
  if (value_of(x) > 0.0) return x + log1p(exp(-x));
  return log1p(exp(x));
}

template <class T>
T survival(const T& eta, SurvivalLink link) {
  using std::exp;
  if (link == SurvivalLink::PH) return exp(-exp(eta));
  return exp(-softplus(eta));
}

template <class T>
T log_survival(const T& eta, SurvivalLink link) {
  using std::exp;
  if (link == SurvivalLink::PH) return -exp(eta);
  return -softplus(eta);
}

/// log(-G'(eta)).
template <class T>
T log_neg_derivative(const T& eta, SurvivalLink link) {
  using std::exp;
  if (link == SurvivalLink::PH) return eta - exp(eta);
  return -softplus(eta) - softplus(T(-eta));
}

}  // namespace link_kernel

/// Clamped B-spline basis of arbitrary degree on a knot vector whose first
/// and last knots are repeated degree + 1 times.
class BSplineBasis {
 public:
  BSplineBasis() = default;
  BSplineBasis(std::vector<double> knots, int degree);

  /// Repeats the boundaries and inserts the interior knots.
  static BSplineBasis clamped(double lower, double upper, std::span<const double> interior,
                              int degree);

  [[nodiscard]] int size() const noexcept { return n_basis_; }
  [[nodiscard]] int degree() const noexcept { return degree_; }
  [[nodiscard]] double lower() const noexcept { return knots_[degree_]; }
  [[nodiscard]] double upper() const noexcept { return knots_[knots_.size() - degree_ - 1]; }
  [[nodiscard]] const std::vector<double>& knots() const noexcept { return knots_; }
  /// Interior knots only (no boundary repeats).
  [[nodiscard]] std::vector<double> interior_knots() const;

  /// Fills basis values and their t-derivatives (length size()). t outside
  /// [lower, upper] is evaluated at the nearest boundary; returns true when
  /// that clamp was applied.
  bool evaluate(double t, Eigen::Ref<Eigen::VectorXd> values,
                Eigen::Ref<Eigen::VectorXd> derivatives) const;

 private:
  std::vector<double> knots_;
  int degree_ = 3;
  int n_basis_ = 0;
};

struct MonotoneSplineConfig {
  int n_basis = 10;
  int degree = 3;
  int penalty_order = 2;
  /// Explicit interior knots and boundaries; when empty they are placed at
  /// quantiles of the observed times.
  std::vector<double> interior_knots;
  double lower = 0.0;
  double upper = 0.0;

  [[nodiscard]] bool has_fixed_knots() const noexcept { return upper > lower; }
};

/// Unconstrained P-spline for a continuous covariate.
struct PSplineConfig {
  int n_basis = 8;
  int degree = 3;
  int penalty_order = 2;
};

/// Basis for a monotone baseline of time: quantile interior knots over the
/// positive observed times, boundaries padded by 1% of the range.
BSplineBasis make_time_basis(std::span<const double> times, const MonotoneSplineConfig& config);

/// Equally spaced P-spline basis over [lower, upper].
BSplineBasis make_pspline_basis(double lower, double upper, const PSplineConfig& config);

/// (g1, g1 + e^{r2}, g1 + e^{r2} + e^{r3}, ...): non-decreasing coefficients.
Eigen::VectorXd monotone_coefs(const Eigen::Ref<const Eigen::VectorXd>& raw);

/// D'D for the order-th difference operator on `size` coefficients.
Eigen::MatrixXd difference_penalty(int size, int order);

}  // namespace brbvs
