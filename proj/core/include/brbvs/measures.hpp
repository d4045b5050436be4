#pragma once

// Covariate-importance measures: Fisher-information weighted coefficient,
// absolute coefficient, and copula entropy (mutual information).

#include <Eigen/Core>
#include <span>
#include <string_view>

#include "brbvs/fit.hpp"
#include "brbvs/model.hpp"

namespace brbvs {

enum class MeasureKind { FIM, Abs, CE };

std::string_view to_string(MeasureKind kind) noexcept;
MeasureKind parse_measure(std::string_view name);

/// beta^2 times the observed-information diagonal entry of covariate j in
/// margin nu. Throws ConfigError when j is not a linear term of that margin.
double fim_measure(const FittedModel& fit, const Model& model, int nu, int j);
/// Same, with the information diagonal already computed.
double fim_measure(const FittedModel& fit, const Eigen::Ref<const Eigen::VectorXd>& info_diag,
                   const Model& model, int nu, int j);

/// |beta| of covariate j in margin nu.
double abs_measure(const FittedModel& fit, const Model& model, int nu, int j);

/// Average ranks divided by n + 1.
Eigen::VectorXd pseudo_observations(std::span<const double> values);

inline constexpr int kCeNeighbors = 3;
inline constexpr std::size_t kCeMinSample = 50;

/// Mutual information between two columns as the negated copula entropy:
/// rank pseudo-observations, then the Kozachenko-Leonenko k-nearest-
/// neighbour entropy estimate (Euclidean metric). Throws DataError when
/// n < 50 or more than half of either column is tied.
double ce_measure(std::span<const double> times, std::span<const double> x, int k = kCeNeighbors);

}  // namespace brbvs
