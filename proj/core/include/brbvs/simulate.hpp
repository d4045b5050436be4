#pragma once

// Data-generating process of the simulation study: correlated Gaussian
// covariates, a proportional-hazards and a proportional-odds margin linked
// by a Clayton copula, and calibrated uniform right-censoring.

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "brbvs/dataset.hpp"
#include "brbvs/rng.hpp"

namespace brbvs {

enum class Scenario { A, B };

std::string_view to_string(Scenario s) noexcept;
Scenario parse_scenario(std::string_view name);

struct ScenarioConfig {
  Scenario scenario = Scenario::A;
  int n = 800;
  int p = 20;
  std::array<double, 2> beta1{-1.5, 1.7};               // x1, x2 in margin 1
  std::array<double, 2> beta2{-1.5, -1.3};              // x1, x3 in margin 2
  std::array<double, 4> beta3{1.2, -1.5, 1.7, -1.5};    // intercept, x1, x2, x3
  std::array<double, 2> censor_targets{0.11, 0.32};
  /// Adds beta3[0] to the dependence predictor of scenario B.
  bool scenario_b_intercept = false;
  double root_upper = 8.0;
  /// Bracket doublings allowed beyond root_upper when the root lies further
  /// out (heavy right tail of the first margin).
  int max_bracket_doublings = 60;
  double root_tolerance = 1e-10;
  std::uint64_t seed = 1;

  void validate() const;
};

/// 0.9 exp(-0.4 t^2.5) + 0.1 exp(-0.1 t). The second baseline uses the same
/// expression.
double baseline_s10(double t);
double baseline_s20(double t);

/// S_nu(t | x) of the generating model. `x` is a full covariate row.
double true_survival(double t, const Eigen::Ref<const Eigen::RowVectorXd>& x, int nu,
                     const ScenarioConfig& config);

/// Dependence predictor eta3 of the generating model at row x.
double true_eta3(const Eigen::Ref<const Eigen::RowVectorXd>& x, const ScenarioConfig& config);

/// First three columns N(0, Sigma) with unit variances and 0.5
/// correlations; the remaining p - 3 independent standard normal.
Eigen::MatrixXd gen_covariates(const ScenarioConfig& config, Rng& informative, Rng& noise);

/// Solves S_nu(t | x) = u by Brent's method on (0, root_upper], doubling the
/// upper end while the root is not bracketed. Throws NumericalError when no
/// bracket is found.
double invert_time(double u, const Eigen::Ref<const Eigen::RowVectorXd>& x, int nu,
                   const ScenarioConfig& config);

struct JointTimes {
  Eigen::VectorXd t1;
  Eigen::VectorXd t2;
  Eigen::VectorXd u1;
  Eigen::VectorXd u2;
};

/// t1 from u1 ~ U(0,1); u2 from the Clayton conditional inverse at
/// theta_i = exp(eta3_i); t2 from u2.
JointTimes gen_joint_times(const Eigen::Ref<const Eigen::MatrixXd>& x, const ScenarioConfig& config,
                           Rng& rng);

/// Upper ends c_nu of the uniform censoring distributions.
struct CensoringBounds {
  double c1;
  double c2;
};

/// Bisection on the expected censored fraction over a fixed 1e5-draw pilot
/// sample of the scenario. Results are cached per generating model.
CensoringBounds calibrate_censoring(const ScenarioConfig& config);

/// Right-censors each time at an independent U(0, c_nu) draw when the draw
/// is below it.
SurvivalDataset apply_censoring(const Eigen::Ref<const Eigen::MatrixXd>& x, const JointTimes& times,
                                const CensoringBounds& bounds, Rng& rng);

struct SimulatedData {
  SurvivalDataset data;
  JointTimes times;
  CensoringBounds bounds;
  std::array<double, 2> censored_fraction;
};

/// Whole pipeline with streams derived from config.seed.
SimulatedData simulate(const ScenarioConfig& config);

/// True supports: {x1, x2} and {x1, x2, x3} as zero-based column indices.
std::vector<int> true_support(int nu);

}  // namespace brbvs
