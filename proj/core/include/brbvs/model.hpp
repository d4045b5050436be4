#pragma once

// Model specification (copula, links, three additive predictors) and its
// compiled form: bases built from data, parameter layout and penalties.

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "brbvs/copula.hpp"
#include "brbvs/dataset.hpp"
#include "brbvs/margins.hpp"

namespace brbvs {

struct SmoothTermSpec {
  int covariate = 0;
  PSplineConfig config;
};

struct PredictorSpec {
  /// Always true for the time-dependent predictors, whose baseline level is
  /// the intercept.
  bool intercept = true;
  std::optional<MonotoneSplineConfig> baseline;
  std::vector<int> linear;
  std::vector<SmoothTermSpec> smooth;
};

struct ModelSpec {
  CopulaFamily copula = CopulaFamily::Clayton;
  SurvivalLink link1 = SurvivalLink::PH;
  SurvivalLink link2 = SurvivalLink::PO;
  PredictorSpec eta1;
  PredictorSpec eta2;
  PredictorSpec eta3;
  ThetaBounds theta_bounds;

  /// Baseline of time in eta1/eta2, covariates linear in both, intercept-only
  /// eta3 (the single-covariate ranking fit when `covariates` has one entry).
  static ModelSpec margins_with(CopulaFamily copula, SurvivalLink link1, SurvivalLink link2,
                                const std::vector<int>& covariates);

  /// Throws ConfigError on structural problems given p covariates.
  void validate(int p) const;
};

/// A term carrying a quadratic penalty lambda * beta' D beta.
struct PenaltyTerm {
  std::string name;
  int offset = 0;  // global parameter index of the first coefficient
  int size = 0;
  Eigen::MatrixXd matrix;
  int rank = 0;
};

/// One additive predictor compiled against a dataset. Block layout:
/// [intercept][baseline increments][linear terms][smooth coefficients].
class Predictor {
 public:
  Predictor() = default;
  Predictor(const PredictorSpec& spec, const SurvivalDataset& data, int nu, std::string prefix);

  [[nodiscard]] int n_params() const noexcept { return n_params_; }
  [[nodiscard]] bool has_baseline() const noexcept { return baseline_size_ > 0; }
  [[nodiscard]] bool has_intercept() const noexcept { return intercept_; }
  [[nodiscard]] int baseline_offset() const noexcept { return baseline_offset_; }
  /// Free baseline increments: n_basis - 1 (the first level is the intercept).
  [[nodiscard]] int baseline_size() const noexcept { return baseline_size_; }
  [[nodiscard]] const BSplineBasis& time_basis() const noexcept { return time_basis_; }
  [[nodiscard]] const PredictorSpec& spec() const noexcept { return spec_; }

  /// Local index of the linear coefficient for covariate j, if present.
  [[nodiscard]] std::optional<int> linear_index(int covariate) const;
  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }

  /// Design of the covariate part (intercept, linear, smooth), zero in the
  /// baseline slots. Length n_params().
  void covariate_design(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                        Eigen::Ref<Eigen::VectorXd> out) const;

  /// Tail sums sum_{k>=m} B_k(t) and their t-derivatives for m = 1..K-1.
  /// Returns true when t was clamped to the basis range.
  bool baseline_tails(double t, Eigen::Ref<Eigen::VectorXd> tails,
                      Eigen::Ref<Eigen::VectorXd> dtails) const;

  struct Eta {
    double eta;
    double deta_dt;
    bool clamped;
  };
  /// eta and d eta / dt at (t, x) for block coefficients `coefs`.
  [[nodiscard]] Eta evaluate(double t, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& coefs) const;

  /// Penalties with offsets local to this block.
  [[nodiscard]] const std::vector<PenaltyTerm>& penalties() const noexcept { return penalties_; }

  /// Spline coefficients of the baseline, monotone_coefs of (intercept, raws).
  [[nodiscard]] Eigen::VectorXd baseline_coefficients(
      const Eigen::Ref<const Eigen::VectorXd>& coefs) const;

 private:
  struct Smooth {
    int covariate;
    int offset;
    BSplineBasis basis;
    Eigen::MatrixXd constraint;  // n_basis x (n_basis - 1) null-space basis
  };

  PredictorSpec spec_;
  bool intercept_ = true;
  int n_params_ = 0;
  int baseline_offset_ = 0;
  int baseline_size_ = 0;
  int linear_offset_ = 0;
  BSplineBasis time_basis_;
  std::vector<Smooth> smooths_;
  std::vector<PenaltyTerm> penalties_;
  std::vector<std::string> names_;
};

/// ModelSpec compiled against data: three predictors with global offsets.
class Model {
 public:
  Model(ModelSpec spec, const SurvivalDataset& data);

  [[nodiscard]] const ModelSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] int n_params() const noexcept { return n_params_; }
  /// nu in {1, 2, 3}.
  [[nodiscard]] const Predictor& predictor(int nu) const { return predictors_.at(nu - 1); }
  [[nodiscard]] int offset(int nu) const { return offsets_.at(nu - 1); }
  [[nodiscard]] bool has_dependence() const noexcept {
    return spec_.copula != CopulaFamily::Independence;
  }
  [[nodiscard]] SurvivalLink link(int nu) const { return nu == 1 ? spec_.link1 : spec_.link2; }

  /// Penalised terms with global offsets; lambdas are indexed in this order.
  [[nodiscard]] const std::vector<PenaltyTerm>& penalties() const noexcept { return penalties_; }
  [[nodiscard]] int n_smoothing() const noexcept { return static_cast<int>(penalties_.size()); }
  /// Block-diagonal S = sum_k lambda_k D_k.
  [[nodiscard]] Eigen::MatrixXd penalty_matrix(const Eigen::Ref<const Eigen::VectorXd>& lambdas) const;
  /// Sum of penalty ranks (the number of penalised directions).
  [[nodiscard]] int penalized_dimension() const noexcept;

  [[nodiscard]] std::vector<std::string> parameter_names() const;
  /// Global index of the linear coefficient of covariate j in margin nu.
  [[nodiscard]] std::optional<int> linear_index(int nu, int covariate) const;

  /// Default starting point: intercepts from the empirical survival at the
  /// median observed time, raw baseline increments 0, other coefficients 0.
  [[nodiscard]] Eigen::VectorXd initial_point(const SurvivalDataset& data) const;

  /// Linear predictor of the dependence equation at covariate row x.
  [[nodiscard]] double eta3(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& delta) const;

 private:
  ModelSpec spec_;
  std::vector<Predictor> predictors_;
  std::vector<int> offsets_;
  std::vector<PenaltyTerm> penalties_;
  int n_params_ = 0;
};

}  // namespace brbvs
