#pragma once

// Mixed-censoring copula log-likelihood with exact gradient and Hessian.
//
// Each record depends on at most five local predictors: eta_nu at the lower
// and upper bound of each margin, and eta3. Their first and second
// derivatives come from nested dual numbers; the chain rule to the full
// coefficient vector is linear apart from the exponentiated baseline
// increments, whose curvature is added analytically.

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "brbvs/dataset.hpp"
#include "brbvs/model.hpp"

namespace brbvs {

enum class DerivativeOrder { Value, Gradient, Hessian };

struct LoglikEval {
  double value = 0.0;
  Eigen::VectorXd gradient;  // empty unless requested
  Eigen::MatrixXd hessian;   // empty unless requested
};

/// Log-likelihood of a compiled model on a fixed dataset. Bases and design
/// rows are evaluated once at construction.
class Loglik {
 public:
  Loglik(const Model& model, const SurvivalDataset& data);

  [[nodiscard]] const Model& model() const noexcept { return *model_; }
  [[nodiscard]] std::size_t size() const noexcept { return shapes_.size(); }
  [[nodiscard]] int n_params() const noexcept { return model_->n_params(); }

  /// Throws NumericalError naming the first record whose contribution is
  /// not finite.
  [[nodiscard]] LoglikEval evaluate(const Eigen::Ref<const Eigen::VectorXd>& delta,
                                    DerivativeOrder order) const;
  [[nodiscard]] double value(const Eigen::Ref<const Eigen::VectorXd>& delta) const;
  /// Contribution of record i alone.
  [[nodiscard]] double record_value(std::size_t i, const Eigen::Ref<const Eigen::VectorXd>& delta) const;

 private:
  struct Shape {
    CensorKind kind[2];
    bool lower_zero[2];  // survival 1 at the lower bound
    bool upper_inf[2];   // survival 0 at the upper bound
  };
  struct Locals;

  void locals(std::size_t i, const Eigen::Ref<const Eigen::VectorXd>& delta,
              const Eigen::VectorXd (&inc)[2], Locals& out) const;
  void check_dimension(const Eigen::Ref<const Eigen::VectorXd>& delta) const;

  const Model* model_;
  std::vector<Shape> shapes_;
  // Per margin (index nu - 1): covariate design rows, baseline tails at the
  // lower ("a") and upper ("b") bound, time-derivative tails at the event.
  Eigen::MatrixXd design_[3];
  Eigen::MatrixXd tails_a_[2];
  Eigen::MatrixXd tails_b_[2];
  Eigen::MatrixXd dtails_[2];
};

/// ell(delta) on a model compiled from `spec` against `data`.
double loglik(const SurvivalDataset& data, const ModelSpec& spec,
              const Eigen::Ref<const Eigen::VectorXd>& delta);
/// ell(delta) - 0.5 delta' S delta.
double penalized_loglik(const SurvivalDataset& data, const ModelSpec& spec,
                        const Eigen::Ref<const Eigen::VectorXd>& delta,
                        const Eigen::Ref<const Eigen::VectorXd>& lambdas);
/// Gradient of penalized_loglik.
Eigen::VectorXd gradient(const SurvivalDataset& data, const ModelSpec& spec,
                         const Eigen::Ref<const Eigen::VectorXd>& delta,
                         const Eigen::Ref<const Eigen::VectorXd>& lambdas);

}  // namespace brbvs
