#pragma once

// Penalised maximum likelihood: damped-Newton trust region, effective
// degrees of freedom, information criteria, smoothing-parameter search and
// the observed-information diagonal used by the ranking measures.

#include <Eigen/Core>
#include <string>
#include <vector>

#include "brbvs/likelihood.hpp"

namespace brbvs {

enum class HessianMethod {
  Exact,             // nested dual numbers
  FiniteDifference,  // central differences of the exact gradient
};

struct FitOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-5;
  HessianMethod hessian = HessianMethod::Exact;
};

struct FittedModel {
  Eigen::VectorXd delta;
  Eigen::MatrixXd hessian;  // of the unpenalised log-likelihood at delta
  Eigen::MatrixXd penalty;  // S
  Eigen::VectorXd lambdas;
  double loglik = 0.0;
  double penalized_loglik = 0.0;
  double edf = 0.0;
  std::vector<double> term_edf;  // one per penalised term
  double aic = 0.0;
  double bic = 0.0;
  double grad_norm = 0.0;  // max |gradient of the penalised log-likelihood|
  bool converged = false;
  int iterations = 0;
  double ridge = 0.0;  // ridge added to -H + S to make it positive definite
  double min_eigenvalue = 0.0;  // of -H + S before repair
  std::size_t n = 0;
  std::string message;
};

/// Maximises ell_p from `init`. Reaching the iteration cap yields a
/// non-converged fit rather than an error; a non-finite likelihood at
/// `init` throws NumericalError.
FittedModel trust_region_fit(const Loglik& lik, const Eigen::Ref<const Eigen::VectorXd>& lambdas,
                             const Eigen::Ref<const Eigen::VectorXd>& init,
                             const FitOptions& options = {});

/// xi - tr((-H + S)^{-1} S). Throws NumericalError when -H + S is singular.
double edf(const Eigen::Ref<const Eigen::MatrixXd>& hessian,
           const Eigen::Ref<const Eigen::MatrixXd>& penalty);

struct InformationCriteria {
  double aic;
  double bic;
};
/// AIC = -2 ell + 2 edf, BIC = -2 ell + edf log n.
InformationCriteria aic_bic(const FittedModel& fit, std::size_t n);

struct SmoothingTrial {
  Eigen::VectorXd lambdas;
  double aic;
  bool converged;
  std::string message;
};

struct SmoothingSelection {
  Eigen::VectorXd lambdas;
  FittedModel fit;
  std::vector<SmoothingTrial> trials;
};

/// Coordinate search over log10 lambda in {-4, ..., 4} per penalised term
/// minimising AIC, then one half-decade refinement pass. Throws
/// NumericalError listing the trials when no fit converges.
SmoothingSelection select_smoothing(const Loglik& lik, const Eigen::Ref<const Eigen::VectorXd>& init,
                                    const FitOptions& options = {});

/// diag(-H) after positive-definite repair of -H.
Eigen::VectorXd fisher_diag(const FittedModel& fit);

/// Central differences of the exact gradient, step 1e-5 (1 + |delta_k|),
/// symmetrised.
Eigen::MatrixXd finite_difference_hessian(const Loglik& lik,
                                          const Eigen::Ref<const Eigen::VectorXd>& delta);

/// Smallest ridge c in {0, 1e-10, 1e-9, ...} making m + c I Cholesky
/// factorisable (c scaled by max(1, max |diag m|)).
double pd_ridge(const Eigen::Ref<const Eigen::MatrixXd>& m);

}  // namespace brbvs
