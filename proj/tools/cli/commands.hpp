#pragma once

// The five subcommands and the pieces they are assembled from.

#include <Eigen/Core>
#include <string>
#include <vector>

#include "brbvs/bench.hpp"
#include "brbvs/fit.hpp"
#include "brbvs/model.hpp"
#include "brbvs/selection.hpp"
#include "cli/config.hpp"
#include "cli/csv.hpp"
#include "json.hpp"

namespace brbvs::cli {

/// Builds a model from configured term lists. Absent lists default to a
/// baseline plus every covariate linear (eta1, eta2) and an intercept-only
/// eta3. A term naming an expanded categorical column stands for all its
/// indicators.
ModelSpec build_model_spec(const ModelConfig& config, const LoadedData& loaded);

/// Fixed smoothing parameters when configured, AIC selection otherwise.
FittedModel fit_configured(const Model& model, const SurvivalDataset& data, const ModelConfig& config);

/// Covariate row of a profile: listed names take their values, others 0.
Eigen::RowVectorXd profile_row(const std::map<std::string, double>& profile, const SurvivalDataset& data);

/// Inverse penalised information (-H + S + ridge I)^{-1}.
Eigen::MatrixXd parameter_covariance(const FittedModel& fit);

nlohmann::json fit_report(const Model& model, const FittedModel& fit, const SurvivalDataset& data);

struct CurvePoint {
  double t;
  double s;
  double lower;
  double upper;
};
/// Marginal survival at covariate row x with a pointwise 95% band from the
/// delta method on the predictor scale.
std::vector<CurvePoint> survival_curve(const Model& model, const FittedModel& fit,
                                       const Eigen::Ref<const Eigen::RowVectorXd>& x, int nu, int points);

/// Joint survival C(S1(t1|x), S2(t2|x)) over a points x points lattice;
/// CSV with columns t1,t2,S.
std::string contour_csv(const Model& model, const FittedModel& fit,
                        const Eigen::Ref<const Eigen::RowVectorXd>& x, int points);

nlohmann::json selection_json(const BRBVSResult& result);
std::string selection_frequencies_csv(const BRBVSResult& result);

struct ChooseRow {
  CopulaFamily copula;
  SurvivalLink link1;
  SurvivalLink link2;
  bool ok = false;
  bool converged = false;
  double loglik = 0.0;
  double edf = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::string message;
};
/// Fits all copula x link1 x link2 combinations; rows sorted by AIC with
/// failures last. A failing combination is recorded, not raised.
std::vector<ChooseRow> choose_grid(const LoadedData& loaded, const ModelConfig& config);

std::string set_label(const std::vector<int>& set, const std::vector<std::string>& names);

int cmd_simulate(const RunConfig& config);
int cmd_fit(const RunConfig& config);
int cmd_select(const RunConfig& config);
int cmd_choose(const RunConfig& config);
int cmd_bench(const RunConfig& config);

}  // namespace brbvs::cli
