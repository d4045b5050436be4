#include "brbvs/model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "brbvs/error.hpp"

namespace brbvs {

namespace {

int numeric_rank(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const auto& ev = es.eigenvalues();
  const double tol = 1e-9 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  return static_cast<int>((ev.array() > tol).count());
}

}  // namespace

ModelSpec ModelSpec::margins_with(CopulaFamily copula, SurvivalLink link1, SurvivalLink link2,
                                  const std::vector<int>& covariates) {
  ModelSpec spec;
  spec.copula = copula;
  spec.link1 = link1;
  spec.link2 = link2;
  spec.eta1.baseline = MonotoneSplineConfig{};
  spec.eta2.baseline = MonotoneSplineConfig{};
  spec.eta1.linear = covariates;
  spec.eta2.linear = covariates;
  return spec;
}

void ModelSpec::validate(int p) const {
  auto check_predictor = [p](const PredictorSpec& pred, const char* name, bool time_dependent) {
    if (time_dependent && !pred.baseline) {
      throw ConfigError(std::string(name) + " must include a baseline function of time");
    }
    if (!time_dependent && pred.baseline) {
      throw ConfigError(std::string(name) + " must not include a baseline function of time");
    }
    if (time_dependent && !pred.intercept) {
      throw ConfigError(std::string(name) + ": the baseline level requires an intercept");
    }
    for (int j : pred.linear) {
      if (j < 0 || j >= p) throw ConfigError(std::string(name) + ": linear covariate index out of range");
    }
    for (const auto& s : pred.smooth) {
      if (s.covariate < 0 || s.covariate >= p) {
        throw ConfigError(std::string(name) + ": smooth covariate index out of range");
      }
    }
  };
  check_predictor(eta1, "eta1", true);
  check_predictor(eta2, "eta2", true);
  check_predictor(eta3, "eta3", false);
  if (!(theta_bounds.lower > 0.0 && theta_bounds.upper > theta_bounds.lower)) {
    throw ConfigError("theta bounds must satisfy 0 < lower < upper");
  }
}

Predictor::Predictor(const PredictorSpec& spec, const SurvivalDataset& data, int nu,
                     std::string prefix)
    : spec_(spec), intercept_(spec.intercept) {
  int offset = 0;
  if (intercept_) {
    names_.push_back(prefix + "(Intercept)");
    ++offset;
  }
  baseline_offset_ = offset;
  if (spec.baseline) {
    const auto times = data.observed_bounds(nu);
    time_basis_ = make_time_basis(times, *spec.baseline);
    baseline_size_ = time_basis_.size() - 1;
    for (int m = 1; m <= baseline_size_; ++m) {
      names_.push_back(prefix + "s(t)." + std::to_string(m));
    }
    PenaltyTerm pen;
    pen.name = prefix + "s(t)";
    pen.offset = baseline_offset_;
    pen.size = baseline_size_;
    pen.matrix = difference_penalty(baseline_size_, spec.baseline->penalty_order);
    pen.rank = numeric_rank(pen.matrix);
    penalties_.push_back(std::move(pen));
    offset += baseline_size_;
  }
  linear_offset_ = offset;
  for (int j : spec.linear) {
    names_.push_back(prefix + data.covariate_names.at(static_cast<std::size_t>(j)));
    ++offset;
  }
  for (const auto& s : spec.smooth) {
    const Eigen::VectorXd col = data.x.col(s.covariate);
    BSplineBasis basis = make_pspline_basis(col.minCoeff(), col.maxCoeff(), s.config);
    const int k = basis.size();
    // Sum-to-zero identifiability constraint over the data: coefficients live
    // in the null space of the column sums of the basis matrix.
    Eigen::VectorXd colsum = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd vals(k);
    Eigen::VectorXd ders(k);
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      basis.evaluate(col[i], vals, ders);
      colsum += vals;
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(colsum);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(k, k);
    Eigen::MatrixXd z = q.rightCols(k - 1);

    const std::string term = prefix + "s(" + data.covariate_names.at(static_cast<std::size_t>(s.covariate)) + ")";
    for (int m = 1; m < k; ++m) names_.push_back(term + "." + std::to_string(m));
    PenaltyTerm pen;
    pen.name = term;
    pen.offset = offset;
    pen.size = k - 1;
    pen.matrix = z.transpose() * difference_penalty(k, s.config.penalty_order) * z;
    pen.rank = numeric_rank(pen.matrix);
    penalties_.push_back(std::move(pen));
    smooths_.push_back(Smooth{s.covariate, offset, std::move(basis), std::move(z)});
    offset += k - 1;
  }
  n_params_ = offset;
}

std::optional<int> Predictor::linear_index(int covariate) const {
  for (std::size_t k = 0; k < spec_.linear.size(); ++k) {
    if (spec_.linear[k] == covariate) return linear_offset_ + static_cast<int>(k);
  }
  return std::nullopt;
}

void Predictor::covariate_design(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                 Eigen::Ref<Eigen::VectorXd> out) const {
  out.setZero();
  if (intercept_) out[0] = 1.0;
  for (std::size_t k = 0; k < spec_.linear.size(); ++k) {
    out[linear_offset_ + static_cast<int>(k)] = x[spec_.linear[k]];
  }
  for (const auto& s : smooths_) {
    const int k = s.basis.size();
    Eigen::VectorXd vals(k);
    Eigen::VectorXd ders(k);
    s.basis.evaluate(x[s.covariate], vals, ders);
    out.segment(s.offset, k - 1) = s.constraint.transpose() * vals;
  }
}

bool Predictor::baseline_tails(double t, Eigen::Ref<Eigen::VectorXd> tails,
                               Eigen::Ref<Eigen::VectorXd> dtails) const {
  const int k = time_basis_.size();
  Eigen::VectorXd vals(k);
  Eigen::VectorXd ders(k);
  const bool clamped = time_basis_.evaluate(t, vals, ders);
  double acc = 0.0;
  double dacc = 0.0;
  for (int m = k - 1; m >= 1; --m) {
    acc += vals[m];
    dacc += ders[m];
    tails[m - 1] = acc;
    dtails[m - 1] = dacc;
  }
  return clamped;
}

Predictor::Eta Predictor::evaluate(double t, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& coefs) const {
  if (coefs.size() != n_params_) {
    throw ConfigError("coefficient vector length " + std::to_string(coefs.size()) +
                      " does not match predictor dimension " + std::to_string(n_params_));
  }
  Eigen::VectorXd design(n_params_);
  covariate_design(x, design);
  Eta out{design.dot(coefs), 0.0, false};
  if (has_baseline()) {
    Eigen::VectorXd tails(baseline_size_);
    Eigen::VectorXd dtails(baseline_size_);
    out.clamped = baseline_tails(t, tails, dtails);
    const Eigen::VectorXd inc = coefs.segment(baseline_offset_, baseline_size_).array().exp();
    out.eta += inc.dot(tails);
    out.deta_dt = inc.dot(dtails);
  }
  return out;
}

Eigen::VectorXd Predictor::baseline_coefficients(const Eigen::Ref<const Eigen::VectorXd>& coefs) const {
  Eigen::VectorXd raw(baseline_size_ + 1);
  raw[0] = intercept_ ? coefs[0] : 0.0;
  raw.tail(baseline_size_) = coefs.segment(baseline_offset_, baseline_size_);
  return monotone_coefs(raw);
}

Model::Model(ModelSpec spec, const SurvivalDataset& data) : spec_(std::move(spec)) {
  spec_.validate(data.n_covariates());
  predictors_.emplace_back(spec_.eta1, data, 1, "eta1:");
  predictors_.emplace_back(spec_.eta2, data, 2, "eta2:");
  if (has_dependence()) {
    predictors_.emplace_back(spec_.eta3, data, 3, "eta3:");
  } else {
    predictors_.emplace_back(PredictorSpec{false, std::nullopt, {}, {}}, data, 3, "eta3:");
  }
  int offset = 0;
  for (const auto& p : predictors_) {
    offsets_.push_back(offset);
    for (auto pen : p.penalties()) {
      pen.offset += offset;
      penalties_.push_back(std::move(pen));
    }
    offset += p.n_params();
  }
  n_params_ = offset;
}

Eigen::MatrixXd Model::penalty_matrix(const Eigen::Ref<const Eigen::VectorXd>& lambdas) const {
  if (lambdas.size() != n_smoothing()) {
    throw ConfigError("expected " + std::to_string(n_smoothing()) + " smoothing parameters, got " +
                      std::to_string(lambdas.size()));
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n_params_, n_params_);
  for (std::size_t k = 0; k < penalties_.size(); ++k) {
    const double lambda = lambdas[static_cast<Eigen::Index>(k)];
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw ConfigError("smoothing parameters must be finite and non-negative");
    }
    const auto& pen = penalties_[k];
    s.block(pen.offset, pen.offset, pen.size, pen.size) += lambda * pen.matrix;
  }
  return s;
}

int Model::penalized_dimension() const noexcept {
  int total = 0;
  for (const auto& p : penalties_) total += p.rank;
  return total;
}

std::vector<std::string> Model::parameter_names() const {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n_params_));
  for (const auto& p : predictors_) out.insert(out.end(), p.names().begin(), p.names().end());
  return out;
}

std::optional<int> Model::linear_index(int nu, int covariate) const {
  if (auto local = predictor(nu).linear_index(covariate)) return offset(nu) + *local;
  return std::nullopt;
}

Eigen::VectorXd Model::initial_point(const SurvivalDataset& data) const {
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n_params_);
  const auto n = static_cast<double>(data.size());
  for (int nu = 1; nu <= 2; ++nu) {
    const Predictor& pred = predictor(nu);
    std::vector<double> times;
    times.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) times.push_back(data.margin(nu, i).observed_time());
    std::nth_element(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(times.size() / 2),
                     times.end());
    const double t_med = times[times.size() / 2];
    double events = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& o = data.margin(nu, i);
      if (o.kind != CensorKind::Right && o.upper <= t_med) events += 1.0;
    }
    const double s_emp = std::clamp(1.0 - events / n, 0.05, 0.95);
    // Inverse link at the empirical survival.
    const double eta_target = link(nu) == SurvivalLink::PH ? std::log(-std::log(s_emp))
                                                           : std::log((1.0 - s_emp) / s_emp);
    Eigen::VectorXd tails(pred.baseline_size());
    Eigen::VectorXd dtails(pred.baseline_size());
    pred.baseline_tails(t_med, tails, dtails);
    delta[offset(nu)] = eta_target - tails.sum();
  }
  return delta;
}

double Model::eta3(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& delta) const {
  const Predictor& p = predictor(3);
  if (p.n_params() == 0) return 0.0;
  Eigen::VectorXd design(p.n_params());
  p.covariate_design(x, design);
  return design.dot(delta.segment(offset(3), p.n_params()));
}

}  // namespace brbvs
