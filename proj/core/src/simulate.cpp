#include "brbvs/simulate.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

#include "brbvs/copula.hpp"
#include "brbvs/error.hpp"
#include "brbvs/roots.hpp"

namespace brbvs {

namespace {

constexpr std::uint64_t kPilotSeed = 0x70696c6f74ULL;
constexpr int kPilotSize = 100000;

// log S0(t) and log(1 - S0(t)) without cancellation near t = 0.
double log_s0(double t) {
  const double m = 0.9 * std::expm1(-0.4 * std::pow(t, 2.5)) + 0.1 * std::expm1(-0.1 * t);
  if (m > -0.5) return std::log1p(m);
  // Far tail: log-sum-exp of the two mixture components.
  const double a = std::log(0.9) - 0.4 * std::pow(t, 2.5);
  const double b = std::log(0.1) - 0.1 * t;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double log_one_minus_s0(double t) {
  const double m = -(0.9 * std::expm1(-0.4 * std::pow(t, 2.5)) + 0.1 * std::expm1(-0.1 * t));
  return std::log(m);
}

double linear_part(const Eigen::Ref<const Eigen::RowVectorXd>& x, int nu, const ScenarioConfig& c) {
  if (nu == 1) return c.beta1[0] * x[0] + c.beta1[1] * x[1];
  return c.beta2[0] * x[0] + c.beta2[1] * x[2];
}

// log S_nu(t | x).
double log_survival(double t, double lin, int nu) {
  if (t <= 0.0) return 0.0;
  if (nu == 1) return std::exp(lin) * log_s0(t);
  // PO: S = 1 / (1 + odds0 e^lin), odds0 = (1 - S0) / S0.
  const double log_odds = log_one_minus_s0(t) - log_s0(t) + lin;
  return log_odds > 0.0 ? -(log_odds + std::log1p(std::exp(-log_odds)))
                        : -std::log1p(std::exp(log_odds));
}

double invert_with_linear(double u, double lin, int nu, const ScenarioConfig& config) {
  const double log_u = std::log(u);
  auto f = [&](double t) { return log_survival(t, lin, nu) - log_u; };
  double upper = config.root_upper;
  for (int k = 0; k <= config.max_bracket_doublings; ++k) {
    if (f(upper) <= 0.0) {
      const auto root = brent_root(f, 0.0, upper, config.root_tolerance);
      if (root) return std::max(*root, std::numeric_limits<double>::min());
    }
    upper *= 2.0;
  }
  std::ostringstream os;
  os.precision(17);
  os << "time inversion failed: no root of S_" << nu << "(t) = " << u << " in (0, " << upper / 2.0
     << "] for linear predictor " << lin;
  throw NumericalError(os.str());
}

double clayton_theta(double eta3) {
  const ThetaBounds b;
  return std::clamp(std::exp(eta3), b.lower, b.upper);
}

}  // namespace

std::string_view to_string(Scenario s) noexcept { return s == Scenario::A ? "A" : "B"; }

Scenario parse_scenario(std::string_view name) {
  if (name == "A") return Scenario::A;
  if (name == "B") return Scenario::B;
  throw ConfigError("unknown scenario '" + std::string(name) + "' (expected A or B)");
}

void ScenarioConfig::validate() const {
  if (n < 1) throw ConfigError("scenario n must be at least 1");
  if (p < 3) throw ConfigError("scenario p must be at least 3 (the informative block)");
  for (double t : censor_targets) {
    if (!(t >= 0.0 && t < 1.0)) throw ConfigError("censoring targets must lie in [0, 1)");
  }
  if (!(root_upper > 0.0)) throw ConfigError("root_upper must be positive");
  if (max_bracket_doublings < 0) throw ConfigError("max_bracket_doublings must be non-negative");
  if (!(root_tolerance > 0.0)) throw ConfigError("root_tolerance must be positive");
}

double baseline_s10(double t) { return 0.9 * std::exp(-0.4 * std::pow(t, 2.5)) + 0.1 * std::exp(-0.1 * t); }

double baseline_s20(double t) { return baseline_s10(t); }

double true_survival(double t, const Eigen::Ref<const Eigen::RowVectorXd>& x, int nu,
                     const ScenarioConfig& config) {
  return std::exp(log_survival(t, linear_part(x, nu, config), nu));
}

double true_eta3(const Eigen::Ref<const Eigen::RowVectorXd>& x, const ScenarioConfig& config) {
  const auto& b = config.beta3;
  if (config.scenario == Scenario::A) return b[0];
  const double eta = b[1] * x[0] + b[2] * x[1] + b[3] * x[2];
  return config.scenario_b_intercept ? b[0] + eta : eta;
}

Eigen::MatrixXd gen_covariates(const ScenarioConfig& config, Rng& informative, Rng& noise) {
  config.validate();
  Eigen::Matrix3d sigma = Eigen::Matrix3d::Constant(0.5);
  sigma.diagonal().setOnes();
  const Eigen::Matrix3d l = sigma.llt().matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(config.n, config.p);
  for (int i = 0; i < config.n; ++i) {
    Eigen::Vector3d z;
    for (int k = 0; k < 3; ++k) z[k] = normal(informative);
    x.row(i).head(3) = (l * z).transpose();
    for (int j = 3; j < config.p; ++j) x(i, j) = normal(noise);
  }
  return x;
}

double invert_time(double u, const Eigen::Ref<const Eigen::RowVectorXd>& x, int nu,
                   const ScenarioConfig& config) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("invert_time requires u in (0, 1)");
  if (nu != 1 && nu != 2) throw ConfigError("margin index must be 1 or 2");
  return invert_with_linear(u, linear_part(x, nu, config), nu, config);
}

JointTimes gen_joint_times(const Eigen::Ref<const Eigen::MatrixXd>& x, const ScenarioConfig& config,
                           Rng& rng) {
  const Eigen::Index n = x.rows();
  JointTimes out{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  const double below_one = std::nextafter(1.0, 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u1 = uniform_open(rng);
    const double w = uniform_open(rng);
    const double theta = clayton_theta(true_eta3(x.row(i), config));
    double u2 = conditional_inverse(u1, w, theta, CopulaFamily::Clayton);
    u2 = std::clamp(u2, std::numeric_limits<double>::min(), below_one);
    out.u1[i] = u1;
    out.u2[i] = u2;
    out.t1[i] = invert_time(u1, x.row(i), 1, config);
    out.t2[i] = invert_time(u2, x.row(i), 2, config);
  }
  return out;
}

CensoringBounds calibrate_censoring(const ScenarioConfig& config) {
  config.validate();
  static std::mutex mutex;
  static std::map<std::vector<double>, CensoringBounds> cache;
  const std::vector<double> key{
      static_cast<double>(config.scenario), config.scenario_b_intercept ? 1.0 : 0.0,
      config.beta1[0], config.beta1[1], config.beta2[0], config.beta2[1], config.beta3[0],
      config.beta3[1], config.beta3[2], config.beta3[3], config.censor_targets[0],
      config.censor_targets[1], config.root_upper, static_cast<double>(config.max_bracket_doublings),
      config.root_tolerance};
  {
    const std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  ScenarioConfig pilot = config;
  pilot.n = kPilotSize;
  pilot.p = 3;
  Rng inf_rng = make_rng(kPilotSeed, {1});
  Rng noise_rng = make_rng(kPilotSeed, {2});
  Rng time_rng = make_rng(kPilotSeed, {3});
  const Eigen::MatrixXd x = gen_covariates(pilot, inf_rng, noise_rng);
  const JointTimes times = gen_joint_times(x, pilot, time_rng);

  auto calibrate = [](const Eigen::VectorXd& t, double target, int nu) {
    if (target <= 0.0) return std::numeric_limits<double>::infinity();
    // Expected censored fraction when C ~ U(0, c): mean of min(t / c, 1).
    auto fraction = [&t](double c) { return (t.array() / c).min(1.0).mean(); };
    const double hi = std::max(t.maxCoeff(), t.mean() / target) * 2.0;
    const double lo = t.minCoeff() * 1e-3;
    const auto root = brent_root([&](double c) { return fraction(c) - target; }, lo, hi, 1e-12 * hi);
    if (!root) {
      throw ConfigError("censoring target " + std::to_string(target) + " unreachable for margin " +
                        std::to_string(nu));
    }
    return *root;
  };
  const CensoringBounds bounds{calibrate(times.t1, config.censor_targets[0], 1),
                               calibrate(times.t2, config.censor_targets[1], 2)};
  const std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(key, bounds);
  return bounds;
}

SurvivalDataset apply_censoring(const Eigen::Ref<const Eigen::MatrixXd>& x, const JointTimes& times,
                                const CensoringBounds& bounds, Rng& rng) {
  SurvivalDataset data;
  const Eigen::Index n = x.rows();
  data.x = x;
  data.covariate_names = default_covariate_names(static_cast<int>(x.cols()));
  data.y1.reserve(static_cast<std::size_t>(n));
  data.y2.reserve(static_cast<std::size_t>(n));
  auto censor = [&rng](double t, double c) {
    const double draw = uniform_open(rng);
    if (!std::isfinite(c)) return MarginObservation::uncensored(t);
    const double ct = c * draw;
    return ct < t ? MarginObservation::right(ct) : MarginObservation::uncensored(t);
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    data.y1.push_back(censor(times.t1[i], bounds.c1));
    data.y2.push_back(censor(times.t2[i], bounds.c2));
  }
  return data;
}

SimulatedData simulate(const ScenarioConfig& config) {
  config.validate();
  Rng inf_rng = make_rng(config.seed, {1});
  Rng noise_rng = make_rng(config.seed, {2});
  Rng time_rng = make_rng(config.seed, {3});
  Rng cens_rng = make_rng(config.seed, {4});
  SimulatedData out;
  const Eigen::MatrixXd x = gen_covariates(config, inf_rng, noise_rng);
  out.times = gen_joint_times(x, config, time_rng);
  out.bounds = calibrate_censoring(config);
  out.data = apply_censoring(x, out.times, out.bounds, cens_rng);
  std::array<double, 2> counts{0.0, 0.0};
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    counts[0] += out.data.y1[i].is_censored() ? 1.0 : 0.0;
    counts[1] += out.data.y2[i].is_censored() ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(out.data.size());
  out.censored_fraction = {counts[0] / n, counts[1] / n};
  return out;
}

std::vector<int> true_support(int nu) {
  if (nu == 1) return {0, 1};
  return {0, 1, 2};
}

}  // namespace brbvs
