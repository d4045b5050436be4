#include "brbvs/margins.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "brbvs/error.hpp"

namespace brbvs {

std::string_view to_string(SurvivalLink link) noexcept {
  return link == SurvivalLink::PH ? "PH" : "PO";
}

SurvivalLink parse_link(std::string_view name) {
  if (name == "PH") return SurvivalLink::PH;
  if (name == "PO") return SurvivalLink::PO;
  throw ConfigError("unknown survival link '" + std::string(name) + "' (expected PH or PO)");
}

LinkEval link_survival(double eta, SurvivalLink link) {
  const double s = link_kernel::survival(eta, link);
  const double d = -std::exp(link_kernel::log_neg_derivative(eta, link));
  return {s, d};
}

BSplineBasis::BSplineBasis(std::vector<double> knots, int degree)
    : knots_(std::move(knots)), degree_(degree) {
  if (degree_ < 0) throw ConfigError("B-spline degree must be non-negative");
  n_basis_ = static_cast<int>(knots_.size()) - degree_ - 1;
  if (n_basis_ < 1) throw ConfigError("B-spline knot vector too short for its degree");
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (knots_[i] < knots_[i - 1]) throw ConfigError("B-spline knots must be non-decreasing");
  }
  if (!(upper() > lower())) throw ConfigError("B-spline boundary knots must be increasing");
}

BSplineBasis BSplineBasis::clamped(double lower, double upper, std::span<const double> interior,
                                   int degree) {
  std::vector<double> knots;
  knots.reserve(interior.size() + 2 * static_cast<std::size_t>(degree + 1));
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), lower);
  double prev = lower;
  for (double k : interior) {
    if (!(k > prev) || !(k < upper)) {
      throw ConfigError("interior knots must be strictly increasing inside the boundaries");
    }
    knots.push_back(k);
    prev = k;
  }
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), upper);
  return BSplineBasis(std::move(knots), degree);
}

std::vector<double> BSplineBasis::interior_knots() const {
  return {knots_.begin() + degree_ + 1, knots_.end() - degree_ - 1};
}

bool BSplineBasis::evaluate(double t, Eigen::Ref<Eigen::VectorXd> values,
                            Eigen::Ref<Eigen::VectorXd> derivatives) const {
  values.setZero();
  derivatives.setZero();
  const int p = degree_;
  const bool clamped = t < lower() || t > upper();
  t = std::clamp(t, lower(), upper());

  // Knot span i with knots[i] <= t < knots[i+1]; the last non-empty span at
  // the upper boundary.
  int span = p;
  const int last = n_basis_;  // index of the upper boundary knot
  if (t >= knots_[static_cast<std::size_t>(last)]) {
    span = last - 1;
  } else {
    auto it = std::upper_bound(knots_.begin() + p, knots_.begin() + last + 1, t);
    span = static_cast<int>(it - knots_.begin()) - 1;
  }

  std::vector<double> left(static_cast<std::size_t>(p + 1));
  std::vector<double> right(static_cast<std::size_t>(p + 1));
  std::vector<double> n(static_cast<std::size_t>(p + 1), 0.0);
  std::vector<double> lower_order(static_cast<std::size_t>(p + 1), 0.0);
  n[0] = 1.0;
  if (p == 0) lower_order[0] = 0.0;
  for (int j = 1; j <= p; ++j) {
    if (j == p) std::copy(n.begin(), n.begin() + p, lower_order.begin());
    left[static_cast<std::size_t>(j)] = t - knots_[static_cast<std::size_t>(span + 1 - j)];
    right[static_cast<std::size_t>(j)] = knots_[static_cast<std::size_t>(span + j)] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom =
          right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
      const double temp = denom != 0.0 ? n[static_cast<std::size_t>(r)] / denom : 0.0;
      n[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * temp;
      saved = left[static_cast<std::size_t>(j - r)] * temp;
    }
    n[static_cast<std::size_t>(j)] = saved;
  }

  for (int r = 0; r <= p; ++r) {
    const int a = span - p + r;
    values[a] = n[static_cast<std::size_t>(r)];
    if (p == 0) continue;
    // B'_{a,p} = p [B_{a,p-1} / (k_{a+p} - k_a) - B_{a+1,p-1} / (k_{a+p+1} - k_{a+1})]
    double d = 0.0;
    if (r >= 1) {
      const double den = knots_[static_cast<std::size_t>(a + p)] - knots_[static_cast<std::size_t>(a)];
      if (den > 0.0) d += lower_order[static_cast<std::size_t>(r - 1)] / den;
    }
    if (r <= p - 1) {
      const double den =
          knots_[static_cast<std::size_t>(a + p + 1)] - knots_[static_cast<std::size_t>(a + 1)];
      if (den > 0.0) d -= lower_order[static_cast<std::size_t>(r)] / den;
    }
    derivatives[a] = p * d;
  }
  return clamped;
}

BSplineBasis make_time_basis(std::span<const double> times, const MonotoneSplineConfig& config) {
  if (config.n_basis < config.degree + 2) {
    std::ostringstream os;
    os << "monotone baseline needs at least degree + 2 = " << config.degree + 2
       << " basis functions (got " << config.n_basis << ")";
    throw ConfigError(os.str());
  }
  const int n_interior = config.n_basis - config.degree - 1;
  if (config.has_fixed_knots()) {
    if (static_cast<int>(config.interior_knots.size()) != n_interior) {
      throw ConfigError("fixed baseline knots do not match n_basis and degree");
    }
    return BSplineBasis::clamped(config.lower, config.upper, config.interior_knots,
                                 config.degree);
  }

  std::vector<double> sorted;
  sorted.reserve(times.size());
  for (double t : times) {
    if (t > 0.0 && std::isfinite(t)) sorted.push_back(t);
  }
  if (sorted.size() < 2) throw DataError("too few positive observed times to place baseline knots");
  std::sort(sorted.begin(), sorted.end());
  const double lo_obs = sorted.front();
  const double hi_obs = sorted.back();
  if (!(hi_obs > lo_obs)) throw DataError("observed times are all equal; cannot place knots");
  const double pad = 0.01 * (hi_obs - lo_obs);
  const double lo = std::max(0.0, lo_obs - pad);
  const double hi = hi_obs + pad;

  auto quantile = [&sorted](double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto k = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(k);
    if (k + 1 >= sorted.size()) return sorted.back();
    return sorted[k] * (1.0 - frac) + sorted[k + 1] * frac;
  };

  std::vector<double> interior;
  interior.reserve(static_cast<std::size_t>(n_interior));
  bool ok = true;
  double prev = lo;
  for (int k = 1; k <= n_interior; ++k) {
    const double q = quantile(static_cast<double>(k) / (n_interior + 1));
    if (!(q > prev) || !(q < hi)) {
      ok = false;
      break;
    }
    interior.push_back(q);
    prev = q;
  }
  if (!ok) {
    // Heavily tied times: fall back to equal spacing.
    interior.clear();
    for (int k = 1; k <= n_interior; ++k) {
      interior.push_back(lo + (hi - lo) * k / (n_interior + 1));
    }
  }
  return BSplineBasis::clamped(lo, hi, interior, config.degree);
}

BSplineBasis make_pspline_basis(double lower, double upper, const PSplineConfig& config) {
  if (config.n_basis < config.degree + 2) {
    throw ConfigError("P-spline needs at least degree + 2 basis functions");
  }
  if (!(upper > lower)) throw DataError("smooth covariate has no spread");
  const int n_interior = config.n_basis - config.degree - 1;
  std::vector<double> interior;
  for (int k = 1; k <= n_interior; ++k) {
    interior.push_back(lower + (upper - lower) * k / (n_interior + 1));
  }
  return BSplineBasis::clamped(lower, upper, interior, config.degree);
}

Eigen::VectorXd monotone_coefs(const Eigen::Ref<const Eigen::VectorXd>& raw) {
  Eigen::VectorXd out(raw.size());
  if (raw.size() == 0) return out;
  out[0] = raw[0];
  for (Eigen::Index k = 1; k < raw.size(); ++k) out[k] = out[k - 1] + std::exp(raw[k]);
  return out;
}

Eigen::MatrixXd difference_penalty(int size, int order) {
  if (order < 0 || order >= size) throw ConfigError("difference order must be in [0, size)");
  Eigen::MatrixXd d = Eigen::MatrixXd::Identity(size, size);
  for (int o = 0; o < order; ++o) {
    const Eigen::Index rows = d.rows() - 1;
    d = (d.bottomRows(rows) - d.topRows(rows)).eval();
  }
  return d.transpose() * d;
}

}  // namespace brbvs
