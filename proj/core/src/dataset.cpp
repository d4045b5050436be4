#include "brbvs/dataset.hpp"

#include <cmath>
#include <sstream>

#include "brbvs/error.hpp"

namespace brbvs {

char to_code(CensorKind kind) noexcept {
  switch (kind) {
    case CensorKind::Uncensored:
      return 'U';
    case CensorKind::Right:
      return 'R';
    case CensorKind::Left:
      return 'L';
    case CensorKind::Interval:
      return 'I';
  }
  return '?';
}

CensorKind parse_censor_code(std::string_view code) {
  if (code == "U") return CensorKind::Uncensored;
  if (code == "R") return CensorKind::Right;
  if (code == "L") return CensorKind::Left;
  if (code == "I") return CensorKind::Interval;
  throw DataError("unknown censoring status '" + std::string(code) + "' (expected U, R, L or I)");
}

MarginObservation MarginObservation::uncensored(double t) {
  MarginObservation o{CensorKind::Uncensored, t, t};
  o.validate();
  return o;
}

MarginObservation MarginObservation::right(double lower) {
  MarginObservation o{CensorKind::Right, lower, kInf};
  o.validate();
  return o;
}

MarginObservation MarginObservation::left(double upper) {
  MarginObservation o{CensorKind::Left, 0.0, upper};
  o.validate();
  return o;
}

MarginObservation MarginObservation::interval(double lower, double upper) {
  MarginObservation o{CensorKind::Interval, lower, upper};
  o.validate();
  return o;
}

double MarginObservation::observed_time() const noexcept {
  switch (kind) {
    case CensorKind::Uncensored:
    case CensorKind::Right:
      return lower;
    case CensorKind::Left:
    case CensorKind::Interval:
      return 0.5 * (lower + upper);
  }
  return lower;
}

void MarginObservation::validate() const {
  auto fail = [this](const char* why) {
    std::ostringstream os;
    os << "status " << to_code(kind) << " with bounds (" << lower << ", " << upper << "): " << why;
    throw DataError(os.str());
  };
  if (std::isnan(lower) || std::isnan(upper)) fail("bounds must not be NaN");
  switch (kind) {
    case CensorKind::Uncensored:
      if (lower != upper) fail("uncensored requires equal bounds");
      if (!(lower > 0.0) || !std::isfinite(lower)) fail("event time must be positive and finite");
      break;
    case CensorKind::Right:
      if (std::isfinite(upper)) fail("right-censored requires an empty (infinite) upper bound");
      if (!(lower >= 0.0) || !std::isfinite(lower)) fail("lower bound must be finite and >= 0");
      break;
    case CensorKind::Left:
      if (lower != 0.0) fail("left-censored requires lower bound 0");
      if (!(upper > 0.0) || !std::isfinite(upper)) fail("upper bound must be positive and finite");
      break;
    case CensorKind::Interval:
      if (!(lower >= 0.0 && lower < upper)) fail("interval requires 0 <= lower < upper");
      if (!std::isfinite(upper)) fail("interval upper bound must be finite");
      break;
  }
}

int SurvivalDataset::covariate_index(std::string_view name) const {
  if (auto idx = find_covariate(name)) return *idx;
  throw ConfigError("unknown covariate '" + std::string(name) + "'");
}

std::optional<int> SurvivalDataset::find_covariate(std::string_view name) const {
  for (std::size_t j = 0; j < covariate_names.size(); ++j) {
    if (covariate_names[j] == name) return static_cast<int>(j);
  }
  return std::nullopt;
}

SurvivalDataset SurvivalDataset::subset(std::span<const std::size_t> rows) const {
  SurvivalDataset out;
  out.covariate_names = covariate_names;
  out.y1.reserve(rows.size());
  out.y2.reserve(rows.size());
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    out.y1.push_back(y1.at(i));
    out.y2.push_back(y2.at(i));
    out.x.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(i));
  }
  return out;
}

SurvivalDataset SurvivalDataset::select_covariates(std::span<const int> columns) const {
  SurvivalDataset out;
  out.y1 = y1;
  out.y2 = y2;
  out.x.resize(x.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    out.x.col(static_cast<Eigen::Index>(k)) = x.col(columns[k]);
    out.covariate_names.push_back(covariate_names.at(static_cast<std::size_t>(columns[k])));
  }
  return out;
}

std::vector<double> SurvivalDataset::observed_bounds(int nu) const {
  std::vector<double> out;
  const auto& ys = nu == 1 ? y1 : y2;
  out.reserve(ys.size());
  for (const auto& o : ys) {
    if (o.lower > 0.0 && std::isfinite(o.lower)) out.push_back(o.lower);
    if (o.kind != CensorKind::Uncensored && o.upper > 0.0 && std::isfinite(o.upper)) {
      out.push_back(o.upper);
    }
  }
  return out;
}

void SurvivalDataset::validate() const {
  if (y1.size() != y2.size() || static_cast<std::size_t>(x.rows()) != y1.size()) {
    throw DataError("dataset row counts disagree between margins and covariates");
  }
  if (covariate_names.size() != static_cast<std::size_t>(x.cols())) {
    throw DataError("covariate name count does not match covariate columns");
  }
  for (std::size_t i = 0; i < y1.size(); ++i) {
    try {
      y1[i].validate();
      y2[i].validate();
    } catch (const DataError& e) {
      throw DataError("record " + std::to_string(i) + ": " + e.what());
    }
  }
  if (!x.allFinite()) throw DataError("covariate matrix contains non-finite values");
}

std::vector<std::string> default_covariate_names(int p) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(p));
  for (int j = 1; j <= p; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

}  // namespace brbvs
