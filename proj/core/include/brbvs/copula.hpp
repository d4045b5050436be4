#pragma once

// Bivariate copula families used to link the two marginal survival
// functions: CDF, h-functions, log-density, Kendall's tau, conditional
// sampling and the log dependence link.

#include <cmath>
#include <string>
#include <string_view>
#include <utility>

#include "brbvs/autodiff.hpp"

namespace brbvs {

enum class CopulaFamily { Independence, Clayton, Plackett };

/// "N", "C0" or "PL".
std::string_view to_string(CopulaFamily family) noexcept;
CopulaFamily parse_copula(std::string_view name);

/// Copula arguments are clamped to [kProbFloor, kProbCeiling] before
/// density and h-function evaluation. The kernels work in log space, so the
/// floor only guards against exact zeros.
inline constexpr double kProbFloor = 1e-100;
inline constexpr double kProbCeiling = 1.0 - 1e-12;

/// Bounds applied to theta = exp(eta3).
struct ThetaBounds {
  double lower = 1e-8;
  double upper = 1e8;
};

struct LinkValue {
  double theta;
  double dtheta_deta;  // zero when the clamp is active
};

/// Log link: theta = exp(eta3), clamped to `bounds`.
LinkValue dependence_link(double eta3, const ThetaBounds& bounds = {});

// Validated scalar API.
double copula_cdf(double u, double v, double theta, CopulaFamily family);
double copula_density(double u, double v, double theta, CopulaFamily family);
/// dC/du (the conditional distribution of V given U = u).
double copula_partial_u(double u, double v, double theta, CopulaFamily family);
/// dC/dv.
double copula_partial_v(double u, double v, double theta, CopulaFamily family);
double kendall_tau(double theta, CopulaFamily family);
/// Solves dC/du(u1, u2) = w for u2. Independence and Clayton only.
double conditional_inverse(double u1, double w, double theta, CopulaFamily family);

/// Throws DomainError when theta is outside the family's admissible range.
void check_theta(double theta, CopulaFamily family);

namespace copula_kernel {

// Templated kernels shared by the scalar API and the likelihood, which
// evaluates them on dual numbers. Arguments are assumed already validated:
// u, v in [0,1] and theta admissible.

using ad::value_of;

// log(e^a + e^b - 1) for a, b >= 0.
template <class T>
T clayton_log_s(const T& a, const T& b) {
  using std::exp;
  using std::expm1;
  using std::log;
  using std::log1p;
  const T& m = value_of(a) > value_of(b) ? a : b;
  if (value_of(m) < 30.0) return log1p(expm1(a) + expm1(b));
  return m + log(exp(a - m) + exp(b - m) - exp(-m));
}

template <class T>
T cdf(const T& u, const T& v, const T& theta, CopulaFamily family) {
  using std::exp;
  using std::log;
  using std::sqrt;
  const double uu = value_of(u);
  const double vv = value_of(v);
  if (uu <= 0.0 || vv <= 0.0) return T(0.0);
  if (uu >= 1.0) return v;
  if (vv >= 1.0) return u;
  switch (family) {
    case CopulaFamily::Independence:
      return u * v;
    case CopulaFamily::Clayton: {
      const T a = -theta * log(u);
      const T b = -theta * log(v);
      return exp(-clayton_log_s(a, b) / theta);
    }
    case CopulaFamily::Plackett: {
      // Rationalised form of (A - sqrt(D)) / (2 (theta - 1)); exact at theta = 1.
      const T e = theta - 1.0;
      const T A = 1.0 + e * (u + v);
      const T D = A * A - 4.0 * u * v * theta * e;
      return 2.0 * u * v * theta / (A + sqrt(D));
    }
  }
  return T(0.0);
}

// log(1 + u^theta (v^-theta - 1)) for 0 < u, v < 1. The Clayton copula is
// u (1 + w)^(-1/theta) and dC/du is (1 + w)^(-1 - 1/theta) with w the
// quantity inside the log; both stay accurate near u and near 1.
template <class T>
T clayton_log1p_w(const T& u, const T& v, const T& theta) {
  using std::exp;
  using std::expm1;
  using std::log;
  using std::log1p;
  const T lw = theta * log(u) + log(expm1(-theta * log(v)));
  return value_of(lw) > 30.0 ? T(lw + log1p(exp(-lw))) : T(log1p(exp(lw)));
}

template <class T>
T clayton_log_h1(const T& u, const T& v, const T& theta) {
  return -(1.0 + 1.0 / theta) * clayton_log1p_w(u, v, theta);
}

// C(u, va) - C(u, vb) for va >= vb without subtracting two values near u.
template <class T>
T clayton_cdf_difference(const T& u, const T& va, const T& vb, const T& theta) {
  using std::exp;
  using std::expm1;
  const double uu = value_of(u);
  if (uu <= 0.0) return T(0.0);
  if (uu >= 1.0) return va - vb;
  const bool top = value_of(va) >= 1.0;
  const bool bottom = value_of(vb) <= 0.0;
  if (top && bottom) return u;
  if (bottom) return u * exp(-clayton_log1p_w(u, va, theta) / theta);
  const T rb = -clayton_log1p_w(u, vb, theta) / theta;
  if (top) return -u * expm1(rb);
  const T ra = -clayton_log1p_w(u, va, theta) / theta;
  return u * exp(rb) * expm1(ra - rb);
}

// Plackett dC/du and 1 - dC/du for 0 < v < 1. With B = A - 2 v theta,
// h = 1/2 - B / (2 sqrt D) and D - B^2 = 4 v theta (1 - v); whichever of h
// and 1 - h is below 1/2 comes from the rationalised quotient.
template <class T>
std::pair<T, T> plackett_h1_parts(const T& u, const T& v, const T& theta) {
  using std::sqrt;
  const T e = theta - 1.0;
  const T A = 1.0 + e * (u + v);
  const T sd = sqrt(A * A - 4.0 * u * v * theta * e);
  const T B = A - 2.0 * v * theta;
  const T q = 2.0 * v * theta * (1.0 - v) / sd;
  if (value_of(B) >= 0.0) return {q / (sd + B), 0.5 + B / (2.0 * sd)};
  return {0.5 - B / (2.0 * sd), q / (sd - B)};
}

/// dC/du; exact boundary values at v in {0, 1}.
template <class T>
T h1(const T& u, const T& v, const T& theta, CopulaFamily family) {
  using std::exp;
  using std::log;
  using std::sqrt;
  const double vv = value_of(v);
  if (vv <= 0.0) return T(0.0);
  if (vv >= 1.0) return T(1.0);
  switch (family) {
    case CopulaFamily::Independence:
      return v;
    case CopulaFamily::Clayton:
      return exp(clayton_log_h1(u, v, theta));
    case CopulaFamily::Plackett:
      return plackett_h1_parts(u, v, theta).first;
  }
  return T(0.0);
}

/// dC/dv. All supported families are exchangeable.
template <class T>
T h2(const T& u, const T& v, const T& theta, CopulaFamily family) {
  return h1(v, u, theta, family);
}

/// dC/du(u, va) - dC/du(u, vb) for va >= vb. The Clayton difference is
/// formed from log h-values so that two values close to 1 do not cancel.
template <class T>
T h1_difference(const T& u, const T& va, const T& vb, const T& theta, CopulaFamily family) {
  using std::exp;
  using std::expm1;
  const bool top = value_of(va) >= 1.0;
  const bool bottom = value_of(vb) <= 0.0;
  if (family == CopulaFamily::Plackett) {
    if (top && bottom) return T(1.0);
    if (top) return plackett_h1_parts(u, vb, theta).second;
    if (bottom) return plackett_h1_parts(u, va, theta).first;
    const auto [ha, ca] = plackett_h1_parts(u, va, theta);
    const auto [hb, cb] = plackett_h1_parts(u, vb, theta);
    return value_of(ha) < 0.5 ? T(ha - hb) : T(cb - ca);
  }
  if (family != CopulaFamily::Clayton) return h1(u, va, theta, family) - h1(u, vb, theta, family);
  if (top && bottom) return T(1.0);
  if (top) return -expm1(clayton_log_h1(u, vb, theta));
  if (bottom) return exp(clayton_log_h1(u, va, theta));
  const T la = clayton_log_h1(u, va, theta);
  const T lb = clayton_log_h1(u, vb, theta);
  return exp(lb) * expm1(la - lb);
}

/// Probability of the rectangle [ua, ub] x [va, vb] in survival scale:
/// C(ua, va) - C(ua, vb) - C(ub, va) + C(ub, vb) with ua >= ub, va >= vb.
/// The Clayton form is evaluated in both difference orders.
template <class T>
T rectangle_mass(const T& ua, const T& ub, const T& va, const T& vb, const T& theta, CopulaFamily family) {
  using std::log;
  if (family != CopulaFamily::Clayton) {
    return cdf(ua, va, theta, family) - cdf(ua, vb, theta, family) - cdf(ub, va, theta, family) +
           cdf(ub, vb, theta, family);
  }
  const T a1 = clayton_cdf_difference(ua, va, vb, theta);
  const T a2 = clayton_cdf_difference(ub, va, vb, theta);
  const T b1 = clayton_cdf_difference(va, ua, ub, theta);
  const T b2 = clayton_cdf_difference(vb, ua, ub, theta);
  // Keep the ordering whose final subtraction cancels less.
  const double along_v = std::abs(value_of(a2)) / std::abs(value_of(a1));
  const double along_u = std::abs(value_of(b2)) / std::abs(value_of(b1));
  return along_v <= along_u ? T(a1 - a2) : T(b1 - b2);
}

template <class T>
T log_density(const T& u, const T& v, const T& theta, CopulaFamily family) {
  using std::log;
  switch (family) {
    case CopulaFamily::Independence:
      return T(0.0);
    case CopulaFamily::Clayton: {
      const T lu = log(u);
      const T lv = log(v);
      const T ls = clayton_log_s(T(-theta * lu), T(-theta * lv));
      return log(1.0 + theta) - (1.0 + theta) * (lu + lv) - (2.0 + 1.0 / theta) * ls;
    }
    case CopulaFamily::Plackett: {
      const T e = theta - 1.0;
      const T A = 1.0 + e * (u + v);
      const T D = A * A - 4.0 * u * v * theta * e;
      return log(theta) + log(1.0 + e * (u + v - 2.0 * u * v)) - 1.5 * log(D);
    }
  }
  return T(0.0);
}

}  // namespace copula_kernel
}  // namespace brbvs
