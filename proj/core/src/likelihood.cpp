#include "brbvs/likelihood.hpp"

#include <array>
#include <cmath>
#include <string>

#include "brbvs/autodiff.hpp"
#include "brbvs/copula.hpp"
#include "brbvs/error.hpp"
#include "brbvs/margins.hpp"

namespace brbvs {

namespace {

constexpr int kLocals = 5;  // eta1(lower), eta1(upper), eta2(lower), eta2(upper), eta3

struct KernelShape {
  CensorKind kind[2];
  bool lower_zero[2];
  bool upper_inf[2];
};

struct KernelContext {
  CopulaFamily family;
  SurvivalLink link[2];
  ThetaBounds bounds;
};

template <class T>
T clamp_prob(const T& s) {
  const double v = ad::value_of(s);
  if (v < kProbFloor) return T(kProbFloor);
  if (v > kProbCeiling) return T(kProbCeiling);
  return s;
}

// Log contribution of one record excluding the log d eta / dt factors of
// uncensored margins.
template <class T>
T record_kernel(const KernelShape& r, const std::array<T, kLocals>& q, const KernelContext& ctx) {
  using std::log;
  namespace ck = copula_kernel;
  namespace lk = link_kernel;

  const bool dependent = ctx.family != CopulaFamily::Independence;
  T theta(1.0);
  if (dependent) {
    const double th = std::exp(ad::value_of(q[4]));
    if (th < ctx.bounds.lower) {
      theta = T(ctx.bounds.lower);
    } else if (th > ctx.bounds.upper) {
      theta = T(ctx.bounds.upper);
    } else {
      theta = exp(q[4]);
    }
  }

  auto surv = [&](int m, int side) -> T {
    if (side == 0 && r.lower_zero[m]) return T(1.0);
    if (side == 1 && r.upper_inf[m]) return T(0.0);
    return clamp_prob(lk::survival(q[2 * m + side], ctx.link[m]));
  };

  // log(S(lower) - S(upper)) from the log survivals; exact in the far tail.
  auto log_interval = [&](int m) -> T {
    const T la = r.lower_zero[m] ? T(0.0) : lk::log_survival(q[2 * m], ctx.link[m]);
    if (r.upper_inf[m]) return la;
    const T lb = lk::log_survival(q[2 * m + 1], ctx.link[m]);
    return la + log(-expm1(lb - la));
  };

  const bool unc1 = r.kind[0] == CensorKind::Uncensored;
  const bool unc2 = r.kind[1] == CensorKind::Uncensored;

  if (unc1 && unc2) {
    return lk::log_neg_derivative(q[0], ctx.link[0]) + lk::log_neg_derivative(q[2], ctx.link[1]) +
           ck::log_density(surv(0, 0), surv(1, 0), theta, ctx.family);
  }
  if (!dependent) {
    T out(0.0);
    for (int m = 0; m < 2; ++m) {
      out += r.kind[m] == CensorKind::Uncensored ? lk::log_neg_derivative(q[2 * m], ctx.link[m]) : log_interval(m);
    }
    return out;
  }
  if (unc1) {
    const T s1 = surv(0, 0);
    const T s2a = surv(1, 0);
    const T s2b = surv(1, 1);
    const T diff = ck::h1_difference(s1, s2a, s2b, theta, ctx.family);
    return lk::log_neg_derivative(q[0], ctx.link[0]) + log(diff);
  }
  if (unc2) {
    const T s2 = surv(1, 0);
    const T s1a = surv(0, 0);
    const T s1b = surv(0, 1);
    const T diff = ck::h1_difference(s2, s1a, s1b, theta, ctx.family);
    return lk::log_neg_derivative(q[2], ctx.link[1]) + log(diff);
  }
  const T s1a = surv(0, 0);
  const T s1b = surv(0, 1);
  const T s2a = surv(1, 0);
  const T s2b = surv(1, 1);
  const T mass = ck::rectangle_mass(s1a, s1b, s2a, s2b, theta, ctx.family);
  return log(mass);
}

struct LocalDerivs {
  double value = 0.0;
  double g[kLocals] = {};
  double h[kLocals][kLocals] = {};
};

template <int N>
void kernel_derivs(const KernelShape& r, const double (&qv)[kLocals], const int* active,
                   const KernelContext& ctx, bool second, LocalDerivs& out) {
  if (!second) {
    using D = ad::Dual<double, N>;
    std::array<D, kLocals> q;
    for (int k = 0; k < kLocals; ++k) q[k] = D(qv[k]);
    for (int a = 0; a < N; ++a) q[active[a]] = D::variable(qv[active[a]], a);
    const D res = record_kernel(r, q, ctx);
    out.value = res.v;
    for (int a = 0; a < N; ++a) out.g[active[a]] = res.d[a];
    return;
  }
  using Inner = ad::Dual<double, N>;
  using Outer = ad::Dual<Inner, N>;
  std::array<Outer, kLocals> q;
  for (int k = 0; k < kLocals; ++k) q[k] = Outer(qv[k]);
  for (int a = 0; a < N; ++a) {
    Outer o;
    o.v = Inner::variable(qv[active[a]], a);
    o.d[a] = Inner(1.0);
    q[active[a]] = o;
  }
  const Outer res = record_kernel(r, q, ctx);
  out.value = res.v.v;
  for (int a = 0; a < N; ++a) {
    out.g[active[a]] = res.v.d[a];
    for (int b = 0; b < N; ++b) out.h[active[a]][active[b]] = res.d[a].d[b];
  }
}

void dispatch_derivs(int n_active, const KernelShape& r, const double (&qv)[kLocals],
                     const int* active, const KernelContext& ctx, bool second, LocalDerivs& out) {
  switch (n_active) {
    case 1:
      return kernel_derivs<1>(r, qv, active, ctx, second, out);
    case 2:
      return kernel_derivs<2>(r, qv, active, ctx, second, out);
    case 3:
      return kernel_derivs<3>(r, qv, active, ctx, second, out);
    case 4:
      return kernel_derivs<4>(r, qv, active, ctx, second, out);
    case 5:
      return kernel_derivs<5>(r, qv, active, ctx, second, out);
    default: {
      std::array<double, kLocals> q{};
      for (int k = 0; k < kLocals; ++k) q[k] = qv[k];
      out.value = record_kernel(r, q, ctx);
    }
  }
}

KernelContext context_of(const Model& model) {
  return {model.spec().copula, {model.link(1), model.link(2)}, model.spec().theta_bounds};
}

}  // namespace

struct Loglik::Locals {
  double q[kLocals] = {};
  int active[kLocals] = {};
  int n_active = 0;
  double eta_t[2] = {0.0, 0.0};
};

Loglik::Loglik(const Model& model, const SurvivalDataset& data) : model_(&model) {
  data.validate();
  const std::size_t n = data.size();
  shapes_.resize(n);
  for (int nu = 1; nu <= 3; ++nu) {
    design_[nu - 1].setZero(static_cast<Eigen::Index>(n), model.predictor(nu).n_params());
  }
  for (int m = 0; m < 2; ++m) {
    const Predictor& pred = model.predictor(m + 1);
    const int k = pred.baseline_size();
    tails_a_[m].setZero(static_cast<Eigen::Index>(n), k);
    tails_b_[m].setZero(static_cast<Eigen::Index>(n), k);
    dtails_[m].setZero(static_cast<Eigen::Index>(n), k);
  }
  Eigen::VectorXd scratch;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const Eigen::RowVectorXd x = data.x.row(row);
    for (int nu = 1; nu <= 3; ++nu) {
      const Predictor& pred = model.predictor(nu);
      if (pred.n_params() == 0) continue;
      scratch.resize(pred.n_params());
      pred.covariate_design(x, scratch);
      design_[nu - 1].row(row) = scratch.transpose();
    }
    Shape& s = shapes_[i];
    for (int m = 0; m < 2; ++m) {
      const MarginObservation& o = data.margin(m + 1, i);
      const Predictor& pred = model.predictor(m + 1);
      const int k = pred.baseline_size();
      Eigen::VectorXd tails(k);
      Eigen::VectorXd dtails(k);
      s.kind[m] = o.kind;
      s.lower_zero[m] = o.kind != CensorKind::Uncensored && o.lower <= 0.0;
      s.upper_inf[m] = o.kind == CensorKind::Right;
      if (o.kind == CensorKind::Uncensored || !s.lower_zero[m]) {
        pred.baseline_tails(o.lower, tails, dtails);
        tails_a_[m].row(row) = tails.transpose();
        dtails_[m].row(row) = dtails.transpose();
      }
      if (o.kind != CensorKind::Uncensored && !s.upper_inf[m]) {
        pred.baseline_tails(o.upper, tails, dtails);
        tails_b_[m].row(row) = tails.transpose();
      }
    }
  }
}

void Loglik::check_dimension(const Eigen::Ref<const Eigen::VectorXd>& delta) const {
  if (delta.size() != model_->n_params()) {
    throw ConfigError("parameter vector has length " + std::to_string(delta.size()) +
                      ", model expects " + std::to_string(model_->n_params()));
  }
}

void Loglik::locals(std::size_t i, const Eigen::Ref<const Eigen::VectorXd>& delta,
                    const Eigen::VectorXd (&inc)[2], Locals& out) const {
  const auto row = static_cast<Eigen::Index>(i);
  const Shape& s = shapes_[i];
  out.n_active = 0;
  for (int m = 0; m < 2; ++m) {
    const Predictor& pred = model_->predictor(m + 1);
    const int off = model_->offset(m + 1);
    const double base = design_[m].row(row).dot(delta.segment(off, pred.n_params()));
    if (s.kind[m] == CensorKind::Uncensored) {
      out.q[2 * m] = base + inc[m].dot(tails_a_[m].row(row).transpose());
      out.eta_t[m] = inc[m].dot(dtails_[m].row(row).transpose());
      out.active[out.n_active++] = 2 * m;
      continue;
    }
    if (!s.lower_zero[m]) {
      out.q[2 * m] = base + inc[m].dot(tails_a_[m].row(row).transpose());
      out.active[out.n_active++] = 2 * m;
    }
    if (!s.upper_inf[m]) {
      out.q[2 * m + 1] = base + inc[m].dot(tails_b_[m].row(row).transpose());
      out.active[out.n_active++] = 2 * m + 1;
    }
  }
  if (model_->has_dependence()) {
    const Predictor& pred = model_->predictor(3);
    out.q[4] = design_[2].row(row).dot(delta.segment(model_->offset(3), pred.n_params()));
    out.active[out.n_active++] = 4;
  }
}

LoglikEval Loglik::evaluate(const Eigen::Ref<const Eigen::VectorXd>& delta,
                            DerivativeOrder order) const {
  check_dimension(delta);
  const int w = model_->n_params();
  const bool want_grad = order != DerivativeOrder::Value;
  const bool want_hess = order == DerivativeOrder::Hessian;
  const KernelContext ctx = context_of(*model_);

  Eigen::VectorXd inc[2];
  int base_off[2];
  for (int m = 0; m < 2; ++m) {
    const Predictor& pred = model_->predictor(m + 1);
    base_off[m] = model_->offset(m + 1) + pred.baseline_offset();
    inc[m] = delta.segment(base_off[m], pred.baseline_size()).array().exp();
  }

  LoglikEval out;
  if (want_grad) out.gradient.setZero(w);
  if (want_hess) out.hessian.setZero(w, w);

  Eigen::MatrixXd jac(kLocals, w);
  Eigen::MatrixXd qj(kLocals, w);
  Eigen::MatrixXd local_h(kLocals, kLocals);
  Eigen::VectorXd local_g(kLocals);
  Locals loc;
  LocalDerivs der;

  for (std::size_t i = 0; i < shapes_.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const Shape& s = shapes_[i];
    locals(i, delta, inc, loc);
    const KernelShape ks{{s.kind[0], s.kind[1]},
                         {s.lower_zero[0], s.lower_zero[1]},
                         {s.upper_inf[0], s.upper_inf[1]}};
    der = LocalDerivs{};
    if (want_grad) {
      dispatch_derivs(loc.n_active, ks, loc.q, loc.active, ctx, want_hess, der);
    } else {
      std::array<double, kLocals> q{};
      for (int k = 0; k < kLocals; ++k) q[k] = loc.q[k];
      der.value = record_kernel(ks, q, ctx);
    }
    double contrib = der.value;
    for (int m = 0; m < 2; ++m) {
      if (s.kind[m] == CensorKind::Uncensored) contrib += std::log(loc.eta_t[m]);
    }
    if (!std::isfinite(contrib)) {
      throw NumericalError("non-finite log-likelihood contribution at record " + std::to_string(i));
    }
    out.value += contrib;
    if (!want_grad) continue;

    const int na = loc.n_active;
    jac.topRows(na).setZero();
    for (int a = 0; a < na; ++a) {
      const int k = loc.active[a];
      const int m = k / 2;
      if (k == 4) {
        const int off = model_->offset(3);
        jac.row(a).segment(off, design_[2].cols()) = design_[2].row(row);
        continue;
      }
      const Predictor& pred = model_->predictor(m + 1);
      const int off = model_->offset(m + 1);
      jac.row(a).segment(off, pred.n_params()) = design_[m].row(row);
      const auto& tails = (k % 2 == 0) ? tails_a_[m] : tails_b_[m];
      jac.row(a).segment(base_off[m], pred.baseline_size()) =
          inc[m].transpose().cwiseProduct(tails.row(row));
    }
    for (int a = 0; a < na; ++a) local_g[a] = der.g[loc.active[a]];
    out.gradient.noalias() += jac.topRows(na).transpose() * local_g.head(na);

    Eigen::VectorXd v[2];
    for (int m = 0; m < 2; ++m) {
      if (s.kind[m] != CensorKind::Uncensored) continue;
      v[m] = inc[m].cwiseProduct(dtails_[m].row(row).transpose());
      out.gradient.segment(base_off[m], v[m].size()) += v[m] / loc.eta_t[m];
    }
    if (!want_hess) continue;

    for (int a = 0; a < na; ++a) {
      for (int b = 0; b < na; ++b) local_h(a, b) = der.h[loc.active[a]][loc.active[b]];
    }
    qj.topRows(na).noalias() = local_h.topLeftCorner(na, na) * jac.topRows(na);
    out.hessian.noalias() += jac.topRows(na).transpose() * qj.topRows(na);
    // Curvature of exp(r) inside eta: d^2 eta / dr_m^2 = e^{r_m} tail_m.
    for (int a = 0; a < na; ++a) {
      const int k = loc.active[a];
      if (k == 4) continue;
      const int m = k / 2;
      const int bs = static_cast<int>(inc[m].size());
      out.hessian.diagonal().segment(base_off[m], bs) +=
          local_g[a] * jac.row(a).segment(base_off[m], bs).transpose();
    }
    for (int m = 0; m < 2; ++m) {
      if (s.kind[m] != CensorKind::Uncensored) continue;
      const double et = loc.eta_t[m];
      const int bs = static_cast<int>(v[m].size());
      out.hessian.diagonal().segment(base_off[m], bs) += v[m] / et;
      out.hessian.block(base_off[m], base_off[m], bs, bs).noalias() -= v[m] * v[m].transpose() / (et * et);
    }
  }
  return out;
}

double Loglik::value(const Eigen::Ref<const Eigen::VectorXd>& delta) const {
  return evaluate(delta, DerivativeOrder::Value).value;
}

double Loglik::record_value(std::size_t i, const Eigen::Ref<const Eigen::VectorXd>& delta) const {
  check_dimension(delta);
  Eigen::VectorXd inc[2];
  for (int m = 0; m < 2; ++m) {
    const Predictor& pred = model_->predictor(m + 1);
    inc[m] = delta.segment(model_->offset(m + 1) + pred.baseline_offset(), pred.baseline_size())
                 .array()
                 .exp();
  }
  Locals loc;
  locals(i, delta, inc, loc);
  const Shape& s = shapes_.at(i);
  const KernelShape ks{{s.kind[0], s.kind[1]},
                       {s.lower_zero[0], s.lower_zero[1]},
                       {s.upper_inf[0], s.upper_inf[1]}};
  std::array<double, kLocals> q{};
  for (int k = 0; k < kLocals; ++k) q[k] = loc.q[k];
  double out = record_kernel(ks, q, context_of(*model_));
  for (int m = 0; m < 2; ++m) {
    if (s.kind[m] == CensorKind::Uncensored) out += std::log(loc.eta_t[m]);
  }
  return out;
}

double loglik(const SurvivalDataset& data, const ModelSpec& spec,
              const Eigen::Ref<const Eigen::VectorXd>& delta) {
  const Model model(spec, data);
  return Loglik(model, data).value(delta);
}

double penalized_loglik(const SurvivalDataset& data, const ModelSpec& spec,
                        const Eigen::Ref<const Eigen::VectorXd>& delta,
                        const Eigen::Ref<const Eigen::VectorXd>& lambdas) {
  const Model model(spec, data);
  const Eigen::MatrixXd s = model.penalty_matrix(lambdas);
  return Loglik(model, data).value(delta) - 0.5 * delta.dot(s * delta);
}

Eigen::VectorXd gradient(const SurvivalDataset& data, const ModelSpec& spec,
                         const Eigen::Ref<const Eigen::VectorXd>& delta,
                         const Eigen::Ref<const Eigen::VectorXd>& lambdas) {
  const Model model(spec, data);
  const Eigen::MatrixXd s = model.penalty_matrix(lambdas);
  return Loglik(model, data).evaluate(delta, DerivativeOrder::Gradient).gradient - s * delta;
}

}  // namespace brbvs
