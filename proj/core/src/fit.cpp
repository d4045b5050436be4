#include "brbvs/fit.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>

#include "brbvs/error.hpp"

namespace brbvs {

namespace {

constexpr double kRidgeStart = 1e-10;
constexpr double kRidgeStop = 1e10;

bool is_pd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

double max_abs_diag(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 1.0 : std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
}

LoglikEval evaluate_with_hessian(const Loglik& lik, const Eigen::VectorXd& delta,
                                 HessianMethod method) {
  if (method == HessianMethod::Exact) return lik.evaluate(delta, DerivativeOrder::Hessian);
  LoglikEval out = lik.evaluate(delta, DerivativeOrder::Gradient);
  out.hessian = finite_difference_hessian(lik, delta);
  return out;
}

struct EdfParts {
  double total;
  std::vector<double> terms;
};

// A = -H + S must be positive definite.
EdfParts edf_parts(const Eigen::MatrixXd& neg_h, const Eigen::MatrixXd& penalty,
                   const std::vector<PenaltyTerm>& terms) {
  const Eigen::MatrixXd a = neg_h + penalty;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw NumericalError("penalised information -H + S is singular; edf undefined");
  }
  const Eigen::MatrixXd f = ldlt.solve(neg_h);
  if (!f.allFinite()) throw NumericalError("penalised information -H + S is singular; edf undefined");
  EdfParts out{f.trace(), {}};
  for (const auto& t : terms) out.terms.push_back(f.diagonal().segment(t.offset, t.size).sum());
  return out;
}

}  // namespace

double pd_ridge(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  const Eigen::MatrixXd mm = m;
  if (is_pd(mm)) return 0.0;
  const double scale = max_abs_diag(mm);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(mm.rows(), mm.cols());
  for (double c = kRidgeStart; c <= kRidgeStop; c *= 10.0) {
    if (is_pd(mm + c * scale * eye)) return c * scale;
  }
  throw NumericalError("matrix could not be made positive definite by ridge repair");
}

Eigen::MatrixXd finite_difference_hessian(const Loglik& lik,
                                          const Eigen::Ref<const Eigen::VectorXd>& delta) {
  const Eigen::Index w = delta.size();
  Eigen::MatrixXd h(w, w);
  Eigen::VectorXd d = delta;
  for (Eigen::Index k = 0; k < w; ++k) {
    const double step = 1e-5 * (1.0 + std::abs(delta[k]));
    d[k] = delta[k] + step;
    const Eigen::VectorXd gp = lik.evaluate(d, DerivativeOrder::Gradient).gradient;
    d[k] = delta[k] - step;
    const Eigen::VectorXd gm = lik.evaluate(d, DerivativeOrder::Gradient).gradient;
    d[k] = delta[k];
    h.col(k) = (gp - gm) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

double edf(const Eigen::Ref<const Eigen::MatrixXd>& hessian,
           const Eigen::Ref<const Eigen::MatrixXd>& penalty) {
  return edf_parts(-hessian, penalty, {}).total;
}

InformationCriteria aic_bic(const FittedModel& fit, std::size_t n) {
  const double dev = -2.0 * fit.loglik;
  return {dev + 2.0 * fit.edf, dev + fit.edf * std::log(static_cast<double>(n))};
}

FittedModel trust_region_fit(const Loglik& lik, const Eigen::Ref<const Eigen::VectorXd>& lambdas,
                             const Eigen::Ref<const Eigen::VectorXd>& init,
                             const FitOptions& options) {
  const Model& model = lik.model();
  const int w = model.n_params();
  if (init.size() != w) {
    throw ConfigError("initial point has length " + std::to_string(init.size()) +
                      ", model expects " + std::to_string(w));
  }
  FittedModel fit;
  fit.n = lik.size();
  fit.lambdas = lambdas;
  fit.penalty = model.penalty_matrix(lambdas);
  const Eigen::MatrixXd& s = fit.penalty;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(w, w);

  Eigen::VectorXd delta = init;
  LoglikEval cur = evaluate_with_hessian(lik, delta, options.hessian);
  double f = cur.value - 0.5 * delta.dot(s * delta);
  double mu = 0.0;
  double gnorm = std::numeric_limits<double>::infinity();
  int it = 0;
  std::string stall;

  for (; it < options.max_iterations; ++it) {
    const Eigen::VectorXd gp = cur.gradient - s * delta;
    gnorm = w > 0 ? gp.cwiseAbs().maxCoeff() : 0.0;
    if (gnorm < options.gradient_tolerance) break;
    const Eigen::MatrixXd hp = -cur.hessian + s;
    const double scale = max_abs_diag(hp);

    Eigen::VectorXd step;
    for (;;) {
      Eigen::LLT<Eigen::MatrixXd> llt(hp + mu * eye);
      if (llt.info() == Eigen::Success) {
        step = llt.solve(gp);
        if (step.allFinite()) break;
      }
      mu = std::max(10.0 * mu, 1e-8 * scale);
      if (mu > 1e20 * scale) break;
    }
    if (step.size() != w || !step.allFinite()) {
      stall = "damped Newton system could not be solved";
      break;
    }
    const double pred = gp.dot(step) - 0.5 * step.dot(hp * step);
    const Eigen::VectorXd trial = delta + step;

    if (pred < 1e-12 * (1.0 + std::abs(f))) {
      // Predicted gain below rounding of f: judge the step by the gradient.
      try {
        LoglikEval next = evaluate_with_hessian(lik, trial, options.hessian);
        const double gn = (next.gradient - s * trial).cwiseAbs().maxCoeff();
        if (std::isfinite(gn) && gn < gnorm) {
          delta = trial;
          cur = std::move(next);
          f = cur.value - 0.5 * delta.dot(s * delta);
          continue;
        }
      } catch (const NumericalError&) {
      }
      if (mu > 1e12 * scale) {
        stall = "step size underflow before reaching the gradient tolerance";
        break;
      }
      mu = std::max(4.0 * mu, 1e-6 * scale);
      continue;
    }

    double rho = -std::numeric_limits<double>::infinity();
    try {
      const double ft = lik.value(trial) - 0.5 * trial.dot(s * trial);
      if (std::isfinite(ft)) rho = (ft - f) / pred;
    } catch (const NumericalError&) {
    }
    if (rho < 0.25) {
      mu = std::max(4.0 * mu, 1e-6 * scale);
    } else if (rho > 0.75) {
      mu /= 3.0;
      if (mu < 1e-10 * scale) mu = 0.0;
    }
    if (rho > 1e-4) {
      delta = trial;
      cur = evaluate_with_hessian(lik, delta, options.hessian);
      f = cur.value - 0.5 * delta.dot(s * delta);
    }
  }

  fit.delta = delta;
  fit.hessian = cur.hessian;
  fit.loglik = cur.value;
  fit.penalized_loglik = f;
  fit.grad_norm = w > 0 ? (cur.gradient - s * delta).cwiseAbs().maxCoeff() : 0.0;
  fit.iterations = it;

  const Eigen::MatrixXd hp = -cur.hessian + s;
  if (w > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hp, Eigen::EigenvaluesOnly);
    fit.min_eigenvalue = es.eigenvalues().minCoeff();
  }
  fit.ridge = pd_ridge(hp);
  const EdfParts parts = edf_parts(-cur.hessian + fit.ridge * eye, s, model.penalties());
  fit.edf = parts.total;
  fit.term_edf = parts.terms;
  const InformationCriteria ic = aic_bic(fit, fit.n);
  fit.aic = ic.aic;
  fit.bic = ic.bic;

  fit.converged = fit.grad_norm < options.gradient_tolerance;
  std::ostringstream msg;
  if (fit.converged) {
    msg << "full convergence after " << it << " iterations";
    if (fit.ridge > 0.0) msg << "; penalised information repaired with ridge " << fit.ridge;
  } else if (!stall.empty()) {
    msg << stall << " (max |gradient| " << fit.grad_norm << ")";
  } else {
    msg << "iteration cap " << options.max_iterations << " reached (max |gradient| "
        << fit.grad_norm << ")";
  }
  fit.message = msg.str();
  return fit;
}

SmoothingSelection select_smoothing(const Loglik& lik, const Eigen::Ref<const Eigen::VectorXd>& init,
                                    const FitOptions& options) {
  const Model& model = lik.model();
  const int k_terms = model.n_smoothing();
  SmoothingSelection out;
  Eigen::VectorXd log_lambda = Eigen::VectorXd::Zero(k_terms);

  auto to_lambdas = [](const Eigen::VectorXd& ll) {
    Eigen::VectorXd l(ll.size());
    for (Eigen::Index k = 0; k < ll.size(); ++k) l[k] = std::pow(10.0, ll[k]);
    return l;
  };

  bool have_best = false;
  double best_aic = std::numeric_limits<double>::infinity();
  auto attempt = [&](const Eigen::VectorXd& ll, const Eigen::VectorXd& start) -> const FittedModel* {
    const Eigen::VectorXd lambdas = to_lambdas(ll);
    SmoothingTrial trial{lambdas, std::numeric_limits<double>::infinity(), false, {}};
    FittedModel fit;
    try {
      fit = trust_region_fit(lik, lambdas, start, options);
      trial.aic = fit.aic;
      trial.converged = fit.converged;
      trial.message = fit.message;
    } catch (const NumericalError& e) {
      trial.message = e.what();
    }
    out.trials.push_back(trial);
    if (trial.converged && trial.aic < best_aic - 1e-9) {
      best_aic = trial.aic;
      out.fit = std::move(fit);
      out.lambdas = lambdas;
      log_lambda = ll;
      have_best = true;
      return &out.fit;
    }
    return nullptr;
  };

  attempt(log_lambda, init);
  if (k_terms == 0) {
    if (!have_best) throw NumericalError("fit did not converge: " + out.trials.back().message);
    return out;
  }

  for (int k = 0; k < k_terms; ++k) {
    const double centre = log_lambda[k];
    Eigen::VectorXd warm = have_best ? out.fit.delta : Eigen::VectorXd(init);
    for (int g = -4; g <= 4; ++g) {
      if (g == centre) continue;
      Eigen::VectorXd ll = log_lambda;
      ll[k] = g;
      attempt(ll, warm);
      if (have_best) warm = out.fit.delta;
    }
  }
  for (int k = 0; k < k_terms; ++k) {
    const double centre = log_lambda[k];
    for (double d : {-0.5, 0.5}) {
      Eigen::VectorXd ll = log_lambda;
      ll[k] = centre + d;
      attempt(ll, have_best ? out.fit.delta : Eigen::VectorXd(init));
    }
  }

  if (!have_best) {
    std::ostringstream os;
    os << "no smoothing-parameter trial converged:";
    for (const auto& t : out.trials) os << "\n  lambdas [" << t.lambdas.transpose() << "]: " << t.message;
    throw NumericalError(os.str());
  }
  return out;
}

Eigen::VectorXd fisher_diag(const FittedModel& fit) {
  const Eigen::MatrixXd info = -fit.hessian;
  const double ridge = pd_ridge(info);
  Eigen::VectorXd d = info.diagonal().array() + ridge;
  return d.cwiseMax(0.0);
}

}  // namespace brbvs
