#include "cli/commands.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "brbvs/copula.hpp"
#include "brbvs/error.hpp"
#include "brbvs/likelihood.hpp"
#include "brbvs/simulate.hpp"
#include "cli/svg.hpp"

namespace brbvs::cli {

namespace {

using nlohmann::json;

constexpr double kZ95 = 1.959963984540054;

// Non-finite values become JSON null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<int> resolve_covariate(const std::string& name, const LoadedData& loaded) {
  if (auto it = loaded.groups.find(name); it != loaded.groups.end()) {
    std::vector<int> out;
    for (const auto& ind : it->second) out.push_back(loaded.data.covariate_index(ind));
    return out;
  }
  return {loaded.data.covariate_index(name)};
}

PredictorSpec build_predictor(const std::vector<TermConfig>& terms, const LoadedData& loaded,
                              const std::string& where) {
  PredictorSpec p;
  for (const auto& t : terms) {
    if (t.type == "baseline") {
      if (p.baseline) throw ConfigError(where + ": more than one baseline term");
      MonotoneSplineConfig b;
      if (t.n_basis > 0) b.n_basis = t.n_basis;
      b.degree = t.degree;
      b.penalty_order = t.penalty_order;
      p.baseline = b;
    } else if (t.type == "linear") {
      for (int j : resolve_covariate(t.covariate, loaded)) p.linear.push_back(j);
    } else {
      if (loaded.groups.count(t.covariate)) {
        throw ConfigError(where + ": categorical covariate '" + t.covariate + "' cannot enter as a smooth");
      }
      SmoothTermSpec s;
      s.covariate = loaded.data.covariate_index(t.covariate);
      if (t.n_basis > 0) s.config.n_basis = t.n_basis;
      s.config.degree = t.degree;
      s.config.penalty_order = t.penalty_order;
      p.smooth.push_back(s);
    }
  }
  return p;
}

std::vector<int> all_columns(const SurvivalDataset& data) {
  std::vector<int> out(static_cast<std::size_t>(data.n_covariates()));
  for (int j = 0; j < data.n_covariates(); ++j) out[static_cast<std::size_t>(j)] = j;
  return out;
}

const LoadedData& require_data(const RunConfig& config, std::optional<LoadedData>& storage) {
  if (!config.data.path) throw ConfigError("no dataset given (use --data or data.path)");
  storage = read_dataset(*config.data.path, config.data.categorical);
  return *storage;
}

std::string fmt(double v) { return format_double(v); }

json convergence_json(const FittedModel& fit) {
  return {{"converged", fit.converged},
          {"iterations", fit.iterations},
          {"max_abs_gradient", number(fit.grad_norm)},
          {"min_eigenvalue_penalised_information", number(fit.min_eigenvalue)},
          {"ridge", number(fit.ridge)},
          {"message", fit.message}};
}

std::string set_list(const std::vector<int>& set, const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i) out += ';';
    out += names.at(static_cast<std::size_t>(set[i]));
  }
  return out;
}

}  // namespace

std::string set_label(const std::vector<int>& set, const std::vector<std::string>& names) {
  return "{" + set_list(set, names) + "}";
}

ModelSpec build_model_spec(const ModelConfig& config, const LoadedData& loaded) {
  ModelSpec spec = ModelSpec::margins_with(config.copula, config.link1, config.link2, all_columns(loaded.data));
  const char* names[3] = {"model.eta1", "model.eta2", "model.eta3"};
  PredictorSpec* targets[3] = {&spec.eta1, &spec.eta2, &spec.eta3};
  for (int k = 0; k < 3; ++k) {
    if (config.eta[k]) *targets[k] = build_predictor(*config.eta[k], loaded, names[k]);
  }
  spec.validate(loaded.data.n_covariates());
  return spec;
}

FittedModel fit_configured(const Model& model, const SurvivalDataset& data, const ModelConfig& config) {
  const Loglik lik(model, data);
  FitOptions options;
  options.max_iterations = config.max_iterations;
  const Eigen::VectorXd init = model.initial_point(data);
  if (config.lambdas) {
    if (static_cast<int>(config.lambdas->size()) != model.n_smoothing()) {
      throw ConfigError("model.lambdas has " + std::to_string(config.lambdas->size()) + " entries, model has " +
                        std::to_string(model.n_smoothing()) + " penalised terms");
    }
    const Eigen::VectorXd l = Eigen::Map<const Eigen::VectorXd>(config.lambdas->data(), model.n_smoothing());
    return trust_region_fit(lik, l, init, options);
  }
  return select_smoothing(lik, init, options).fit;
}

Eigen::RowVectorXd profile_row(const std::map<std::string, double>& profile, const SurvivalDataset& data) {
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(data.n_covariates());
  for (const auto& [name, value] : profile) x[data.covariate_index(name)] = value;
  return x;
}

Eigen::MatrixXd parameter_covariance(const FittedModel& fit) {
  const Eigen::Index w = fit.delta.size();
  const Eigen::MatrixXd a =
      -fit.hessian + fit.penalty + fit.ridge * Eigen::MatrixXd::Identity(w, w);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw NumericalError("penalised information is singular");
  return ldlt.solve(Eigen::MatrixXd::Identity(w, w));
}

json fit_report(const Model& model, const FittedModel& fit, const SurvivalDataset& data) {
  const Eigen::MatrixXd v = parameter_covariance(fit);
  const auto names = model.parameter_names();
  json report;
  report["model"] = {{"copula", std::string(to_string(model.spec().copula))},
                     {"margins", {std::string(to_string(model.spec().link1)), std::string(to_string(model.spec().link2))}},
                     {"n", data.size()},
                     {"parameters", model.n_params()}};

  const int n_eq = model.has_dependence() ? 3 : 2;
  json equations = json::array();
  for (int nu = 1; nu <= n_eq; ++nu) {
    const Predictor& p = model.predictor(nu);
    const int off = model.offset(nu);
    json rows = json::array();
    auto row = [&](int local) {
      const int g = off + local;
      const double est = fit.delta[g];
      const double se = std::sqrt(std::max(v(g, g), 0.0));
      const double z = est / se;
      rows.push_back({{"term", names[static_cast<std::size_t>(g)]},
                      {"estimate", number(est)},
                      {"std_error", number(se)},
                      {"z", number(z)},
                      {"p_value", number(std::erfc(std::abs(z) / std::sqrt(2.0)))}});
    };
    if (p.has_intercept()) row(0);
    for (int j : p.spec().linear) row(*p.linear_index(j));
    equations.push_back({{"equation", "eta" + std::to_string(nu)}, {"coefficients", rows}});
  }
  report["coefficients"] = equations;

  json smooths = json::array();
  for (std::size_t k = 0; k < model.penalties().size(); ++k) {
    smooths.push_back({{"term", model.penalties()[k].name},
                       {"edf", number(fit.term_edf[k])},
                       {"lambda", number(fit.lambdas[static_cast<Eigen::Index>(k)])}});
  }
  report["smooth_terms"] = smooths;
  report["loglik"] = number(fit.loglik);
  report["penalized_loglik"] = number(fit.penalized_loglik);
  report["edf"] = number(fit.edf);
  report["aic"] = number(fit.aic);
  report["bic"] = number(fit.bic);

  if (model.has_dependence()) {
    const Eigen::RowVectorXd mean = data.x.colwise().mean();
    const Predictor& p3 = model.predictor(3);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(model.n_params());
    Eigen::VectorXd design(p3.n_params());
    p3.covariate_design(mean, design);
    g.segment(model.offset(3), p3.n_params()) = design;
    const double eta = model.eta3(mean, fit.delta);
    const double se = std::sqrt(std::max(g.dot(v * g), 0.0));
    const ThetaBounds& b = model.spec().theta_bounds;
    auto theta = [&](double e) { return std::clamp(std::exp(e), b.lower, b.upper); };
    const CopulaFamily fam = model.spec().copula;
    const double lo = theta(eta - kZ95 * se);
    const double hi = theta(eta + kZ95 * se);
    report["dependence"] = {
        {"at", "covariate means"},
        {"eta3", number(eta)},
        {"eta3_std_error", number(se)},
        {"theta", number(theta(eta))},
        {"theta_interval", {number(lo), number(hi)}},
        {"tau", number(kendall_tau(theta(eta), fam))},
        {"tau_interval", {number(kendall_tau(lo, fam)), number(kendall_tau(hi, fam))}}};
  } else {
    report["dependence"] = {{"theta", nullptr}, {"tau", 0.0}};
  }
  report["convergence"] = convergence_json(fit);
  return report;
}

std::vector<CurvePoint> survival_curve(const Model& model, const FittedModel& fit,
                                       const Eigen::Ref<const Eigen::RowVectorXd>& x, int nu, int points) {
  const Eigen::MatrixXd v = parameter_covariance(fit);
  const Predictor& p = model.predictor(nu);
  const int off = model.offset(nu);
  const int w = p.n_params();
  const Eigen::VectorXd coefs = fit.delta.segment(off, w);
  const Eigen::MatrixXd vb = v.block(off, off, w, w);
  const BSplineBasis& basis = p.time_basis();
  const SurvivalLink link = model.link(nu);

  Eigen::VectorXd design(w);
  p.covariate_design(x, design);
  Eigen::VectorXd tails(p.baseline_size());
  Eigen::VectorXd dtails(p.baseline_size());
  std::vector<CurvePoint> out;
  for (int k = 0; k < points; ++k) {
    const double t = basis.lower() + (basis.upper() - basis.lower()) * k / (points - 1.0);
    const double eta = p.evaluate(t, x, coefs).eta;
    Eigen::VectorXd g = design;
    p.baseline_tails(t, tails, dtails);
    for (int m = 0; m < p.baseline_size(); ++m) {
      g[p.baseline_offset() + m] = std::exp(coefs[p.baseline_offset() + m]) * tails[m];
    }
    const double se = std::sqrt(std::max(g.dot(vb * g), 0.0));
    // G is decreasing: the upper band comes from the lower predictor.
    out.push_back({t, link_survival(eta, link).survival, link_survival(eta + kZ95 * se, link).survival,
                   link_survival(eta - kZ95 * se, link).survival});
  }
  return out;
}

std::string contour_csv(const Model& model, const FittedModel& fit,
                        const Eigen::Ref<const Eigen::RowVectorXd>& x, int points) {
  const Predictor& p1 = model.predictor(1);
  const Predictor& p2 = model.predictor(2);
  const Eigen::VectorXd c1 = fit.delta.segment(model.offset(1), p1.n_params());
  const Eigen::VectorXd c2 = fit.delta.segment(model.offset(2), p2.n_params());
  double theta = 1.0;
  if (model.has_dependence()) theta = dependence_link(model.eta3(x, fit.delta), model.spec().theta_bounds).theta;
  auto grid = [points](const BSplineBasis& b, int k) {
    return b.lower() + (b.upper() - b.lower()) * k / (points - 1.0);
  };
  std::string out = "t1,t2,S\n";
  for (int i = 0; i < points; ++i) {
    const double t1 = grid(p1.time_basis(), i);
    const double s1 = link_survival(p1.evaluate(t1, x, c1).eta, model.link(1)).survival;
    for (int j = 0; j < points; ++j) {
      const double t2 = grid(p2.time_basis(), j);
      const double s2 = link_survival(p2.evaluate(t2, x, c2).eta, model.link(2)).survival;
      const double s = copula_cdf(s1, s2, theta, model.spec().copula);
      out += fmt(t1) + ',' + fmt(t2) + ',' + fmt(s) + '\n';
    }
  }
  return out;
}

json selection_json(const BRBVSResult& r) {
  const auto& names = r.covariate_names;
  auto name_list = [&](const std::vector<int>& set) {
    json a = json::array();
    for (int j : set) a.push_back(names.at(static_cast<std::size_t>(j)));
    return a;
  };
  json out;
  out["params"] = {{"B", r.params.B},
                   {"m", r.m},
                   {"r", r.r},
                   {"kmax", r.params.k_max},
                   {"tau", r.params.tau},
                   {"seed", r.params.seed},
                   {"metric", std::string(to_string(r.params.metric))},
                   {"copula", std::string(to_string(r.params.copula))},
                   {"margins", {std::string(to_string(r.params.link1)), std::string(to_string(r.params.link2))}}};
  out["covariates"] = names;
  json margins = json::array();
  for (int nu = 0; nu < 2; ++nu) {
    const MarginSelection& m = r.margins[static_cast<std::size_t>(nu)];
    json tops = json::array();
    for (std::size_t k = 0; k < m.tops.size(); ++k) {
      tops.push_back({{"k", k}, {"set", name_list(m.tops[k].set)}, {"pi", number(m.tops[k].pi)}});
    }
    json ratios = json::array();
    for (double q : m.rule.ratios) ratios.push_back(number(q));
    json ranks = json::object();
    for (std::size_t j = 0; j < names.size(); ++j) {
      ranks[names[j]] = number(m.mean_rank[static_cast<Eigen::Index>(j)]);
    }
    margins.push_back({{"margin", nu + 1},
                       {"selected", name_list(m.s_hat)},
                       {"size", m.rule.size},
                       {"top_sets", tops},
                       {"ratios", ratios},
                       {"floored", m.rule.floored},
                       {"nested", m.nested},
                       {"mean_rank", ranks}});
  }
  out["margins"] = margins;
  json lambdas = json::array();
  for (Eigen::Index k = 0; k < r.lambdas.size(); ++k) lambdas.push_back(number(r.lambdas[k]));
  out["lambdas"] = lambdas;
  out["fits"] = r.fits;
  out["nonconverged"] = r.nonconverged;
  out["warnings"] = r.warnings;
  return out;
}

std::string selection_frequencies_csv(const BRBVSResult& r) {
  std::string out = "covariate,margin,selected,mean_rank,top_kmax_frequency\n";
  for (int nu = 0; nu < 2; ++nu) {
    const MarginSelection& m = r.margins[static_cast<std::size_t>(nu)];
    for (std::size_t j = 0; j < r.covariate_names.size(); ++j) {
      const auto row = static_cast<Eigen::Index>(j);
      const bool selected = std::find(m.s_hat.begin(), m.s_hat.end(), static_cast<int>(j)) != m.s_hat.end();
      const double freq = m.position_freq.cols() > 0 ? m.position_freq.row(row).sum() : 0.0;
      out += r.covariate_names[j] + ',' + std::to_string(nu + 1) + ',' + (selected ? "1" : "0") + ',' +
             fmt(m.mean_rank[row]) + ',' + fmt(freq) + '\n';
    }
  }
  return out;
}

std::vector<ChooseRow> choose_grid(const LoadedData& loaded, const ModelConfig& config) {
  std::vector<ChooseRow> rows;
  for (CopulaFamily c : {CopulaFamily::Independence, CopulaFamily::Clayton, CopulaFamily::Plackett}) {
    for (SurvivalLink l1 : {SurvivalLink::PH, SurvivalLink::PO}) {
      for (SurvivalLink l2 : {SurvivalLink::PH, SurvivalLink::PO}) {
        ChooseRow row;
        row.copula = c;
        row.link1 = l1;
        row.link2 = l2;
        try {
          ModelConfig mc = config;
          mc.copula = c;
          mc.link1 = l1;
          mc.link2 = l2;
          // Fixed smoothing parameters only apply when the term count matches.
          const Model model(build_model_spec(mc, loaded), loaded.data);
          if (mc.lambdas && static_cast<int>(mc.lambdas->size()) != model.n_smoothing()) mc.lambdas.reset();
          const FittedModel fit = fit_configured(model, loaded.data, mc);
          row.ok = true;
          row.converged = fit.converged;
          row.loglik = fit.loglik;
          row.edf = fit.edf;
          row.aic = fit.aic;
          row.bic = fit.bic;
          row.message = fit.message;
        } catch (const Error& e) {
          row.message = e.what();
        }
        rows.push_back(row);
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ChooseRow& a, const ChooseRow& b) {
    if (a.ok != b.ok) return a.ok;
    return a.ok && a.aic < b.aic;
  });
  return rows;
}

int cmd_simulate(const RunConfig& config) {
  ScenarioConfig sc = config.scenario;
  sc.seed = config.seed;
  const SimulatedData sim = simulate(sc);
  write_dataset(config.out / "data.csv", sim.data);
  const auto& names = sim.data.covariate_names;
  auto support = [&](int nu) {
    json a = json::array();
    for (int j : true_support(nu)) a.push_back(names[static_cast<std::size_t>(j)]);
    return a;
  };
  double tau_mean = 0.0;
  for (Eigen::Index i = 0; i < sim.data.x.rows(); ++i) {
    tau_mean += kendall_tau(dependence_link(true_eta3(sim.data.x.row(i), sc)).theta, CopulaFamily::Clayton);
  }
  tau_mean /= static_cast<double>(sim.data.x.rows());
  json truth = {{"scenario", std::string(to_string(sc.scenario))},
                {"n", sc.n},
                {"p", sc.p},
                {"seed", sc.seed},
                {"copula", "C0"},
                {"margins", {"PH", "PO"}},
                {"beta1", {{"x1", sc.beta1[0]}, {"x2", sc.beta1[1]}}},
                {"beta2", {{"x1", sc.beta2[0]}, {"x3", sc.beta2[1]}}},
                {"beta3", sc.beta3},
                {"b_intercept", sc.scenario_b_intercept},
                {"s1", support(1)},
                {"s2", support(2)},
                {"censoring_target", sc.censor_targets},
                {"censoring_achieved", sim.censored_fraction},
                {"censoring_bounds", {number(sim.bounds.c1), number(sim.bounds.c2)}},
                {"mean_tau", tau_mean}};
  write_text(config.out / "truth.json", truth.dump(2) + "\n");
  std::cout << "wrote " << (config.out / "data.csv").string() << " (" << sim.data.size() << " rows, censoring "
            << sim.censored_fraction[0] << " / " << sim.censored_fraction[1] << ")\n";
  return 0;
}

int cmd_fit(const RunConfig& config) {
  std::optional<LoadedData> storage;
  const LoadedData& loaded = require_data(config, storage);
  const Model model(build_model_spec(config.model, loaded), loaded.data);
  const FittedModel fit = fit_configured(model, loaded.data, config.model);
  write_text(config.out / "fit_report.json", fit_report(model, fit, loaded.data).dump(2) + "\n");

  const Eigen::RowVectorXd x0 = profile_row(config.plot.profile, loaded.data);
  std::vector<SvgSeries> series;
  const char* colours[2] = {"#1f77b4", "#d62728"};
  for (int nu = 1; nu <= 2; ++nu) {
    const auto curve = survival_curve(model, fit, x0, nu, config.plot.curve_points);
    std::string csv = "t,S,lower,upper\n";
    SvgSeries s{"S" + std::to_string(nu), {}, {}, colours[nu - 1], false};
    SvgSeries lo{"95% band", {}, {}, colours[nu - 1], true};
    SvgSeries hi{"", {}, {}, colours[nu - 1], true};
    for (const auto& pt : curve) {
      csv += fmt(pt.t) + ',' + fmt(pt.s) + ',' + fmt(pt.lower) + ',' + fmt(pt.upper) + '\n';
      s.x.push_back(pt.t);
      s.y.push_back(pt.s);
      lo.x.push_back(pt.t);
      lo.y.push_back(pt.lower);
      hi.x.push_back(pt.t);
      hi.y.push_back(pt.upper);
    }
    write_text(config.out / ("baseline_survival_" + std::to_string(nu) + ".csv"), csv);
    series.push_back(std::move(s));
    series.push_back(std::move(lo));
    series.push_back(std::move(hi));
  }
  if (config.plot.contour) {
    write_text(config.out / "contour.csv", contour_csv(model, fit, x0, config.plot.contour_points));
  }
  if (config.plot.svg) {
    write_text(config.out / "survival.svg", svg_line_chart("Marginal survival", "t", "S(t)", series, 0.0, 1.0));
  }
  if (!fit.converged) {
    std::cerr << "error: fit did not converge: " << fit.message << "\n";
    return NumericalError("").exit_code();
  }
  std::cout << "converged: " << fit.message << "; AIC " << fit.aic << ", BIC " << fit.bic << "\n";
  return 0;
}

int cmd_select(const RunConfig& config) {
  std::optional<LoadedData> storage;
  const LoadedData& loaded = require_data(config, storage);
  BRBVSParams params = config.brbvs;
  params.seed = config.seed;
  params.workers = config.workers;
  const BRBVSResult result = brbvs_run(loaded.data, params);
  write_text(config.out / "brbvs_result.json", selection_json(result).dump(2) + "\n");
  const std::string summary = summary_text(result);
  write_text(config.out / "summary.txt", summary);
  write_text(config.out / "selection_frequencies.csv", selection_frequencies_csv(result));
  std::cout << summary;
  return 0;
}

int cmd_choose(const RunConfig& config) {
  std::optional<LoadedData> storage;
  const LoadedData& loaded = require_data(config, storage);
  const auto rows = choose_grid(loaded, config.model);
  std::vector<std::size_t> by_bic(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) by_bic[i] = i;
  std::stable_sort(by_bic.begin(), by_bic.end(), [&](std::size_t a, std::size_t b) {
    if (rows[a].ok != rows[b].ok) return rows[a].ok;
    return rows[a].ok && rows[a].bic < rows[b].bic;
  });
  std::vector<int> bic_rank(rows.size());
  for (std::size_t k = 0; k < by_bic.size(); ++k) bic_rank[by_bic[k]] = static_cast<int>(k + 1);

  std::string csv = "rank_aic,rank_bic,copula,link1,link2,status,loglik,edf,aic,bic,message\n";
  json arr = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ChooseRow& r = rows[i];
    const std::string status = !r.ok ? "failed" : (r.converged ? "converged" : "not_converged");
    std::string msg = r.message;
    std::replace(msg.begin(), msg.end(), '"', '\'');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    csv += std::to_string(i + 1) + ',' + std::to_string(bic_rank[i]) + ',' + std::string(to_string(r.copula)) +
           ',' + std::string(to_string(r.link1)) + ',' + std::string(to_string(r.link2)) + ',' + status + ',' +
           (r.ok ? fmt(r.loglik) + ',' + fmt(r.edf) + ',' + fmt(r.aic) + ',' + fmt(r.bic) : std::string(",,,")) +
           ",\"" + msg + "\"\n";
    arr.push_back({{"rank_aic", i + 1},
                   {"rank_bic", bic_rank[i]},
                   {"copula", std::string(to_string(r.copula))},
                   {"margins", {std::string(to_string(r.link1)), std::string(to_string(r.link2))}},
                   {"status", status},
                   {"loglik", r.ok ? number(r.loglik) : json(nullptr)},
                   {"edf", r.ok ? number(r.edf) : json(nullptr)},
                   {"aic", r.ok ? number(r.aic) : json(nullptr)},
                   {"bic", r.ok ? number(r.bic) : json(nullptr)},
                   {"message", r.message}});
  }
  write_text(config.out / "choose.csv", csv);
  write_text(config.out / "choose.json", arr.dump(2) + "\n");
  std::cout << csv;
  return 0;
}

int cmd_bench(const RunConfig& config) {
  std::vector<BenchCell> cells = config.bench.grid;
  if (cells.empty()) cells.push_back({config.scenario.scenario, config.scenario.n, config.scenario.p});

  std::string bench_csv =
      "scenario,n,p,metric,n_rep,failures,margin,fp_raw,fn_raw,fp_norm,fn_norm,mean_size,mean_hits\n";
  std::string sets_csv = "scenario,n,p,metric,margin,set,share\n";
  std::string reps_csv = "scenario,n,p,replicate,data_seed,ok,cens1,cens2,metric,s1,s2,fits,nonconverged,error\n";
  for (const BenchCell& cell : cells) {
    BenchConfig bc;
    bc.scenario = config.scenario;
    bc.scenario.scenario = cell.scenario;
    bc.scenario.n = cell.n;
    bc.scenario.p = cell.p;
    bc.brbvs = config.brbvs;
    bc.n_rep = config.bench.n_rep;
    bc.metrics = config.bench.metrics;
    bc.seed = config.seed;
    bc.workers = config.workers;
    const BenchResult res = run_benchmark(bc);
    const std::string prefix =
        std::string(to_string(cell.scenario)) + ',' + std::to_string(cell.n) + ',' + std::to_string(cell.p) + ',';
    const auto names = default_covariate_names(cell.p);
    for (std::size_t k = 0; k < bc.metrics.size(); ++k) {
      const std::string metric(to_string(bc.metrics[k]));
      const BenchMetrics& bm = res.metrics[k];
      for (int nu = 0; nu < 2; ++nu) {
        const MarginMetrics& m = bm.margins[static_cast<std::size_t>(nu)];
        bench_csv += prefix + metric + ',' + std::to_string(bm.n_rep) + ',' + std::to_string(res.failures) + ',' +
                     std::to_string(nu + 1) + ',' + fmt(m.fp_raw) + ',' + fmt(m.fn_raw) + ',' + fmt(m.fp_norm) +
                     ',' + fmt(m.fn_norm) + ',' + fmt(m.mean_size) + ',' + fmt(m.mean_hits) + '\n';
        for (const auto& f : m.set_frequencies) {
          sets_csv += prefix + metric + ',' + std::to_string(nu + 1) + ',' + set_label(f.set, names) + ',' +
                      fmt(f.share) + '\n';
        }
      }
    }
    for (const ReplicateLog& log : res.replicates) {
      std::string err = log.error;
      std::replace(err.begin(), err.end(), '"', '\'');
      std::replace(err.begin(), err.end(), '\n', ' ');
      for (std::size_t k = 0; k < bc.metrics.size(); ++k) {
        reps_csv += prefix + std::to_string(log.replicate) + ',' + std::to_string(log.data_seed) + ',' +
                    (log.ok ? "1" : "0") + ',' + fmt(log.censored_fraction[0]) + ',' +
                    fmt(log.censored_fraction[1]) + ',' + std::string(to_string(bc.metrics[k])) + ',' +
                    (log.ok ? set_label(log.s_hat[k][0], names) + ',' + set_label(log.s_hat[k][1], names)
                            : std::string(",")) +
                    ',' + std::to_string(log.fits) + ',' + std::to_string(log.nonconverged) + ",\"" + err + "\"\n";
      }
      if (!log.ok) std::cerr << "warning: replicate " << log.replicate << " failed: " << log.error << "\n";
    }
  }
  write_text(config.out / "bench.csv", bench_csv);
  write_text(config.out / "set_frequencies.csv", sets_csv);
  write_text(config.out / "replicates.csv", reps_csv);
  std::cout << bench_csv;
  return 0;
}

}  // namespace brbvs::cli
