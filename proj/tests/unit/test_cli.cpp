#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "brbvs/error.hpp"
#include "brbvs/simulate.hpp"
#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/csv.hpp"

using namespace brbvs;
using namespace brbvs::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("brbvs_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BRBVS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

const SurvivalDataset& sim_data() {
  static const SurvivalDataset d = [] {
    ScenarioConfig c;
    c.n = 300;
    c.p = 4;
    c.seed = 6;
    return simulate(c).data;
  }();
  return d;
}

}  // namespace

TEST(Config, UnknownKeysRejected) {
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"seeds": 3})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"brbvs": {"K": 3}})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"model": {"eta1": [{"type": "spline"}]}})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"model": {"eta1": [{"type": "linear"}]}})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"brbvs": {"metric": "L1"}})")), ConfigError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"workers": "four"})")), ConfigError);
  try {
    parse_config(nlohmann::json::parse(R"({"scenario": {"name": "A", "rho": 1}})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rho"), std::string::npos);
  }
}

TEST(Config, BlocksAndOverrides) {
  const auto doc = nlohmann::json::parse(R"({
    "seed": 7, "workers": 2, "out": "o",
    "scenario": {"name": "B", "n": 500, "p": 10, "censoring": [0.2, 0.3]},
    "brbvs": {"B": 5, "kmax": 4, "tau": 0.4, "metric": "Abs", "copula": "PL", "margins": ["PO", "PO"]},
    "model": {"copula": "N", "eta1": [{"type": "baseline"}, {"type": "smooth", "covariate": "x2", "n_basis": 6}]},
    "bench": {"n_rep": 3, "metrics": ["FIM", "CE"], "grid": [{"scenario": "A", "n": 200, "p": 5}]},
    "plot": {"profile": {"x1": 0.5}, "contour": true}
  })");
  RunConfig c = parse_config(doc);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.scenario.scenario, Scenario::B);
  EXPECT_DOUBLE_EQ(c.scenario.censor_targets[0], 0.2);
  EXPECT_EQ(c.brbvs.metric, MeasureKind::Abs);
  EXPECT_EQ(c.brbvs.link1, SurvivalLink::PO);
  EXPECT_EQ(c.model.copula, CopulaFamily::Independence);
  ASSERT_TRUE(c.model.eta[0].has_value());
  EXPECT_EQ((*c.model.eta[0])[1].n_basis, 6);
  EXPECT_EQ(c.bench.grid.size(), 1u);
  Overrides o;
  o.metric = "CE";
  o.margins = "PH,PO";
  o.kmax = 8;
  o.n = 900;
  apply_overrides(c, o);
  EXPECT_EQ(c.brbvs.metric, MeasureKind::CE);
  EXPECT_EQ(c.bench.metrics, (std::vector<MeasureKind>{MeasureKind::CE}));
  EXPECT_EQ(c.model.link2, SurvivalLink::PO);
  EXPECT_EQ(c.brbvs.k_max, 8);
  EXPECT_EQ(c.scenario.n, 900);
  EXPECT_TRUE(c.bench.grid.empty());
  EXPECT_THROW(parse_margins("PH"), ConfigError);
}

TEST(Csv, RoundTripReproducesRecords) {
  const SurvivalDataset d = sim_data();
  const LoadedData back = parse_dataset(format_dataset(d));
  EXPECT_EQ(back.data.y1, d.y1);
  EXPECT_EQ(back.data.y2, d.y2);
  EXPECT_EQ(back.data.x, d.x);
  EXPECT_EQ(back.data.covariate_names, d.covariate_names);
  EXPECT_EQ(format_dataset(back.data), format_dataset(d));
}

TEST(Csv, AllCensoringKindsAndAliases) {
  const std::string text =
      "t11,t12,t21,t22,cens1,cens2,cens,age\n"
      "1.5,1.5,2,NA,U,R,3,60\n"
      "0,2.5,1,3,L,I,1,71\n";
  const LoadedData l = parse_dataset(text);
  ASSERT_EQ(l.data.size(), 2u);
  EXPECT_EQ(l.data.y1[0], MarginObservation::uncensored(1.5));
  EXPECT_EQ(l.data.y2[0], MarginObservation::right(2.0));
  EXPECT_EQ(l.data.y1[1], MarginObservation::left(2.5));
  EXPECT_EQ(l.data.y2[1], MarginObservation::interval(1.0, 3.0));
  EXPECT_EQ(l.data.covariate_names, (std::vector<std::string>{"age"}));
}

TEST(Csv, InconsistentStatusNamesLine) {
  const std::string text =
      "t1_lower,t1_upper,t2_lower,t2_upper,cens1,cens2,x1\n"
      "1,1,2,,U,R,0.1\n"
      "1,2,2,,U,R,0.2\n";
  try {
    parse_dataset(text, {}, "d.csv");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_NO_THROW(parse_dataset("t1_lower,t1_upper,t2_lower,t2_upper,cens1,cens2\n1,,2,3,R,I\n"));
  EXPECT_THROW(parse_dataset("t1_lower,t1_upper,t2_lower,t2_upper,cens1,cens2\n1,4,2,3,R,I\n"), DataError);
  EXPECT_THROW(parse_dataset("t1_lower,t1_upper,t2_lower,cens1,cens2\n1,1,2,U,R\n"), DataError);
  EXPECT_THROW(parse_dataset("t1_lower,t1_upper,t2_lower,t2_upper,cens1,cens2,x\n1,1,2,,U,R,abc\n"), DataError);
  EXPECT_THROW(parse_dataset("t1_lower,t1_upper,t2_lower,t2_upper,cens1,cens2\n1,1,2,,X,R\n"), DataError);
  EXPECT_THROW(parse_dataset("t1_lower,t1_upper,t2_lower,t2_upper,cens1,cens2\n0.5,1,2,,L,R\n"), DataError);
}

TEST(Csv, CategoricalExpansion) {
  const std::string text =
      "t1_lower,t1_upper,t2_lower,t2_upper,cens1,cens2,SevScale1E,rs2284665,x\n"
      "1,1,2,,U,R,5,GT,0.1\n"
      "1,1,2,,U,R,8,GG,0.2\n"
      "1,1,2,,U,R,6,TT,0.3\n"
      "1,1,2,,U,R,10,GG,0.4\n";
  const LoadedData l = parse_dataset(text, {"SevScale1E", "rs2284665"});
  EXPECT_EQ(l.data.covariate_names,
            (std::vector<std::string>{"SevScale1E6", "SevScale1E8", "SevScale1E10", "rs2284665GT", "rs2284665TT", "x"}));
  EXPECT_EQ(l.groups.at("SevScale1E").size(), 3u);
  EXPECT_EQ(l.data.x.row(0), (Eigen::RowVectorXd(6) << 0, 0, 0, 1, 0, 0.1).finished());
  EXPECT_EQ(l.data.x.row(3), (Eigen::RowVectorXd(6) << 0, 0, 1, 0, 0, 0.4).finished());
  EXPECT_THROW(parse_dataset(text, {"missing"}), ConfigError);
}

TEST(Commands, SimulateShapeAndDeterminism) {
  const fs::path dir = scratch("simulate");
  RunConfig c;
  c.scenario.n = 100;
  c.scenario.p = 5;
  c.seed = 1;
  c.out = dir / "a";
  EXPECT_EQ(cmd_simulate(c), 0);
  c.out = dir / "b";
  EXPECT_EQ(cmd_simulate(c), 0);
  const std::string a = slurp(dir / "a" / "data.csv");
  EXPECT_EQ(a, slurp(dir / "b" / "data.csv"));
  EXPECT_EQ(slurp(dir / "a" / "truth.json"), slurp(dir / "b" / "truth.json"));
  EXPECT_EQ(count_lines(a), 101u);
  const std::string header = a.substr(0, a.find('\n'));
  EXPECT_EQ(header, "t1_lower,t1_upper,t2_lower,t2_upper,cens1,cens2,x1,x2,x3,x4,x5");
  const auto truth = nlohmann::json::parse(slurp(dir / "a" / "truth.json"));
  EXPECT_EQ(truth["s2"], nlohmann::json({"x1", "x2", "x3"}));
}

TEST(Commands, FitReportAndPlotData) {
  LoadedData loaded{sim_data(), {}};
  ModelConfig mc;
  mc.eta[0] = std::vector<TermConfig>{{"baseline", "", 0, 3, 2}, {"linear", "x1"}, {"smooth", "x2"}};
  mc.eta[1] = std::vector<TermConfig>{{"baseline", "", 0, 3, 2}, {"linear", "x1"}, {"linear", "x3"}};
  const Model model(build_model_spec(mc, loaded), loaded.data);
  const FittedModel fit = fit_configured(model, loaded.data, mc);
  ASSERT_TRUE(fit.converged) << fit.message;
  const auto report = fit_report(model, fit, loaded.data);
  EXPECT_EQ(report["smooth_terms"].size(), 3u);
  EXPECT_EQ(report["coefficients"].size(), 3u);
  EXPECT_EQ(report["coefficients"][0]["coefficients"].size(), 2u);
  EXPECT_TRUE(report["convergence"]["converged"].get<bool>());
  const double tau = report["dependence"]["tau"].get<double>();
  const auto iv = report["dependence"]["tau_interval"];
  EXPECT_LT(iv[0].get<double>(), tau);
  EXPECT_GT(iv[1].get<double>(), tau);

  const Eigen::RowVectorXd x0 = Eigen::RowVectorXd::Zero(4);
  const auto curve = survival_curve(model, fit, x0, 1, 12);
  ASSERT_EQ(curve.size(), 12u);
  for (std::size_t k = 1; k < curve.size(); ++k) {
    EXPECT_LE(curve[k].s, curve[k - 1].s + 1e-12);
    EXPECT_LE(curve[k].lower, curve[k].s);
    EXPECT_GE(curve[k].upper, curve[k].s);
  }
  const auto curve2 = survival_curve(model, fit, x0, 2, 12);
  // With t2 at its smallest grid value the joint survival reduces to S1.
  std::istringstream grid(contour_csv(model, fit, x0, 12));
  std::string line;
  std::getline(grid, line);
  EXPECT_EQ(line, "t1,t2,S");
  const double slack = 1.0 - curve2.front().s;
  EXPECT_LT(slack, 0.01);
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 12; ++j) {
      std::getline(grid, line);
      if (j != 0) continue;
      const double s = std::stod(line.substr(line.rfind(',') + 1));
      EXPECT_NEAR(s, curve[i].s, slack + 1e-12);
    }
  }
}

TEST(Commands, ModelSpecFromCategoricalGroup) {
  const std::string text =
      "t1_lower,t1_upper,t2_lower,t2_upper,cens1,cens2,g,x\n"
      "1,1,2,,U,R,a,0.1\n"
      "1,1,2,,U,R,b,0.2\n"
      "1,1,2,,U,R,c,0.3\n";
  const LoadedData l = parse_dataset(text, {"g"});
  ModelConfig mc;
  mc.eta[0] = std::vector<TermConfig>{{"baseline"}, {"linear", "g"}};
  const ModelSpec s = build_model_spec(mc, l);
  EXPECT_EQ(s.eta1.linear, (std::vector<int>{0, 1}));
  EXPECT_EQ(s.eta2.linear, (std::vector<int>{0, 1, 2}));
  mc.eta[0] = std::vector<TermConfig>{{"baseline"}, {"smooth", "g"}};
  EXPECT_THROW(build_model_spec(mc, l), ConfigError);
  mc.eta[0] = std::vector<TermConfig>{{"baseline"}, {"linear", "zz"}};
  EXPECT_THROW(build_model_spec(mc, l), ConfigError);
}

TEST(Commands, ChooseGridHasTwelveRows) {
  LoadedData loaded{sim_data(), {}};
  ModelConfig mc;
  const auto rows = choose_grid(loaded, mc);
  ASSERT_EQ(rows.size(), 12u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k].ok && rows[k - 1].ok) EXPECT_LE(rows[k - 1].aic, rows[k].aic);
  }
  // Data come from a Clayton copula with PH/PO margins.
  EXPECT_EQ(rows.front().copula, CopulaFamily::Clayton);
}

TEST(Executable, ExitCodes) {
  const fs::path dir = scratch("exit");
  EXPECT_EQ(run_cli("simulate --n 120 --p 4 --out " + (dir / "sim").string()), 0);
  EXPECT_EQ(run_cli("select --data " + (dir / "missing.csv").string()), 3);
  EXPECT_EQ(run_cli("select --kmax 0 --data " + (dir / "sim" / "data.csv").string()), 2);
  EXPECT_EQ(run_cli("bogus"), 2);
  {
    std::ofstream cfg(dir / "bad.json");
    cfg << R"({"brbvs": {"kmaxx": 3}})";
  }
  EXPECT_EQ(run_cli("select --config " + (dir / "bad.json").string()), 2);
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "t1_lower,t1_upper,t2_lower,t2_upper,cens1,cens2,x\n1,2,2,,U,R,0\n";
  }
  EXPECT_EQ(run_cli("fit --data " + (dir / "bad.csv").string()), 3);
}
