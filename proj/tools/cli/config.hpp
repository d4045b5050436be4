#pragma once

// Run configuration: JSON blocks for every subcommand, validated strictly
// (unknown keys are errors), plus command-line overrides.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "brbvs/selection.hpp"
#include "brbvs/simulate.hpp"
#include "json.hpp"

namespace brbvs::cli {

struct TermConfig {
  std::string type;  // baseline | linear | smooth
  std::string covariate;
  int n_basis = 0;   // 0 keeps the type's default
  int degree = 3;
  int penalty_order = 2;
};

struct ModelConfig {
  CopulaFamily copula = CopulaFamily::Clayton;
  SurvivalLink link1 = SurvivalLink::PH;
  SurvivalLink link2 = SurvivalLink::PO;
  std::optional<std::vector<TermConfig>> eta[3];
  std::optional<std::vector<double>> lambdas;
  int max_iterations = 200;
};

struct DataConfig {
  std::optional<std::filesystem::path> path;
  std::vector<std::string> categorical;
};

struct PlotConfig {
  std::map<std::string, double> profile;
  bool contour = false;
  int contour_points = 40;
  int curve_points = 100;
  bool svg = false;
};

struct BenchCell {
  Scenario scenario = Scenario::A;
  int n = 800;
  int p = 20;
};

struct BenchBlock {
  int n_rep = 20;
  std::vector<MeasureKind> metrics{MeasureKind::FIM, MeasureKind::Abs};
  std::vector<BenchCell> grid;  // empty: the scenario block alone
};

struct RunConfig {
  std::uint64_t seed = 1;
  int workers = 1;
  std::filesystem::path out = "brbvs_out";
  ScenarioConfig scenario;
  ModelConfig model;
  BRBVSParams brbvs;
  DataConfig data;
  PlotConfig plot;
  BenchBlock bench;
};

/// Parses and validates a configuration document. Throws ConfigError naming
/// the offending key.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Values given on the command line; each replaces its configuration value.
struct Overrides {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> metric;
  std::optional<std::string> copula;
  std::optional<std::string> margins;  // "PH,PO"
  std::optional<int> kmax;
  std::optional<double> tau;
  std::optional<int> B;
  std::optional<int> m;
  std::optional<std::string> scenario;
  std::optional<int> n;
  std::optional<int> p;
  std::optional<int> n_rep;
};

void apply_overrides(RunConfig& config, const Overrides& o);

/// Parses "PH,PO".
std::array<SurvivalLink, 2> parse_margins(const std::string& text);

}  // namespace brbvs::cli
