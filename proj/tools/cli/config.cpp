#include "cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "brbvs/error.hpp"

namespace brbvs::cli {

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!ok) {
      std::ostringstream os;
      os << "unknown key '" << key << "' in " << where << " (allowed:";
      for (const char* a : allowed) os << ' ' << a;
      os << ')';
      throw ConfigError(os.str());
    }
  }
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
void read(const json& obj, const char* key, T& target, const std::string& where) {
  if (obj.contains(key)) target = get<T>(obj, key, where);
}

template <std::size_t N>
void read_array(const json& obj, const char* key, std::array<double, N>& target, const std::string& where) {
  if (!obj.contains(key)) return;
  const auto v = get<std::vector<double>>(obj, key, where);
  if (v.size() != N) {
    throw ConfigError(where + "." + key + " must have " + std::to_string(N) + " entries");
  }
  std::copy(v.begin(), v.end(), target.begin());
}

std::vector<TermConfig> parse_terms(const json& list, const std::string& where) {
  if (!list.is_array()) throw ConfigError(where + " must be a list of term descriptors");
  std::vector<TermConfig> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    const json& t = list[i];
    check_keys(t, {"type", "covariate", "n_basis", "degree", "penalty_order"}, at);
    TermConfig term;
    term.type = get<std::string>(t, "type", at);
    if (term.type != "baseline" && term.type != "linear" && term.type != "smooth") {
      throw ConfigError(at + ".type must be baseline, linear or smooth");
    }
    read(t, "covariate", term.covariate, at);
    if (term.type != "baseline" && term.covariate.empty()) {
      throw ConfigError(at + " needs a covariate name");
    }
    read(t, "n_basis", term.n_basis, at);
    read(t, "degree", term.degree, at);
    read(t, "penalty_order", term.penalty_order, at);
    out.push_back(term);
  }
  return out;
}

void parse_model(const json& m, ModelConfig& model) {
  check_keys(m, {"copula", "margins", "eta1", "eta2", "eta3", "lambdas", "max_iterations"}, "model");
  if (m.contains("copula")) model.copula = parse_copula(get<std::string>(m, "copula", "model"));
  if (m.contains("margins")) {
    const auto v = get<std::vector<std::string>>(m, "margins", "model");
    if (v.size() != 2) throw ConfigError("model.margins must list two links");
    model.link1 = parse_link(v[0]);
    model.link2 = parse_link(v[1]);
  }
  const char* keys[3] = {"eta1", "eta2", "eta3"};
  for (int k = 0; k < 3; ++k) {
    if (m.contains(keys[k])) model.eta[k] = parse_terms(m.at(keys[k]), std::string("model.") + keys[k]);
  }
  if (m.contains("lambdas")) model.lambdas = get<std::vector<double>>(m, "lambdas", "model");
  read(m, "max_iterations", model.max_iterations, "model");
}

void parse_scenario_block(const json& s, ScenarioConfig& sc) {
  check_keys(s,
             {"name", "n", "p", "beta1", "beta2", "beta3", "censoring", "b_intercept", "root_upper",
              "max_bracket_doublings"},
             "scenario");
  if (s.contains("name")) sc.scenario = parse_scenario(get<std::string>(s, "name", "scenario"));
  read(s, "n", sc.n, "scenario");
  read(s, "p", sc.p, "scenario");
  read_array(s, "beta1", sc.beta1, "scenario");
  read_array(s, "beta2", sc.beta2, "scenario");
  read_array(s, "beta3", sc.beta3, "scenario");
  read_array(s, "censoring", sc.censor_targets, "scenario");
  read(s, "b_intercept", sc.scenario_b_intercept, "scenario");
  read(s, "root_upper", sc.root_upper, "scenario");
  read(s, "max_bracket_doublings", sc.max_bracket_doublings, "scenario");
}

void parse_brbvs(const json& b, BRBVSParams& p) {
  check_keys(b, {"B", "m", "kmax", "tau", "metric", "copula", "margins", "min_fit_size", "max_iterations"},
             "brbvs");
  read(b, "B", p.B, "brbvs");
  read(b, "m", p.m, "brbvs");
  read(b, "kmax", p.k_max, "brbvs");
  read(b, "tau", p.tau, "brbvs");
  if (b.contains("metric")) p.metric = parse_measure(get<std::string>(b, "metric", "brbvs"));
  if (b.contains("copula")) p.copula = parse_copula(get<std::string>(b, "copula", "brbvs"));
  if (b.contains("margins")) {
    const auto v = get<std::vector<std::string>>(b, "margins", "brbvs");
    if (v.size() != 2) throw ConfigError("brbvs.margins must list two links");
    p.link1 = parse_link(v[0]);
    p.link2 = parse_link(v[1]);
  }
  read(b, "min_fit_size", p.min_fit_size, "brbvs");
  read(b, "max_iterations", p.fit.max_iterations, "brbvs");
}

void parse_bench(const json& b, BenchBlock& bench) {
  check_keys(b, {"n_rep", "metrics", "grid"}, "bench");
  read(b, "n_rep", bench.n_rep, "bench");
  if (b.contains("metrics")) {
    bench.metrics.clear();
    for (const auto& name : get<std::vector<std::string>>(b, "metrics", "bench")) {
      bench.metrics.push_back(parse_measure(name));
    }
    if (bench.metrics.empty()) throw ConfigError("bench.metrics must not be empty");
  }
  if (b.contains("grid")) {
    const json& g = b.at("grid");
    if (!g.is_array()) throw ConfigError("bench.grid must be a list");
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::string at = "bench.grid[" + std::to_string(i) + "]";
      check_keys(g[i], {"scenario", "n", "p"}, at);
      BenchCell cell;
      if (g[i].contains("scenario")) cell.scenario = parse_scenario(get<std::string>(g[i], "scenario", at));
      read(g[i], "n", cell.n, at);
      read(g[i], "p", cell.p, at);
      bench.grid.push_back(cell);
    }
  }
}

void parse_plot(const json& p, PlotConfig& plot) {
  check_keys(p, {"profile", "contour", "contour_points", "curve_points", "svg"}, "plot");
  if (p.contains("profile")) plot.profile = get<std::map<std::string, double>>(p, "profile", "plot");
  read(p, "contour", plot.contour, "plot");
  read(p, "contour_points", plot.contour_points, "plot");
  read(p, "curve_points", plot.curve_points, "plot");
  read(p, "svg", plot.svg, "plot");
  if (plot.contour_points < 2 || plot.curve_points < 2) {
    throw ConfigError("plot.contour_points and plot.curve_points must be at least 2");
  }
}

}  // namespace

RunConfig parse_config(const json& doc) {
  check_keys(doc, {"seed", "workers", "out", "data", "scenario", "model", "brbvs", "bench", "plot"},
             "configuration");
  RunConfig c;
  read(doc, "seed", c.seed, "configuration");
  read(doc, "workers", c.workers, "configuration");
  if (doc.contains("out")) c.out = get<std::string>(doc, "out", "configuration");
  if (doc.contains("data")) {
    const json& d = doc.at("data");
    check_keys(d, {"path", "categorical"}, "data");
    if (d.contains("path")) c.data.path = get<std::string>(d, "path", "data");
    read(d, "categorical", c.data.categorical, "data");
  }
  if (doc.contains("scenario")) parse_scenario_block(doc.at("scenario"), c.scenario);
  if (doc.contains("model")) parse_model(doc.at("model"), c.model);
  if (doc.contains("brbvs")) parse_brbvs(doc.at("brbvs"), c.brbvs);
  if (doc.contains("bench")) parse_bench(doc.at("bench"), c.bench);
  if (doc.contains("plot")) parse_plot(doc.at("plot"), c.plot);
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("configuration file " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

std::array<SurvivalLink, 2> parse_margins(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("--margins expects two links, e.g. PH,PO");
  return {parse_link(text.substr(0, comma)), parse_link(text.substr(comma + 1))};
}

void apply_overrides(RunConfig& c, const Overrides& o) {
  if (o.data) c.data.path = *o.data;
  if (o.out) c.out = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.workers) {
    if (*o.workers < 1) throw ConfigError("--workers must be at least 1");
    c.workers = *o.workers;
  }
  if (o.metric) {
    c.brbvs.metric = parse_measure(*o.metric);
    c.bench.metrics = {c.brbvs.metric};
  }
  if (o.copula) {
    c.brbvs.copula = parse_copula(*o.copula);
    c.model.copula = c.brbvs.copula;
  }
  if (o.margins) {
    const auto links = parse_margins(*o.margins);
    c.brbvs.link1 = c.model.link1 = links[0];
    c.brbvs.link2 = c.model.link2 = links[1];
  }
  if (o.kmax) c.brbvs.k_max = *o.kmax;
  if (o.tau) c.brbvs.tau = *o.tau;
  if (o.B) c.brbvs.B = *o.B;
  if (o.m) c.brbvs.m = *o.m;
  if (o.scenario || o.n || o.p) c.bench.grid.clear();
  if (o.scenario) c.scenario.scenario = parse_scenario(*o.scenario);
  if (o.n) c.scenario.n = *o.n;
  if (o.p) c.scenario.p = *o.p;
  if (o.n_rep) c.bench.n_rep = *o.n_rep;
}

}  // namespace brbvs::cli
