#include "cli/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "brbvs/error.hpp"

namespace brbvs::cli {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(trim(field));
  return out;
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "na" || s == "NaN"; }

std::optional<double> parse_number(const std::string& s) {
  if (is_missing(s)) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
  return v;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw DataError(source + ": line " + std::to_string(line) + ": " + msg);
}

// Numeric levels sort by value, others lexicographically.
std::vector<std::string> sorted_levels(const std::set<std::string>& levels) {
  std::vector<std::string> out(levels.begin(), levels.end());
  const bool numeric = std::all_of(out.begin(), out.end(), [](const auto& l) { return parse_number(l).has_value(); });
  if (numeric) {
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return *parse_number(a) < *parse_number(b); });
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw ConfigError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

LoadedData parse_dataset(const std::string& text, const std::vector<std::string>& categorical,
                         const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) {
      header = split_line(line);
      break;
    }
  }
  if (header.empty()) throw DataError(source + ": empty file (no header)");

  auto find = [&](std::initializer_list<const char*> names) -> std::optional<std::size_t> {
    for (const char* n : names) {
      const auto it = std::find(header.begin(), header.end(), n);
      if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
    }
    return std::nullopt;
  };
  const char* canonical[6] = {"t1_lower", "t1_upper", "t2_lower", "t2_upper", "cens1", "cens2"};
  const std::optional<std::size_t> cols[6] = {find({"t1_lower", "t11"}), find({"t1_upper", "t12"}),
                                               find({"t2_lower", "t21"}), find({"t2_upper", "t22"}),
                                               find({"cens1"}),           find({"cens2"})};
  for (int k = 0; k < 6; ++k) {
    if (!cols[k]) throw DataError(source + ": missing required column " + canonical[k]);
  }
  std::vector<std::size_t> reserved;
  for (const auto& c : cols) reserved.push_back(*c);
  if (auto c = find({"cens"})) reserved.push_back(*c);

  std::vector<std::size_t> cov_cols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (std::find(reserved.begin(), reserved.end(), j) == reserved.end()) cov_cols.push_back(j);
  }
  for (const auto& name : categorical) {
    if (std::none_of(cov_cols.begin(), cov_cols.end(), [&](std::size_t j) { return header[j] == name; })) {
      throw ConfigError("categorical column '" + name + "' not found in " + source);
    }
  }
  auto is_categorical = [&](std::size_t j) {
    return std::find(categorical.begin(), categorical.end(), header[j]) != categorical.end();
  };

  struct Row {
    std::size_t line;
    std::vector<std::string> fields;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != header.size()) {
      fail(source, line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                std::to_string(fields.size()));
    }
    rows.push_back({line_no, std::move(fields)});
  }
  if (rows.empty()) throw DataError(source + ": no data rows");

  // Output columns: numeric covariates as-is, categorical ones expanded.
  LoadedData out;
  struct OutColumn {
    std::size_t source;
    std::optional<std::string> level;  // indicator of this level
  };
  std::vector<OutColumn> layout;
  for (std::size_t j : cov_cols) {
    if (!is_categorical(j)) {
      layout.push_back({j, std::nullopt});
      out.data.covariate_names.push_back(header[j]);
      continue;
    }
    std::set<std::string> levels;
    for (const auto& r : rows) {
      if (is_missing(r.fields[j])) fail(source, r.line, "missing value in categorical column " + header[j]);
      levels.insert(r.fields[j]);
    }
    const auto ordered = sorted_levels(levels);
    auto& group = out.groups[header[j]];
    for (std::size_t l = 1; l < ordered.size(); ++l) {
      layout.push_back({j, ordered[l]});
      out.data.covariate_names.push_back(header[j] + ordered[l]);
      group.push_back(out.data.covariate_names.back());
    }
  }

  const std::size_t n = rows.size();
  out.data.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(layout.size()));
  out.data.y1.reserve(n);
  out.data.y2.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Row& r = rows[i];
    auto bound = [&](int k, bool upper) -> double {
      const std::string& f = r.fields[*cols[k]];
      if (is_missing(f)) {
        if (upper) return kInf;
        fail(source, r.line, std::string("missing ") + canonical[k]);
      }
      const auto v = parse_number(f);
      if (!v) fail(source, r.line, std::string("non-numeric ") + canonical[k] + " '" + f + "'");
      return *v;
    };
    for (int nu = 0; nu < 2; ++nu) {
      const double lo = bound(2 * nu, false);
      const double hi = bound(2 * nu + 1, true);
      const std::string& code = r.fields[*cols[4 + nu]];
      CensorKind kind;
      try {
        kind = parse_censor_code(code);
      } catch (const Error& e) {
        fail(source, r.line, "cens" + std::to_string(nu + 1) + ": " + e.what());
      }
      MarginObservation obs{kind, lo, hi};
      try {
        obs.validate();
      } catch (const Error& e) {
        fail(source, r.line, "margin " + std::to_string(nu + 1) + ": " + e.what());
      }
      (nu == 0 ? out.data.y1 : out.data.y2).push_back(obs);
    }
    for (std::size_t c = 0; c < layout.size(); ++c) {
      const std::string& f = r.fields[layout[c].source];
      double v;
      if (layout[c].level) {
        v = f == *layout[c].level ? 1.0 : 0.0;
      } else {
        const auto num = parse_number(f);
        if (!num) {
          fail(source, r.line, "covariate " + header[layout[c].source] +
                                   (is_missing(f) ? " is missing" : " is not numeric: '" + f + "'"));
        }
        v = *num;
      }
      out.data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v;
    }
  }
  out.data.validate();
  return out;
}

LoadedData read_dataset(const std::filesystem::path& path, const std::vector<std::string>& categorical) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), categorical, path.string());
}

std::string format_dataset(const SurvivalDataset& data) {
  std::string out = "t1_lower,t1_upper,t2_lower,t2_upper,cens1,cens2";
  for (const auto& name : data.covariate_names) out += "," + name;
  out += '\n';
  auto upper = [](const MarginObservation& o) { return std::isinf(o.upper) ? std::string() : format_double(o.upper); };
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& a = data.y1[i];
    const auto& b = data.y2[i];
    out += format_double(a.lower) + ',' + upper(a) + ',' + format_double(b.lower) + ',' + upper(b) + ',' +
           to_code(a.kind) + ',' + to_code(b.kind);
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) {
      out += ',' + format_double(data.x(static_cast<Eigen::Index>(i), j));
    }
    out += '\n';
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const SurvivalDataset& data) {
  write_text(path, format_dataset(data));
}

}  // namespace brbvs::cli
