#pragma once

// Dataset files: paired bounds, status codes and covariates, with
// declared categorical columns expanded to reference-coded indicators.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "brbvs/dataset.hpp"

namespace brbvs::cli {

struct LoadedData {
  SurvivalDataset data;
  /// Categorical column -> indicator columns it was expanded into.
  std::map<std::string, std::vector<std::string>> groups;
};

/// Reads a dataset. Bound columns may be named t1_lower/t1_upper/t2_lower/
/// t2_upper or t11/t12/t21/t22. Empty or NA upper bounds mean +infinity. A
/// combined "cens" column is ignored. Violations raise DataError naming the
/// line.
LoadedData read_dataset(const std::filesystem::path& path,
                        const std::vector<std::string>& categorical = {});

/// Parses dataset text (same rules as read_dataset).
LoadedData parse_dataset(const std::string& text, const std::vector<std::string>& categorical = {},
                         const std::string& source = "<input>");

void write_dataset(const std::filesystem::path& path, const SurvivalDataset& data);
std::string format_dataset(const SurvivalDataset& data);

/// Shortest-roundtrip-safe decimal form (%.17g); non-finite values as
/// "inf", "-inf" or "nan".
std::string format_double(double v);

/// Writes text to a file, creating parent directories; IO failures raise
/// ConfigError.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace brbvs::cli
