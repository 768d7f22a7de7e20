#pragma once

#include "extkm/sample.hpp"

#include <string>
#include <vector>

namespace extkm {

/// Names of the required columns in an input CSV. Extra columns are
/// ignored. Covariates must already be numeric codes.
struct CsvSchema {
  std::string z = "z";
  std::string delta = "delta";
  std::vector<std::string> covariates = {"x"};
};

/// Reads a UTF-8, comma-separated file with a header row. Lines starting
/// with '#' are skipped so the tool's own outputs can be re-ingested.
/// Throws schema_error when a named column is missing, parse_error for
/// non-numeric fields or z <= 0 (with the line number), value_error for
/// delta outside {0,1}.
CensoredSample load_csv(const std::string& path, const CsvSchema& schema = {});

} // namespace extkm
