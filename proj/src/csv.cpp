#include "extkm/csv.hpp"

#include "extkm/errors.hpp"

#include <charconv>
#include <fstream>
#include <string>
#include <vector>

namespace extkm {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    std::string field = line.substr(start, pos == std::string::npos ? pos : pos - start);
    // tolerate trailing CR from CRLF files and surrounding blanks
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ' || field.back() == '\t')) field.pop_back();
    std::size_t lead = 0;
    while (lead < field.size() && (field[lead] == ' ' || field[lead] == '\t')) ++lead;
    out.push_back(field.substr(lead));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& field, std::size_t line_no, const std::string& col) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw parse_error("line " + std::to_string(line_no) + ": column '" + col + "' is not numeric: '" + field + "'");
  return value;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw schema_error("missing required column '" + name + "'");
}

} // namespace

CensoredSample load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open file: " + path);

  std::string line;
  std::size_t line_no = 0;
  // header: first non-comment line
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    header = split_fields(line);
    break;
  }
  if (header.empty()) throw schema_error("no header row in " + path);

  const std::size_t zi = find_column(header, schema.z);
  const std::size_t di = find_column(header, schema.delta);
  std::vector<std::size_t> xi;
  xi.reserve(schema.covariates.size());
  for (const auto& name : schema.covariates) xi.push_back(find_column(header, name));
  if (xi.empty()) throw schema_error("schema lists no covariate columns");

  CensoredSample sample;
  sample.m = static_cast<int>(xi.size());
  std::size_t needed = 0;
  for (std::size_t c : {zi, di}) needed = std::max(needed, c + 1);
  for (std::size_t c : xi) needed = std::max(needed, c + 1);

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_fields(line);
    if (fields.size() < needed)
      throw parse_error("line " + std::to_string(line_no) + ": expected at least " + std::to_string(needed) +
                        " fields, got " + std::to_string(fields.size()));

    const double z = parse_double(fields[zi], line_no, schema.z);
    if (!(z > 0.0)) throw parse_error("line " + std::to_string(line_no) + ": z must be positive, got " + fields[zi]);

    const double draw = parse_double(fields[di], line_no, schema.delta);
    if (draw != 0.0 && draw != 1.0)
      throw value_error("line " + std::to_string(line_no) + ": delta must be 0 or 1, got " + fields[di]);

    sample.z.push_back(z);
    sample.delta.push_back(static_cast<std::uint8_t>(draw));
    for (std::size_t c : xi) sample.x.push_back(parse_double(fields[c], line_no, "covariate"));
  }
  return sample;
}

} // namespace extkm
