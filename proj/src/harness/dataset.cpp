#include "civr/harness/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "civr/harness/config.hpp"

namespace civr::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n\"");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) out.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_date(const std::string& s, std::int64_t& v) {
  if (s.size() < 4) return false;
  for (char ch : s)
    if (ch < '0' || ch > '9') return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

/// A data row: an integer date and at least one numeric value.
bool parse_row(const std::vector<std::string>& fields, std::int64_t& date,
               std::vector<double>& values) {
  if (fields.size() < 2 || !parse_date(fields[0], date)) return false;
  values.resize(fields.size() - 1);
  for (std::size_t k = 1; k < fields.size(); ++k)
    if (!parse_double(fields[k], values[k - 1])) return false;
  return true;
}

bool is_sentinel(double v) {
  return std::abs(v + 99.99) < 1e-9 || std::abs(v + 999.0) < 1e-9;
}

}  // namespace

ReturnsDataset parse_returns_csv(std::istream& in, std::optional<std::int64_t> take_last,
                                 ReturnScale scale, const std::string& provenance) {
  if (take_last && *take_last < 1) throw DatasetError("take_last must be positive");
  std::vector<std::int64_t> dates;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  std::vector<std::string> previous;
  std::size_t width = 0;
  bool in_block = false;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = split_fields(line);
    std::int64_t date = 0;
    std::vector<double> values;
    if (!parse_row(fields, date, values)) {
      if (in_block) break;  // later blocks (annual, equal-weighted, ...) are ignored
      previous = fields;
      continue;
    }
    if (!in_block) {
      in_block = true;
      width = values.size();
      if (previous.size() == fields.size()) header = previous;
    }
    if (values.size() != width)
      throw DatasetError("line " + std::to_string(lineno) + ": expected " +
                         std::to_string(width) + " values, found " +
                         std::to_string(values.size()));
    bool sentinel = false;
    for (double v : values) sentinel = sentinel || is_sentinel(v);
    if (sentinel) continue;
    dates.push_back(date);
    rows.push_back(std::move(values));
  }
  if (!in_block) throw DatasetError("no data rows found in " + provenance);
  if (rows.empty()) throw DatasetError("zero rows left after dropping missing-data rows");

  std::size_t first = 0;
  if (take_last && static_cast<std::size_t>(*take_last) < rows.size())
    first = rows.size() - static_cast<std::size_t>(*take_last);

  ReturnsDataset out;
  out.provenance = provenance;
  const auto count = static_cast<Eigen::Index>(rows.size() - first);
  out.returns.resize(count, static_cast<Eigen::Index>(width));
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto& row = rows[first + static_cast<std::size_t>(i)];
    out.dates.push_back(dates[first + static_cast<std::size_t>(i)]);
    for (std::size_t j = 0; j < width; ++j)
      out.returns(i, static_cast<Eigen::Index>(j)) = scale == ReturnScale::Percent ? row[j] / 100.0 : row[j];
  }
  if (!header.empty()) {
    out.columns.assign(header.begin() + 1, header.end());
  } else {
    for (std::size_t j = 0; j < width; ++j) out.columns.push_back("c" + std::to_string(j + 1));
  }
  return out;
}

ReturnsDataset ingest_returns_csv(const std::string& path, std::optional<std::int64_t> take_last,
                                  ReturnScale scale) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open '" + path + "'");
  return parse_returns_csv(in, take_last, scale, path);
}

void write_returns_csv(std::ostream& out, const ReturnsDataset& data) {
  out << "date";
  for (const auto& c : data.columns) out << ',' << c;
  out << '\n';
  for (Eigen::Index i = 0; i < data.returns.rows(); ++i) {
    out << data.dates[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < data.returns.cols(); ++j)
      out << ',' << format_double(data.returns(i, j));
    out << '\n';
  }
}

void write_returns_csv(const std::string& path, const ReturnsDataset& data) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write '" + path + "'");
  write_returns_csv(out, data);
}

}  // namespace civr::harness
