#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace civr::harness {

enum class ReturnScale { Percent, Raw };

/// Per-period returns of a set of portfolios, one row per date.
struct ReturnsDataset {
  std::vector<std::int64_t> dates;  ///< yyyymmdd (or yyyymm for monthly files)
  std::vector<std::string> columns;
  Eigen::MatrixXd returns;
  std::string provenance;
};

/// Error raised for unreadable or malformed returns files.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads the first data block of a French-library style CSV: free-form
/// preamble lines, an optional header row, then `date, v1, ..., vk` rows.
/// Rows holding a missing-data sentinel (-99.99 or -999) are dropped, percent
/// values are divided by 100, and only the last `take_last` rows are kept.
ReturnsDataset parse_returns_csv(std::istream& in, std::optional<std::int64_t> take_last,
                                 ReturnScale scale, const std::string& provenance = "stream");
ReturnsDataset ingest_returns_csv(const std::string& path, std::optional<std::int64_t> take_last,
                                  ReturnScale scale);

/// Writes a header row and the data with round-trip exact number formatting.
void write_returns_csv(std::ostream& out, const ReturnsDataset& data);
void write_returns_csv(const std::string& path, const ReturnsDataset& data);

}  // namespace civr::harness
