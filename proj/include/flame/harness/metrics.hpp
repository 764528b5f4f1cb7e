#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "flame/numkit/types.hpp"

namespace flame::harness {

/// N_est values reported by the gmm log-likelihood columns.
inline constexpr std::array<int, 5> kNestColumns{1, 2, 5, 10, 20};

/// One evaluation row. Unset fields are written as empty cells.
struct MetricsRow {
  std::int64_t step = 0;
  std::optional<double> episode_return;
  std::optional<double> actor_loss;
  std::optional<double> critic_loss;
  std::optional<double> alpha;
  std::optional<double> entropy_estimate;
  std::array<std::optional<double>, 4> coverage{};
  std::optional<double> w1;
  std::array<std::optional<double>, kNestColumns.size()> loglik_mse{};

  /// Name of the first set field that is not finite, or empty.
  std::string first_non_finite() const;
};

std::vector<std::string> metrics_columns();
inline constexpr const char* kMetricsSchema = "# flame-metrics v1";

/// Append-only CSV: schema comment, header, then one flushed line per row.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path);
  void append(const MetricsRow& row);
  std::size_t rows() const { return rows_; }

 private:
  std::ofstream out_;
  std::size_t rows_ = 0;
};

std::string format_metrics_row(const MetricsRow& row);

/// Numeric CSV with a header line; '#' lines are skipped and empty cells read
/// as NaN. Throws std::runtime_error on ragged rows or non-numeric cells.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  bool has_column(const std::string& name) const;
  Vector column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace flame::harness
