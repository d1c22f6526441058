#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fidkit {

// Sample Pearson correlation in float64. Throws on constant input.
double pcc(std::span<const double> x, std::span<const double> y);

// Fractional ranks (1-based); ties get the average of their rank span.
std::vector<double> fractional_ranks(std::span<const double> x);

// Spearman rank correlation: pcc of fractional ranks.
double srcc(std::span<const double> x, std::span<const double> y);

// R x C table of metric values with missing cells, as parsed from a CSV
// whose first column holds row labels and whose header names the metrics.
struct MetricTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::optional<double>> values;  // row-major R x C

  std::optional<double> value(std::size_t r, std::size_t c) const {
    return values[r * col_labels.size() + c];
  }
  std::size_t col_index(const std::string& name) const;  // throws if absent
};

MetricTable read_metric_table(const std::string& path);

struct ColumnCorrelation {
  std::string metric;
  double pcc = 0.0;
  double srcc = 0.0;
  std::size_t n = 0;  // rows where both this column and the target exist
};

// PCC and SRCC of every non-target column against the target, computed
// pairwise over rows where both cells are present.
std::vector<ColumnCorrelation> correlate_table(const MetricTable& table,
                                               const std::string& target);

}  // namespace fidkit
