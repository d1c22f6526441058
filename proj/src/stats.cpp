#include "fidkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace fidkit {

double pcc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::runtime_error("correlation length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw std::runtime_error("correlation needs n >= 2");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::runtime_error("undefined correlation (zero variance)");
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> fractional_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * (double(i + 1) + double(j + 1));  // 1-based
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

double srcc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::runtime_error("correlation length mismatch");
  const auto rx = fractional_ranks(x);
  const auto ry = fractional_ranks(y);
  return pcc(rx, ry);
}

std::size_t MetricTable::col_index(const std::string& name) const {
  for (std::size_t c = 0; c < col_labels.size(); ++c)
    if (col_labels[c] == name) return c;
  throw std::runtime_error("unknown column \"" + name + "\"");
}

MetricTable read_metric_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(cells));
  }
  if (rows.size() < 2)
    throw std::runtime_error(path + ": need a header and at least one row");
  MetricTable t;
  const std::size_t ncols = rows[0].size();
  if (ncols < 2)
    throw std::runtime_error(path + ": need a label column and a metric");
  t.col_labels.assign(rows[0].begin() + 1, rows[0].end());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != ncols)
      throw std::runtime_error(path + ": ragged row at line " +
                               std::to_string(r + 1));
    t.row_labels.push_back(rows[r][0]);
    for (std::size_t c = 1; c < ncols; ++c) {
      const std::string& cell = rows[r][c];
      if (cell.empty() || cell == "NA" || cell == "nan") {
        t.values.push_back(std::nullopt);
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw std::runtime_error(path + ": unparsable cell \"" + cell +
                                 "\" at line " + std::to_string(r + 1));
      t.values.push_back(v);
    }
  }
  return t;
}

std::vector<ColumnCorrelation> correlate_table(const MetricTable& table,
                                               const std::string& target) {
  const std::size_t tc = table.col_index(target);
  std::vector<ColumnCorrelation> out;
  for (std::size_t c = 0; c < table.col_labels.size(); ++c) {
    if (c == tc) continue;
    std::vector<double> x, y;
    for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
      const auto a = table.value(r, c);
      const auto b = table.value(r, tc);
      if (a && b) {
        x.push_back(*a);
        y.push_back(*b);
      }
    }
    if (x.empty())
      throw std::runtime_error("no rows where both \"" +
                               table.col_labels[c] + "\" and \"" + target +
                               "\" are present");
    ColumnCorrelation cc;
    cc.metric = table.col_labels[c];
    cc.n = x.size();
    cc.pcc = pcc(x, y);
    cc.srcc = srcc(x, y);
    out.push_back(std::move(cc));
  }
  return out;
}

}  // namespace fidkit
