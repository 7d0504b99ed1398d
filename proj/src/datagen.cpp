#include "datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "error.hpp"
#include "rng.hpp"

namespace peerfl {

void PartitionPlan::check(std::size_t rows) const {
  std::vector<char> seen(rows, 0);
  std::size_t total = 0;
  for (std::size_t d = 0; d < assignments.size(); ++d) {
    if (assignments[d].empty()) throw std::logic_error("device " + std::to_string(d) + " has an empty shard");
    for (std::size_t i : assignments[d]) {
      if (i >= rows || seen[i]) throw std::logic_error("row " + std::to_string(i) + " assigned twice or out of range");
      seen[i] = 1;
      ++total;
    }
  }
  if (total != rows) throw std::logic_error("partition does not cover every row");
}

Dataset make_synthetic(std::size_t rows, std::size_t features, int classes, double separation, std::uint64_t seed) {
  if (classes <= 0) throw std::invalid_argument("classes must be positive");
  if (rows < static_cast<std::size_t>(classes)) throw std::invalid_argument("need at least one row per class");
  if (separation < 0.0) throw std::invalid_argument("separation must be non-negative");
  if (separation > 0.0 && features < static_cast<std::size_t>(classes))
    throw std::invalid_argument("separation > 0 needs at least as many features as classes");
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset d;
  d.rows = rows;
  d.cols = features;
  d.classes = classes;
  d.features.resize(rows * features);
  d.labels.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const int y = static_cast<int>(r % static_cast<std::size_t>(classes));
    d.labels[r] = y;
    for (std::size_t c = 0; c < features; ++c) {
      const double mean = (separation > 0.0 && c == static_cast<std::size_t>(y)) ? separation : 0.0;
      d.features[r * features + c] = mean + noise(rng);
    }
  }
  return d;
}

PartitionPlan partition_iid(const Dataset& data, std::size_t devices, std::uint64_t seed) {
  if (devices == 0) throw std::invalid_argument("need at least one device");
  if (devices > data.rows)
    throw std::invalid_argument("cannot split " + std::to_string(data.rows) + " rows across " +
                                std::to_string(devices) + " devices");
  std::vector<std::size_t> order(data.rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  PartitionPlan plan;
  const std::size_t base = data.rows / devices, extra = data.rows % devices;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < devices; ++k) {
    const std::size_t len = base + (k < extra ? 1 : 0);
    plan.assignments.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(pos),
                                  order.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return plan;
}

PartitionPlan partition_dirichlet(const Dataset& data, std::size_t devices, double alpha, std::uint64_t seed) {
  if (devices < 2) throw std::invalid_argument("dirichlet partition needs at least two devices");
  if (!(alpha > 0.0)) throw std::invalid_argument("dirichlet alpha must be positive");
  if (devices > data.rows) throw std::invalid_argument("more devices than rows");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(data.classes));
  for (std::size_t r = 0; r < data.rows; ++r) by_class[static_cast<std::size_t>(data.labels[r])].push_back(r);
  for (std::size_t c = 0; c < by_class.size(); ++c)
    if (by_class[c].empty()) throw std::invalid_argument("class " + std::to_string(c) + " has no rows");

  Rng rng(seed);
  std::gamma_distribution<double> gamma(alpha, 1.0);
  PartitionPlan plan;
  plan.assignments.resize(devices);
  std::vector<double> share(devices);
  for (auto& rows : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    double sum = 0.0;
    for (double& s : share) sum += (s = gamma(rng));
    if (!(sum > 0.0)) {
      std::fill(share.begin(), share.end(), 1.0);
      sum = static_cast<double>(devices);
    }
    double cum = 0.0;
    std::size_t start = 0;
    for (std::size_t k = 0; k < devices; ++k) {
      cum += share[k];
      const std::size_t end = (k + 1 == devices)
                                  ? rows.size()
                                  : std::min(rows.size(), static_cast<std::size_t>(std::llround(cum / sum * static_cast<double>(rows.size()))));
      for (std::size_t i = start; i < std::max(start, end); ++i) plan.assignments[k].push_back(rows[i]);
      start = std::max(start, end);
    }
  }
  for (auto& shard : plan.assignments) {
    if (!shard.empty()) continue;
    auto largest = std::max_element(plan.assignments.begin(), plan.assignments.end(),
                                    [](const auto& a, const auto& b) { return a.size() < b.size(); });
    shard.push_back(largest->back());
    largest->pop_back();
  }
  return plan;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column, int classes) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open CSV file '" + path + "'");
  if (classes <= 0) throw FormatError("CSV load needs a positive class count");
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw FormatError(path + ": no rows");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) throw FormatError(path + ": no column named '" + label_column + "'");
  const auto label_idx = static_cast<std::size_t>(label_it - header.begin());

  Dataset d;
  d.cols = header.size() - 1;
  d.classes = classes;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_csv_line(line);
    const std::string where = path + ": row " + std::to_string(row);
    if (cells.size() != header.size())
      throw FormatError(where + ": expected " + std::to_string(header.size()) + " cells, got " +
                        std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      if (c == label_idx) {
        int y = 0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), y);
        if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty())
          throw FormatError(where + ": label '" + cell + "' is not an integer");
        if (y < 0 || y >= classes)
          throw FormatError(where + ": label " + cell + " outside [0, " + std::to_string(classes) + ")");
        d.labels.push_back(y);
      } else {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v))
          throw FormatError(where + ": column '" + header[c] + "' value '" + cell + "' is not numeric");
        d.features.push_back(v);
      }
    }
  }
  if (row == 0) throw FormatError(path + ": no rows");
  d.rows = row;
  return d;
}

IndexSplit split_indices(std::size_t n, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0) throw std::invalid_argument("holdout fraction must be in [0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t held = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction));
  if (held >= n) held = n > 0 ? n - 1 : 0;
  IndexSplit out;
  out.held_out.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
  out.kept.assign(order.begin() + static_cast<std::ptrdiff_t>(held), order.end());
  std::sort(out.kept.begin(), out.kept.end());
  std::sort(out.held_out.begin(), out.held_out.end());
  return out;
}

}  // namespace peerfl
