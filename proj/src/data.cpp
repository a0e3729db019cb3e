#include "gsgd/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "gsgd/errors.hpp"
#include "gsgd/rng.hpp"
#include "gsgd/stats.hpp"

namespace gsgd::data {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_row(std::string_view line, char delim) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    cells.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::string format_shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

Dataset parse_csv(std::istream& in, const CsvSchema& schema, std::string name) {
  if (schema.strict && schema.class_labels.empty()) {
    throw InputError("strict label mode needs the list of known labels");
  }
  Dataset ds;
  ds.name = std::move(name);
  ds.class_labels = schema.class_labels;

  std::string line;
  std::size_t row = 0;
  std::size_t width = 0;
  bool header_pending = schema.has_header;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto cells = split_row(line, schema.delimiter);

    if (width == 0) {
      width = cells.size();
      if (width < 2) throw ParseError("row " + std::to_string(row) + ": need at least 2 columns", row, 0);
      const int idx = schema.label_column < 0 ? static_cast<int>(width) + schema.label_column
                                              : schema.label_column;
      if (idx < 0 || idx >= static_cast<int>(width)) {
        throw ParseError("label column " + std::to_string(schema.label_column) +
                             " outside a " + std::to_string(width) + "-column file",
                         row, 0);
      }
      ds.label_column = static_cast<std::size_t>(idx);
      ds.num_features = width - 1;
    } else if (cells.size() != width) {
      throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(width) +
                           " columns, found " + std::to_string(cells.size()),
                       row, 0);
    }

    if (header_pending) {
      ds.header = std::move(cells);
      header_pending = false;
      continue;
    }

    Example ex;
    ex.features.reserve(ds.num_features);
    for (std::size_t c = 0; c < width; ++c) {
      if (c == ds.label_column) continue;
      const std::string& cell = cells[c];
      double v = 0.0;
      const char* first = cell.data();
      const char* last = first + cell.size();
      if (*first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
        throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(c + 1) +
                             ": not a number: '" + cell + "'",
                         row, c + 1);
      }
      ex.features.push_back(v);
    }

    const std::string& label = cells[ds.label_column];
    auto it = std::find(ds.class_labels.begin(), ds.class_labels.end(), label);
    if (it == ds.class_labels.end()) {
      if (schema.strict) {
        throw ParseError("row " + std::to_string(row) + ", column " +
                             std::to_string(ds.label_column + 1) + ": unknown label '" + label + "'",
                         row, ds.label_column + 1);
      }
      ds.class_labels.push_back(label);
      it = ds.class_labels.end() - 1;
    }
    ex.label = static_cast<std::size_t>(it - ds.class_labels.begin());
    ds.examples.push_back(std::move(ex));
  }
  if (ds.examples.empty()) throw ParseError("no data rows", row, 0);
  ds.num_classes = ds.class_labels.size();
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset file " + path.string());
  return parse_csv(in, schema, path.stem().string());
}

void write_csv(const Dataset& ds, std::ostream& out) {
  const std::size_t width = ds.num_features + 1;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out << ',';
      out << cells[c];
    }
    out << '\n';
  };
  if (ds.header) emit(*ds.header);
  std::vector<std::string> cells(width);
  for (const Example& ex : ds.examples) {
    std::size_t f = 0;
    for (std::size_t c = 0; c < width; ++c) {
      cells[c] = c == ds.label_column ? ds.class_labels.at(ex.label)
                                      : format_shortest(ex.features[f++]);
    }
    emit(cells);
  }
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_csv(ds, out);
}

Splits split(const Dataset& ds, const SplitSpec& spec) {
  const std::size_t n = ds.size();
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) ||
      !(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0)) {
    throw InputError("split fractions must lie in (0, 1)");
  }
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.test_fraction));
  const std::size_t n_pool = n - n_test;
  const auto n_val =
      static_cast<std::size_t>(std::floor(static_cast<double>(n_pool) * spec.validation_fraction));
  const std::size_t n_train = n_pool - n_val;
  if (n < 5 || n_test == 0 || n_val == 0 || n_train == 0) {
    throw InputError("dataset '" + ds.name + "' with " + std::to_string(n) +
                     " examples is too small to split into train/validation/test");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng({spec.seed, stream::kSplit});
  rng.shuffle(order);

  if (spec.stratify) {
    // Spread each class evenly along the order so every tail slice carries
    // roughly the class proportions.
    std::vector<std::size_t> class_size(ds.num_classes, 0);
    for (std::size_t i : order) ++class_size[ds.examples[i].label];
    std::vector<std::size_t> seen(ds.num_classes, 0);
    std::vector<std::pair<double, std::size_t>> keyed;
    keyed.reserve(n);
    for (std::size_t i : order) {
      const std::size_t c = ds.examples[i].label;
      keyed.emplace_back((static_cast<double>(seen[c]++) + 0.5) / static_cast<double>(class_size[c]), i);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < n; ++k) order[k] = keyed[k].second;
  }

  Splits out;
  out.train.reserve(n_train);
  out.validation.reserve(n_val);
  out.test.reserve(n_test);
  for (std::size_t k = 0; k < n; ++k) {
    const Example& ex = ds.examples[order[k]];
    if (k >= n_pool) {
      out.test.push_back(ex);
    } else if (k >= n_train) {
      out.validation.push_back(ex);
    } else {
      out.train.push_back(ex);
    }
  }
  return out;
}

std::size_t batches_per_epoch(std::size_t n, std::size_t batch_size) {
  if (batch_size == 0) throw InputError("batch size must be at least 1");
  return (n + batch_size - 1) / batch_size;
}

std::vector<MiniBatch> make_batches(std::span<const Example> train, std::size_t batch_size,
                                    std::uint64_t seed, std::int64_t epoch) {
  const std::size_t count = batches_per_epoch(train.size(), batch_size);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng({seed, stream::kBatches, static_cast<std::uint64_t>(epoch)});
  rng.shuffle(order);

  std::vector<MiniBatch> batches(count);
  for (std::size_t b = 0; b < count; ++b) {
    batches[b].id = epoch * static_cast<std::int64_t>(count) + static_cast<std::int64_t>(b);
    const std::size_t begin = b * batch_size;
    const std::size_t end = std::min(begin + batch_size, train.size());
    batches[b].examples.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) batches[b].examples.push_back(train[order[i]]);
  }
  return batches;
}

std::vector<std::size_t> iqr_outliers(const Dataset& ds, double factor) {
  if (ds.size() < 4) throw InputError("IQR filtering needs at least 4 examples");
  if (!(factor >= 0.0)) throw InputError("IQR factor must be non-negative");
  std::vector<bool> flagged(ds.size(), false);
  std::vector<double> column(ds.size());
  for (std::size_t f = 0; f < ds.num_features; ++f) {
    for (std::size_t i = 0; i < ds.size(); ++i) column[i] = ds.examples[i].features[f];
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    const double q1 = stats::quantile_type7(sorted, 0.25);
    const double q3 = stats::quantile_type7(sorted, 0.75);
    const double iqr = q3 - q1;
    const double lo = q1 - factor * iqr;
    const double hi = q3 + factor * iqr;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (column[i] < lo || column[i] > hi) flagged[i] = true;
    }
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < flagged.size(); ++i) {
    if (flagged[i]) rows.push_back(i);
  }
  return rows;
}

Dataset iqr_filter(const Dataset& ds, double factor) {
  const auto drop = iqr_outliers(ds, factor);
  Dataset out = ds;
  out.examples.clear();
  std::size_t next = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (next < drop.size() && drop[next] == i) {
      ++next;
      continue;
    }
    out.examples.push_back(ds.examples[i]);
  }
  return out;
}

}  // namespace gsgd::data
