#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsgd/model.hpp"

namespace gsgd {

struct Dataset {
  std::string name;
  std::vector<Example> examples;
  std::size_t num_features = 0;
  std::size_t num_classes = 0;
  // Label strings indexed by class id (first-appearance order by default).
  std::vector<std::string> class_labels;

  // Layout of the source file, kept so filtered output matches the input.
  std::optional<std::vector<std::string>> header;
  std::size_t label_column = 0;

  std::size_t size() const noexcept { return examples.size(); }
};

struct CsvSchema {
  bool has_header = false;
  // Zero-based column index; negative values count from the end. Default: last.
  int label_column = -1;
  char delimiter = ',';
  // Known labels in class-id order. With `strict`, any other label is an error;
  // otherwise unseen labels are appended in first-appearance order.
  std::vector<std::string> class_labels;
  bool strict = false;
};

namespace data {

Dataset parse_csv(std::istream& in, const CsvSchema& schema = {}, std::string name = {});
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

// Same column layout as the source: features in shortest round-trip form,
// label string in its original column, header row if the source had one.
void write_csv(const Dataset& ds, std::ostream& out);
void write_csv(const Dataset& ds, const std::filesystem::path& path);

struct SplitSpec {
  double test_fraction = 0.20;
  double validation_fraction = 0.20;  // of the pool left after removing test
  std::uint64_t seed = 0;
  bool stratify = false;
};

struct Splits {
  std::vector<Example> train;
  std::vector<Example> validation;
  std::vector<Example> test;
};

// Seeded shuffle; test = last floor(N * test_fraction), validation = last
// floor(|pool| * validation_fraction) of the remaining pool, train = rest.
Splits split(const Dataset& ds, const SplitSpec& spec);

// Number of batches covering `n` examples with batch size m.
std::size_t batches_per_epoch(std::size_t n, std::size_t batch_size);

// Per-epoch seeded shuffle cut into ceil(n / m) batches. Batch ids are
// epoch * batches_per_epoch + position, so they increase across epochs.
std::vector<MiniBatch> make_batches(std::span<const Example> train, std::size_t batch_size,
                                    std::uint64_t seed, std::int64_t epoch);

// Row indices that have some feature outside [Q1 - f*IQR, Q3 + f*IQR], with
// quartiles computed once over the whole dataset.
std::vector<std::size_t> iqr_outliers(const Dataset& ds, double factor);

// Copy of `ds` without the rows reported by iqr_outliers.
Dataset iqr_filter(const Dataset& ds, double factor);

}  // namespace data
}  // namespace gsgd
