#include <algorithm>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gsgd/data.hpp"
#include "gsgd/errors.hpp"
#include "gsgd/stats.hpp"
#include "test_support.hpp"

using namespace gsgd;

namespace {

const std::string kFixtures = GSGD_FIXTURE_DIR;

Dataset numbered(std::size_t n, std::size_t classes = 2) {
  Dataset ds;
  ds.name = "numbered";
  ds.num_features = 1;
  ds.num_classes = classes;
  for (std::size_t k = 0; k < classes; ++k) ds.class_labels.push_back(std::to_string(k));
  for (std::size_t i = 0; i < n; ++i) ds.examples.push_back({{double(i)}, i % classes});
  ds.label_column = 1;
  return ds;
}

std::vector<double> ids(const std::vector<Example>& xs) {
  std::vector<double> out;
  for (const auto& e : xs) out.push_back(e.features[0]);
  return out;
}

}  // namespace

TEST_CASE("parse a tiny binary csv") {
  const auto ds = data::load_csv(kFixtures + "/toy3.csv");
  CHECK(ds.size() == 3);
  CHECK(ds.num_features == 2);
  CHECK(ds.num_classes == 2);
  CHECK(ds.class_labels == std::vector<std::string>{"yes", "no"});
  CHECK(ds.examples[0].label == 0);
  CHECK(ds.examples[1].label == 1);
  CHECK(ds.examples[2].label == 0);
  CHECK(ds.examples[2].features == std::vector<double>{3.25, 0.0});
  CHECK(ds.name == "toy3");
}

TEST_CASE("non-numeric cell names its row and column") {
  CsvSchema schema;
  schema.has_header = true;
  try {
    data::load_csv(kFixtures + "/bad_cell.csv", schema);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == 2);
    CHECK(std::string(e.what()).find("oops") != std::string::npos);
  }
}

TEST_CASE("ragged rows and unknown strict labels are rejected") {
  std::istringstream ragged("1,2,a\n3,b\n");
  CHECK_THROWS_AS(data::parse_csv(ragged), ParseError);

  CsvSchema strict;
  strict.class_labels = {"a", "b"};
  strict.strict = true;
  std::istringstream unknown("1,2,a\n3,4,c\n");
  CHECK_THROWS_AS(data::parse_csv(unknown, strict), ParseError);
}

TEST_CASE("label column can be moved and counted from the end") {
  std::istringstream in("x,1,2\ny,3,4\n");
  CsvSchema schema;
  schema.label_column = 0;
  const auto ds = data::parse_csv(in, schema);
  CHECK(ds.num_features == 2);
  CHECK(ds.examples[1].features == std::vector<double>{3, 4});
  CHECK(ds.class_labels == std::vector<std::string>{"x", "y"});
}

TEST_CASE("write_csv round-trips the layout") {
  std::istringstream in("h1,label,h2\n0.1,p,2\n1e-300,q,3.5\n");
  CsvSchema schema;
  schema.has_header = true;
  schema.label_column = 1;
  const auto ds = data::parse_csv(in, schema);
  std::ostringstream out;
  data::write_csv(ds, out);
  CHECK(out.str() == "h1,label,h2\n0.1,p,2\n1e-300,q,3.5\n");
}

TEST_CASE("split sizes follow the floor rule") {
  SUBCASE("N = 100") {
    const auto s = data::split(numbered(100), {0.2, 0.2, 1, false});
    CHECK(s.test.size() == 20);
    CHECK(s.validation.size() == 16);
    CHECK(s.train.size() == 64);
  }
  SUBCASE("N = 10") {
    const auto s = data::split(numbered(10), {0.2, 0.2, 1, false});
    CHECK(s.test.size() == 2);
    CHECK(s.validation.size() == 1);
    CHECK(s.train.size() == 7);
  }
  SUBCASE("too small") {
    CHECK_THROWS_AS(data::split(numbered(4), {0.2, 0.2, 1, false}), InputError);
  }
  SUBCASE("fractions outside (0, 1)") {
    CHECK_THROWS_AS(data::split(numbered(100), {0.0, 0.2, 1, false}), InputError);
    CHECK_THROWS_AS(data::split(numbered(100), {0.2, 1.0, 1, false}), InputError);
  }
}

TEST_CASE("split partitions the data deterministically") {
  const auto ds = numbered(57, 3);
  for (bool stratify : {false, true}) {
    CAPTURE(stratify);
    const auto a = data::split(ds, {0.2, 0.2, 5, stratify});
    const auto b = data::split(ds, {0.2, 0.2, 5, stratify});
    CHECK(ids(a.train) == ids(b.train));
    CHECK(ids(a.validation) == ids(b.validation));
    CHECK(ids(a.test) == ids(b.test));

    auto all = ids(a.train);
    for (double v : ids(a.validation)) all.push_back(v);
    for (double v : ids(a.test)) all.push_back(v);
    std::sort(all.begin(), all.end());
    CHECK(all == ids(ds.examples));

    const auto c = data::split(ds, {0.2, 0.2, 6, stratify});
    CHECK(ids(a.test) != ids(c.test));
  }
}

TEST_CASE("stratified split keeps class shares") {
  Dataset ds = numbered(0);
  for (int i = 0; i < 80; ++i) ds.examples.push_back({{double(i)}, 0});
  for (int i = 80; i < 100; ++i) ds.examples.push_back({{double(i)}, 1});
  const auto s = data::split(ds, {0.2, 0.2, 3, true});
  const auto positives = std::count_if(s.test.begin(), s.test.end(),
                                       [](const Example& e) { return e.label == 1; });
  CHECK(positives == 4);
}

TEST_CASE("make_batches") {
  const auto ds = numbered(64);
  SUBCASE("sizes") {
    const auto b = data::make_batches(ds.examples, 10, 1, 0);
    REQUIRE(b.size() == 7);
    for (std::size_t i = 0; i < 6; ++i) CHECK(b[i].examples.size() == 10);
    CHECK(b[6].examples.size() == 4);
    CHECK(data::batches_per_epoch(64, 10) == 7);
  }
  SUBCASE("one batch when m covers the set") {
    CHECK(data::make_batches(ds.examples, 64, 1, 0).size() == 1);
    CHECK(data::make_batches(ds.examples, 500, 1, 0).size() == 1);
  }
  SUBCASE("each epoch covers every example once") {
    for (std::int64_t epoch = 0; epoch < 3; ++epoch) {
      std::vector<double> seen;
      for (const auto& b : data::make_batches(ds.examples, 10, 1, epoch)) {
        for (double v : ids(b.examples)) seen.push_back(v);
      }
      std::sort(seen.begin(), seen.end());
      CHECK(seen == ids(ds.examples));
    }
  }
  SUBCASE("deterministic and epoch-dependent") {
    const auto a = data::make_batches(ds.examples, 10, 4, 2);
    const auto b = data::make_batches(ds.examples, 10, 4, 2);
    const auto c = data::make_batches(ds.examples, 10, 4, 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].id == b[i].id);
      CHECK(ids(a[i].examples) == ids(b[i].examples));
    }
    CHECK(ids(a[0].examples) != ids(c[0].examples));
  }
  SUBCASE("ids increase across epochs") {
    std::int64_t last = -1;
    for (std::int64_t epoch = 0; epoch < 3; ++epoch) {
      for (const auto& b : data::make_batches(ds.examples, 10, 1, epoch)) {
        CHECK(b.id > last);
        last = b.id;
      }
    }
    CHECK(last == 3 * 7 - 1);
  }
  SUBCASE("zero batch size") {
    CHECK_THROWS_AS(data::make_batches(ds.examples, 0, 1, 0), InputError);
  }
}

TEST_CASE("iqr filter removes the single outlier") {
  const auto ds = data::load_csv(kFixtures + "/iqr_single_outlier.csv");
  // Column {1..9, 100}: Q1 = 3.25, Q3 = 7.75, upper fence 7.75 + 3 * 4.5 = 21.25.
  std::vector<double> col;
  for (const auto& e : ds.examples) col.push_back(e.features[0]);
  std::sort(col.begin(), col.end());
  CHECK(stats::quantile_type7(col, 0.25) == 3.25);
  CHECK(stats::quantile_type7(col, 0.75) == 7.75);
  CHECK(data::iqr_outliers(ds, 3.0) == std::vector<std::size_t>{9});
  const auto filtered = data::iqr_filter(ds, 3.0);
  CHECK(filtered.size() == 9);
  CHECK(ds.size() == 10);
}

TEST_CASE("iqr filter edge cases") {
  SUBCASE("identical values") {
    const auto ds = data::load_csv(kFixtures + "/iqr_constant.csv");
    CHECK(data::iqr_outliers(ds, 3.0).empty());
  }
  SUBCASE("clean data passes through unchanged") {
    const auto ds = data::load_csv(kFixtures + "/iqr_clean.csv");
    const auto f = data::iqr_filter(ds, 3.0);
    std::ostringstream a, b;
    data::write_csv(ds, a);
    data::write_csv(f, b);
    CHECK(a.str() == b.str());
  }
  SUBCASE("both fences, several columns") {
    CsvSchema schema;
    schema.has_header = true;
    const auto ds = data::load_csv(kFixtures + "/iqr_two_sided.csv", schema);
    CHECK(data::iqr_outliers(ds, 3.0) == std::vector<std::size_t>{10, 11});
    CHECK(data::iqr_outliers(ds, 1.5) == std::vector<std::size_t>{10, 11});
    CHECK(data::iqr_outliers(ds, 1e9).empty());
  }
  SUBCASE("too few rows") {
    CHECK_THROWS_AS(data::iqr_outliers(numbered(3), 3.0), InputError);
  }
}
