#include "doctest.h"

#include "perfdrift/datasets.hpp"
#include "perfdrift/random.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace perfdrift;
using namespace perfdrift::datasets;

namespace {

RawDataset parse(const std::string& text, const std::string& label = "y",
                 const std::optional<std::string>& positive = std::nullopt) {
    std::istringstream in(text);
    return load_csv(in, "toy", label, positive);
}

std::vector<double> column(const NormalizedDataset& d, std::size_t c) {
    std::vector<double> out;
    for (const auto& i : d.instances) out.push_back(i.features[c]);
    return out;
}

// Re-expresses normalized instances as a raw dataset with the same labels.
RawDataset as_raw(const NormalizedDataset& d) {
    RawDataset raw;
    raw.name = "again";
    const std::size_t dims = d.instances.front().features.size();
    for (std::size_t c = 0; c < dims; ++c) raw.feature_names.push_back("f" + std::to_string(c));
    raw.kinds.assign(dims, FeatureKind::Numeric);
    for (const auto& i : d.instances) {
        raw.rows.push_back(i.features);
        raw.labels.push_back(i.label);
    }
    return raw;
}

std::string path_string(const char* dir, const char* file) {
    return (std::filesystem::path(dir) / file).string();
}

}  // namespace

TEST_CASE("normalization examples") {
    const auto raw = parse("a,b,c,y\n-2,0,7,0\n0,5,7,1\n2,10,7,0\n");
    const auto d = normalize(raw);
    CHECK(column(d, 0) == std::vector<double>{-1.0, 0.0, 1.0});
    CHECK(column(d, 1) == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(column(d, 2) == std::vector<double>{0.5, 0.5, 0.5});
    CHECK(d.report.features[0].target == FeatureRange{-1.0, 1.0});
    CHECK(d.report.features[1].target == FeatureRange{0.0, 1.0});
    CHECK(d.report.features[0].min == -2.0);
    CHECK(d.report.features[0].max == 2.0);
    const auto schema = d.schema();
    CHECK(schema.dims() == 3);
    CHECK(schema.range(0) == FeatureRange{-1.0, 1.0});
}

TEST_CASE("categorical columns are dropped and labels mapped") {
    const auto raw = parse("id,kind,score,status\n1,red,3.5,Approved\n2,blue,1.5,Rejected\n3,red,2.5,Approved\n",
                           "status", std::string("Approved"));
    CHECK(raw.kinds == std::vector<FeatureKind>{FeatureKind::Numeric, FeatureKind::Categorical, FeatureKind::Numeric});
    CHECK(raw.labels == std::vector<ClassLabel>{kClass1, kClass0, kClass1});
    const auto d = normalize(raw);
    CHECK(d.report.features[1].dropped);
    CHECK_FALSE(d.report.features[0].dropped);
    REQUIRE(d.instances.size() == 3);
    CHECK(d.instances[0].features.size() == 2);
    CHECK(d.schema().dims() == 2);
}

TEST_CASE("quoted fields, padding and CRLF line endings") {
    const auto raw = parse("\"a\", b ,y\r\n\"1,5\",2,1\r\n3, 4 ,0\r\n");
    CHECK(raw.feature_names == std::vector<std::string>{"a", "b"});
    CHECK(raw.kinds[0] == FeatureKind::Categorical);  // "1,5" is not a number
    CHECK(raw.rows[1][1] == 4.0);
    CHECK(split_csv_line("x,\"say \"\"hi\"\"\",z") == std::vector<std::string>{"x", "say \"hi\"", "z"});
}

TEST_CASE("rows with missing numeric values are dropped and counted") {
    const auto raw = parse("a,b,y\n1,,0\n2,3,1\nNaN,4,0\n5,6,1\n");
    const auto d = normalize(raw);
    CHECK(d.instances.size() == 2);
    CHECK(d.report.dropped_rows == 2);
}

TEST_CASE("load errors") {
    CHECK_THROWS_AS(parse(""), LoadError);
    CHECK_THROWS_AS(parse("a,y\n"), LoadError);
    CHECK_THROWS_AS(parse("a,b\n1,2\n"), LoadError);
    CHECK_THROWS_AS(parse("a,y\n1,0\n2,1\n3,2\n", "y", std::string("1")), LoadError);
    CHECK_THROWS_AS(parse("a,y\n1,0\n2,yes\n"), LoadError);
    CHECK_THROWS_AS(parse("a,y\n1,0\n2\n"), LoadError);
    CHECK_THROWS_AS(parse("a,y\n1,no\n2,yes\n", "y", std::string("maybe")), LoadError);
    CHECK_THROWS_AS(normalize(parse("a,y\nred,0\nblue,1\n")), LoadError);
    CHECK_THROWS_AS(load_csv(std::filesystem::path("/nonexistent/file.csv"), "y"), LoadError);
}

TEST_CASE("class balance") {
    const auto balanced = class_balance(parse("a,y\n1,0\n2,1\n3,0\n4,1\n"));
    CHECK(balanced.fraction[0] == 0.5);
    CHECK(balanced.fraction[1] == 0.5);
    CHECK_FALSE(balanced.single_class);
    const auto single = class_balance(parse("a,y\n1,0\n2,0\n"));
    CHECK(single.fraction[0] == 1.0);
    CHECK(single.fraction[1] == 0.0);
    CHECK(single.single_class);
}

TEST_CASE("normalization: range, row count, labels and idempotence on random tables") {
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        RawDataset raw;
        raw.name = "random";
        const std::size_t cols = 1 + rng() % 6;
        const std::size_t rows = 2 + rng() % 60;
        for (std::size_t c = 0; c < cols; ++c) raw.feature_names.push_back("c" + std::to_string(c));
        raw.kinds.assign(cols, FeatureKind::Numeric);
        std::vector<double> offsets(cols);
        std::vector<bool> constant(cols);
        for (std::size_t c = 0; c < cols; ++c) {
            offsets[c] = uniform(rng, -50.0, 50.0);
            // A negative constant column lands on 0, which reads back as
            // non-negative; constants here stay non-negative.
            constant[c] = rng() % 5 == 0;
            if (constant[c]) offsets[c] = std::abs(offsets[c]);
        }
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<double> row(cols);
            for (std::size_t c = 0; c < cols; ++c) row[c] = constant[c] ? offsets[c] : offsets[c] + uniform(rng, -10.0, 10.0);
            raw.rows.push_back(row);
            raw.labels.push_back(ClassLabel(static_cast<int>(rng() & 1)));
        }
        const auto once = normalize(raw);
        REQUIRE(once.instances.size() == rows);
        const auto schema = once.schema();
        for (std::size_t r = 0; r < rows; ++r) {
            CHECK(schema.validates(once.instances[r]));
            CHECK(once.instances[r].label == raw.labels[r]);
        }
        const auto twice = normalize(as_raw(once));
        REQUIRE(twice.instances.size() == rows);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                CHECK(std::abs(twice.instances[r].features[c] - once.instances[r].features[c]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("loading from a file path uses the file stem as the name") {
    const auto path = std::filesystem::temp_directory_path() / "perfdrift_toy_dataset.csv";
    {
        std::ofstream out(path);
        out << "x,label\n0.1,1\n0.2,0\n";
    }
    const auto raw = load_csv(path, "label");
    CHECK(raw.name == "perfdrift_toy_dataset");
    CHECK(raw.rows.size() == 2);
    std::filesystem::remove(path);
}

TEST_CASE("published datasets, when present") {
    const auto credit = path_string(PERFDRIFT_DATA_DIR, "creditcard.csv");
    if (std::filesystem::exists(credit)) {
        const auto raw = load_csv(credit, "Class");
        CHECK(raw.rows.size() == 284807);
        const auto d = normalize(raw);
        CHECK(d.schema().dims() == 30);  // Time, V1..V28, Amount
        CHECK(class_balance(raw).fraction[1] == doctest::Approx(0.00172).epsilon(0.01));
    } else {
        MESSAGE("creditcard.csv not present; skipped");
    }
    const auto water = path_string(PERFDRIFT_DATA_DIR, "water_potability.csv");
    if (std::filesystem::exists(water)) {
        const auto raw = load_csv(water, "Potability");
        CHECK(raw.rows.size() == 3276);
        CHECK(raw.feature_names.size() == 9);
    } else {
        MESSAGE("water_potability.csv not present; skipped");
    }
}
