#pragma once

// Tabular dataset ingestion for semi-synthetic streams: load a headed CSV,
// drop categorical columns, min-max scale numeric ones.

#include "perfdrift/stream_model.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace perfdrift::datasets {

class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class FeatureKind { Numeric, Categorical };

struct RawDataset {
    std::string name;
    std::vector<std::string> feature_names;
    std::vector<FeatureKind> kinds;
    /// Row-major cells; NaN marks a missing value or a categorical column.
    std::vector<std::vector<double>> rows;
    std::vector<ClassLabel> labels;
};

struct FeatureNormalization {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    FeatureRange target{0.0, 1.0};
    bool dropped = false;
};

struct NormalizationReport {
    std::vector<FeatureNormalization> features;
    std::size_t dropped_rows = 0;  // rows with a missing numeric value

    /// Ranges of the retained features, in output order.
    [[nodiscard]] std::vector<FeatureRange> retained_ranges() const;
};

struct NormalizedDataset {
    std::vector<Instance> instances;
    NormalizationReport report;

    [[nodiscard]] StreamSchema schema() const;
};

/// `positive_label` selects which label value maps to class 1. Without it
/// the label column must already hold 0/1.
RawDataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                    const std::optional<std::string>& positive_label = std::nullopt);
RawDataset load_csv(std::istream& in, const std::string& name, const std::string& label_column,
                    const std::optional<std::string>& positive_label = std::nullopt);

NormalizedDataset normalize(const RawDataset& dataset);

struct ClassBalance {
    std::array<double, 2> fraction{0.0, 0.0};
    bool single_class = false;
};

ClassBalance class_balance(const RawDataset& dataset);

/// Splits one CSV record, honoring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace perfdrift::datasets
