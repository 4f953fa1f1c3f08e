#include "perfdrift/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace perfdrift::datasets {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string s) {
    const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

bool is_missing_token(const std::string& s) {
    return s.empty() || s == "NA" || s == "N/A" || s == "NaN" || s == "nan" || s == "null" || s == "?";
}

std::optional<double> parse_number(const std::string& s) {
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    if (begin != end && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

ClassLabel map_label(const std::string& raw, const std::optional<std::string>& positive, std::size_t line) {
    if (positive) {
        return raw == *positive ? kClass1 : kClass0;
    }
    const auto number = parse_number(raw);
    if (number && (*number == 0.0 || *number == 1.0)) {
        return ClassLabel(static_cast<int>(*number));
    }
    throw LoadError("line " + std::to_string(line) + ": label '" + raw +
                    "' is not 0/1; pass the positive label value to map it");
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(trim(field));
            field.clear();
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    fields.push_back(trim(field));
    return fields;
}

RawDataset load_csv(std::istream& in, const std::string& name, const std::string& label_column,
                    const std::optional<std::string>& positive_label) {
    std::string line;
    if (!std::getline(in, line)) {
        throw LoadError(name + ": empty file");
    }
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) {
        line.erase(0, 3);
    }
    const auto header = split_csv_line(line);
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end()) {
        throw LoadError(name + ": label column '" + label_column + "' not found");
    }
    const auto label_index = static_cast<std::size_t>(label_it - header.begin());

    RawDataset dataset;
    dataset.name = name;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i != label_index) dataset.feature_names.push_back(header[i]);
    }
    dataset.kinds.assign(dataset.feature_names.size(), FeatureKind::Numeric);

    std::vector<std::string> raw_labels;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw LoadError(name + ": line " + std::to_string(line_number) + " has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(header.size()));
        }
        std::vector<double> row;
        row.reserve(dataset.feature_names.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == label_index) continue;
            const std::size_t column = row.size();
            if (is_missing_token(fields[i])) {
                row.push_back(kMissing);
            } else if (const auto number = parse_number(fields[i])) {
                row.push_back(*number);
            } else {
                dataset.kinds[column] = FeatureKind::Categorical;
                row.push_back(kMissing);
            }
        }
        if (is_missing_token(fields[label_index])) {
            throw LoadError(name + ": line " + std::to_string(line_number) + " has no label");
        }
        raw_labels.push_back(fields[label_index]);
        dataset.rows.push_back(std::move(row));
    }
    if (dataset.rows.empty()) {
        throw LoadError(name + ": no data rows");
    }

    const std::set<std::string> distinct(raw_labels.begin(), raw_labels.end());
    if (distinct.size() > 2) {
        throw LoadError(name + ": label column '" + label_column + "' has " + std::to_string(distinct.size()) +
                        " distinct values; only binary tasks are supported");
    }
    if (positive_label && distinct.size() == 2 && !distinct.contains(*positive_label)) {
        throw LoadError(name + ": positive label '" + *positive_label + "' does not occur in the label column");
    }
    dataset.labels.reserve(raw_labels.size());
    for (std::size_t r = 0; r < raw_labels.size(); ++r) {
        dataset.labels.push_back(map_label(raw_labels[r], positive_label, r + 2));
    }

    for (std::size_t c = 0; c < dataset.kinds.size(); ++c) {
        if (dataset.kinds[c] == FeatureKind::Categorical) {
            for (auto& row : dataset.rows) row[c] = kMissing;
        }
    }
    return dataset;
}

RawDataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                    const std::optional<std::string>& positive_label) {
    std::ifstream in(path);
    if (!in) {
        throw LoadError("cannot open dataset '" + path.string() + "'");
    }
    return load_csv(in, path.stem().string(), label_column, positive_label);
}

std::vector<FeatureRange> NormalizationReport::retained_ranges() const {
    std::vector<FeatureRange> ranges;
    for (const auto& f : features) {
        if (!f.dropped) ranges.push_back(f.target);
    }
    return ranges;
}

StreamSchema NormalizedDataset::schema() const {
    auto ranges = report.retained_ranges();
    const std::size_t dims = ranges.size();
    return make_stream_schema(dims, std::move(ranges));
}

NormalizedDataset normalize(const RawDataset& dataset) {
    std::vector<std::size_t> numeric;
    for (std::size_t c = 0; c < dataset.kinds.size(); ++c) {
        if (dataset.kinds[c] == FeatureKind::Numeric) numeric.push_back(c);
    }
    if (numeric.empty()) {
        throw LoadError(dataset.name + ": no numeric features to normalize");
    }

    NormalizedDataset out;
    std::vector<std::size_t> kept_rows;
    for (std::size_t r = 0; r < dataset.rows.size(); ++r) {
        const auto& row = dataset.rows[r];
        const bool complete = std::all_of(numeric.begin(), numeric.end(), [&](std::size_t c) { return !std::isnan(row[c]); });
        if (complete) {
            kept_rows.push_back(r);
        } else {
            ++out.report.dropped_rows;
        }
    }
    if (kept_rows.empty()) {
        throw LoadError(dataset.name + ": every row has a missing numeric value");
    }

    out.report.features.resize(dataset.kinds.size());
    for (std::size_t c = 0; c < dataset.kinds.size(); ++c) {
        auto& f = out.report.features[c];
        f.name = c < dataset.feature_names.size() ? dataset.feature_names[c] : "f" + std::to_string(c);
        if (dataset.kinds[c] == FeatureKind::Categorical) {
            f.dropped = true;
            continue;
        }
        f.min = std::numeric_limits<double>::infinity();
        f.max = -std::numeric_limits<double>::infinity();
        for (std::size_t r : kept_rows) {
            f.min = std::min(f.min, dataset.rows[r][c]);
            f.max = std::max(f.max, dataset.rows[r][c]);
        }
        f.target = f.min < 0.0 ? FeatureRange{-1.0, 1.0} : FeatureRange{0.0, 1.0};
    }

    out.instances.reserve(kept_rows.size());
    for (std::size_t r : kept_rows) {
        Instance instance;
        instance.label = dataset.labels[r];
        instance.features.reserve(numeric.size());
        for (std::size_t c : numeric) {
            const auto& f = out.report.features[c];
            double x = f.target.midpoint();
            if (f.max > f.min) {
                x = f.target.low + (dataset.rows[r][c] - f.min) / (f.max - f.min) * f.target.width();
            }
            instance.features.push_back(f.target.clamp(x));
        }
        out.instances.push_back(std::move(instance));
    }
    return out;
}

ClassBalance class_balance(const RawDataset& dataset) {
    ClassBalance balance;
    if (dataset.labels.empty()) {
        return balance;
    }
    std::array<std::size_t, 2> counts{0, 0};
    for (const auto label : dataset.labels) {
        ++counts[label.index()];
    }
    const auto n = static_cast<double>(dataset.labels.size());
    balance.fraction = {static_cast<double>(counts[0]) / n, static_cast<double>(counts[1]) / n};
    balance.single_class = counts[0] == 0 || counts[1] == 0;
    return balance;
}

}  // namespace perfdrift::datasets
