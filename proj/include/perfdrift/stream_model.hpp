#pragma once

// Core value types shared by every module: labels, instances, prediction
// records and the stream schema that declares feature ranges up front.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace perfdrift {

/// Invalid configuration or construction arguments.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Sampling requested from a distribution with no mass.
class DegenerateDistribution : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Binary class label. Any value other than 0 or 1 is rejected.
class ClassLabel {
public:
    constexpr explicit ClassLabel(int value) : value_(value) {
        if (value != 0 && value != 1) {
            throw ConfigError("class label must be 0 or 1, got " + std::to_string(value));
        }
    }

    [[nodiscard]] constexpr int value() const noexcept { return value_; }
    [[nodiscard]] constexpr std::size_t index() const noexcept { return static_cast<std::size_t>(value_); }
    [[nodiscard]] constexpr ClassLabel flipped() const noexcept { return ClassLabel(1 - value_); }

    friend constexpr bool operator==(ClassLabel, ClassLabel) = default;

private:
    int value_;
};

inline constexpr ClassLabel kClass0{0};
inline constexpr ClassLabel kClass1{1};

struct FeatureRange {
    double low = -1.0;
    double high = 1.0;

    [[nodiscard]] double width() const noexcept { return high - low; }
    [[nodiscard]] double midpoint() const noexcept { return 0.5 * (low + high); }
    [[nodiscard]] bool contains(double x) const noexcept { return x >= low && x <= high; }
    [[nodiscard]] double clamp(double x) const noexcept { return x < low ? low : (x > high ? high : x); }

    friend bool operator==(const FeatureRange&, const FeatureRange&) = default;
};

struct Instance {
    std::vector<double> features;
    ClassLabel label = kClass0;
};

/// Which predictor produced a record's prediction. Fixed at routing time.
enum class Source { Checkerboard, DeployedModel };

struct PredictionRecord {
    std::size_t timestep = 0;
    Instance instance;
    ClassLabel prediction = kClass0;
    Source source = Source::Checkerboard;
};

/// Immutable declaration of a stream's dimensionality and per-feature ranges.
class StreamSchema {
public:
    [[nodiscard]] std::size_t dims() const noexcept { return ranges_.size(); }
    [[nodiscard]] std::span<const FeatureRange> ranges() const noexcept { return ranges_; }
    [[nodiscard]] const FeatureRange& range(std::size_t feature) const { return ranges_.at(feature); }

    [[nodiscard]] bool validates(std::span<const double> features) const noexcept;
    [[nodiscard]] bool validates(const Instance& instance) const noexcept { return validates(instance.features); }

    /// Throws ConfigError naming the first offending component.
    void check(const Instance& instance) const;

private:
    friend StreamSchema make_stream_schema(std::size_t dims, std::vector<FeatureRange> ranges);
    explicit StreamSchema(std::vector<FeatureRange> ranges) : ranges_(std::move(ranges)) {}

    std::vector<FeatureRange> ranges_;
};

StreamSchema make_stream_schema(std::size_t dims, std::vector<FeatureRange> ranges);

/// `dims` features, each over the default [-1, 1] range.
StreamSchema make_default_schema(std::size_t dims);

[[nodiscard]] const char* to_string(Source source) noexcept;
Source source_from_string(const std::string& text);

}  // namespace perfdrift
