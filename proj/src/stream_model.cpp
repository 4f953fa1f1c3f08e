#include "perfdrift/stream_model.hpp"

#include <cmath>

namespace perfdrift {

bool StreamSchema::validates(std::span<const double> features) const noexcept {
    if (features.size() != ranges_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (!ranges_[i].contains(features[i])) {
            return false;
        }
    }
    return true;
}

void StreamSchema::check(const Instance& instance) const {
    if (instance.features.size() != ranges_.size()) {
        throw ConfigError("instance has " + std::to_string(instance.features.size()) +
                          " features, schema declares " + std::to_string(ranges_.size()));
    }
    for (std::size_t i = 0; i < ranges_.size(); ++i) {
        if (!ranges_[i].contains(instance.features[i])) {
            throw ConfigError("feature " + std::to_string(i) + " value " +
                              std::to_string(instance.features[i]) + " outside [" +
                              std::to_string(ranges_[i].low) + ", " + std::to_string(ranges_[i].high) + "]");
        }
    }
}

StreamSchema make_stream_schema(std::size_t dims, std::vector<FeatureRange> ranges) {
    if (dims == 0) {
        throw ConfigError("stream schema needs at least one feature");
    }
    if (ranges.size() != dims) {
        throw ConfigError("schema declares " + std::to_string(dims) + " features but " +
                          std::to_string(ranges.size()) + " ranges");
    }
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        const auto& r = ranges[i];
        if (!std::isfinite(r.low) || !std::isfinite(r.high) || !(r.low < r.high)) {
            throw ConfigError("feature " + std::to_string(i) + " range must satisfy low < high");
        }
    }
    return StreamSchema(std::move(ranges));
}

StreamSchema make_default_schema(std::size_t dims) {
    return make_stream_schema(dims, std::vector<FeatureRange>(dims, FeatureRange{}));
}

const char* to_string(Source source) noexcept {
    return source == Source::Checkerboard ? "checkerboard" : "model";
}

Source source_from_string(const std::string& text) {
    if (text == "checkerboard") {
        return Source::Checkerboard;
    }
    if (text == "model") {
        return Source::DeployedModel;
    }
    throw ConfigError("unknown record source '" + text + "'");
}

}  // namespace perfdrift
