#include "perfdrift/cbpdd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace perfdrift::cbpdd {

namespace {

// Alg. 1 lookup: index is band + 2 * trial parity.
constexpr std::array<int, 4> kPredictors{1, 0, 0, 1};

void check_feature_bands(const StreamSchema& schema, std::size_t feature, double f) {
    const double bands = schema.range(feature).width() / f;
    if (bands < 2.0) {
        throw ConfigError("feature split f=" + std::to_string(f) + " leaves feature " + std::to_string(feature) +
                          " with fewer than two bands");
    }
}

}  // namespace

void CheckerboardParams::validate() const {
    if (!(f > 0.0) || !std::isfinite(f)) {
        throw ConfigError("feature split f must be positive");
    }
    if (tau == 0 || window == 0) {
        throw ConfigError("trial length and window must be positive");
    }
    if (2 * window > tau) {
        throw ConfigError("window must not exceed half the trial length");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError("alpha must lie in (0, 1)");
    }
    if (total == 0) {
        throw ConfigError("total stream length must be positive");
    }
}

void CheckerboardParams::validate(const StreamSchema& schema) const {
    validate();
    if (const auto* single = std::get_if<SingleFeature>(&feature_mode)) {
        if (single->index >= schema.dims()) {
            throw ConfigError("checkerboard feature index " + std::to_string(single->index) + " out of range");
        }
        check_feature_bands(schema, single->index, f);
    } else {
        for (std::size_t i = 0; i < schema.dims(); ++i) {
            check_feature_bands(schema, i, f);
        }
    }
}

int band_index(double x, double f) {
    const auto k = static_cast<long long>(std::floor(x / f));
    return static_cast<int>(((k % 2) + 2) % 2);
}

ClassLabel cb_predict(std::span<const double> features, std::size_t timestep, const CheckerboardParams& params) {
    int band = 0;
    if (const auto* single = std::get_if<SingleFeature>(&params.feature_mode)) {
        if (single->index >= features.size()) {
            throw ConfigError("checkerboard feature index " + std::to_string(single->index) + " out of range");
        }
        band = band_index(features[single->index], params.f);
    } else {
        for (double x : features) {
            band += band_index(x, params.f);
        }
        band %= 2;
    }
    const auto trial_parity = static_cast<int>((timestep / params.tau) % 2);
    return ClassLabel(kPredictors[static_cast<std::size_t>(band + 2 * trial_parity)]);
}

namespace {

struct WindowCounts {
    std::size_t predicted = 0;
    std::size_t correct = 0;
};

WindowCounts count_window(std::span<const PredictionRecord> records, std::size_t begin, std::size_t end,
                          ClassLabel c) {
    const auto by_time = [](const PredictionRecord& r, std::size_t t) { return r.timestep < t; };
    auto it = std::lower_bound(records.begin(), records.end(), begin, by_time);
    WindowCounts counts;
    for (; it != records.end() && it->timestep < end; ++it) {
        if (it->source != Source::Checkerboard || it->prediction != c) {
            continue;
        }
        ++counts.predicted;
        if (it->instance.label == it->prediction) {
            ++counts.correct;
        }
    }
    return counts;
}

}  // namespace

ClassDeltas compute_trial_deltas(std::span<const PredictionRecord> records, ClassLabel c,
                                 const CheckerboardParams& params) {
    params.validate();
    ClassDeltas deltas;
    const std::size_t trials = params.total / params.tau;
    deltas.a.reserve(trials);
    deltas.b.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::size_t start = params.tau * t;
        const std::size_t end = params.tau * (t + 1);
        const auto first = count_window(records, start, start + params.window, c);
        const auto last = count_window(records, end - params.window, end, c);
        if (first.predicted == 0 || last.predicted == 0) {
            ++deltas.skipped;
            continue;
        }
        const double a = static_cast<double>(last.correct) / static_cast<double>(last.predicted) -
                         static_cast<double>(first.correct) / static_cast<double>(first.predicted);
        deltas.a.push_back(a);
        deltas.b.push_back(-a);
    }
    return deltas;
}

TrialDeltas compute_trial_deltas(std::span<const PredictionRecord> records, const CheckerboardParams& params) {
    return TrialDeltas{{compute_trial_deltas(records, kClass0, params), compute_trial_deltas(records, kClass1, params)}};
}

TwoSampleTest mann_whitney_test(stats::Alternative alternative) {
    return [alternative](std::span<const double> a, std::span<const double> b) {
        return stats::mann_whitney_u(a, b, alternative).p_value;
    };
}

DetectionReport detect(std::span<const PredictionRecord> records, const CheckerboardParams& params,
                       std::size_t min_trials, const TwoSampleTest& test) {
    const auto deltas = compute_trial_deltas(records, params);
    DetectionReport report;
    for (std::size_t c = 0; c < 2; ++c) {
        const auto& d = deltas.per_class[c];
        auto& verdict = report.per_class[c];
        verdict.trials_used = d.a.size();
        verdict.skipped = d.skipped;
        if (d.a.empty() || d.a.size() < min_trials) {
            verdict.insufficient = true;
            verdict.p_value = 1.0;
            verdict.detected = false;
            continue;
        }
        verdict.p_value = test(d.a, d.b);
        verdict.detected = verdict.p_value < params.alpha;
    }
    report.any_detected = report.per_class[0].detected || report.per_class[1].detected;
    report.all_detected = report.per_class[0].detected && report.per_class[1].detected;
    return report;
}

}  // namespace perfdrift::cbpdd
