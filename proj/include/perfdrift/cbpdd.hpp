#pragma once

// CheckerBoard Performative Drift Detection.
//
// Stage 1 predicts by a checkerboard over (feature band, trial parity): the
// label of every band flips each trial of tau instances. Stage 2 measures, per
// class and trial, how the accuracy of checkerboard predictions for that class
// changes between the first and last `window` stream positions of the trial.
// Stage 3 tests the resulting deltas A against their negation B = -A.

#include "perfdrift/stats.hpp"
#include "perfdrift/stream_model.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace perfdrift::cbpdd {

struct SingleFeature {
    std::size_t index = 0;
};

/// Band index is the parity of the sum of all per-feature band indices.
struct ParityAllFeatures {};

using FeatureMode = std::variant<SingleFeature, ParityAllFeatures>;

struct CheckerboardParams {
    double f = 1.0;
    std::size_t tau = 1000;
    std::size_t window = 100;
    double alpha = 0.01;
    FeatureMode feature_mode = SingleFeature{0};
    std::size_t total = 100000;

    /// Parameter-only checks (no schema).
    void validate() const;
    /// Also requires every feature used to span at least two bands.
    void validate(const StreamSchema& schema) const;
};

/// Minimum number of non-skipped trials before a class gets a verdict.
inline constexpr std::size_t kDefaultMinTrials = 5;

/// floor(x / f) mod 2, with the non-negative (Euclidean) modulo.
int band_index(double x, double f);

/// Stage-1 checkerboard prediction for an instance arriving at `timestep`.
ClassLabel cb_predict(std::span<const double> features, std::size_t timestep, const CheckerboardParams& params);

struct ClassDeltas {
    std::vector<double> a;  // end-window minus start-window accuracy
    std::vector<double> b;  // -a
    std::size_t skipped = 0;
};

struct TrialDeltas {
    std::array<ClassDeltas, 2> per_class;
};

/// Per-trial density changes for class `c`. Only checkerboard-routed records
/// count; trials with an empty window for `c` are skipped.
ClassDeltas compute_trial_deltas(std::span<const PredictionRecord> records, ClassLabel c,
                                 const CheckerboardParams& params);
TrialDeltas compute_trial_deltas(std::span<const PredictionRecord> records, const CheckerboardParams& params);

/// Returns the p-value for two samples.
using TwoSampleTest = std::function<double(std::span<const double>, std::span<const double>)>;

/// Two-sided Mann-Whitney U.
TwoSampleTest mann_whitney_test(stats::Alternative alternative = stats::Alternative::TwoSided);

struct ClassVerdict {
    double p_value = 1.0;
    bool detected = false;
    std::size_t trials_used = 0;
    std::size_t skipped = 0;
    bool insufficient = false;  // fewer than min_trials usable trials
};

struct DetectionReport {
    std::array<ClassVerdict, 2> per_class{};
    bool any_detected = false;
    bool all_detected = false;
};

DetectionReport detect(std::span<const PredictionRecord> records, const CheckerboardParams& params,
                       std::size_t min_trials = kDefaultMinTrials, const TwoSampleTest& test = mann_whitney_test());

}  // namespace perfdrift::cbpdd
