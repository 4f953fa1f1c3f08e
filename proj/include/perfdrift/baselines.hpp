#pragma once

// Deployed-model baselines, checkerboard/model routing, and the traditional
// drift detectors used for comparison (ADWIN on a feature, DDM on errors).

#include "perfdrift/random.hpp"
#include "perfdrift/stream_model.hpp"

#include <cstddef>
#include <deque>
#include <limits>
#include <span>
#include <variant>
#include <vector>

namespace perfdrift::baselines {

/// Fair coin over {0, 1}.
ClassLabel rc_predict(Rng& rng);

struct ThresholdModel {
    double threshold = 0.0;
    ClassLabel positive_class = kClass1;
    std::size_t feature = 0;
};

/// positive_class iff the selected feature is strictly above the threshold.
ClassLabel tc_predict(std::span<const double> features, const ThresholdModel& model);

struct FixedMix {
    double mix = 0.0;
};

/// Deployment probability moves linearly from `start` at t=0 to `end` at t=T.
struct LinearRamp {
    double start = 0.0;
    double end = 1.0;
};

using MixPolicy = std::variant<FixedMix, LinearRamp>;

void validate(const MixPolicy& policy);

/// Probability that the instance at `timestep` goes to the deployed model.
double deployed_probability(const MixPolicy& policy, std::size_t timestep, std::size_t total);

Source route(const MixPolicy& policy, std::size_t timestep, std::size_t total, Rng& rng);

// ---------------------------------------------------------------------------

struct AdwinConfig {
    double delta = 0.002;
    std::size_t max_buckets = 5;  // per row, before merging into the next row
    std::size_t clock = 32;       // check for cuts every `clock` insertions
    std::size_t min_window_length = 5;
    std::size_t grace_period = 10;
};

/// ADaptive WINdowing over an exponential histogram. Row i holds buckets of
/// 2^i elements, newest first; a row never holds more than max_buckets.
class Adwin {
public:
    explicit Adwin(AdwinConfig config = {});

    /// Inserts `value`; returns true if a cut dropped older data.
    bool update(double value);

    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] double total() const noexcept { return total_; }
    [[nodiscard]] double variance() const noexcept { return width_ > 0 ? variance_ / static_cast<double>(width_) : 0.0; }
    [[nodiscard]] double estimation() const noexcept {
        return width_ > 0 ? total_ / static_cast<double>(width_) : 0.0;
    }
    [[nodiscard]] std::size_t detections() const noexcept { return detections_; }
    [[nodiscard]] std::size_t row_count() const noexcept { return rows_.size(); }
    [[nodiscard]] std::size_t buckets_in_row(std::size_t row) const { return rows_.at(row).size(); }
    /// Sum of the element counts of every bucket; always equals width().
    [[nodiscard]] std::size_t bucket_element_count() const noexcept;
    [[nodiscard]] const AdwinConfig& config() const noexcept { return config_; }

private:
    struct Bucket {
        double total = 0.0;
        double variance = 0.0;  // sum of squared deviations
    };

    void compress();
    std::size_t drop_oldest();
    bool cut_exists();
    [[nodiscard]] bool cut_significant(double n0, double n1, double mean_gap) const;

    AdwinConfig config_;
    std::vector<std::deque<Bucket>> rows_;  // front = newest
    std::size_t width_ = 0;
    double total_ = 0.0;
    double variance_ = 0.0;
    std::size_t ticks_ = 0;
    std::size_t detections_ = 0;
};

// ---------------------------------------------------------------------------

enum class DdmLevel { Stable, Warning, Drift };

struct DdmConfig {
    std::size_t warm_up = 30;
    double warning_threshold = 2.0;
    double drift_threshold = 3.0;
};

/// Drift Detection Method over a stream of prediction outcomes.
class Ddm {
public:
    explicit Ddm(DdmConfig config = {});

    DdmLevel update(bool correct);

    [[nodiscard]] std::size_t count() const noexcept { return n_; }
    [[nodiscard]] double error_rate() const noexcept { return p_; }
    [[nodiscard]] double error_std() const noexcept { return s_; }
    [[nodiscard]] double p_min() const noexcept { return p_min_; }
    [[nodiscard]] double s_min() const noexcept { return s_min_; }
    [[nodiscard]] std::size_t detections() const noexcept { return detections_; }

private:
    void reset();

    DdmConfig config_;
    std::size_t n_ = 0;
    double p_ = 0.0;
    double s_ = 0.0;
    double p_min_ = std::numeric_limits<double>::infinity();
    double s_min_ = std::numeric_limits<double>::infinity();
    std::size_t detections_ = 0;
};

}  // namespace perfdrift::baselines
