#pragma once

// Performative stream generator. Weighted centroids are sampled by roulette
// wheel; the deployed predictor's output on each emitted instance feeds back
// into the selected centroid's weight. Sudden and incremental intrinsic drift
// move the centroids independently of any prediction.

#include "perfdrift/random.hpp"
#include "perfdrift/stream_model.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace perfdrift {

struct Centroid {
    std::vector<double> position;
    ClassLabel label = kClass0;
    double weight = 1.0;
    std::vector<double> velocity;  // components in [-1, 1]
    double spread = 0.0;           // isotropic Gaussian std. dev.; 0 emits the position
};

enum class FeedbackLoop { None, SelfFulfilling, SelfDefeating };

struct ClassFeedback {
    ClassLabel target = kClass0;  // prediction that triggers the loop
    FeedbackLoop loop = FeedbackLoop::None;
    double strength = 0.0;
};

/// Additive applies the +/- strength step to the raw weight. MassPreserving
/// applies the same step, then rescales every weight so the total stays at
/// its initial value; weights can neither grow without bound nor run out.
enum class WeightUpdate { Additive, MassPreserving };

struct FeedbackSpec {
    std::array<ClassFeedback, 2> per_class{ClassFeedback{kClass0}, ClassFeedback{kClass1}};
    WeightUpdate update = WeightUpdate::Additive;

    [[nodiscard]] const ClassFeedback& for_class(ClassLabel label) const { return per_class[label.index()]; }

    /// Both classes share `loop` and `strength`; each class targets its own label.
    static FeedbackSpec both(FeedbackLoop loop, double strength);
    /// Only `performative` has a loop; the other class is inert.
    static FeedbackSpec only(ClassLabel performative, FeedbackLoop loop, double strength);
    static FeedbackSpec none() { return {}; }

    void validate() const;
};

enum class DriftKind { None, Sudden, Incremental };

struct DriftSpec {
    DriftKind kind = DriftKind::None;
    std::size_t events = 0;
    double velocity_scale = 1e-4;

    void validate() const;
};

/// Timesteps floor(T*(j+1)/(E+1)), j = 0..E-1, at which drift events fire.
std::vector<std::size_t> drift_schedule(std::size_t horizon, std::size_t events);

/// Index i with probability weights[i] / sum(weights), by cumulative scan.
/// Throws DegenerateDistribution when no weight is positive.
std::size_t roulette_select(std::span<const double> weights, Rng& rng);

/// Weight update for a centroid whose emitted instance received `predicted`.
/// Self-defeating updates clamp at zero.
Centroid apply_feedback(Centroid centroid, ClassLabel predicted, const FeedbackSpec& spec);
double updated_weight(double weight, ClassLabel centroid_label, ClassLabel predicted, const FeedbackSpec& spec);

struct Prediction {
    Prediction(ClassLabel label_, Source source_ = Source::Checkerboard) : label(label_), source(source_) {}  // NOLINT

    ClassLabel label;
    Source source;
};

/// Queried once per emitted instance with (features, timestep).
using Predictor = std::function<Prediction(std::span<const double>, std::size_t)>;

/// Roulette wheel over mutable weights. Weights live in fixed-size blocks
/// whose sums are recomputed from scratch on every update, so sampling is
/// exact with respect to the stored weights and never accumulates drift.
class WeightTable {
public:
    WeightTable() = default;
    explicit WeightTable(std::span<const double> weights);

    [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
    [[nodiscard]] double weight(std::size_t i) const { return weights_[i]; }
    [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
    [[nodiscard]] double total() const noexcept;

    void set(std::size_t i, double weight);
    std::size_t sample(Rng& rng) const;

private:
    void refresh_block(std::size_t block);

    std::vector<double> weights_;
    std::vector<double> block_sums_;
    std::size_t block_size_ = 1;
};

/// Mutable state of one generated stream. Single-threaded.
class Generator {
public:
    Generator(StreamSchema schema, std::vector<Centroid> centroids, FeedbackSpec feedback, DriftSpec drift,
              std::size_t horizon, std::uint64_t seed);

    /// 2C centroids evenly spaced over a one-dimensional schema, labels
    /// alternating 0,1,0,1 along the axis.
    static Generator init_equidistant(const StreamSchema& schema, std::size_t per_class, double spread,
                                      bool weights_random, FeedbackSpec feedback, DriftSpec drift,
                                      std::size_t horizon, std::uint64_t seed);

    /// One zero-spread centroid per instance, all weights 1/N, no drift.
    static Generator from_dataset(const StreamSchema& schema, std::span<const Instance> instances,
                                  FeedbackSpec feedback, std::size_t horizon, std::uint64_t seed);

    /// Emits the next record, or nullopt once `horizon` records were emitted.
    std::optional<PredictionRecord> next_instance(const Predictor& predictor);

    /// Resamples every position uniformly over the schema ranges.
    void sudden_drift_event();
    /// Moves every centroid by velocity * scale, reflecting at range bounds.
    void incremental_step();
    /// Resamples every velocity component from U(-1, 1).
    void resample_velocities();

    [[nodiscard]] const StreamSchema& schema() const noexcept { return schema_; }
    /// Centroid weights are stored unscaled; see weights() for effective values.
    [[nodiscard]] const std::vector<Centroid>& centroids() const noexcept { return centroids_; }
    [[nodiscard]] std::vector<double> weights() const;
    [[nodiscard]] double total_weight() const { return table_.total() * scale_; }
    [[nodiscard]] double class_weight(ClassLabel label) const;
    [[nodiscard]] const FeedbackSpec& feedback() const noexcept { return feedback_; }
    [[nodiscard]] const DriftSpec& drift() const noexcept { return drift_; }
    [[nodiscard]] std::size_t horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::size_t emitted() const noexcept { return emitted_; }
    [[nodiscard]] const std::vector<std::size_t>& schedule() const noexcept { return schedule_; }

private:
    StreamSchema schema_;
    std::vector<Centroid> centroids_;
    FeedbackSpec feedback_;
    DriftSpec drift_;
    std::size_t horizon_;
    Rng rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    void feed_back(std::size_t index, ClassLabel predicted);
    void renormalize();

    WeightTable table_;
    double initial_total_ = 0.0;
    double scale_ = 1.0;  // effective weight = stored weight * scale_
    std::vector<std::size_t> schedule_;
    std::size_t next_event_ = 0;
    std::size_t emitted_ = 0;
};

}  // namespace perfdrift
