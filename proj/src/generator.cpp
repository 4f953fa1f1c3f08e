#include "perfdrift/generator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

namespace perfdrift {

FeedbackSpec FeedbackSpec::both(FeedbackLoop loop, double strength) {
    FeedbackSpec spec;
    spec.per_class = {ClassFeedback{kClass0, loop, strength}, ClassFeedback{kClass1, loop, strength}};
    return spec;
}

FeedbackSpec FeedbackSpec::only(ClassLabel performative, FeedbackLoop loop, double strength) {
    FeedbackSpec spec;
    spec.per_class[performative.index()] = ClassFeedback{performative, loop, strength};
    return spec;
}

void FeedbackSpec::validate() const {
    for (const auto& entry : per_class) {
        if (!(entry.strength >= 0.0) || !std::isfinite(entry.strength)) {
            throw ConfigError("feedback strength must be a finite non-negative number");
        }
    }
}

void DriftSpec::validate() const {
    if (kind == DriftKind::None && events != 0) {
        throw ConfigError("drift kind 'none' cannot schedule events");
    }
    if (!(velocity_scale >= 0.0) || !std::isfinite(velocity_scale)) {
        throw ConfigError("drift velocity scale must be a finite non-negative number");
    }
}

std::vector<std::size_t> drift_schedule(std::size_t horizon, std::size_t events) {
    std::vector<std::size_t> times;
    times.reserve(events);
    const std::size_t parts = events + 1;
    const std::size_t quotient = horizon / parts;
    const std::size_t remainder = horizon % parts;
    for (std::size_t j = 1; j <= events; ++j) {
        // floor(T*j/parts) without forming T*j.
        times.push_back(quotient * j + remainder * j / parts);
    }
    return times;
}

std::size_t roulette_select(std::span<const double> weights, Rng& rng) {
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) {
            throw ConfigError("roulette weights must be non-negative");
        }
        total += w;
    }
    if (!(total > 0.0)) {
        throw DegenerateDistribution("roulette selection over weights with zero total mass");
    }
    const double u = uniform01(rng) * total;
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) {
            last_positive = i;
            cumulative += weights[i];
            if (u < cumulative) {
                return i;
            }
        }
    }
    return last_positive;
}

double updated_weight(double weight, ClassLabel centroid_label, ClassLabel predicted, const FeedbackSpec& spec) {
    const auto& entry = spec.for_class(centroid_label);
    if (predicted != entry.target) {
        return weight;
    }
    switch (entry.loop) {
        case FeedbackLoop::SelfFulfilling: return weight + entry.strength;
        case FeedbackLoop::SelfDefeating: return std::max(0.0, weight - entry.strength);
        case FeedbackLoop::None: break;
    }
    return weight;
}

Centroid apply_feedback(Centroid centroid, ClassLabel predicted, const FeedbackSpec& spec) {
    centroid.weight = updated_weight(centroid.weight, centroid.label, predicted, spec);
    return centroid;
}

// ---------------------------------------------------------------------------
// WeightTable

WeightTable::WeightTable(std::span<const double> weights) : weights_(weights.begin(), weights.end()) {
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ConfigError("weights must be finite and non-negative");
        }
    }
    block_size_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(weights_.size())))));
    block_sums_.assign((weights_.size() + block_size_ - 1) / block_size_, 0.0);
    for (std::size_t b = 0; b < block_sums_.size(); ++b) {
        refresh_block(b);
    }
}

void WeightTable::refresh_block(std::size_t block) {
    const std::size_t begin = block * block_size_;
    const std::size_t end = std::min(begin + block_size_, weights_.size());
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        sum += weights_[i];
    }
    block_sums_[block] = sum;
}

double WeightTable::total() const noexcept {
    double total = 0.0;
    for (double s : block_sums_) {
        total += s;
    }
    return total;
}

void WeightTable::set(std::size_t i, double weight) {
    if (!(weight >= 0.0) || !std::isfinite(weight)) {
        throw ConfigError("weights must be finite and non-negative");
    }
    weights_.at(i) = weight;
    refresh_block(i / block_size_);
}

std::size_t WeightTable::sample(Rng& rng) const {
    const double total_mass = total();
    if (!(total_mass > 0.0)) {
        throw DegenerateDistribution("roulette selection over weights with zero total mass");
    }
    const double u = uniform01(rng) * total_mass;
    double before = 0.0;
    std::size_t chosen_block = block_sums_.size();
    for (std::size_t b = 0; b < block_sums_.size(); ++b) {
        if (block_sums_[b] > 0.0) {
            chosen_block = b;
            if (u < before + block_sums_[b]) {
                break;
            }
            before += block_sums_[b];
        }
    }
    // chosen_block now holds either the hit or, after rounding overshoot,
    // the last block with mass.
    const std::size_t begin = chosen_block * block_size_;
    const std::size_t end = std::min(begin + block_size_, weights_.size());
    const double r = u - before;
    double cumulative = 0.0;
    std::size_t last_positive = begin;
    for (std::size_t i = begin; i < end; ++i) {
        if (weights_[i] > 0.0) {
            last_positive = i;
            cumulative += weights_[i];
            if (r < cumulative) {
                return i;
            }
        }
    }
    return last_positive;
}

// ---------------------------------------------------------------------------
// Generator

namespace {

std::vector<double> weights_of(const std::vector<Centroid>& centroids) {
    std::vector<double> weights;
    weights.reserve(centroids.size());
    for (const auto& c : centroids) {
        weights.push_back(c.weight);
    }
    return weights;
}

}  // namespace

Generator::Generator(StreamSchema schema, std::vector<Centroid> centroids, FeedbackSpec feedback, DriftSpec drift,
                     std::size_t horizon, std::uint64_t seed)
    : schema_(std::move(schema)),
      centroids_(std::move(centroids)),
      feedback_(feedback),
      drift_(drift),
      horizon_(horizon),
      rng_(seed) {
    if (centroids_.empty()) {
        throw ConfigError("generator needs at least one centroid");
    }
    if (horizon_ == 0) {
        throw ConfigError("generator horizon must be positive");
    }
    feedback_.validate();
    drift_.validate();
    for (auto& c : centroids_) {
        if (c.position.size() != schema_.dims() || !schema_.validates(c.position)) {
            throw ConfigError("centroid position does not fit the stream schema");
        }
        if (c.velocity.empty()) {
            c.velocity.assign(schema_.dims(), 0.0);
        }
        if (c.velocity.size() != schema_.dims() ||
            std::any_of(c.velocity.begin(), c.velocity.end(), [](double v) { return !(v >= -1.0 && v <= 1.0); })) {
            throw ConfigError("centroid velocity components must lie in [-1, 1]");
        }
        if (!(c.spread >= 0.0) || !std::isfinite(c.spread)) {
            throw ConfigError("centroid spread must be finite and non-negative");
        }
    }
    table_ = WeightTable(weights_of(centroids_));
    initial_total_ = table_.total();
    if (drift_.kind != DriftKind::None) {
        schedule_ = drift_schedule(horizon_, drift_.events);
    }
}

Generator Generator::init_equidistant(const StreamSchema& schema, std::size_t per_class, double spread,
                                      bool weights_random, FeedbackSpec feedback, DriftSpec drift,
                                      std::size_t horizon, std::uint64_t seed) {
    if (schema.dims() != 1) {
        throw ConfigError("equidistant placement supports one-dimensional schemas only; use from_dataset");
    }
    if (per_class == 0) {
        throw ConfigError("need at least one centroid per class");
    }
    // Initial weights and velocities come from a sub-stream so the emission
    // stream is independent of how many setup draws were made.
    Rng setup(derive_seed(seed, 0));
    const auto& range = schema.range(0);
    const std::size_t count = 2 * per_class;
    const double gap = range.width() / static_cast<double>(count);
    std::vector<Centroid> centroids;
    centroids.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        Centroid c;
        c.position = {range.low + (static_cast<double>(k) + 0.5) * gap};
        c.label = ClassLabel(static_cast<int>(k % 2));
        c.weight = weights_random ? uniform01(setup) : 1.0;
        c.spread = spread;
        c.velocity = {drift.kind == DriftKind::Incremental ? uniform(setup, -1.0, 1.0) : 0.0};
        centroids.push_back(std::move(c));
    }
    return Generator(schema, std::move(centroids), feedback, drift, horizon, derive_seed(seed, 1));
}

Generator Generator::from_dataset(const StreamSchema& schema, std::span<const Instance> instances,
                                  FeedbackSpec feedback, std::size_t horizon, std::uint64_t seed) {
    if (instances.empty()) {
        throw ConfigError("cannot build a generator from an empty dataset");
    }
    const double weight = 1.0 / static_cast<double>(instances.size());
    std::vector<Centroid> centroids;
    centroids.reserve(instances.size());
    for (const auto& instance : instances) {
        Centroid c;
        c.position = instance.features;
        c.label = instance.label;
        c.weight = weight;
        c.spread = 0.0;
        centroids.push_back(std::move(c));
    }
    return Generator(schema, std::move(centroids), feedback, DriftSpec{}, horizon, derive_seed(seed, 1));
}

std::optional<PredictionRecord> Generator::next_instance(const Predictor& predictor) {
    if (emitted_ >= horizon_) {
        return std::nullopt;
    }
    const std::size_t t = emitted_;
    while (next_event_ < schedule_.size() && schedule_[next_event_] <= t) {
        if (drift_.kind == DriftKind::Sudden) {
            sudden_drift_event();
        } else if (drift_.kind == DriftKind::Incremental) {
            resample_velocities();
        }
        ++next_event_;
    }

    const std::size_t index = table_.sample(rng_);
    Centroid& centroid = centroids_[index];

    PredictionRecord record;
    record.timestep = t;
    record.instance.label = centroid.label;
    record.instance.features.resize(schema_.dims());
    for (std::size_t d = 0; d < schema_.dims(); ++d) {
        double x = centroid.position[d];
        if (centroid.spread > 0.0) {
            x += centroid.spread * normal_(rng_);
        }
        record.instance.features[d] = schema_.range(d).clamp(x);
    }
    assert(schema_.validates(record.instance));

    const Prediction prediction = predictor(record.instance.features, t);
    record.prediction = prediction.label;
    record.source = prediction.source;

    feed_back(index, prediction.label);

    if (drift_.kind == DriftKind::Incremental) {
        incremental_step();
    }
    ++emitted_;
    return record;
}

void Generator::feed_back(std::size_t index, ClassLabel predicted) {
    Centroid& centroid = centroids_[index];
    if (feedback_.update == WeightUpdate::Additive) {
        const double weight = updated_weight(centroid.weight, centroid.label, predicted, feedback_);
        if (weight != centroid.weight) {
            centroid.weight = weight;
            table_.set(index, weight);
        }
        return;
    }
    const double effective = centroid.weight * scale_;
    const double weight = updated_weight(effective, centroid.label, predicted, feedback_);
    if (weight == effective) {
        return;
    }
    centroid.weight = weight / scale_;
    table_.set(index, centroid.weight);
    const double stored_total = table_.total();
    if (!(stored_total > 0.0)) {
        throw DegenerateDistribution("every centroid weight reached zero");
    }
    scale_ = initial_total_ / stored_total;
    if (scale_ > 1e100 || scale_ < 1e-100) {
        renormalize();
    }
}

void Generator::renormalize() {
    for (std::size_t i = 0; i < centroids_.size(); ++i) {
        centroids_[i].weight *= scale_;
        table_.set(i, centroids_[i].weight);
    }
    scale_ = 1.0;
}

void Generator::sudden_drift_event() {
    for (auto& c : centroids_) {
        for (std::size_t d = 0; d < c.position.size(); ++d) {
            const auto& range = schema_.range(d);
            c.position[d] = uniform(rng_, range.low, range.high);
        }
    }
}

void Generator::resample_velocities() {
    for (auto& c : centroids_) {
        for (double& v : c.velocity) {
            v = uniform(rng_, -1.0, 1.0);
        }
    }
}

void Generator::incremental_step() {
    const double scale = drift_.velocity_scale;
    const auto ranges = schema_.ranges();
    for (auto& c : centroids_) {
        for (std::size_t d = 0; d < ranges.size(); ++d) {
            const auto& range = ranges[d];
            double x = c.position[d] + c.velocity[d] * scale;
            // A single step is far smaller than the range, so one
            // reflection suffices; clamp guards against rounding.
            if (x > range.high) {
                x = 2.0 * range.high - x;
                c.velocity[d] = -c.velocity[d];
            } else if (x < range.low) {
                x = 2.0 * range.low - x;
                c.velocity[d] = -c.velocity[d];
            }
            c.position[d] = range.clamp(x);
        }
    }
}

std::vector<double> Generator::weights() const {
    auto weights = weights_of(centroids_);
    for (double& w : weights) w *= scale_;
    return weights;
}

double Generator::class_weight(ClassLabel label) const {
    double total = 0.0;
    for (const auto& c : centroids_) {
        if (c.label == label) total += c.weight;
    }
    return total * scale_;
}

}  // namespace perfdrift
