#include "perfdrift/baselines.hpp"

#include <cmath>

namespace perfdrift::baselines {

ClassLabel rc_predict(Rng& rng) {
    return ClassLabel(uniform01(rng) < 0.5 ? 0 : 1);
}

ClassLabel tc_predict(std::span<const double> features, const ThresholdModel& model) {
    if (model.feature >= features.size()) {
        throw ConfigError("threshold model feature index out of range");
    }
    return features[model.feature] > model.threshold ? model.positive_class : model.positive_class.flipped();
}

void validate(const MixPolicy& policy) {
    const auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (const auto* fixed = std::get_if<FixedMix>(&policy)) {
        if (!in_unit(fixed->mix)) throw ConfigError("mix must lie in [0, 1]");
    } else {
        const auto& ramp = std::get<LinearRamp>(policy);
        if (!in_unit(ramp.start) || !in_unit(ramp.end)) throw ConfigError("ramp endpoints must lie in [0, 1]");
    }
}

double deployed_probability(const MixPolicy& policy, std::size_t timestep, std::size_t total) {
    if (const auto* fixed = std::get_if<FixedMix>(&policy)) {
        return fixed->mix;
    }
    const auto& ramp = std::get<LinearRamp>(policy);
    const double progress = total > 0 ? static_cast<double>(timestep) / static_cast<double>(total) : 0.0;
    return ramp.start + (ramp.end - ramp.start) * progress;
}

Source route(const MixPolicy& policy, std::size_t timestep, std::size_t total, Rng& rng) {
    const double p = deployed_probability(policy, timestep, total);
    // Degenerate probabilities consume no randomness.
    if (p <= 0.0) return Source::Checkerboard;
    if (p >= 1.0) return Source::DeployedModel;
    return uniform01(rng) < p ? Source::DeployedModel : Source::Checkerboard;
}

// ---------------------------------------------------------------------------
// ADWIN

Adwin::Adwin(AdwinConfig config) : config_(config) {
    if (!(config_.delta > 0.0 && config_.delta < 1.0)) {
        throw ConfigError("ADWIN delta must lie in (0, 1)");
    }
    if (config_.max_buckets < 2 || config_.clock == 0) {
        throw ConfigError("ADWIN needs at least two buckets per row and a positive clock");
    }
}

std::size_t Adwin::bucket_element_count() const noexcept {
    std::size_t count = 0;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        count += rows_[r].size() << r;
    }
    return count;
}

bool Adwin::update(double value) {
    ++width_;
    if (rows_.empty()) {
        rows_.emplace_back();
    }
    rows_[0].push_front(Bucket{value, 0.0});
    if (width_ > 1) {
        const double previous_mean = total_ / static_cast<double>(width_ - 1);
        const double diff = value - previous_mean;
        variance_ += static_cast<double>(width_ - 1) * diff * diff / static_cast<double>(width_);
    }
    total_ += value;
    compress();

    ++ticks_;
    if (ticks_ % config_.clock != 0 || width_ <= config_.grace_period) {
        return false;
    }
    const bool detected = cut_exists();
    if (detected) {
        ++detections_;
    }
    return detected;
}

void Adwin::compress() {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (rows_[r].size() <= config_.max_buckets) {
            break;
        }
        const double n = static_cast<double>(std::size_t{1} << r);
        const Bucket older = rows_[r].back();
        rows_[r].pop_back();
        const Bucket newer = rows_[r].back();
        rows_[r].pop_back();
        const double gap = older.total / n - newer.total / n;
        Bucket merged{older.total + newer.total, older.variance + newer.variance + n * n * gap * gap / (2.0 * n)};
        if (r + 1 == rows_.size()) {
            rows_.emplace_back();
        }
        rows_[r + 1].push_front(merged);
    }
}

std::size_t Adwin::drop_oldest() {
    const std::size_t row = rows_.size() - 1;
    const std::size_t n = std::size_t{1} << row;
    const Bucket oldest = rows_[row].back();
    rows_[row].pop_back();
    while (!rows_.empty() && rows_.back().empty()) {
        rows_.pop_back();
    }
    width_ -= n;
    total_ -= oldest.total;
    if (width_ == 0) {
        total_ = 0.0;
        variance_ = 0.0;
        return n;
    }
    const double dn = static_cast<double>(n);
    const double dw = static_cast<double>(width_);
    const double gap = oldest.total / dn - total_ / dw;
    variance_ -= oldest.variance + dn * dw * gap * gap / (dn + dw);
    if (variance_ < 0.0) {
        variance_ = 0.0;
    }
    return n;
}

bool Adwin::cut_significant(double n0, double n1, double mean_gap) const {
    const double w = static_cast<double>(width_);
    const double min_len = static_cast<double>(config_.min_window_length);
    const double delta_prime = std::log(2.0 * std::log(w) / config_.delta);
    const double m_recip = 1.0 / (n0 - min_len + 1.0) + 1.0 / (n1 - min_len + 1.0);
    const double epsilon = std::sqrt(2.0 * m_recip * variance() * delta_prime) + 2.0 / 3.0 * delta_prime * m_recip;
    return std::abs(mean_gap) > epsilon;
}

bool Adwin::cut_exists() {
    bool detected = false;
    bool reduce = true;
    const double min_len = static_cast<double>(config_.min_window_length);
    while (reduce && width_ > config_.grace_period) {
        reduce = false;
        double n0 = 0.0;
        double u0 = 0.0;
        double n1 = static_cast<double>(width_);
        double u1 = total_;
        // Walk from the oldest bucket towards the newest; the newest bucket
        // always stays on the recent side of the cut.
        for (std::size_t r = rows_.size(); r-- > 0 && !reduce;) {
            const double n2 = static_cast<double>(std::size_t{1} << r);
            const auto& row = rows_[r];
            for (std::size_t k = row.size(); k-- > 0;) {
                if (r == 0 && k == 0) {
                    break;
                }
                n0 += n2;
                n1 -= n2;
                u0 += row[k].total;
                u1 -= row[k].total;
                if (n0 >= min_len && n1 >= min_len && cut_significant(n0, n1, u0 / n0 - u1 / n1)) {
                    reduce = true;
                    detected = true;
                    break;
                }
            }
        }
        if (reduce) {
            drop_oldest();
        }
    }
    return detected;
}

// ---------------------------------------------------------------------------
// DDM

Ddm::Ddm(DdmConfig config) : config_(config) {
    if (!(config_.warning_threshold > 0.0) || !(config_.drift_threshold >= config_.warning_threshold)) {
        throw ConfigError("DDM thresholds must satisfy 0 < warning <= drift");
    }
}

void Ddm::reset() {
    n_ = 0;
    p_ = 0.0;
    s_ = 0.0;
    p_min_ = std::numeric_limits<double>::infinity();
    s_min_ = std::numeric_limits<double>::infinity();
}

DdmLevel Ddm::update(bool correct) {
    ++n_;
    const double error = correct ? 0.0 : 1.0;
    p_ += (error - p_) / static_cast<double>(n_);
    s_ = std::sqrt(p_ * (1.0 - p_) / static_cast<double>(n_));
    if (n_ <= config_.warm_up) {
        return DdmLevel::Stable;
    }
    if (p_ + s_ <= p_min_ + s_min_) {
        p_min_ = p_;
        s_min_ = s_;
    }
    // Strict comparisons: with p_min = s_min = 0 (an error-free stream) a
    // non-strict test would fire on every sample.
    if (p_ + s_ > p_min_ + config_.drift_threshold * s_min_) {
        ++detections_;
        reset();
        return DdmLevel::Drift;
    }
    if (p_ + s_ > p_min_ + config_.warning_threshold * s_min_) {
        return DdmLevel::Warning;
    }
    return DdmLevel::Stable;
}

}  // namespace perfdrift::baselines
