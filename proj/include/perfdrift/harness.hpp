#pragma once

// Seeded experiment runner. A scenario is a declarative JSON document naming
// the generator, the routing/model setup, the detector, a sigma grid and one
// swept parameter; the runner executes every (swept value, sigma, repetition)
// combination and aggregates detection rates.

#include "perfdrift/baselines.hpp"
#include "perfdrift/cbpdd.hpp"
#include "perfdrift/datasets.hpp"
#include "perfdrift/generator.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace perfdrift::harness {

/// Malformed or inconsistent scenario document.
class ScenarioError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

enum class DetectorKind { Cbpdd, Adwin, Ddm };
enum class ModelKind { None, Random, Threshold };
enum class SweepParam { Tau, F, Mix, Events, Sigma };
/// What ADWIN reads per instance: one raw feature, or the deployed model's
/// 0/1 correctness.
enum class AdwinSignal { Feature, Correctness };

std::string_view to_string(DetectorKind kind) noexcept;
std::string_view to_string(SweepParam param) noexcept;
SweepParam sweep_param_from_string(std::string_view text);

struct DatasetSource {
    std::filesystem::path path;
    std::string label_column;
    std::optional<std::string> positive_label;
};

struct GeneratorConfig {
    std::size_t centroids_per_class = 100;
    double spread = 0.01;
    bool random_weights = true;
    FeedbackLoop loop = FeedbackLoop::SelfFulfilling;
    std::vector<ClassLabel> performative{kClass0, kClass1};
    WeightUpdate update = WeightUpdate::Additive;
    DriftSpec drift;
    std::optional<DatasetSource> dataset;
};

struct DetectorConfig {
    DetectorKind kind = DetectorKind::Cbpdd;
    cbpdd::CheckerboardParams checkerboard;
    std::size_t min_trials = cbpdd::kDefaultMinTrials;
    stats::Alternative alternative = stats::Alternative::TwoSided;
    baselines::AdwinConfig adwin;
    AdwinSignal adwin_signal = AdwinSignal::Feature;
    std::size_t adwin_feature = 0;
    baselines::DdmConfig ddm;
};

struct Sweep {
    SweepParam param = SweepParam::Sigma;
    std::vector<double> values;
};

struct ScenarioConfig {
    std::string name;
    std::string description;
    std::size_t horizon = 100000;
    std::size_t repetitions = 50;
    std::uint64_t base_seed = 0;
    GeneratorConfig generator;
    DetectorConfig detector;
    ModelKind model = ModelKind::None;
    baselines::ThresholdModel threshold;
    baselines::MixPolicy mix = baselines::FixedMix{0.0};
    /// Ignored when the sweep itself is over sigma.
    std::vector<double> sigmas{0.0, 0.0001, 0.001, 0.01, 0.1};
    Sweep sweep;

    void validate() const;
};

/// Parses a scenario document. Unknown keys are errors. Relative dataset
/// paths resolve against `base_dir`.
ScenarioConfig parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);

/// One grid point of a scenario.
struct Cell {
    double swept_value = 0.0;
    double sigma = 0.0;
};

/// Fully resolved settings for one cell.
struct CellSettings {
    FeedbackSpec feedback;
    DriftSpec drift;
    cbpdd::CheckerboardParams checkerboard;
    baselines::MixPolicy mix;
};

/// Validated scenario plus its normalized dataset, loaded once.
class Scenario {
public:
    explicit Scenario(ScenarioConfig config);

    [[nodiscard]] const ScenarioConfig& config() const noexcept { return config_; }
    [[nodiscard]] const StreamSchema& schema() const noexcept { return schema_; }
    [[nodiscard]] const datasets::NormalizedDataset* dataset() const noexcept { return dataset_.get(); }

    /// Sweep-major, then sigma, in document order.
    [[nodiscard]] std::vector<Cell> cells() const;
    [[nodiscard]] CellSettings settings(const Cell& cell) const;

    /// Streams T instances of repetition `rep` through the configured routing.
    [[nodiscard]] std::vector<PredictionRecord> simulate(const Cell& cell, std::size_t rep) const;

private:
    ScenarioConfig config_;
    StreamSchema schema_;
    std::shared_ptr<const datasets::NormalizedDataset> dataset_;
};

struct RepetitionOutcome {
    /// Checkerboard verdicts; empty for ADWIN/DDM.
    std::optional<cbpdd::DetectionReport> report;
    /// ADWIN/DDM: whether any drift signal fired, and how many.
    bool stream_detected = false;
    std::size_t signals = 0;
};

RepetitionOutcome run_repetition(const Scenario& scenario, const Cell& cell, std::size_t rep);

/// Checkerboard detection over a finished stream, under the cell's settings.
cbpdd::DetectionReport detect_stream(std::span<const PredictionRecord> records,
                                     const cbpdd::CheckerboardParams& params, const DetectorConfig& detector);

struct ResultRow {
    std::string scenario;
    std::string swept_param;
    double swept_value = 0.0;
    double sigma = 0.0;
    std::string cls;  // "0", "1", or "stream" for ADWIN/DDM
    double detection_rate = 0.0;
    double any_rate = 0.0;
    double all_rate = 0.0;
    double mean_p = 0.0;  // NaN for ADWIN/DDM
    std::size_t n = 0;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct ExperimentOptions {
    std::size_t jobs = 1;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Runs every cell and repetition. The result does not depend on `jobs`.
std::vector<ResultRow> run_experiment(const Scenario& scenario, const ExperimentOptions& options = {});

inline constexpr std::string_view kResultsHeader =
    "scenario,swept_param,swept_value,sigma,class,detection_rate,any_rate,all_rate,mean_p,n";

void write_results(std::span<const ResultRow> rows, std::ostream& out);
void write_results(std::span<const ResultRow> rows, const std::filesystem::path& path);
std::vector<ResultRow> read_results(std::istream& in);
std::vector<ResultRow> read_results(const std::filesystem::path& path);

}  // namespace perfdrift::harness
