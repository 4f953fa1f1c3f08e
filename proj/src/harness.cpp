#include "perfdrift/harness.hpp"

#include "perfdrift/stream_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace perfdrift::harness {

using nlohmann::json;

namespace {

// Seed sub-streams of one repetition.
constexpr std::uint64_t kGeneratorStream = 10;
constexpr std::uint64_t kRoutingStream = 11;
constexpr std::uint64_t kModelStream = 12;

/// Object view that rejects keys nobody asked for.
class Fields {
public:
    Fields(const json& object, std::string where) : object_(object), where_(std::move(where)) {
        if (!object_.is_object()) {
            throw ScenarioError(where_ + ": expected an object");
        }
    }

    [[nodiscard]] bool has(const std::string& key) {
        seen_.insert(key);
        return object_.contains(key);
    }

    [[nodiscard]] const json& at(const std::string& key) {
        if (!has(key)) {
            throw ScenarioError(where_ + ": missing key '" + key + "'");
        }
        return object_.at(key);
    }

    template <typename T>
    [[nodiscard]] T get(const std::string& key) {
        return convert<T>(at(key), key);
    }

    template <typename T>
    [[nodiscard]] T get_or(const std::string& key, T fallback) {
        return has(key) ? convert<T>(object_.at(key), key) : fallback;
    }

    [[nodiscard]] std::string path(const std::string& key) const { return where_ + "." + key; }

    void finish() const {
        for (const auto& item : object_.items()) {
            if (!seen_.contains(item.key())) {
                throw ScenarioError(where_ + ": unknown key '" + item.key() + "'");
            }
        }
    }

private:
    template <typename T>
    T convert(const json& value, const std::string& key) const {
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!value.is_number()) throw ScenarioError("not a number");
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!value.is_number_integer()) throw ScenarioError("not an integer");
                if constexpr (std::is_unsigned_v<T>) {
                    if (value.is_number_integer() && !value.is_number_unsigned()) throw ScenarioError("negative");
                }
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!value.is_boolean()) throw ScenarioError("not a boolean");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!value.is_string()) throw ScenarioError("not a string");
            }
            return value.get<T>();
        } catch (const std::exception& e) {
            throw ScenarioError(where_ + "." + key + ": " + e.what());
        }
    }

    const json& object_;
    std::string where_;
    std::set<std::string> seen_;
};

std::vector<double> number_list(const json& value, const std::string& where) {
    if (!value.is_array()) {
        throw ScenarioError(where + ": expected an array of numbers");
    }
    std::vector<double> out;
    for (const auto& item : value) {
        if (!item.is_number()) {
            throw ScenarioError(where + ": expected an array of numbers");
        }
        out.push_back(item.get<double>());
    }
    return out;
}

FeedbackLoop parse_loop(const std::string& text) {
    if (text == "fulfilling") return FeedbackLoop::SelfFulfilling;
    if (text == "defeating") return FeedbackLoop::SelfDefeating;
    if (text == "none") return FeedbackLoop::None;
    throw ScenarioError("generator.loop must be fulfilling, defeating or none, got '" + text + "'");
}

WeightUpdate parse_update(const std::string& text) {
    if (text == "additive") return WeightUpdate::Additive;
    if (text == "mass_preserving") return WeightUpdate::MassPreserving;
    throw ScenarioError("generator.weight_update must be additive or mass_preserving, got '" + text + "'");
}

DriftKind parse_drift_kind(const std::string& text) {
    if (text == "none") return DriftKind::None;
    if (text == "sudden") return DriftKind::Sudden;
    if (text == "incremental") return DriftKind::Incremental;
    throw ScenarioError("generator.drift.kind must be none, sudden or incremental, got '" + text + "'");
}

cbpdd::FeatureMode parse_feature_mode(const std::string& text) {
    if (text == "parity") return cbpdd::ParityAllFeatures{};
    if (text.rfind("single:", 0) == 0) {
        std::size_t index = 0;
        const char* begin = text.data() + 7;
        const char* end = text.data() + text.size();
        const auto [ptr, ec] = std::from_chars(begin, end, index);
        if (ec == std::errc{} && ptr == end && begin != end) return cbpdd::SingleFeature{index};
    }
    throw ScenarioError("feature_mode must be 'parity' or 'single:K', got '" + text + "'");
}

stats::Alternative parse_alternative(const std::string& text) {
    if (text == "two-sided") return stats::Alternative::TwoSided;
    if (text == "greater") return stats::Alternative::Greater;
    if (text == "less") return stats::Alternative::Less;
    throw ScenarioError("alternative must be two-sided, greater or less, got '" + text + "'");
}

GeneratorConfig parse_generator(const json& node, const std::filesystem::path& base_dir) {
    Fields f(node, "generator");
    GeneratorConfig g;
    g.centroids_per_class = f.get_or<std::size_t>("centroids_per_class", g.centroids_per_class);
    g.spread = f.get_or<double>("spread", g.spread);
    g.random_weights = f.get_or<bool>("random_weights", g.random_weights);
    g.loop = parse_loop(f.get_or<std::string>("loop", "fulfilling"));
    g.update = parse_update(f.get_or<std::string>("weight_update", "additive"));
    if (f.has("performative_classes")) {
        g.performative.clear();
        for (double c : number_list(f.at("performative_classes"), f.path("performative_classes"))) {
            if (c != 0.0 && c != 1.0) throw ScenarioError("generator.performative_classes entries must be 0 or 1");
            const ClassLabel label(static_cast<int>(c));
            if (std::find(g.performative.begin(), g.performative.end(), label) != g.performative.end()) {
                throw ScenarioError("generator.performative_classes lists a class twice");
            }
            g.performative.push_back(label);
        }
    }
    if (f.has("drift")) {
        Fields d(f.at("drift"), "generator.drift");
        g.drift.kind = parse_drift_kind(d.get<std::string>("kind"));
        g.drift.events = d.get_or<std::size_t>("events", 0);
        g.drift.velocity_scale = d.get_or<double>("velocity_scale", g.drift.velocity_scale);
        d.finish();
    }
    if (f.has("dataset")) {
        Fields d(f.at("dataset"), "generator.dataset");
        DatasetSource source;
        source.path = d.get<std::string>("path");
        if (source.path.is_relative() && !base_dir.empty()) {
            source.path = base_dir / source.path;
        }
        source.label_column = d.get<std::string>("label_column");
        if (d.has("positive_label")) source.positive_label = d.get<std::string>("positive_label");
        d.finish();
        g.dataset = std::move(source);
    }
    f.finish();
    return g;
}

DetectorConfig parse_detector(const json& node) {
    Fields f(node, "detector");
    DetectorConfig d;
    const auto kind = f.get_or<std::string>("kind", "cbpdd");
    if (kind == "cbpdd") {
        d.kind = DetectorKind::Cbpdd;
        d.checkerboard.f = f.get_or<double>("f", d.checkerboard.f);
        d.checkerboard.tau = f.get_or<std::size_t>("tau", d.checkerboard.tau);
        d.checkerboard.window = f.get_or<std::size_t>("window", d.checkerboard.window);
        d.checkerboard.alpha = f.get_or<double>("alpha", d.checkerboard.alpha);
        if (f.has("feature_mode")) d.checkerboard.feature_mode = parse_feature_mode(f.get<std::string>("feature_mode"));
        d.min_trials = f.get_or<std::size_t>("min_trials", d.min_trials);
        if (f.has("alternative")) d.alternative = parse_alternative(f.get<std::string>("alternative"));
    } else if (kind == "adwin") {
        d.kind = DetectorKind::Adwin;
        d.adwin.delta = f.get_or<double>("delta", d.adwin.delta);
        d.adwin.max_buckets = f.get_or<std::size_t>("max_buckets", d.adwin.max_buckets);
        d.adwin.clock = f.get_or<std::size_t>("clock", d.adwin.clock);
        d.adwin.min_window_length = f.get_or<std::size_t>("min_window_length", d.adwin.min_window_length);
        d.adwin.grace_period = f.get_or<std::size_t>("grace_period", d.adwin.grace_period);
        d.adwin_feature = f.get_or<std::size_t>("feature", 0);
        const auto signal = f.get_or<std::string>("signal", "feature");
        if (signal == "feature") {
            d.adwin_signal = AdwinSignal::Feature;
        } else if (signal == "correctness") {
            d.adwin_signal = AdwinSignal::Correctness;
        } else {
            throw ScenarioError("detector.signal must be feature or correctness, got '" + signal + "'");
        }
    } else if (kind == "ddm") {
        d.kind = DetectorKind::Ddm;
        d.ddm.warm_up = f.get_or<std::size_t>("warm_up", d.ddm.warm_up);
        d.ddm.warning_threshold = f.get_or<double>("warning_threshold", d.ddm.warning_threshold);
        d.ddm.drift_threshold = f.get_or<double>("drift_threshold", d.ddm.drift_threshold);
    } else {
        throw ScenarioError("detector.kind must be cbpdd, adwin or ddm, got '" + kind + "'");
    }
    f.finish();
    return d;
}

bool is_whole(double v) { return v >= 0.0 && std::floor(v) == v && v < 1e15; }

std::string describe(const ScenarioConfig& config, const Cell& cell, std::size_t rep) {
    std::ostringstream out;
    out << "scenario '" << config.name << "'";
    if (config.sweep.param != SweepParam::Sigma) {
        out << ", " << to_string(config.sweep.param) << "=" << format_double(cell.swept_value);
    }
    out << ", sigma=" << format_double(cell.sigma) << ", repetition " << rep;
    return out.str();
}

}  // namespace

std::string_view to_string(DetectorKind kind) noexcept {
    switch (kind) {
        case DetectorKind::Cbpdd: return "cbpdd";
        case DetectorKind::Adwin: return "adwin";
        case DetectorKind::Ddm: return "ddm";
    }
    return "cbpdd";
}

std::string_view to_string(SweepParam param) noexcept {
    switch (param) {
        case SweepParam::Tau: return "tau";
        case SweepParam::F: return "f";
        case SweepParam::Mix: return "mix";
        case SweepParam::Events: return "events";
        case SweepParam::Sigma: return "sigma";
    }
    return "sigma";
}

SweepParam sweep_param_from_string(std::string_view text) {
    for (auto p : {SweepParam::Tau, SweepParam::F, SweepParam::Mix, SweepParam::Events, SweepParam::Sigma}) {
        if (to_string(p) == text) return p;
    }
    throw ScenarioError("sweep.param must be one of tau, f, mix, events, sigma, got '" + std::string(text) + "'");
}

void ScenarioConfig::validate() const {
    if (name.empty()) throw ScenarioError("scenario name must not be empty");
    if (horizon == 0) throw ScenarioError("horizon must be positive");
    if (repetitions == 0) throw ScenarioError("repetitions must be at least 1");
    if (sweep.values.empty()) throw ScenarioError("sweep.values must not be empty");
    if (sweep.param != SweepParam::Sigma && sigmas.empty()) throw ScenarioError("sigmas must not be empty");

    const auto check_sigma = [](double s) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw ScenarioError("sigma values must be finite and non-negative");
    };
    if (sweep.param == SweepParam::Sigma) {
        std::for_each(sweep.values.begin(), sweep.values.end(), check_sigma);
    } else {
        std::for_each(sigmas.begin(), sigmas.end(), check_sigma);
    }
    for (double v : sweep.values) {
        switch (sweep.param) {
            case SweepParam::Tau:
                if (!is_whole(v) || v < 2.0) throw ScenarioError("swept tau values must be integers >= 2");
                break;
            case SweepParam::Events:
                if (!is_whole(v)) throw ScenarioError("swept event counts must be non-negative integers");
                break;
            case SweepParam::F:
                if (!(v > 0.0) || !std::isfinite(v)) throw ScenarioError("swept f values must be positive");
                break;
            case SweepParam::Mix:
                if (!(v >= 0.0 && v <= 1.0)) throw ScenarioError("swept mix values must lie in [0, 1]");
                break;
            case SweepParam::Sigma: break;
        }
    }
    if (sweep.param == SweepParam::Mix && !std::holds_alternative<baselines::FixedMix>(mix)) {
        throw ScenarioError("a mix sweep cannot be combined with a ramp");
    }
    if (sweep.param == SweepParam::Events && generator.drift.kind == DriftKind::None) {
        throw ScenarioError("an events sweep needs generator.drift.kind sudden or incremental");
    }
    if ((sweep.param == SweepParam::Tau || sweep.param == SweepParam::F) && detector.kind != DetectorKind::Cbpdd) {
        throw ScenarioError("tau and f sweeps apply to the cbpdd detector only");
    }
    baselines::validate(mix);
    generator.drift.validate();

    const bool can_route_to_model = sweep.param == SweepParam::Mix
                                        ? std::any_of(sweep.values.begin(), sweep.values.end(), [](double v) { return v > 0.0; })
                                        : !(std::holds_alternative<baselines::FixedMix>(mix) &&
                                            std::get<baselines::FixedMix>(mix).mix == 0.0);
    if (can_route_to_model && model == ModelKind::None) {
        throw ScenarioError("routing instances to a deployed model needs model rc or tc");
    }
    if (detector.kind != DetectorKind::Cbpdd && model == ModelKind::None) {
        throw ScenarioError("adwin and ddm monitor a deployed model; set model to rc or tc");
    }
    if (generator.dataset) {
        if (generator.drift.kind != DriftKind::None) {
            throw ScenarioError("dataset-backed generators do not support intrinsic drift");
        }
    } else {
        if (generator.centroids_per_class == 0) throw ScenarioError("centroids_per_class must be positive");
        if (!(generator.spread >= 0.0) || !std::isfinite(generator.spread)) {
            throw ScenarioError("spread must be finite and non-negative");
        }
    }
    if (detector.kind == DetectorKind::Cbpdd) {
        if (detector.min_trials == 0) throw ScenarioError("min_trials must be positive");
        auto params = detector.checkerboard;
        params.total = horizon;
        params.window = std::min(params.window, params.tau / 2);
        if (sweep.param != SweepParam::Tau) params.validate();
    } else if (detector.kind == DetectorKind::Adwin) {
        baselines::Adwin probe(detector.adwin);
    } else {
        baselines::Ddm probe(detector.ddm);
    }
}

ScenarioConfig parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
    }
    Fields f(doc, "scenario");
    ScenarioConfig config;
    config.name = f.get<std::string>("name");
    config.description = f.get_or<std::string>("description", "");
    config.horizon = f.get_or<std::size_t>("horizon", config.horizon);
    config.repetitions = f.get_or<std::size_t>("repetitions", config.repetitions);
    config.base_seed = f.get_or<std::uint64_t>("base_seed", config.base_seed);
    if (f.has("generator")) config.generator = parse_generator(f.at("generator"), base_dir);
    if (f.has("detector")) config.detector = parse_detector(f.at("detector"));

    const auto model = f.get_or<std::string>("model", "none");
    if (model == "none") {
        config.model = ModelKind::None;
    } else if (model == "rc") {
        config.model = ModelKind::Random;
    } else if (model == "tc") {
        config.model = ModelKind::Threshold;
    } else {
        throw ScenarioError("model must be none, rc or tc, got '" + model + "'");
    }
    if (f.has("threshold")) {
        Fields t(f.at("threshold"), "threshold");
        config.threshold.threshold = t.get_or<double>("value", config.threshold.threshold);
        config.threshold.positive_class = ClassLabel(t.get_or<int>("positive_class", 1));
        config.threshold.feature = t.get_or<std::size_t>("feature", config.threshold.feature);
        t.finish();
    }
    if (f.has("mix") && f.has("ramp")) {
        throw ScenarioError("set either mix or ramp, not both");
    }
    if (f.has("mix")) {
        config.mix = baselines::FixedMix{f.get<double>("mix")};
    }
    if (f.has("ramp")) {
        Fields r(f.at("ramp"), "ramp");
        config.mix = baselines::LinearRamp{r.get<double>("start"), r.get<double>("end")};
        r.finish();
    }
    if (f.has("sigmas")) config.sigmas = number_list(f.at("sigmas"), "scenario.sigmas");

    Fields s(f.at("sweep"), "sweep");
    config.sweep.param = sweep_param_from_string(s.get<std::string>("param"));
    config.sweep.values = number_list(s.at("values"), "sweep.values");
    s.finish();
    f.finish();

    config.validate();
    return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError("cannot open scenario '" + path.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_scenario(text.str(), path.parent_path());
    } catch (const ConfigError& e) {
        throw ScenarioError(path.filename().string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------

namespace {

ScenarioConfig validated(ScenarioConfig config) {
    config.validate();
    return config;
}

std::shared_ptr<const datasets::NormalizedDataset> load_dataset(const ScenarioConfig& config) {
    if (!config.generator.dataset) return nullptr;
    const auto& source = *config.generator.dataset;
    auto raw = datasets::load_csv(source.path, source.label_column, source.positive_label);
    return std::make_shared<const datasets::NormalizedDataset>(datasets::normalize(raw));
}

}  // namespace

Scenario::Scenario(ScenarioConfig config)
    : config_(validated(std::move(config))),
      schema_(make_default_schema(1)),
      dataset_(load_dataset(config_)) {
    if (dataset_) schema_ = dataset_->schema();
    if (config_.model == ModelKind::Threshold && config_.threshold.feature >= schema_.dims()) {
        throw ScenarioError("threshold feature index exceeds the stream's dimensionality");
    }
    if (config_.detector.kind == DetectorKind::Adwin && config_.detector.adwin_feature >= schema_.dims()) {
        throw ScenarioError("adwin feature index exceeds the stream's dimensionality");
    }
    for (const auto& cell : cells()) {
        const auto s = settings(cell);
        if (config_.detector.kind == DetectorKind::Cbpdd) s.checkerboard.validate(schema_);
    }
}

std::vector<Cell> Scenario::cells() const {
    std::vector<Cell> out;
    if (config_.sweep.param == SweepParam::Sigma) {
        for (double s : config_.sweep.values) out.push_back({s, s});
        return out;
    }
    for (double v : config_.sweep.values) {
        for (double s : config_.sigmas) out.push_back({v, s});
    }
    return out;
}

CellSettings Scenario::settings(const Cell& cell) const {
    CellSettings s;
    s.feedback.update = config_.generator.update;
    for (const auto label : config_.generator.performative) {
        s.feedback.per_class[label.index()] = ClassFeedback{label, config_.generator.loop, cell.sigma};
    }
    s.drift = config_.generator.drift;
    s.checkerboard = config_.detector.checkerboard;
    s.checkerboard.total = config_.horizon;
    s.mix = config_.mix;
    switch (config_.sweep.param) {
        case SweepParam::Tau: s.checkerboard.tau = static_cast<std::size_t>(cell.swept_value); break;
        case SweepParam::F: s.checkerboard.f = cell.swept_value; break;
        case SweepParam::Mix: s.mix = baselines::FixedMix{cell.swept_value}; break;
        case SweepParam::Events: s.drift.events = static_cast<std::size_t>(cell.swept_value); break;
        case SweepParam::Sigma: break;
    }
    // Both windows must fit inside one trial.
    s.checkerboard.window = std::min(s.checkerboard.window, s.checkerboard.tau / 2);
    return s;
}

std::vector<PredictionRecord> Scenario::simulate(const Cell& cell, std::size_t rep) const {
    const auto s = settings(cell);
    const std::uint64_t seed = repetition_seed(config_.base_seed, rep);
    const auto& g = config_.generator;
    Generator generator =
        dataset_ ? Generator::from_dataset(schema_, dataset_->instances, s.feedback, config_.horizon,
                                           derive_seed(seed, kGeneratorStream))
                 : Generator::init_equidistant(schema_, g.centroids_per_class, g.spread, g.random_weights,
                                               s.feedback, s.drift, config_.horizon,
                                               derive_seed(seed, kGeneratorStream));
    Rng routing(derive_seed(seed, kRoutingStream));
    Rng model_rng(derive_seed(seed, kModelStream));
    const std::size_t horizon = config_.horizon;
    const Predictor predictor = [&](std::span<const double> x, std::size_t t) -> Prediction {
        const Source source = baselines::route(s.mix, t, horizon, routing);
        if (source == Source::Checkerboard) {
            return {cbpdd::cb_predict(x, t, s.checkerboard), source};
        }
        const ClassLabel y = config_.model == ModelKind::Random ? baselines::rc_predict(model_rng)
                                                                 : baselines::tc_predict(x, config_.threshold);
        return {y, source};
    };

    std::vector<PredictionRecord> records;
    records.reserve(horizon);
    while (auto record = generator.next_instance(predictor)) {
        records.push_back(std::move(*record));
    }
    return records;
}

cbpdd::DetectionReport detect_stream(std::span<const PredictionRecord> records,
                                     const cbpdd::CheckerboardParams& params, const DetectorConfig& detector) {
    return cbpdd::detect(records, params, detector.min_trials, cbpdd::mann_whitney_test(detector.alternative));
}

RepetitionOutcome run_repetition(const Scenario& scenario, const Cell& cell, std::size_t rep) {
    const auto records = scenario.simulate(cell, rep);
    const auto& detector = scenario.config().detector;
    RepetitionOutcome outcome;
    switch (detector.kind) {
        case DetectorKind::Cbpdd:
            outcome.report = detect_stream(records, scenario.settings(cell).checkerboard, detector);
            break;
        case DetectorKind::Adwin: {
            baselines::Adwin adwin(detector.adwin);
            for (const auto& r : records) {
                double value = 0.0;
                if (detector.adwin_signal == AdwinSignal::Feature) {
                    value = r.instance.features[detector.adwin_feature];
                } else if (r.source == Source::DeployedModel) {
                    value = r.prediction == r.instance.label ? 1.0 : 0.0;
                } else {
                    continue;
                }
                if (adwin.update(value)) ++outcome.signals;
            }
            break;
        }
        case DetectorKind::Ddm: {
            baselines::Ddm ddm(detector.ddm);
            for (const auto& r : records) {
                if (r.source != Source::DeployedModel) continue;
                if (ddm.update(r.prediction == r.instance.label) == baselines::DdmLevel::Drift) ++outcome.signals;
            }
            break;
        }
    }
    outcome.stream_detected = outcome.signals > 0;
    return outcome;
}

std::vector<ResultRow> run_experiment(const Scenario& scenario, const ExperimentOptions& options) {
    const auto& config = scenario.config();
    const auto cells = scenario.cells();
    const std::size_t reps = config.repetitions;
    const std::size_t total = cells.size() * reps;
    std::vector<RepetitionOutcome> outcomes(total);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::atomic<bool> failed{false};
    std::mutex mutex;
    std::string failure;

    const auto worker = [&] {
        while (!failed.load()) {
            const std::size_t task = next.fetch_add(1);
            if (task >= total) return;
            const Cell& cell = cells[task / reps];
            const std::size_t rep = task % reps;
            try {
                outcomes[task] = run_repetition(scenario, cell, rep);
            } catch (const std::exception& e) {
                std::lock_guard lock(mutex);
                if (!failed.exchange(true)) failure = describe(config, cell, rep) + ": " + e.what();
                return;
            }
            const std::size_t finished = done.fetch_add(1) + 1;
            if (options.progress) {
                std::lock_guard lock(mutex);
                options.progress(finished, total);
            }
        }
    };

    const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(total, 1));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(jobs);
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (failed) {
        throw std::runtime_error(failure);
    }

    std::vector<ResultRow> rows;
    const auto n = static_cast<double>(reps);
    const std::string swept(to_string(config.sweep.param));
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const std::span<const RepetitionOutcome> group(outcomes.data() + c * reps, reps);
        ResultRow base;
        base.scenario = config.name;
        base.swept_param = swept;
        base.swept_value = cells[c].swept_value;
        base.sigma = cells[c].sigma;
        base.n = reps;
        if (config.detector.kind != DetectorKind::Cbpdd) {
            const auto hits = std::count_if(group.begin(), group.end(), [](const auto& o) { return o.stream_detected; });
            base.cls = "stream";
            base.detection_rate = base.any_rate = base.all_rate = static_cast<double>(hits) / n;
            base.mean_p = std::numeric_limits<double>::quiet_NaN();
            rows.push_back(base);
            continue;
        }
        std::size_t any = 0;
        std::size_t all = 0;
        for (const auto& o : group) {
            any += o.report->any_detected ? 1 : 0;
            all += o.report->all_detected ? 1 : 0;
        }
        base.any_rate = static_cast<double>(any) / n;
        base.all_rate = static_cast<double>(all) / n;
        for (std::size_t k = 0; k < 2; ++k) {
            ResultRow row = base;
            row.cls = std::to_string(k);
            std::size_t hits = 0;
            double p_sum = 0.0;
            for (const auto& o : group) {
                hits += o.report->per_class[k].detected ? 1 : 0;
                p_sum += o.report->per_class[k].p_value;
            }
            row.detection_rate = static_cast<double>(hits) / n;
            row.mean_p = p_sum / n;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------

void write_results(std::span<const ResultRow> rows, std::ostream& out) {
    out << kResultsHeader << '\n';
    for (const auto& r : rows) {
        out << r.scenario << ',' << r.swept_param << ',' << format_double(r.swept_value) << ','
            << format_double(r.sigma) << ',' << r.cls << ',' << format_double(r.detection_rate) << ','
            << format_double(r.any_rate) << ',' << format_double(r.all_rate) << ',' << format_double(r.mean_p) << ','
            << r.n << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed writing results CSV");
    }
}

void write_results(std::span<const ResultRow> rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    write_results(rows, out);
}

namespace {

double parse_real(const std::string& text, std::size_t line) {
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::runtime_error("results line " + std::to_string(line) + ": bad number '" + text + "'");
    }
    return value;
}

}  // namespace

std::vector<ResultRow> read_results(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("results CSV is empty");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kResultsHeader) {
        throw std::runtime_error("results CSV header must be " + std::string(kResultsHeader));
    }
    std::vector<ResultRow> rows;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 10) {
            throw std::runtime_error("results line " + std::to_string(number) + ": expected 10 fields");
        }
        ResultRow r;
        r.scenario = fields[0];
        r.swept_param = fields[1];
        r.swept_value = parse_real(fields[2], number);
        r.sigma = parse_real(fields[3], number);
        r.cls = fields[4];
        r.detection_rate = parse_real(fields[5], number);
        r.any_rate = parse_real(fields[6], number);
        r.all_rate = parse_real(fields[7], number);
        r.mean_p = parse_real(fields[8], number);
        const double n = parse_real(fields[9], number);
        if (!is_whole(n)) {
            throw std::runtime_error("results line " + std::to_string(number) + ": n must be a count");
        }
        r.n = static_cast<std::size_t>(n);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ResultRow> read_results(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open results CSV '" + path.string() + "'");
    }
    return read_results(in);
}

}  // namespace perfdrift::harness
