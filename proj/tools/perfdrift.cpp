// perfdrift command-line front end.

#include "perfdrift/harness.hpp"
#include "perfdrift/stream_io.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>

namespace pd = perfdrift;
namespace h = perfdrift::harness;

namespace {

struct CheckerboardFlags {
    std::optional<double> f;
    std::size_t tau = 1000;
    std::size_t window = 100;
    double alpha = 0.01;
    std::string feature_mode = "single:0";
    std::size_t min_trials = pd::cbpdd::kDefaultMinTrials;
    std::string alternative = "two-sided";

    void add_to(CLI::App& app) {
        app.add_option("--f", f, "Band width of the checkerboard");
        app.add_option("--tau", tau, "Trial length")->check(CLI::PositiveNumber);
        app.add_option("--window", window, "Start/end window size")->check(CLI::PositiveNumber);
        app.add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
        app.add_option("--feature-mode", feature_mode, "single:K or parity");
        app.add_option("--min-trials", min_trials, "Trials needed before a class gets a verdict");
        app.add_option("--alternative", alternative, "two-sided, greater or less")
            ->check(CLI::IsMember({"two-sided", "greater", "less"}));
    }
};

pd::cbpdd::FeatureMode parse_mode(const std::string& text) {
    if (text == "parity") return pd::cbpdd::ParityAllFeatures{};
    if (text.rfind("single:", 0) == 0) {
        try {
            std::size_t used = 0;
            const auto index = std::stoul(text.substr(7), &used);
            if (used == text.size() - 7) return pd::cbpdd::SingleFeature{index};
        } catch (const std::exception&) {
        }
    }
    throw pd::ConfigError("--feature-mode must be 'single:K' or 'parity'");
}

pd::stats::Alternative parse_alternative(const std::string& text) {
    if (text == "greater") return pd::stats::Alternative::Greater;
    if (text == "less") return pd::stats::Alternative::Less;
    return pd::stats::Alternative::TwoSided;
}

h::Cell pick_cell(const h::Scenario& scenario, std::optional<double> value, std::optional<double> sigma) {
    for (const auto& cell : scenario.cells()) {
        if ((!value || cell.swept_value == *value) && (!sigma || cell.sigma == *sigma)) return cell;
    }
    throw pd::ConfigError("no grid point of the scenario matches the requested --value/--sigma");
}

int run_simulate(const std::string& scenario_path, const std::string& out, std::optional<double> value,
                 std::optional<double> sigma, std::size_t rep, std::optional<std::uint64_t> seed) {
    auto config = h::load_scenario(scenario_path);
    if (seed) config.base_seed = *seed;
    const h::Scenario scenario(std::move(config));
    const auto records = scenario.simulate(pick_cell(scenario, value, sigma), rep);
    pd::write_stream(records, std::filesystem::path(out));
    return 0;
}

int run_detect(const std::string& in, const CheckerboardFlags& flags) {
    const auto records = pd::read_stream(std::filesystem::path(in));
    if (records.empty()) {
        throw pd::StreamFormatError("stream CSV '" + in + "' has no records");
    }
    pd::cbpdd::CheckerboardParams params;
    params.f = flags.f.value_or(1.0);
    params.tau = flags.tau;
    params.window = flags.window;
    params.alpha = flags.alpha;
    params.feature_mode = parse_mode(flags.feature_mode);
    params.total = records.back().timestep + 1;
    params.validate();
    h::DetectorConfig detector;
    detector.min_trials = flags.min_trials;
    detector.alternative = parse_alternative(flags.alternative);
    const auto report = h::detect_stream(records, params, detector);
    std::cout << "class,p_value,detected,trials_used,skipped\n";
    for (std::size_t c = 0; c < 2; ++c) {
        const auto& v = report.per_class[c];
        std::cout << c << ',' << pd::format_double(v.p_value) << ',' << (v.detected ? "true" : "false") << ','
                  << v.trials_used << ',' << v.skipped << '\n';
    }
    return 0;
}

int run_experiment(const std::string& scenario_path, const std::string& out, std::size_t jobs,
                   std::optional<std::uint64_t> seed, std::optional<std::size_t> repetitions,
                   const std::string& dataset, bool quiet) {
    auto config = h::load_scenario(scenario_path);
    if (seed) config.base_seed = *seed;
    if (repetitions) config.repetitions = *repetitions;
    if (!dataset.empty()) {
        if (!config.generator.dataset) throw pd::ConfigError("--dataset given but the scenario has no dataset");
        config.generator.dataset->path = dataset;
    }
    const h::Scenario scenario(std::move(config));
    h::ExperimentOptions options;
    options.jobs = jobs;
    if (!quiet) {
        options.progress = [](std::size_t done, std::size_t total) {
            if (done == total || done % 50 == 0) std::cerr << "\r" << done << "/" << total << std::flush;
        };
    }
    const auto rows = h::run_experiment(scenario, options);
    if (!quiet) std::cerr << '\n';
    h::write_results(rows, std::filesystem::path(out));
    return 0;
}

struct ImputeFlags {
    std::string dataset;
    std::string label_col;
    std::string positive_label;
    double sigma = 0.0;
    std::string loop = "fulfilling";
    std::string update = "mass_preserving";
    std::string out;
    std::size_t horizon = 100000;
    std::uint64_t seed = 0;
};

int run_impute(const ImputeFlags& flags, const CheckerboardFlags& cb) {
    h::ScenarioConfig config;
    config.name = "impute";
    config.horizon = flags.horizon;
    config.repetitions = 1;
    config.base_seed = flags.seed;
    config.generator.loop = flags.loop == "defeating" ? pd::FeedbackLoop::SelfDefeating : pd::FeedbackLoop::SelfFulfilling;
    config.generator.update =
        flags.update == "mass_preserving" ? pd::WeightUpdate::MassPreserving : pd::WeightUpdate::Additive;
    h::DatasetSource source{flags.dataset, flags.label_col, std::nullopt};
    if (!flags.positive_label.empty()) source.positive_label = flags.positive_label;
    config.generator.dataset = source;
    config.detector.checkerboard.tau = cb.tau;
    config.detector.checkerboard.window = cb.window;
    config.detector.checkerboard.alpha = cb.alpha;
    config.detector.checkerboard.feature_mode = parse_mode(cb.feature_mode);
    config.sweep = {h::SweepParam::Sigma, {flags.sigma}};

    // Without --f, split the first used feature's range into two bands.
    auto raw = pd::datasets::load_csv(flags.dataset, flags.label_col, source.positive_label);
    const auto normalized = pd::datasets::normalize(raw);
    const auto ranges = normalized.report.retained_ranges();
    std::size_t feature = 0;
    if (const auto* single = std::get_if<pd::cbpdd::SingleFeature>(&config.detector.checkerboard.feature_mode)) {
        feature = single->index;
    }
    if (feature >= ranges.size()) throw pd::ConfigError("--feature-mode index exceeds the dataset's features");
    config.detector.checkerboard.f = cb.f.value_or(ranges[feature].width() / 2.0);

    const h::Scenario scenario(std::move(config));
    const auto records = scenario.simulate(scenario.cells().front(), 0);
    pd::write_stream(records, std::filesystem::path(flags.out));
    return 0;
}

int run_report(const std::string& in) {
    const auto rows = h::read_results(std::filesystem::path(in));
    if (rows.empty()) {
        throw std::runtime_error("results CSV '" + in + "' has no rows");
    }
    std::cout << std::left << std::setw(26) << "scenario" << std::setw(8) << "param" << std::right << std::setw(10)
              << "value" << std::setw(9) << "sigma" << std::setw(8) << "class" << std::setw(8) << "rate"
              << std::setw(8) << "any" << std::setw(8) << "all" << std::setw(10) << "mean_p" << std::setw(6) << "n"
              << '\n';
    std::cout << std::fixed;
    for (const auto& r : rows) {
        std::cout << std::left << std::setw(26) << r.scenario << std::setw(8) << r.swept_param << std::right
                  << std::setw(10) << std::setprecision(4) << r.swept_value << std::setw(9) << r.sigma << std::setw(8)
                  << r.cls << std::setw(8) << std::setprecision(2) << r.detection_rate << std::setw(8) << r.any_rate
                  << std::setw(8) << r.all_rate << std::setw(10) << std::setprecision(4) << r.mean_p << std::setw(6)
                  << r.n << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Performative drift simulation and detection"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out;
    std::string in;
    std::optional<double> value;
    std::optional<double> sigma;
    std::size_t rep = 0;
    std::optional<std::uint64_t> seed;

    auto* simulate = app.add_subcommand("simulate", "Write one repetition's stream as CSV");
    simulate->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    simulate->add_option("--out", out, "Output stream CSV")->required();
    simulate->add_option("--value", value, "Swept-parameter value (default: first)");
    simulate->add_option("--sigma", sigma, "Sigma (default: first)");
    simulate->add_option("--rep", rep, "Repetition index");
    simulate->add_option("--seed", seed, "Override the scenario's base seed");

    CheckerboardFlags detect_flags;
    auto* detect = app.add_subcommand("detect", "Run checkerboard detection over a stream CSV");
    detect->add_option("--in", in, "Stream CSV")->required()->check(CLI::ExistingFile);
    detect_flags.add_to(*detect);

    std::size_t jobs = 1;
    std::optional<std::size_t> repetitions;
    std::string dataset;
    bool quiet = false;
    auto* experiment = app.add_subcommand("experiment", "Run a scenario grid and write aggregated rates");
    experiment->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    experiment->add_option("--out", out, "Output results CSV")->required();
    experiment->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    experiment->add_option("--seed", seed, "Override the scenario's base seed");
    experiment->add_option("--repetitions", repetitions, "Override the repetition count")->check(CLI::PositiveNumber);
    experiment->add_option("--dataset", dataset, "Override the scenario's dataset path");
    experiment->add_flag("--quiet", quiet, "No progress output");

    ImputeFlags impute_flags;
    CheckerboardFlags impute_cb;
    auto* impute = app.add_subcommand("impute", "Impute performative drift into a tabular dataset");
    impute->add_option("--dataset", impute_flags.dataset, "Dataset CSV")->required()->check(CLI::ExistingFile);
    impute->add_option("--label-col", impute_flags.label_col, "Label column name")->required();
    impute->add_option("--positive-label", impute_flags.positive_label, "Label value mapped to class 1");
    impute->add_option("--sigma", impute_flags.sigma, "Feedback strength")->required()->check(CLI::NonNegativeNumber);
    impute->add_option("--loop", impute_flags.loop, "fulfilling or defeating")
        ->required()
        ->check(CLI::IsMember({"fulfilling", "defeating"}));
    impute->add_option("--weight-update", impute_flags.update, "additive or mass_preserving")
        ->check(CLI::IsMember({"additive", "mass_preserving"}));
    impute->add_option("--out", impute_flags.out, "Output stream CSV")->required();
    impute->add_option("--horizon", impute_flags.horizon, "Instances to emit")->check(CLI::PositiveNumber);
    impute->add_option("--seed", impute_flags.seed, "Seed");
    impute_cb.add_to(*impute);

    auto* report = app.add_subcommand("report", "Print a results CSV as a table");
    report->add_option("--in", in, "Results CSV")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) return run_simulate(scenario_path, out, value, sigma, rep, seed);
        if (*detect) return run_detect(in, detect_flags);
        if (*experiment) return run_experiment(scenario_path, out, jobs, seed, repetitions, dataset, quiet);
        if (*impute) return run_impute(impute_flags, impute_cb);
        if (*report) return run_report(in);
    } catch (const std::exception& e) {
        std::cerr << "perfdrift: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
