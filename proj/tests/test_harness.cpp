#include "doctest.h"

#include "perfdrift/harness.hpp"
#include "perfdrift/stream_io.hpp"

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

using namespace perfdrift;
using namespace perfdrift::harness;

namespace {

const char* const kSmall = R"({
  "name": "small",
  "horizon": 6000,
  "repetitions": 6,
  "base_seed": 11,
  "generator": {"centroids_per_class": 5, "spread": 0.05, "weight_update": "mass_preserving"},
  "detector": {"kind": "cbpdd", "f": 1.0, "tau": 1000, "window": 100, "alpha": 0.01},
  "sigmas": [0.0, 0.01],
  "sweep": {"param": "tau", "values": [500, 1000]}
})";

std::string with(std::string text, const std::string& from, const std::string& to) {
    const auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    return text.replace(at, from.size(), to);
}

std::string csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    write_results(rows, out);
    return out.str();
}

}  // namespace

TEST_CASE("scenario parsing fills the documented fields") {
    const auto c = parse_scenario(kSmall);
    CHECK(c.name == "small");
    CHECK(c.horizon == 6000);
    CHECK(c.repetitions == 6);
    CHECK(c.generator.centroids_per_class == 5);
    CHECK(c.generator.update == WeightUpdate::MassPreserving);
    CHECK(c.detector.checkerboard.tau == 1000);
    CHECK(c.sweep.param == SweepParam::Tau);
    CHECK(c.sweep.values == std::vector<double>{500, 1000});
    CHECK(c.sigmas == std::vector<double>{0.0, 0.01});
    CHECK(c.model == ModelKind::None);
}

TEST_CASE("scenario parsing is strict") {
    const std::string base = kSmall;
    CHECK_THROWS_AS(parse_scenario("{"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with(base, "\"base_seed\"", "\"seed\"")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with(base, "\"spread\"", "\"sprad\"")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with(base, "\"alpha\": 0.01", "\"alpha\": 0.01, \"extra\": 1")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with(base, "\"repetitions\": 6", "\"repetitions\": -6")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with(base, "\"repetitions\": 6", "\"repetitions\": 0")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with(base, "\"horizon\": 6000", "\"horizon\": \"6000\"")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with(base, "[500, 1000]", "[500, 1000.5]")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with(base, "[500, 1000]", "[]")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with(base, "\"mass_preserving\"", "\"scaled\"")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with(base, "[0.0, 0.01]", "[0.0, -0.01]")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with(base, "\"kind\": \"cbpdd\"", "\"kind\": \"kswin\"")), ScenarioError);
}

TEST_CASE("invalid combinations are rejected") {
    const std::string base = kSmall;
    // tau sweeps only make sense for the checkerboard detector
    CHECK_THROWS_AS(parse_scenario(with(with(base, R"("kind": "cbpdd", "f": 1.0, "tau": 1000, "window": 100, "alpha": 0.01)",
                                             R"("kind": "ddm")"),
                                        "\"horizon\"", "\"model\": \"tc\", \"mix\": 1.0, \"horizon\"")),
                    ScenarioError);
    // routing to a model needs one
    CHECK_THROWS_AS(parse_scenario(with(base, "\"horizon\"", "\"mix\": 0.5, \"horizon\"")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with(base, "\"horizon\"", "\"mix\": 0.5, \"ramp\": {\"start\": 0, \"end\": 1}, \"horizon\"")),
                    ScenarioError);
    // an events sweep needs intrinsic drift
    CHECK_THROWS_AS(parse_scenario(with(base, "\"param\": \"tau\"", "\"param\": \"events\"")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with(base, "\"param\": \"tau\"", "\"param\": \"mix\"")), ScenarioError);
    CHECK_THROWS_AS(parse_scenario(with(base, "\"f\": 1.0", "\"f\": 1.0, \"feature_mode\": \"single:x\"")), ScenarioError);
}

TEST_CASE("adwin signal key") {
    const std::string adwin = R"({"name": "a", "model": "tc", "mix": 1.0,
        "detector": {"kind": "adwin", "signal": "SIGNAL"}, "sweep": {"param": "sigma", "values": [0]}})";
    CHECK(parse_scenario(with(adwin, "SIGNAL", "correctness")).detector.adwin_signal == AdwinSignal::Correctness);
    CHECK(parse_scenario(with(adwin, "SIGNAL", "feature")).detector.adwin_signal == AdwinSignal::Feature);
    CHECK_THROWS_AS(parse_scenario(with(adwin, "SIGNAL", "label")), ScenarioError);
}

TEST_CASE("cells are sweep-major and windows fit inside a trial") {
    auto config = parse_scenario(kSmall);
    config.sweep.values = {4, 1000};
    const Scenario scenario(config);
    const auto cells = scenario.cells();
    REQUIRE(cells.size() == 4);
    CHECK(cells[0].swept_value == 4);
    CHECK(cells[0].sigma == 0.0);
    CHECK(cells[1].swept_value == 4);
    CHECK(cells[1].sigma == 0.01);
    CHECK(cells[2].swept_value == 1000);
    const auto tight = scenario.settings(cells[0]);
    CHECK(tight.checkerboard.tau == 4);
    CHECK(tight.checkerboard.window == 2);
    CHECK(scenario.settings(cells[2]).checkerboard.window == 100);
    CHECK(tight.checkerboard.total == 6000);

    config.sweep = {SweepParam::Sigma, {0.0, 0.5}};
    const auto sigma_cells = Scenario(config).cells();
    REQUIRE(sigma_cells.size() == 2);
    CHECK(sigma_cells[1].swept_value == 0.5);
    CHECK(sigma_cells[1].sigma == 0.5);
}

TEST_CASE("a repetition is a pure function of scenario, cell and index") {
    const Scenario scenario(parse_scenario(kSmall));
    const Cell cell{1000, 0.01};
    const auto a = scenario.simulate(cell, 2);
    const auto b = scenario.simulate(cell, 2);
    const auto c = scenario.simulate(cell, 3);
    REQUIRE(a.size() == 6000);
    bool same = true;
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same = same && a[i].instance.features == b[i].instance.features && a[i].prediction == b[i].prediction;
        differs = differs || a[i].instance.features != c[i].instance.features;
        CHECK(scenario.schema().validates(a[i].instance));
    }
    CHECK(same);
    CHECK(differs);
    const auto ra = run_repetition(scenario, cell, 2);
    const auto rb = run_repetition(scenario, cell, 2);
    REQUIRE(ra.report);
    CHECK(ra.report->per_class[0].p_value == rb.report->per_class[0].p_value);
    CHECK(ra.report->per_class[1].p_value == rb.report->per_class[1].p_value);
}

TEST_CASE("experiment results do not depend on the number of jobs") {
    const Scenario scenario(parse_scenario(kSmall));
    std::size_t calls = 0;
    ExperimentOptions sequential;
    sequential.progress = [&](std::size_t done, std::size_t total) {
        ++calls;
        CHECK(done <= total);
    };
    const auto one = run_experiment(scenario, sequential);
    CHECK(calls == 4 * 6);
    const auto four = run_experiment(scenario, {4, {}});
    CHECK(one == four);

    REQUIRE(one.size() == 4 * 2);
    std::set<std::string> classes;
    for (const auto& row : one) {
        classes.insert(row.cls);
        CHECK(row.scenario == "small");
        CHECK(row.swept_param == "tau");
        CHECK(row.n == 6);
        for (double rate : {row.detection_rate, row.any_rate, row.all_rate}) {
            CHECK(rate >= 0.0);
            CHECK(rate <= 1.0);
            CHECK(std::abs(rate * 6 - std::round(rate * 6)) < 1e-9);
        }
        CHECK(row.all_rate <= row.detection_rate);
        CHECK(row.detection_rate <= row.any_rate);
        CHECK(row.mean_p >= 0.0);
        CHECK(row.mean_p <= 1.0);
    }
    CHECK(classes == std::set<std::string>{"0", "1"});
}

TEST_CASE("stream detectors report one row per cell") {
    const auto config = parse_scenario(R"({"name": "d", "horizon": 3000, "repetitions": 3, "model": "tc", "mix": 1.0,
        "generator": {"centroids_per_class": 5, "weight_update": "mass_preserving"},
        "detector": {"kind": "ddm"}, "sweep": {"param": "sigma", "values": [0, 0.1]}})");
    const Scenario scenario(config);
    const auto one = run_experiment(scenario);
    const auto three = run_experiment(scenario, {3, {}});
    CHECK(csv(one) == csv(three));
    REQUIRE(one.size() == 2);
    CHECK(one[0].cls == "stream");
    CHECK(std::isnan(one[0].mean_p));
    CHECK(one[0].any_rate == one[0].detection_rate);
}

TEST_CASE("results CSV round-trips") {
    const auto rows = run_experiment(Scenario(parse_scenario(kSmall)));
    const auto text = csv(rows);
    CHECK(text.rfind(std::string(kResultsHeader) + "\n", 0) == 0);
    std::istringstream in(text);
    CHECK(read_results(in) == rows);

    std::istringstream empty_in(csv({}));
    CHECK(read_results(empty_in).empty());
    std::istringstream bad("scenario,x\n");
    CHECK_THROWS(read_results(bad));
    std::istringstream short_row(std::string(kResultsHeader) + "\na,b,1,0,0,0.5,0.5\n");
    CHECK_THROWS(read_results(short_row));
}

TEST_CASE("downstream plotting columns are present") {
    std::istringstream header{std::string(kResultsHeader)};
    std::set<std::string> columns;
    for (std::string c; std::getline(header, c, ',');) columns.insert(c);
    for (const char* needed : {"swept_value", "sigma", "detection_rate", "any_rate", "class", "scenario"}) {
        CHECK(columns.contains(needed));
    }
    const auto stream = stream_header(2);
    CHECK(stream.rfind("t,f0,", 0) == 0);
    CHECK(stream.find(",y,") != std::string::npos);
}

TEST_CASE("shipped scenarios parse") {
    std::size_t count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(PERFDRIFT_SCENARIO_DIR)) {
        if (entry.path().extension() != ".json") continue;
        CAPTURE(entry.path().string());
        const auto config = load_scenario(entry.path());
        CHECK(config.name == entry.path().stem().string());
        CHECK(config.repetitions == 50);
        ++count;
    }
    CHECK(count >= 15);
}
