#include "doctest.h"

#include "perfdrift/random.hpp"
#include "perfdrift/stream_io.hpp"

#include <cmath>
#include <limits>
#include <sstream>

using namespace perfdrift;

namespace {

std::vector<PredictionRecord> random_records(Rng& rng, std::size_t count, std::size_t dims) {
    std::vector<PredictionRecord> out;
    std::size_t t = 0;
    for (std::size_t i = 0; i < count; ++i) {
        PredictionRecord r;
        t += 1 + rng() % 3;
        r.timestep = t;
        for (std::size_t d = 0; d < dims; ++d) r.instance.features.push_back(uniform(rng, -1.0, 1.0));
        r.instance.label = ClassLabel(static_cast<int>(rng() & 1));
        r.prediction = ClassLabel(static_cast<int>((rng() >> 1) & 1));
        r.source = rng() % 2 ? Source::Checkerboard : Source::DeployedModel;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<PredictionRecord> read_text(const std::string& text) {
    std::istringstream in(text);
    return read_stream(in);
}

}  // namespace

TEST_CASE("stream header") {
    CHECK(stream_header(1) == "t,f0,y,yhat,source");
    CHECK(stream_header(3) == "t,f0,f1,f2,y,yhat,source");
}

TEST_CASE("write then read reproduces every record exactly") {
    Rng rng(7);
    for (std::size_t dims : {1u, 2u, 5u}) {
        const auto records = random_records(rng, 200, dims);
        std::stringstream buffer;
        write_stream(records, buffer);
        const auto back = read_stream(buffer);
        REQUIRE(back.size() == records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            CHECK(back[i].timestep == records[i].timestep);
            CHECK(back[i].instance.features == records[i].instance.features);
            CHECK(back[i].instance.label == records[i].instance.label);
            CHECK(back[i].prediction == records[i].prediction);
            CHECK(back[i].source == records[i].source);
        }
    }
}

TEST_CASE("written rows") {
    PredictionRecord r;
    r.timestep = 4;
    r.instance.features = {0.25, -1.0};
    r.instance.label = kClass1;
    r.prediction = kClass0;
    r.source = Source::DeployedModel;
    std::ostringstream out;
    write_stream(std::span<const PredictionRecord>(&r, 1), out);
    CHECK(out.str() == "t,f0,f1,y,yhat,source\n4,0.25,-1,1,0,model\n");
}

TEST_CASE("malformed stream files are rejected") {
    CHECK_THROWS_AS(read_text(""), StreamFormatError);
    CHECK_THROWS_AS(read_text("t,x0,y,yhat,source\n"), StreamFormatError);
    CHECK_THROWS_AS(read_text("t,f0,y,source\n"), StreamFormatError);
    CHECK_THROWS_AS(read_text("t,f0,y,yhat,source\n1,0.5,0,1\n"), StreamFormatError);
    CHECK_THROWS_AS(read_text("t,f0,y,yhat,source\n2,0.5,0,1,model\n2,0.5,0,1,model\n"), StreamFormatError);
    CHECK_THROWS_AS(read_text("t,f0,y,yhat,source\n1,0.5,2,1,model\n"), StreamFormatError);
    CHECK_THROWS_AS(read_text("t,f0,y,yhat,source\n1,0.5,0,1,oracle\n"), StreamFormatError);
    CHECK_THROWS_AS(read_text("t,f0,y,yhat,source\n1,abc,0,1,model\n"), StreamFormatError);
    CHECK_THROWS_AS(read_text("t,f0,y,yhat,source\n-1,0.5,0,1,model\n"), StreamFormatError);
}

TEST_CASE("CRLF files and blank lines are accepted") {
    const auto records = read_text("t,f0,y,yhat,source\r\n1,0.5,0,1,checkerboard\r\n\r\n3,0.1,1,1,model\r\n");
    REQUIRE(records.size() == 2);
    CHECK(records[1].timestep == 3);
    CHECK(records[1].source == Source::DeployedModel);
}

TEST_CASE("format_double round-trips") {
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        const double x = uniform(rng, -1.0, 1.0) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
        CHECK(std::stod(format_double(x)) == x);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}
