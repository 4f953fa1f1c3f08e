#include "perfdrift/stream_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace perfdrift {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch != '\r') {
            field.push_back(ch);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

template <typename T>
T parse_field(const std::string& text, std::size_t line, const char* column) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw StreamFormatError("line " + std::to_string(line) + ": bad " + column + " value '" + text + "'");
    }
    return value;
}

}  // namespace

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    std::array<char, 32> buffer{};
    const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    if (ec != std::errc{}) {
        throw std::runtime_error("cannot format number");
    }
    return std::string(buffer.data(), ptr);
}

std::string stream_header(std::size_t dims) {
    std::string header = "t";
    for (std::size_t d = 0; d < dims; ++d) {
        header += ",f" + std::to_string(d);
    }
    header += ",y,yhat,source";
    return header;
}

void write_stream(std::span<const PredictionRecord> records, std::ostream& out) {
    const std::size_t dims = records.empty() ? 1 : records.front().instance.features.size();
    out << stream_header(dims) << '\n';
    for (const auto& r : records) {
        if (r.instance.features.size() != dims) {
            throw StreamFormatError("records disagree on the number of features");
        }
        out << r.timestep;
        for (double x : r.instance.features) {
            out << ',' << format_double(x);
        }
        out << ',' << r.instance.label.value() << ',' << r.prediction.value() << ',' << to_string(r.source) << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed writing stream CSV");
    }
}

void write_stream(std::span<const PredictionRecord> records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    write_stream(records, out);
}

std::vector<PredictionRecord> read_stream(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw StreamFormatError("stream CSV is empty");
    }
    const auto header = split(line);
    if (header.size() < 5 || header.front() != "t" || header[header.size() - 3] != "y" ||
        header[header.size() - 2] != "yhat" || header.back() != "source") {
        throw StreamFormatError("stream CSV header must be t,f0..fk,y,yhat,source");
    }
    const std::size_t dims = header.size() - 4;
    if (stream_header(dims) != line.substr(0, line.find_last_not_of('\r') + 1)) {
        throw StreamFormatError("stream CSV feature columns must be named f0..f" + std::to_string(dims - 1));
    }

    std::vector<PredictionRecord> records;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line == "\r") continue;
        const auto fields = split(line);
        if (fields.size() != header.size()) {
            throw StreamFormatError("line " + std::to_string(line_number) + ": expected " +
                                    std::to_string(header.size()) + " fields");
        }
        PredictionRecord r;
        r.timestep = parse_field<std::size_t>(fields[0], line_number, "t");
        if (!records.empty() && r.timestep <= records.back().timestep) {
            throw StreamFormatError("line " + std::to_string(line_number) + ": timesteps must increase");
        }
        r.instance.features.reserve(dims);
        for (std::size_t d = 0; d < dims; ++d) {
            r.instance.features.push_back(parse_field<double>(fields[1 + d], line_number, "feature"));
        }
        try {
            r.instance.label = ClassLabel(parse_field<int>(fields[dims + 1], line_number, "y"));
            r.prediction = ClassLabel(parse_field<int>(fields[dims + 2], line_number, "yhat"));
            r.source = source_from_string(fields[dims + 3]);
        } catch (const ConfigError& e) {
            throw StreamFormatError("line " + std::to_string(line_number) + ": " + e.what());
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<PredictionRecord> read_stream(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open stream CSV '" + path.string() + "'");
    }
    return read_stream(in);
}

}  // namespace perfdrift
