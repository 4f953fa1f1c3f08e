#pragma once

// Stream CSV: one row per emitted instance, columns t,f0..fk,y,yhat,source.

#include "perfdrift/stream_model.hpp"

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace perfdrift {

class StreamFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string stream_header(std::size_t dims);

void write_stream(std::span<const PredictionRecord> records, std::ostream& out);
void write_stream(std::span<const PredictionRecord> records, const std::filesystem::path& path);

std::vector<PredictionRecord> read_stream(std::istream& in);
std::vector<PredictionRecord> read_stream(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace perfdrift
