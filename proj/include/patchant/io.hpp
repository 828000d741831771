#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "patchant/histogram.hpp"

namespace patchant {

// Shortest round-trip-safe form with 17 significant digits, locale independent.
std::string format_number(double v);

struct CsvColumn {
    std::string name;
    std::vector<double> values;
};

// All columns must have equal length.
void write_csv(const std::filesystem::path& path, const std::vector<CsvColumn>& columns);

// Reads a `time_ns,counts` CSV with header. Malformed rows throw ParseError carrying the line number;
// non-uniform bins or invalid counts throw ValidationError.
DecayHistogram load_histogram(const std::filesystem::path& path);
void write_histogram(const std::filesystem::path& path, const DecayHistogram& hist);

// Lowercase hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace patchant
