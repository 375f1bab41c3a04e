#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mobipred {

// Minimal CSV support for the fixed pipeline formats: comma separated, no
// quoting, first line is the header.

std::vector<std::string> split_csv_line(const std::string& line);

struct CsvFile {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line per row
};

// Throws std::runtime_error when the file cannot be opened.
CsvFile read_csv(const std::string& path);

// Lossless double formatting (shortest round-trip form).
std::string format_double(double v);

bool parse_double(const std::string& s, double& out);
bool parse_int64(const std::string& s, std::int64_t& out);

}  // namespace mobipred
