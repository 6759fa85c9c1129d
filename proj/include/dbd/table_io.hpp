#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace dbd {

using Cell = std::variant<std::string, double>;

// Comma-separated table: one header row of column names, then data rows.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
    double number(std::size_t row, const std::string& column) const;
    const std::string& text(std::size_t row, const std::string& column) const;
    std::size_t column_index(const std::string& name) const;
};

// '#'-prefixed metadata preceding every output.
struct OutputHeader {
    std::string command;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::vector<std::string> notes;
};

std::string version_string();
// 10 significant digits, locale independent.
std::string format_number(double x);

void write_header(std::ostream& out, const OutputHeader& header);
void write_table(std::ostream& out, const Table& table);
void write_table(std::ostream& out, const OutputHeader& header, const Table& table);

// Reads the leading '#' block; stops before the first data line.
OutputHeader read_header(std::istream& in);
// Reads header then table; numeric-looking cells become doubles.
Table read_table(std::istream& in, OutputHeader* header = nullptr);

}  // namespace dbd
