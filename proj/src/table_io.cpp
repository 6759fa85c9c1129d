#include "dbd/table_io.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <boost/version.hpp>
#include <charconv>
#include <fftw3.h>
#include <sstream>

#include "dbd/errors.hpp"

#ifndef DBD_VERSION
#define DBD_VERSION "0.0.0"
#endif

namespace dbd {

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::invalid_argument("row width does not match the columns");
    rows.push_back(std::move(row));
}

std::size_t Table::column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("no column " + name);
    return static_cast<std::size_t>(it - columns.begin());
}

double Table::number(std::size_t row, const std::string& column) const {
    return std::get<double>(rows.at(row).at(column_index(column)));
}

const std::string& Table::text(std::size_t row, const std::string& column) const {
    return std::get<std::string>(rows.at(row).at(column_index(column)));
}

std::string version_string() {
    std::ostringstream s;
    s << "dbdsim " << DBD_VERSION << " (eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
      << EIGEN_MINOR_VERSION << ", " << fftw_version << ", boost " << BOOST_LIB_VERSION << ')';
    return s.str();
}

std::string format_number(double x) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 10);
    return std::string(buf, r.ptr);
}

void write_header(std::ostream& out, const OutputHeader& header) {
    out << "# " << version_string() << '\n';
    out << "# command: " << header.command << '\n';
    out << "# seed: " << header.seed << '\n';
    out << "# config: " << header.config.dump() << '\n';
    for (const auto& n : header.notes) out << "# " << n << '\n';
}

void write_table(std::ostream& out, const Table& table) {
    auto put_row = [&](const auto& cells, auto&& show) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            show(cells[i]);
        }
        out << '\n';
    };
    put_row(table.columns, [&](const std::string& c) { out << c; });
    for (const auto& row : table.rows) {
        put_row(row, [&](const Cell& c) {
            if (const auto* d = std::get_if<double>(&c))
                out << format_number(*d);
            else
                out << std::get<std::string>(c);
        });
    }
}

void write_table(std::ostream& out, const OutputHeader& header, const Table& table) {
    write_header(out, header);
    write_table(out, table);
}

OutputHeader read_header(std::istream& in) {
    OutputHeader h;
    std::string line;
    bool first = true;
    while (in.peek() == '#' && std::getline(in, line)) {
        const std::string body = line.size() > 2 ? line.substr(2) : "";
        if (first) {
            first = false;
            continue;
        }
        if (body.starts_with("command: ")) {
            h.command = body.substr(9);
        } else if (body.starts_with("seed: ")) {
            h.seed = std::stoull(body.substr(6));
        } else if (body.starts_with("config: ")) {
            try {
                h.config = nlohmann::json::parse(body.substr(8));
            } catch (const nlohmann::json::parse_error& e) {
                throw ConfigError(std::string("embedded config is not valid JSON: ") + e.what());
            }
        } else {
            h.notes.push_back(body);
        }
    }
    return h;
}

Table read_table(std::istream& in, OutputHeader* header) {
    OutputHeader h = read_header(in);
    if (header) *header = h;
    Table t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ',')) parts.push_back(item);
        return parts;
    };
    if (!std::getline(in, line)) return t;
    t.columns = split(line);
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<Cell> row;
        for (const auto& item : split(line)) {
            double v = 0.0;
            const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
            if (r.ec == std::errc{} && r.ptr == item.data() + item.size())
                row.emplace_back(v);
            else
                row.emplace_back(item);
        }
        t.add(std::move(row));
    }
    return t;
}

}  // namespace dbd
