#include "car/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "car/errors.hpp"

namespace car {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": non-numeric cell '" + cell + "'");
    }
}

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;  // column-major access by index
};

RawTable read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    RawTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        const std::vector<std::string> cells = split_line(line);
        if (line_no == 1) {
            table.header = cells;
            continue;
        }
        if (cells.size() != table.header.size())
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(table.header.size()) + " cells, got " +
                             std::to_string(cells.size()));
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            row[c] = parse_cell(cells[c], line_no);
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw ParseError(path + ": missing header row");
    return table;
}

std::size_t column_index(const RawTable& t, const std::string& name) {
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) throw ParseError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - t.header.begin());
}

std::vector<double> column(const RawTable& t, std::size_t idx) {
    std::vector<double> out(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) out[r] = t.rows[r][idx];
    return out;
}

}  // namespace

DistortedSample read_distorted_csv(const std::string& path) {
    const RawTable t = read_table(path);
    DistortedSample s;
    s.u = column(t, column_index(t, "u"));
    s.x_tilde = column(t, column_index(t, "x_tilde"));
    s.y_tilde = column(t, column_index(t, "y_tilde"));
    return s;
}

AdditiveSample read_additive_csv(const std::string& path, std::size_t d1) {
    const RawTable t = read_table(path);
    AdditiveSample s;
    s.u = column(t, column_index(t, "u"));
    s.y_tilde = column(t, column_index(t, "y_tilde"));
    s.d1 = d1;
    for (std::size_t j = 1;; ++j) {
        const std::string name = "x" + std::to_string(j);
        if (std::find(t.header.begin(), t.header.end(), name) == t.header.end())
            break;
        s.x_tilde.push_back(column(t, column_index(t, name)));
    }
    if (s.x_tilde.empty()) throw ParseError("missing columns x1..xd");
    return s;
}

bool rescale_u(std::vector<double>& u) {
    const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
    if (*lo >= 0.0 && *hi <= 1.0) return false;
    const double range = *hi - *lo;
    if (range <= 0.0) throw DegenerateSample("u has zero range");
    const double min = *lo;
    for (double& v : u) v = (v - min) / range;
    return true;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fit_csv(const Curve& curve) {
    std::string out = "grid,m_hat,valid\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        out += format_double(curve.grid[i]);
        out += ',';
        out += format_double(curve.values[i]);
        out += ',';
        out += curve.valid_mask[i] ? '1' : '0';
        out += '\n';
    }
    return out;
}

}  // namespace car
