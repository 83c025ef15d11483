#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cbge/core/common.hpp"

namespace cbge::csv {

/// A loaded delimited file: one header row plus string cells. UTF-8, comma
/// separated, '.' decimal separator; no quoting (the interchange format
/// never embeds commas in values).
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string path;

    int column(const std::string& name) const {
        for (size_t k = 0; k < header.size(); ++k)
            if (header[k] == name) return static_cast<int>(k);
        throw CalibrationError(path + ": missing column '" + name + "'");
    }
};

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CalibrationError(path.filename().string() + " not found");
    Table t;
    t.path = path.filename().string();
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        if (first) {
            t.header = cells;
            first = false;
        } else {
            if (cells.size() != t.header.size())
                throw CalibrationError(t.path + ": row with " + std::to_string(cells.size()) +
                                       " cells, expected " + std::to_string(t.header.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    if (first) throw CalibrationError(t.path + ": empty file");
    return t;
}

inline double parse_double(const Table& t, const std::string& cell) {
    try {
        size_t used = 0;
        double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw CalibrationError(t.path + ": cannot parse numeric value '" + cell + "'");
    }
}

/// Shortest representation that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = 0.0;
    std::sscanf(buf, "%lg", &back);
    if (back == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char s[32];
            std::snprintf(s, sizeof(s), "%.*g", prec, v);
            std::sscanf(s, "%lg", &back);
            if (back == v) return s;
        }
    }
    return buf;
}

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path) {
        if (!out_) throw CalibrationError("cannot open " + path.string() + " for writing");
    }
    void row(const std::vector<std::string>& cells) {
        for (size_t k = 0; k < cells.size(); ++k) {
            if (k) out_ << ',';
            out_ << cells[k];
        }
        out_ << '\n';
    }
private:
    std::ofstream out_;
};

} // namespace cbge::csv
