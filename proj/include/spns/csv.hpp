#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace spns {

// CSV emission with the bit-exact contract used by all experiment outputs:
// one header row, then data rows, floats rendered with 17 significant
// digits, deterministic row order (the caller's order is preserved).
class CsvTable {
public:
    using Cell = std::variant<int64_t, double, std::string>;

    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(std::vector<Cell> row) {
        if (row.size() != columns_.size())
            throw std::invalid_argument("csv: row width does not match header");
        rows_.push_back(std::move(row));
    }

    size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }

    std::string render(const std::string& manifest = {}) const {
        std::ostringstream os;
        if (!manifest.empty()) os << "# manifest=" << manifest << "\n";
        for (size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
        os << "\n";
        char buf[40];
        for (const auto& row : rows_) {
            for (size_t i = 0; i < row.size(); ++i) {
                if (i) os << ",";
                if (std::holds_alternative<int64_t>(row[i])) {
                    os << std::get<int64_t>(row[i]);
                } else if (std::holds_alternative<double>(row[i])) {
                    std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(row[i]));
                    os << buf;
                } else {
                    os << std::get<std::string>(row[i]);
                }
            }
            os << "\n";
        }
        return os.str();
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

inline void write_csv(const CsvTable& table, const std::string& path,
                      const std::string& manifest = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("csv: cannot open for writing: " + path);
    out << table.render(manifest);
    out.flush();
    if (!out) throw std::runtime_error("csv: write failure: " + path);
}

// Minimal reader for tests and downstream tooling: skips '#' comment lines,
// returns the header and string-valued rows.
struct CsvContent {
    std::string manifest;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

inline CsvContent read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("csv: cannot open for reading: " + path);
    CsvContent out;
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string tag = "# manifest=";
            if (line.rfind(tag, 0) == 0) out.manifest = line.substr(tag.size());
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!header_done) {
            out.columns = std::move(cells);
            header_done = true;
        } else {
            out.rows.push_back(std::move(cells));
        }
    }
    return out;
}

} // namespace spns
