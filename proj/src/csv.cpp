#include "tsrag/csv.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tsrag/error.hpp"

namespace tsrag {

namespace {

std::string file_stem(const std::string& path) {
    const std::size_t slash = path.find_last_of("/\\");
    std::string name = (slash == std::string::npos) ? path : path.substr(slash + 1);
    const std::size_t dot = name.find_last_of('.');
    return (dot == std::string::npos) ? name : name.substr(0, dot);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        const std::size_t b = f.find_first_not_of(" \t");
        const std::size_t e = f.find_last_not_of(" \t");
        f = (b == std::string::npos) ? std::string() : f.substr(b, e - b + 1);
    }
    return fields;
}

bool parse_real(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') return false;
    return std::isfinite(out);
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TsragError(ErrorCategory::IO, "cannot open: " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) {
        throw TsragError(ErrorCategory::FORMAT, path + ": zero usable rows");
    }
    t.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        t.rows.push_back(split_line(line));
    }
    return t;
}

CsvLoadResult extract_column(const CsvTable& t, std::size_t col, const std::string& path,
                             const std::string& column_name) {
    CsvLoadResult res;
    res.series.id = file_stem(path) + "." + column_name;
    res.series.source_tag = file_stem(path);
    for (const auto& row : t.rows) {
        double v;
        if (col >= row.size() || !parse_real(row[col], v)) {
            ++res.skipped_rows;
            continue;
        }
        res.series.values.push_back(v);
    }
    if (res.series.values.empty()) {
        throw TsragError(ErrorCategory::FORMAT, path + ": zero usable rows in column " + column_name);
    }
    return res;
}

} // namespace

CsvLoadResult load_csv(const std::string& path, const std::string& column) {
    CsvTable t = read_table(path);
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (t.header[c] == column) return extract_column(t, c, path, column);
    }
    throw TsragError(ErrorCategory::FORMAT, path + ": no column named \"" + column + "\"");
}

std::vector<CsvLoadResult> load_csv_all(const std::string& path) {
    CsvTable t = read_table(path);
    std::vector<CsvLoadResult> out;
    const std::size_t first_value_col = t.header.size() >= 2 ? 1 : 0;
    for (std::size_t c = first_value_col; c < t.header.size(); ++c) {
        out.push_back(extract_column(t, c, path, t.header[c]));
    }
    if (out.empty()) throw TsragError(ErrorCategory::FORMAT, path + ": no value columns");
    return out;
}

} // namespace tsrag
