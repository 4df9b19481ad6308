#include "spca/io.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

namespace spca {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::optional<double> parse_field(const std::string& field) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin) return std::nullopt;
    while (*end == ' ' || *end == '\t') ++end;
    if (*end != '\0') return std::nullopt;
    return value;
}

std::optional<std::vector<double>> parse_row(const std::string& line) {
    std::vector<double> row;
    for (const std::string& field : split_fields(line)) {
        const auto value = parse_field(field);
        if (!value) return std::nullopt;
        row.push_back(*value);
    }
    return row;
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

DataSet read_csv_dataset(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        auto row = parse_row(line);
        if (!row) {
            if (first_content) {  // header row
                first_content = false;
                continue;
            }
            throw CsvParseError("line " + std::to_string(lineno) + ": non-numeric field");
        }
        first_content = false;
        if (!rows.empty() && row->size() != rows.front().size())
            throw CsvParseError("line " + std::to_string(lineno) + ": expected " +
                                std::to_string(rows.front().size()) + " fields, got " +
                                std::to_string(row->size()));
        rows.push_back(std::move(*row));
    }
    if (rows.empty()) throw CsvParseError("no data rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    try {
        return DataSet(std::move(m));
    } catch (const Error& e) {
        throw CsvParseError(e.what());
    }
}

DataSet read_csv_dataset_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvParseError("cannot open " + path);
    return read_csv_dataset(in);
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace spca
