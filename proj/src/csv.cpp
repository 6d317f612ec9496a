#include "fiberlink/csv.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fiberlink::csv {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Writer::Writer(const std::filesystem::path& path, const std::vector<std::string>& columns)
    : n_columns_(columns.size()) {
    f_ = std::fopen(path.string().c_str(), "wb");
    if (!f_) throw std::runtime_error("csv: cannot open " + path.string() + " for writing");
    std::string header;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) header += ',';
        header += columns[i];
    }
    header += '\n';
    std::fwrite(header.data(), 1, header.size(), f_);
}

Writer::~Writer() {
    if (f_) std::fclose(f_);
}

void Writer::row(const std::vector<double>& values) {
    if (values.size() != n_columns_) throw std::logic_error("csv: row arity mismatch");
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) line += ',';
        line += format_double(values[i]);
    }
    line += '\n';
    std::fwrite(line.data(), 1, line.size(), f_);
}

void Writer::row_mixed(const std::vector<std::string>& values) {
    if (values.size() != n_columns_) throw std::logic_error("csv: row arity mismatch");
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) line += ',';
        line += values[i];
    }
    line += '\n';
    std::fwrite(line.data(), 1, line.size(), f_);
}

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<double> Table::numeric_column(const std::string& name) const {
    const int idx = column(name);
    if (idx < 0) throw std::runtime_error("csv: missing column " + name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(std::stod(r[static_cast<std::size_t>(idx)]));
    return out;
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open " + path.string());
    Table t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (line.back() == ',') fields.emplace_back();
        if (line_no == 1) {
            t.columns = fields;
            continue;
        }
        if (fields.size() != t.columns.size())
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected " + std::to_string(t.columns.size()) +
                                     " fields, got " + std::to_string(fields.size()));
        for (const auto& f : fields) {
            if (f.empty())
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                         ": empty field");
        }
        t.rows.push_back(std::move(fields));
    }
    if (t.columns.empty())
        throw std::runtime_error(path.string() + ":1: missing header row");
    return t;
}

}  // namespace fiberlink::csv
