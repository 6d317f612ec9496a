#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace fiberlink::csv {

/// RFC-4180-style CSV writer: UTF-8, header row, LF line endings. Doubles are
/// written with %.17g so repeated runs are byte-identical.
class Writer {
public:
    Writer(const std::filesystem::path& path, const std::vector<std::string>& columns);
    ~Writer();
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;

    void row(const std::vector<double>& values);
    void row_mixed(const std::vector<std::string>& values);

private:
    std::FILE* f_ = nullptr;
    std::size_t n_columns_ = 0;
};

std::string format_double(double v);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  ///< -1 if absent
    std::vector<double> numeric_column(const std::string& name) const;
};

/// Strict reader: every row must have the header's arity and numeric fields
/// must parse; violations report the 1-based line number.
Table read(const std::filesystem::path& path);

}  // namespace fiberlink::csv
