#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fiberlink::toml {

/// Minimal TOML subset sufficient for scenario files: [table.headers],
/// key = value with strings, integers, floats, booleans, and flat arrays of
/// those, plus # comments. No inline tables, no multi-line strings. Values
/// keep their source line for error reporting.
struct Value {
    std::variant<std::string, std::int64_t, double, bool, std::vector<Value>> data;
    std::size_t line = 0;

    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(data); }
    bool is_float() const { return std::holds_alternative<double>(data); }
    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_array() const { return std::holds_alternative<std::vector<Value>>(data); }

    double as_number() const;  ///< int or float
};

struct ParseError : std::runtime_error {
    std::size_t line;
    ParseError(std::size_t l, const std::string& msg)
        : std::runtime_error("line " + std::to_string(l) + ": " + msg), line(l) {}
};

/// Document flattened to dotted key paths ("link.1.span.1.length_km").
struct Document {
    std::map<std::string, Value> values;
    std::vector<std::string> tables;  ///< declared [table] headers, in order

    bool has(const std::string& path) const { return values.count(path) != 0; }
    /// Names directly under a prefix ("link." -> {"1", "2"}), from both keys
    /// and declared table headers (so empty sections still count).
    std::vector<std::string> children(const std::string& prefix) const;
};

Document parse(const std::string& text);

}  // namespace fiberlink::toml
