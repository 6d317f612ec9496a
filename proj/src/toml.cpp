#include "fiberlink/toml.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fiberlink::toml {

namespace {

std::string strip(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

/// Removes a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
        if (s[i] == '#' && !in_string) return s.substr(0, i);
    }
    return s;
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
}

Value parse_scalar(const std::string& raw, std::size_t line) {
    Value v;
    v.line = line;
    if (raw.empty()) throw ParseError(line, "empty value");
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"')
            throw ParseError(line, "unterminated string");
        std::string s;
        for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
            if (raw[i] == '\\') {
                if (i + 2 >= raw.size()) throw ParseError(line, "bad escape");
                const char c = raw[++i];
                switch (c) {
                    case 'n': s += '\n'; break;
                    case 't': s += '\t'; break;
                    case '"': s += '"'; break;
                    case '\\': s += '\\'; break;
                    default: throw ParseError(line, std::string("bad escape \\") + c);
                }
            } else if (raw[i] == '"') {
                throw ParseError(line, "unexpected quote inside string");
            } else {
                s += raw[i];
            }
        }
        v.data = s;
        return v;
    }
    if (raw == "true") {
        v.data = true;
        return v;
    }
    if (raw == "false") {
        v.data = false;
        return v;
    }
    // Number: integer if it parses fully without . e E, else float.
    const bool looks_float = raw.find_first_of(".eE") != std::string::npos &&
                             raw.find_first_not_of("+-0123456789") != std::string::npos;
    try {
        std::size_t used = 0;
        if (!looks_float) {
            const long long i = std::stoll(raw, &used);
            if (used == raw.size()) {
                v.data = static_cast<std::int64_t>(i);
                return v;
            }
        }
        const double d = std::stod(raw, &used);
        if (used != raw.size()) throw ParseError(line, "malformed number: " + raw);
        v.data = d;
        return v;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError(line, "malformed value: " + raw);
    }
}

Value parse_value(const std::string& raw, std::size_t line) {
    if (!raw.empty() && raw.front() == '[') {
        if (raw.back() != ']') throw ParseError(line, "unterminated array");
        Value v;
        v.line = line;
        std::vector<Value> items;
        std::string body = raw.substr(1, raw.size() - 2);
        std::string cur;
        bool in_string = false;
        for (char c : body) {
            if (c == '"') in_string = !in_string;
            if (c == ',' && !in_string) {
                const std::string item = strip(cur);
                if (!item.empty()) items.push_back(parse_scalar(item, line));
                cur.clear();
            } else {
                cur += c;
            }
        }
        const std::string item = strip(cur);
        if (!item.empty()) items.push_back(parse_scalar(item, line));
        v.data = items;
        return v;
    }
    return parse_scalar(raw, line);
}

}  // namespace

double Value::as_number() const {
    if (is_int()) return static_cast<double>(std::get<std::int64_t>(data));
    if (is_float()) return std::get<double>(data);
    throw ParseError(line, "expected a number");
}

std::vector<std::string> Document::children(const std::string& prefix) const {
    std::set<std::string> names;
    auto collect = [&](const std::string& path) {
        if (path.rfind(prefix, 0) != 0) return;
        const std::string rest = path.substr(prefix.size());
        if (rest.empty()) return;
        const auto dot = rest.find('.');
        names.insert(dot == std::string::npos ? rest : rest.substr(0, dot));
    };
    for (const auto& [path, value] : values) collect(path);
    for (const auto& t : tables) collect(t);
    return {names.begin(), names.end()};
}

Document parse(const std::string& text) {
    Document doc;
    std::istringstream in(text);
    std::string line;
    std::string table;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip(strip_comment(line));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, "unterminated table header");
            const std::string name = strip(line.substr(1, line.size() - 2));
            if (name.empty()) throw ParseError(line_no, "empty table name");
            std::stringstream parts(name);
            std::string part;
            while (std::getline(parts, part, '.'))
                if (!valid_key(strip(part)))
                    throw ParseError(line_no, "bad table name: [" + name + "]");
            table = name;
            doc.tables.push_back(name);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(line_no, "expected key = value");
        const std::string key = strip(line.substr(0, eq));
        if (!valid_key(key)) throw ParseError(line_no, "bad key: " + key);
        const std::string raw = strip(line.substr(eq + 1));
        const std::string path = table.empty() ? key : table + "." + key;
        if (doc.values.count(path)) throw ParseError(line_no, "duplicate key: " + path);
        doc.values.emplace(path, parse_value(raw, line_no));
    }
    return doc;
}

}  // namespace fiberlink::toml
