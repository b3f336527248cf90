#pragma once

#include <cctype>
#include <istream>
#include <map>
#include <string>

#include "sunbroker/errors.hpp"

namespace sunbroker::detail {

// Minimal TOML subset: [sections], scalar key = value pairs (quoted strings,
// numbers, booleans), # comments. Enough for scenario files; anything fancier
// is rejected loudly.
class TomlDoc {
public:
    static TomlDoc parse(std::istream& in) {
        TomlDoc doc;
        std::string line, section;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const std::string body = strip_comment(line);
            const std::string t = trim(body);
            if (t.empty()) continue;

            if (t.front() == '[') {
                if (t.back() != ']') throw FormatError("unterminated section header", line_no);
                section = trim(t.substr(1, t.size() - 2));
                if (section.empty()) throw FormatError("empty section name", line_no);
                doc.sections_[section]; // materialize even if empty
                continue;
            }

            const auto eq = t.find('=');
            if (eq == std::string::npos) throw FormatError("expected key = value", line_no);
            const std::string key = trim(t.substr(0, eq));
            std::string value = trim(t.substr(eq + 1));
            if (key.empty() || value.empty()) throw FormatError("empty key or value", line_no);

            bool quoted = false;
            if (value.front() == '"') {
                if (value.size() < 2 || value.back() != '"')
                    throw FormatError("unterminated string", line_no);
                value = value.substr(1, value.size() - 2);
                quoted = true;
            }
            doc.sections_[section][key] = Value{value, quoted};
        }
        return doc;
    }

    bool has(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

    std::string get_string(const std::string& section, const std::string& key) const {
        return find(section, key).text;
    }

    double get_double(const std::string& section, const std::string& key) const {
        const Value& v = find(section, key);
        try {
            std::size_t pos = 0;
            const double d = std::stod(v.text, &pos);
            if (pos != v.text.size()) throw std::invalid_argument(v.text);
            return d;
        } catch (const std::exception&) {
            throw ConfigError(section + "." + key, "expected a number, got '" + v.text + "'");
        }
    }

    long long get_int(const std::string& section, const std::string& key) const {
        const Value& v = find(section, key);
        try {
            std::size_t pos = 0;
            const long long i = std::stoll(v.text, &pos);
            if (pos != v.text.size()) throw std::invalid_argument(v.text);
            return i;
        } catch (const std::exception&) {
            throw ConfigError(section + "." + key, "expected an integer, got '" + v.text + "'");
        }
    }

    bool get_bool(const std::string& section, const std::string& key) const {
        const Value& v = find(section, key);
        if (v.text == "true") return true;
        if (v.text == "false") return false;
        throw ConfigError(section + "." + key, "expected true or false, got '" + v.text + "'");
    }

    std::string get_string_or(const std::string& s, const std::string& k,
                              const std::string& fallback) const {
        return has(s, k) ? get_string(s, k) : fallback;
    }
    double get_double_or(const std::string& s, const std::string& k, double fallback) const {
        return has(s, k) ? get_double(s, k) : fallback;
    }
    long long get_int_or(const std::string& s, const std::string& k, long long fallback) const {
        return has(s, k) ? get_int(s, k) : fallback;
    }

private:
    struct Value {
        std::string text;
        bool quoted = false;
    };

    const Value& find(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        if (s == sections_.end())
            throw ConfigError(section + "." + key, "missing section [" + section + "]");
        auto k = s->second.find(key);
        if (k == s->second.end()) throw ConfigError(section + "." + key, "missing key");
        return k->second;
    }

    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    // strips a # comment, respecting quoted strings
    static std::string strip_comment(const std::string& s) {
        bool in_quotes = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') in_quotes = !in_quotes;
            if (s[i] == '#' && !in_quotes) return s.substr(0, i);
        }
        return s;
    }

    std::map<std::string, std::map<std::string, Value>> sections_;
};

} // namespace sunbroker::detail
