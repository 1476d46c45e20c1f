#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lwf {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Value of a `key = value` line: a number, a bare word, `[a, b]` or `{k = v, ...}`.
struct ConfigValue {
    enum class Kind { number, word, list, table } kind = Kind::number;
    double number = 0.0;
    std::string word;
    std::vector<ConfigValue> items;
    std::vector<std::pair<std::string, ConfigValue>> fields;

    double as_number(const std::string& what) const
    {
        if (kind != Kind::number)
            throw ConfigError(what + ": expected a number");
        return number;
    }
    const std::string& as_word(const std::string& what) const
    {
        if (kind != Kind::word)
            throw ConfigError(what + ": expected a word");
        return word;
    }
    std::vector<double> as_numbers(const std::string& what) const
    {
        if (kind == Kind::number)
            return {number};
        if (kind != Kind::list)
            throw ConfigError(what + ": expected a list of numbers");
        std::vector<double> out;
        for (auto& v : items)
            out.push_back(v.as_number(what));
        return out;
    }
};

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string to_string(const ConfigValue& v)
{
    switch (v.kind) {
    case ConfigValue::Kind::number:
        return format_double(v.number);
    case ConfigValue::Kind::word:
        return v.word;
    case ConfigValue::Kind::list: {
        std::string s = "[";
        for (std::size_t i = 0; i < v.items.size(); ++i)
            s += (i ? ", " : "") + to_string(v.items[i]);
        return s + "]";
    }
    case ConfigValue::Kind::table: {
        std::string s = "{";
        for (std::size_t i = 0; i < v.fields.size(); ++i)
            s += (i ? ", " : "") + v.fields[i].first + " = " + to_string(v.fields[i].second);
        return s + "}";
    }
    }
    return {};
}

inline ConfigValue make_number(double x)
{
    ConfigValue v;
    v.number = x;
    return v;
}

inline ConfigValue make_word(std::string w)
{
    ConfigValue v;
    v.kind = ConfigValue::Kind::word;
    v.word = std::move(w);
    return v;
}

inline ConfigValue make_list(const std::vector<double>& xs)
{
    ConfigValue v;
    v.kind = ConfigValue::Kind::list;
    for (double x : xs)
        v.items.push_back(make_number(x));
    return v;
}

namespace detail {

class ValueParser {
public:
    explicit ValueParser(const std::string& s) : s_(s) {}

    ConfigValue parse_all()
    {
        auto v = parse();
        skip();
        if (pos_ != s_.size())
            fail("trailing characters");
        return v;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const
    {
        throw ConfigError("cannot parse value '" + s_ + "': " + msg);
    }
    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }
    bool eat(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    std::string token()
    {
        skip();
        std::size_t b = pos_;
        while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
               s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '}' && s_[pos_] != '=')
            ++pos_;
        if (b == pos_)
            fail("empty token");
        return s_.substr(b, pos_ - b);
    }
    ConfigValue parse()
    {
        ConfigValue v;
        if (eat('[')) {
            v.kind = ConfigValue::Kind::list;
            if (eat(']'))
                return v;
            do
                v.items.push_back(parse());
            while (eat(','));
            if (!eat(']'))
                fail("expected ']'");
            return v;
        }
        if (eat('{')) {
            v.kind = ConfigValue::Kind::table;
            if (eat('}'))
                return v;
            do {
                auto key = token();
                if (!eat('='))
                    fail("expected '=' after " + key);
                v.fields.emplace_back(key, parse());
            } while (eat(','));
            if (!eat('}'))
                fail("expected '}'");
            return v;
        }
        auto t = token();
        double x = 0.0;
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
        if (ec == std::errc() && p == t.data() + t.size()) {
            v.number = x;
            return v;
        }
        v.kind = ConfigValue::Kind::word;
        v.word = t;
        return v;
    }
};

inline std::string trim(const std::string& s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

} // namespace detail

inline ConfigValue parse_value(const std::string& text)
{
    return detail::ValueParser(text).parse_all();
}

/// Sectioned key-value document. Keys are stored as "section.key"; "" is the top section.
class ConfigDocument {
public:
    static ConfigDocument parse(std::istream& in)
    {
        ConfigDocument doc;
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            line = detail::trim(line);
            if (line.empty())
                continue;
            if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
                section = detail::trim(line.substr(1, line.size() - 2));
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
            auto key = detail::trim(line.substr(0, eq));
            auto full = section.empty() ? key : section + "." + key;
            if (doc.values_.count(full))
                throw ConfigError("line " + std::to_string(lineno) + ": duplicate key " + full);
            doc.values_[full] = parse_value(line.substr(eq + 1));
            doc.order_.push_back(full);
        }
        return doc;
    }

    static ConfigDocument parse(const std::string& text)
    {
        std::istringstream in(text);
        return parse(in);
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    const ConfigValue& at(const std::string& key) const
    {
        auto it = values_.find(key);
        if (it == values_.end())
            throw ConfigError("missing key " + key);
        return it->second;
    }
    const std::vector<std::string>& keys() const { return order_; }

private:
    std::map<std::string, ConfigValue> values_;
    std::vector<std::string> order_;
};

} // namespace lwf
