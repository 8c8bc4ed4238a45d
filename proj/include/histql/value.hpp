#pragma once

#include <cstdint>
#include <charconv>
#include <cmath>
#include <string>
#include <variant>

namespace histql {

// A database cell. monostate is SQL NULL.
using Value = std::variant<std::monostate, int64_t, double, std::string>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

inline bool is_numeric(const Value& v) {
    return std::holds_alternative<int64_t>(v) || std::holds_alternative<double>(v);
}

inline double as_double(const Value& v) {
    if (const auto* i = std::get_if<int64_t>(&v)) return static_cast<double>(*i);
    return std::get<double>(v);
}

inline std::string format_double(double d) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
    (void)ec;
    return std::string(buf, end);
}

inline std::string to_display(const Value& v) {
    switch (v.index()) {
    case 0: return "NULL";
    case 1: return std::to_string(std::get<int64_t>(v));
    case 2: return format_double(std::get<double>(v));
    default: return std::get<std::string>(v);
    }
}

// Orders values the way the embedded engine's ORDER BY does:
// NULL < numeric < text, with int/double compared numerically.
inline bool value_less(const Value& a, const Value& b) {
    const bool an = is_null(a), bn = is_null(b);
    if (an || bn) return an && !bn;
    const bool anum = is_numeric(a), bnum = is_numeric(b);
    if (anum != bnum) return anum;
    if (anum) return as_double(a) < as_double(b);
    return std::get<std::string>(a) < std::get<std::string>(b);
}

inline bool value_equal(const Value& a, const Value& b) {
    if (is_null(a) || is_null(b)) return is_null(a) && is_null(b);
    if (is_numeric(a) && is_numeric(b)) return as_double(a) == as_double(b);
    if (is_numeric(a) != is_numeric(b)) return false;
    return std::get<std::string>(a) == std::get<std::string>(b);
}

struct ValueLess {
    bool operator()(const Value& a, const Value& b) const { return value_less(a, b); }
};

} // namespace histql
