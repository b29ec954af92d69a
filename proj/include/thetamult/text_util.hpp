#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

namespace thetamult {

// Decimal rendering used by every report writer: 17 significant digits is
// enough for a double to round-trip exactly.
inline std::string format_real(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

inline std::string format_real(double re, double im) {
    return "(" + format_real(re) + ", " + format_real(im) + ")";
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += ch;
        }
    }
    return out;
}

inline std::uint64_t fnv1a64(const std::string& data, std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex16(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

} // namespace thetamult
