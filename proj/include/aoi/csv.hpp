#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

namespace aoi {

/// Shortest round-trip decimal form; locale independent and byte-stable.
inline std::string format_double(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return {buf, res.ptr};
}

/// Joins already formatted fields with commas and a trailing newline.
inline std::string csv_row(const std::vector<std::string>& fields)
{
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i != 0) {
            line += ',';
        }
        line += fields[i];
    }
    line += '\n';
    return line;
}

inline std::string format_bool(bool value) { return value ? "1" : "0"; }

} // namespace aoi
