#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace intrinsic::csv {

inline std::string_view trim_cr(std::string_view line) noexcept
{
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
    {
        line.remove_suffix(1);
    }
    return line;
}

inline std::vector<std::string_view> split(std::string_view line, char delimiter = ',')
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;)
    {
        const auto pos = line.find(delimiter, start);
        if (pos == std::string_view::npos)
        {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

/// Splits text into lines without copying. A trailing newline does not
/// produce an extra empty line.
inline std::vector<std::string_view> lines(std::string_view text)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size())
    {
        auto pos = text.find('\n', start);
        if (pos == std::string_view::npos)
        {
            pos = text.size();
        }
        out.push_back(trim_cr(text.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view field) noexcept
{
    T value{};
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    if (first != last && *first == '+')
    {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || first == last)
    {
        return std::nullopt;
    }
    return value;
}

/// Shortest representation that parses back to the same double.
inline std::string format(double value)
{
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ec == std::errc{} ? ptr : buffer);
}

inline std::string format_fixed(double value, int decimals)
{
    char buffer[128];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                         std::chars_format::fixed, decimals);
    std::string out(buffer, ec == std::errc{} ? ptr : buffer);
    if (out.starts_with("-") && out.find_first_not_of("-0.") == std::string::npos)
    {
        out.erase(0, 1); // no "-0.000000"
    }
    return out;
}

} // namespace intrinsic::csv
