#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "csv.hpp"
#include "error.hpp"

namespace intrinsic {

/// One quote. Timestamps are milliseconds since the Unix epoch.
struct Tick
{
    std::int64_t timestamp_ms = 0;
    double bid = 0.0;
    double ask = 0.0;

    friend bool operator==(const Tick&, const Tick&) = default;
};

[[nodiscard]] constexpr double midprice(const Tick& tick) noexcept
{
    return (tick.bid + tick.ask) / 2.0;
}

/// Time-ordered quotes of one instrument. Equal timestamps are allowed and
/// keep their input order.
struct PriceSeries
{
    std::string instrument;
    std::vector<Tick> ticks;

    [[nodiscard]] bool empty() const noexcept { return ticks.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return ticks.size(); }

    friend bool operator==(const PriceSeries&, const PriceSeries&) = default;
};

struct TickFormat
{
    char delimiter = ',';
    std::string_view header = "timestamp_ms,bid,ask";
};

namespace detail {

inline bool is_gzip(std::string_view bytes) noexcept
{
    return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
           static_cast<unsigned char>(bytes[1]) == 0x8b;
}

inline std::string gunzip(std::string_view compressed)
{
    z_stream stream{};
    if (inflateInit2(&stream, 16 + MAX_WBITS) != Z_OK)
    {
        throw data_error("gzip: cannot initialise decoder");
    }
    stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
    stream.avail_in = static_cast<uInt>(compressed.size());

    std::string out;
    char chunk[1 << 16];
    int rc = Z_OK;
    while (rc != Z_STREAM_END)
    {
        stream.next_out = reinterpret_cast<Bytef*>(chunk);
        stream.avail_out = sizeof(chunk);
        rc = inflate(&stream, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END)
        {
            inflateEnd(&stream);
            throw data_error("gzip: corrupt input");
        }
        out.append(chunk, sizeof(chunk) - stream.avail_out);
        if (rc == Z_OK && stream.avail_in == 0 && stream.avail_out != 0)
        {
            inflateEnd(&stream);
            throw data_error("gzip: truncated input");
        }
    }
    inflateEnd(&stream);
    return out;
}

} // namespace detail

/// Parses CSV quotes. Gzip-compressed input is recognised by its magic
/// bytes. Rows must already be time-ordered: a decreasing timestamp is an
/// error, never silently sorted.
[[nodiscard]] inline PriceSeries parse_ticks(std::string_view bytes,
                                             const TickFormat& format = {},
                                             std::string instrument = {})
{
    std::string inflated;
    if (detail::is_gzip(bytes))
    {
        inflated = detail::gunzip(bytes);
        bytes = inflated;
    }

    PriceSeries series;
    series.instrument = std::move(instrument);

    const auto rows = csv::lines(bytes);
    if (rows.empty() || rows.front() != format.header)
    {
        throw data_error("line 1: expected header '" + std::string(format.header) + "'");
    }
    series.ticks.reserve(rows.size() - 1);

    for (std::size_t i = 1; i < rows.size(); ++i)
    {
        const auto line_no = std::to_string(i + 1);
        if (rows[i].empty())
        {
            continue;
        }
        const auto fields = csv::split(rows[i], format.delimiter);
        if (fields.size() != 3)
        {
            throw data_error("line " + line_no + ": malformed row, expected 3 fields");
        }
        const auto ts = csv::parse_number<std::int64_t>(fields[0]);
        const auto bid = csv::parse_number<double>(fields[1]);
        const auto ask = csv::parse_number<double>(fields[2]);
        if (!ts || !bid || !ask || !std::isfinite(*bid) || !std::isfinite(*ask))
        {
            throw data_error("line " + line_no + ": malformed row");
        }
        if (*bid <= 0.0 || *ask <= 0.0)
        {
            throw data_error("line " + line_no + ": non-positive price");
        }
        if (*bid > *ask)
        {
            throw data_error("line " + line_no + ": bid exceeds ask");
        }
        if (!series.ticks.empty() && *ts < series.ticks.back().timestamp_ms)
        {
            throw data_error("line " + line_no + ": decreasing timestamp");
        }
        series.ticks.push_back(Tick{*ts, *bid, *ask});
    }
    return series;
}

[[nodiscard]] inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw data_error("cannot open '" + path + "'");
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

[[nodiscard]] inline PriceSeries read_ticks(const std::string& path)
{
    return parse_ticks(read_file(path), {}, path);
}

inline void write_ticks(std::ostream& out, std::span<const Tick> ticks)
{
    out << "timestamp_ms,bid,ask\n";
    for (const auto& tick : ticks)
    {
        out << tick.timestamp_ms << ',' << csv::format(tick.bid) << ','
            << csv::format(tick.ask) << '\n';
    }
}

inline void write_ticks(std::ostream& out, const PriceSeries& series)
{
    write_ticks(out, std::span<const Tick>(series.ticks));
}

} // namespace intrinsic
