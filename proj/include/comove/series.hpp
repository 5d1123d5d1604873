#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "comove/errors.hpp"

namespace comove {

/// Calendar date stored as days since 1970-01-01.
class Date {
public:
    Date() = default;
    explicit Date(int days) : days_(days) {}

    static Date from_ymd(int year, int month, int day) {
        using namespace std::chrono;
        const year_month_day ymd{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                                 std::chrono::day{unsigned(day)}};
        if (!ymd.ok())
            throw parse_error("invalid calendar date " + std::to_string(year) + "-" +
                              std::to_string(month) + "-" + std::to_string(day));
        return Date(static_cast<int>(sys_days{ymd}.time_since_epoch().count()));
    }

    /// Parse with a strptime-like format. Supported tokens: %Y %m %d %b
    /// (English month abbreviation); any other character must match
    /// literally. The default is ISO 8601.
    static Date parse(std::string_view text, std::string_view format = "%Y-%m-%d");

    int days() const { return days_; }

    std::string to_string() const {
        using namespace std::chrono;
        const year_month_day ymd{sys_days{std::chrono::days{days_}}};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()),
                      unsigned(ymd.month()), unsigned(ymd.day()));
        return buf;
    }

    friend bool operator==(Date a, Date b) { return a.days_ == b.days_; }
    friend bool operator!=(Date a, Date b) { return a.days_ != b.days_; }
    friend bool operator<(Date a, Date b) { return a.days_ < b.days_; }
    friend bool operator<=(Date a, Date b) { return a.days_ <= b.days_; }
    friend bool operator>(Date a, Date b) { return a.days_ > b.days_; }
    friend bool operator>=(Date a, Date b) { return a.days_ >= b.days_; }

private:
    int days_ = 0;
};

namespace detail {

inline bool parse_int(std::string_view text, std::size_t& pos, int max_digits, int& out) {
    int value = 0;
    int ndig = 0;
    while (pos < text.size() && ndig < max_digits && text[pos] >= '0' && text[pos] <= '9') {
        value = value * 10 + (text[pos] - '0');
        ++pos;
        ++ndig;
    }
    if (ndig == 0) return false;
    out = value;
    return true;
}

inline bool parse_month_name(std::string_view text, std::size_t& pos, int& out) {
    static constexpr std::array<std::string_view, 12> names = {
        "jan", "feb", "mar", "apr", "may", "jun",
        "jul", "aug", "sep", "oct", "nov", "dec"};
    if (pos + 3 > text.size()) return false;
    char low[3];
    for (int i = 0; i < 3; ++i) {
        char c = text[pos + i];
        low[i] = (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : c;
    }
    const std::string_view key(low, 3);
    for (int m = 0; m < 12; ++m) {
        if (names[m] == key) {
            out = m + 1;
            pos += 3;
            // Swallow the rest of a spelled-out month ("March", "September").
            while (pos < text.size() &&
                   ((text[pos] >= 'a' && text[pos] <= 'z') || (text[pos] >= 'A' && text[pos] <= 'Z')))
                ++pos;
            return true;
        }
    }
    return false;
}

} // namespace detail

inline Date Date::parse(std::string_view text, std::string_view format) {
    int year = -1, month = -1, day = -1;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < format.size(); ++f) {
        if (format[f] == '%' && f + 1 < format.size()) {
            const char tok = format[++f];
            bool ok = true;
            switch (tok) {
            case 'Y': ok = detail::parse_int(text, pos, 4, year); break;
            case 'm': ok = detail::parse_int(text, pos, 2, month); break;
            case 'd': ok = detail::parse_int(text, pos, 2, day); break;
            case 'b': ok = detail::parse_month_name(text, pos, month); break;
            default:
                throw argument_error(std::string("unsupported date format token %") + tok);
            }
            if (!ok)
                throw parse_error("date '" + std::string(text) + "' does not match format '" +
                                  std::string(format) + "'");
        } else {
            if (pos >= text.size() || text[pos] != format[f])
                throw parse_error("date '" + std::string(text) + "' does not match format '" +
                                  std::string(format) + "'");
            ++pos;
        }
    }
    if (pos != text.size())
        throw parse_error("trailing characters in date '" + std::string(text) + "'");
    if (year < 0 || month < 0 || day < 0)
        throw argument_error("date format '" + std::string(format) +
                             "' must contain year, month and day");
    return from_ymd(year, month, day);
}

/// Date-stamped univariate observations as loaded from one CSV.
struct RawSeries {
    std::string name;
    std::vector<Date> dates;
    std::vector<double> values;

    std::size_t size() const { return dates.size(); }
};

/// Uniform weekly grid of N observations by K named columns.
struct AlignedPanel {
    std::vector<Date> dates;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return dates.size(); }
    std::size_t cols() const { return columns.size(); }

    std::size_t column_index(std::string_view name) const {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (equal_ci(names[i], name)) return i;
        }
        throw argument_error("unknown panel column '" + std::string(name) + "'");
    }

    const std::vector<double>& column(std::string_view name) const {
        return columns[column_index(name)];
    }

private:
    static bool equal_ci(std::string_view a, std::string_view b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            char x = a[i], y = b[i];
            if (x >= 'A' && x <= 'Z') x = char(x - 'A' + 'a');
            if (y >= 'A' && y <= 'Z') y = char(y - 'A' + 'a');
            if (x != y) return false;
        }
        return true;
    }
};

} // namespace comove
