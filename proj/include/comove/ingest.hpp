#pragma once

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "comove/errors.hpp"
#include "comove/series.hpp"

// CSV loading, currency conversion and calendar alignment of the weekly
// input series. All joins use nearest-date matching with a +/-3 day
// tolerance (ties to the earlier date): the vendors stamp weekly bars on
// different weekdays.

namespace comove {

/// Maximum distance, in days, between dates treated as the same week.
inline constexpr int kDateMatchToleranceDays = 3;

namespace detail {

inline std::string trim_field(std::string s) {
    auto issp = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    std::size_t b = 0, e = s.size();
    while (b < e && issp(s[b])) ++b;
    while (e > b && issp(s[e - 1])) --e;
    s = s.substr(b, e - b);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        s = s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(trim_field(std::move(field)));
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(trim_field(std::move(field)));
    return out;
}

inline bool equal_ci(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        char x = a[i], y = b[i];
        if (x >= 'A' && x <= 'Z') x = char(x - 'A' + 'a');
        if (y >= 'A' && y <= 'Z') y = char(y - 'A' + 'a');
        if (x != y) return false;
    }
    return true;
}

/// Index of the observation in `dates` nearest to `target` within the match
/// tolerance; ties resolve to the earlier date. Returns nullopt if nothing
/// is close enough. `dates` must be sorted ascending.
inline std::optional<std::size_t> nearest_within(const std::vector<Date>& dates, Date target,
                                                 int tolerance_days = kDateMatchToleranceDays) {
    if (dates.empty()) return std::nullopt;
    auto it = std::lower_bound(dates.begin(), dates.end(), target);
    std::optional<std::size_t> best;
    int best_gap = tolerance_days + 1;
    if (it != dates.begin()) {
        const auto i = std::size_t(std::distance(dates.begin(), it)) - 1;
        const int gap = target.days() - dates[i].days();
        if (gap <= tolerance_days) {
            best = i;
            best_gap = gap;
        }
    }
    if (it != dates.end()) {
        const auto i = std::size_t(std::distance(dates.begin(), it));
        const int gap = dates[i].days() - target.days();
        // Strict '<' keeps the earlier date on an exact tie.
        if (gap <= tolerance_days && gap < best_gap) best = i;
    }
    return best;
}

} // namespace detail

/// Load one value column of a CSV file as a date-sorted series.
///
/// The file must have a header row with a date column (default name `date`,
/// matched case-insensitively) and the named value column. Rows are sorted
/// ascending by date; duplicate dates are rejected.
inline RawSeries load_csv(const std::string& path, const std::string& value_column,
                          const std::string& date_format = "%Y-%m-%d",
                          const std::string& date_column = "date") {
    std::ifstream in(path);
    if (!in)
        throw validation_error("cannot open CSV file '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw validation_error("empty CSV file '" + path + "'");
    const auto header = detail::split_csv_row(line);

    std::size_t date_idx = header.size(), value_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (detail::equal_ci(header[i], date_column)) date_idx = i;
        if (detail::equal_ci(header[i], value_column)) value_idx = i;
    }
    if (date_idx == header.size())
        throw parse_error("CSV '" + path + "' has no '" + date_column + "' column");
    if (value_idx == header.size())
        throw parse_error("CSV '" + path + "' has no '" + value_column + "' column");

    RawSeries series;
    series.name = value_column;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_row(line);
        if (fields.size() <= std::max(date_idx, value_idx))
            throw parse_error("row " + std::to_string(row) + " of '" + path +
                              "' has too few fields");
        Date date;
        try {
            date = Date::parse(fields[date_idx], date_format);
        } catch (const parse_error& e) {
            throw parse_error("row " + std::to_string(row) + " of '" + path + "': " + e.what());
        }
        const std::string& text = fields[value_idx];
        char* end = nullptr;
        const double value = std::strtod(text.c_str(), &end);
        if (text.empty() || end != text.c_str() + text.size())
            throw parse_error("row " + std::to_string(row) + " of '" + path +
                              "': unparsable number '" + text + "'");
        if (!std::isfinite(value) || value <= 0.0)
            throw validation_error("row " + std::to_string(row) + " of '" + path +
                                   "': value must be a positive finite price, got '" + text + "'");
        series.dates.push_back(date);
        series.values.push_back(value);
    }
    if (series.size() < 2)
        throw validation_error("CSV '" + path + "' holds fewer than 2 observations");

    std::vector<std::size_t> order(series.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return series.dates[a] < series.dates[b]; });
    RawSeries sorted;
    sorted.name = series.name;
    sorted.dates.reserve(series.size());
    sorted.values.reserve(series.size());
    for (std::size_t i : order) {
        if (!sorted.dates.empty() && sorted.dates.back() == series.dates[i])
            throw validation_error("duplicate date " + series.dates[i].to_string() + " in '" +
                                   path + "'");
        sorted.dates.push_back(series.dates[i]);
        sorted.values.push_back(series.values[i]);
    }
    return sorted;
}

/// Multiply an asset series by the matching exchange-rate quote.
///
/// Every asset date must have an FX quote within the match tolerance;
/// otherwise an alignment error lists the uncovered dates.
inline RawSeries convert_currency(const RawSeries& asset, const RawSeries& fx) {
    RawSeries out;
    out.name = asset.name;
    out.dates = asset.dates;
    out.values.resize(asset.size());
    std::string missing;
    std::size_t n_missing = 0;
    for (std::size_t i = 0; i < asset.size(); ++i) {
        const auto j = detail::nearest_within(fx.dates, asset.dates[i]);
        if (!j) {
            ++n_missing;
            if (n_missing <= 10) {
                if (!missing.empty()) missing += ", ";
                missing += asset.dates[i].to_string();
            }
            continue;
        }
        out.values[i] = asset.values[i] * fx.values[*j];
    }
    if (n_missing > 0) {
        if (n_missing > 10) missing += ", ...";
        throw alignment_error("no FX quote within " + std::to_string(kDateMatchToleranceDays) +
                              " days for " + std::to_string(n_missing) + " asset date(s): " +
                              missing);
    }
    return out;
}

/// Join several series onto the first series' calendar.
///
/// A row is kept when every series has an observation within the match
/// tolerance of the reference date; weeks missing from any series are
/// dropped across all columns rather than interpolated.
inline AlignedPanel align_panel(const std::vector<RawSeries>& series) {
    if (series.size() < 2)
        throw argument_error("align_panel needs at least 2 series");
    AlignedPanel panel;
    panel.names.reserve(series.size());
    for (const auto& s : series) panel.names.push_back(s.name);
    panel.columns.assign(series.size(), {});

    const RawSeries& ref = series.front();
    for (std::size_t t = 0; t < ref.size(); ++t) {
        std::vector<std::size_t> match(series.size());
        bool all = true;
        for (std::size_t k = 1; k < series.size(); ++k) {
            const auto j = detail::nearest_within(series[k].dates, ref.dates[t]);
            if (!j) {
                all = false;
                break;
            }
            match[k] = *j;
        }
        if (!all) continue;
        panel.dates.push_back(ref.dates[t]);
        panel.columns[0].push_back(ref.values[t]);
        for (std::size_t k = 1; k < series.size(); ++k)
            panel.columns[k].push_back(series[k].values[match[k]]);
    }
    if (panel.rows() == 0)
        throw alignment_error("series share no common dates within tolerance");
    return panel;
}

/// First difference of one panel column: out[t] = x[t+1] - x[t].
inline std::vector<double> difference(const AlignedPanel& panel, std::string_view column) {
    const auto& x = panel.column(column);
    if (x.size() < 2)
        throw argument_error("difference needs at least 2 observations");
    std::vector<double> out(x.size() - 1);
    for (std::size_t t = 0; t + 1 < x.size(); ++t)
        out[t] = x[t + 1] - x[t];
    return out;
}

/// First difference of a plain vector.
inline std::vector<double> difference(const std::vector<double>& x) {
    if (x.size() < 2)
        throw argument_error("difference needs at least 2 observations");
    std::vector<double> out(x.size() - 1);
    for (std::size_t t = 0; t + 1 < x.size(); ++t)
        out[t] = x[t + 1] - x[t];
    return out;
}

} // namespace comove
