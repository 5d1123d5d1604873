#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "comove/cointegration.hpp"
#include "comove/cwt.hpp"
#include "comove/errors.hpp"
#include "comove/spectral.hpp"
#include "comove/stats.hpp"
#include "comove/unitroot.hpp"
#include "comove/vargranger.hpp"
#include "comove/wavelets.hpp"

namespace comove {

/// Decimal formatting used by every table: 6 significant digits, round half
/// to even, locale-independent.
inline std::string format_sig(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    std::string out(buf);
    if (out == "-0") out = "0";
    return out;
}

enum class TableFormat { markdown, csv };

/// One series' unit-root results under a single trend specification. Tests
/// that do not exist for that specification (KPSS without a deterministic
/// term) stay empty.
struct UnitRootRow {
    std::string label;
    std::optional<UnitRootReport> adf;
    std::optional<UnitRootReport> pp;
    std::optional<UnitRootReport> kpss;
};

struct JohansenBlock {
    JohansenReport report;
    std::vector<std::string> series_names;
};

struct CoherenceGrid {
    std::string name;
    CoherenceField field;
    std::optional<Eigen::MatrixXd> p_values;
};

struct NamedDecomposition {
    std::string name;
    ScaleDecomposition decomposition;
};

/// Everything the pipeline produces, each section optional so partial runs
/// can still be rendered.
struct ReportBundle {
    std::optional<CorrelationTable> correlation;
    std::vector<std::pair<std::string, RegressionReport>> anova;
    std::map<TrendSpec, std::vector<UnitRootRow>> unitroot;
    std::optional<JohansenBlock> johansen;
    std::optional<ScaleGrangerTable> scale_granger;
    std::optional<Periodogram> periodogram;
    std::vector<CoherenceGrid> coherence_grids;
    std::vector<NamedDecomposition> decompositions;
};

namespace detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

/// Rectangular table rendered to either format.
struct Table {
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> footers;   // markdown only

    std::string render(TableFormat format) const {
        std::string out;
        if (format == TableFormat::csv) {
            for (std::size_t c = 0; c < headers.size(); ++c) {
                if (c) out += ',';
                out += csv_escape(headers[c]);
            }
            out += '\n';
            for (const auto& row : rows) {
                for (std::size_t c = 0; c < row.size(); ++c) {
                    if (c) out += ',';
                    out += csv_escape(row[c]);
                }
                out += '\n';
            }
            return out;
        }
        out += '|';
        for (const auto& h : headers) out += ' ' + h + " |";
        out += "\n|";
        for (std::size_t c = 0; c < headers.size(); ++c) out += " --- |";
        out += '\n';
        for (const auto& row : rows) {
            out += '|';
            for (const auto& cell : row) out += ' ' + (cell.empty() ? " " : cell) + " |";
            out += '\n';
        }
        for (const auto& f : footers) out += '\n' + f + '\n';
        return out;
    }
};

inline void write_file(const std::filesystem::path& path, const std::string& content,
                       std::vector<std::string>& written) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path.string());
    out << content;
    if (!out) throw io_error("short write to " + path.string());
    written.push_back(path.string());
}

inline const char* extension(TableFormat format) {
    return format == TableFormat::csv ? ".csv" : ".md";
}

inline std::string join_levels(const std::set<int>& levels) {
    std::string out;
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
        if (!out.empty()) out += ';';
        out += std::to_string(*it);
    }
    return out;
}

inline const char* bound_label(PValueBound bound) {
    switch (bound) {
        case PValueBound::exact: return "exact";
        case PValueBound::upper: return "upper";
        default: return "lower";
    }
}

inline void unitroot_cells(const std::optional<UnitRootReport>& report, const char* name,
                           const std::string& label, std::vector<std::vector<std::string>>& rows) {
    if (!report) return;
    rows.push_back({label, name, format_sig(report->statistic), format_sig(report->p_value),
                    bound_label(report->p_bound), std::to_string(report->lags),
                    format_sig(report->critical_values.at(10)),
                    format_sig(report->critical_values.at(5)),
                    format_sig(report->critical_values.at(1)), join_levels(report->reject_at),
                    std::to_string(report->nobs)});
}

} // namespace detail

/// CSV grid of a coherence field: one `time,period,value` row per cell.
inline std::string coherence_grid_csv(const CoherenceField& field) {
    std::string out = "time,period,value\n";
    for (Eigen::Index t = 0; t < field.values.rows(); ++t) {
        for (Eigen::Index j = 0; j < field.values.cols(); ++j) {
            out += std::to_string(t);
            out += ',';
            out += format_sig(field.periods[std::size_t(j)]);
            out += ',';
            out += format_sig(field.values(t, j));
            out += '\n';
        }
    }
    return out;
}

inline std::string significance_grid_csv(const CoherenceField& field,
                                         const Eigen::MatrixXd& p_values) {
    std::string out = "time,period,value\n";
    for (Eigen::Index t = 0; t < p_values.rows(); ++t) {
        for (Eigen::Index j = 0; j < p_values.cols(); ++j) {
            out += std::to_string(t);
            out += ',';
            out += format_sig(field.periods[std::size_t(j)]);
            out += ',';
            out += format_sig(p_values(t, j));
            out += '\n';
        }
    }
    return out;
}

/// 8-bit grayscale PGM of a coherence field; 255 is R^2 = 1, rows run from
/// the shortest period to the longest, NaN cells are black.
inline std::string coherence_grid_pgm(const CoherenceField& field) {
    const Eigen::Index n = field.values.rows();
    const Eigen::Index S = field.values.cols();
    std::string out = "P5\n" + std::to_string(n) + " " + std::to_string(S) + "\n255\n";
    out.reserve(out.size() + std::size_t(n) * std::size_t(S));
    for (Eigen::Index j = 0; j < S; ++j) {
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = field.values(t, j);
            unsigned char byte = 0;
            if (std::isfinite(v)) {
                const double clamped = std::min(std::max(v, 0.0), 1.0);
                byte = static_cast<unsigned char>(std::lround(clamped * 255.0));
            }
            out += char(byte);
        }
    }
    return out;
}

/// N x (J+1) CSV of a wavelet decomposition, one column per detail level plus
/// the final smooth.
inline std::string decomposition_csv(const ScaleDecomposition& d) {
    std::string out;
    for (int j = 1; j <= d.levels; ++j) {
        out += "d" + std::to_string(j);
        out += ',';
    }
    out += "smooth\n";
    for (std::size_t t = 0; t < d.smooth.size(); ++t) {
        for (int j = 0; j < d.levels; ++j) {
            out += format_sig(d.details[std::size_t(j)][t]);
            out += ',';
        }
        out += format_sig(d.smooth[t]);
        out += '\n';
    }
    return out;
}

inline std::string periodogram_csv(const Periodogram& pg) {
    std::string out = "frequency,power\n";
    for (std::size_t i = 0; i < pg.size(); ++i) {
        out += format_sig(pg.frequencies[i]);
        out += ',';
        out += format_sig(pg.power[i]);
        out += '\n';
    }
    return out;
}

/// Renders the requested sections of `bundle` into `out_dir` and returns the
/// paths written, in a fixed order. Requesting a section the bundle does not
/// hold is an error naming every absence.
inline std::vector<std::string> render_tables(const ReportBundle& bundle, TableFormat format,
                                              const std::vector<std::string>& sections,
                                              const std::filesystem::path& out_dir) {
    static const std::set<std::string> known = {"correlation", "anova",    "unitroot",
                                               "johansen",    "granger",  "periodogram",
                                               "coherence",   "decomposition"};
    std::vector<std::string> missing;
    for (const auto& section : sections) {
        if (!known.count(section)) throw argument_error("unknown report section: " + section);
        const bool present =
            (section == "correlation" && bundle.correlation.has_value()) ||
            (section == "anova" && !bundle.anova.empty()) ||
            (section == "unitroot" && !bundle.unitroot.empty()) ||
            (section == "johansen" && bundle.johansen.has_value()) ||
            (section == "granger" && bundle.scale_granger.has_value()) ||
            (section == "periodogram" && bundle.periodogram.has_value()) ||
            (section == "coherence" && !bundle.coherence_grids.empty()) ||
            (section == "decomposition" && !bundle.decompositions.empty());
        if (!present) missing.push_back(section);
    }
    if (!missing.empty()) {
        std::string message = "bundle is missing requested sections:";
        for (const auto& name : missing) message += ' ' + name;
        throw argument_error(message);
    }

    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;
    const auto requested = [&](const char* name) {
        return std::find(sections.begin(), sections.end(), name) != sections.end();
    };

    if (requested("correlation")) {
        const auto& table = *bundle.correlation;
        detail::Table t;
        t.headers.push_back("window");
        for (const auto& label : table.pair_labels) t.headers.push_back(label);
        for (std::size_t w = 0; w < table.windows.size(); ++w) {
            std::vector<std::string> row{std::to_string(table.windows[w].first) + "-" +
                                         std::to_string(table.windows[w].second)};
            for (double r : table.r[w]) row.push_back(format_sig(r));
            t.rows.push_back(std::move(row));
        }
        detail::write_file(out_dir / (std::string("correlation") + detail::extension(format)),
                           t.render(format), written);
    }

    if (requested("anova")) {
        detail::Table t;
        t.headers = {"model", "n",  "intercept", "slope", "r_squared", "adj_r_squared",
                     "f",     "f_p", "durbin_watson"};
        for (const auto& [label, fit] : bundle.anova) {
            t.rows.push_back({label, std::to_string(fit.n), format_sig(fit.intercept),
                              format_sig(fit.slope()), format_sig(fit.r_squared),
                              format_sig(fit.adj_r_squared), format_sig(fit.f_statistic),
                              format_sig(fit.f_p_value),
                              fit.durbin_watson ? format_sig(*fit.durbin_watson) : ""});
        }
        detail::write_file(out_dir / (std::string("anova") + detail::extension(format)),
                           t.render(format), written);
    }

    if (requested("unitroot")) {
        for (const auto& [trend, rows] : bundle.unitroot) {
            detail::Table t;
            t.headers = {"series", "test", "statistic", "p_value", "p_bound",  "lags",
                         "cv10",   "cv5",  "cv1",       "reject_at", "nobs"};
            for (const auto& row : rows) {
                detail::unitroot_cells(row.adf, "adf", row.label, t.rows);
                detail::unitroot_cells(row.pp, "pp", row.label, t.rows);
                detail::unitroot_cells(row.kpss, "kpss", row.label, t.rows);
            }
            detail::write_file(out_dir / ("unitroot_" + trend_to_string(trend) +
                                          detail::extension(format)),
                               t.render(format), written);
        }
    }

    if (requested("johansen")) {
        const auto& block = *bundle.johansen;
        const auto& report = block.report;
        detail::Table t;
        t.headers = {"rank", "eigenvalue", "trace", "cv10", "cv5", "cv1"};
        for (const auto& name : block.series_names) t.headers.push_back("evec_" + name);
        for (std::size_t r = 0; r < report.trace_stats.size(); ++r) {
            std::vector<std::string> row{std::to_string(r), format_sig(report.eigenvalues[r]),
                                         format_sig(report.trace_stats[r]),
                                         format_sig(report.critical_values[r].at(10)),
                                         format_sig(report.critical_values[r].at(5)),
                                         format_sig(report.critical_values[r].at(1))};
            for (Eigen::Index i = 0; i < report.eigenvectors.rows(); ++i) {
                row.push_back(format_sig(report.eigenvectors(i, Eigen::Index(r))));
            }
            t.rows.push_back(std::move(row));
        }
        t.footers.push_back("lag order " + std::to_string(report.lag_order) + ", T = " +
                            std::to_string(report.nobs) + ", selected rank at 5% = " +
                            std::to_string(report.selected_rank(5)));
        detail::write_file(out_dir / (std::string("johansen") + detail::extension(format)),
                           t.render(format), written);
    }

    if (requested("granger")) {
        const auto& table = *bundle.scale_granger;
        for (int level = 1; level <= table.levels; ++level) {
            detail::Table t;
            t.headers = {"dependent", "independent", "lags", "f", "p_value", "signif", "nobs"};
            for (const auto& report : table.rows[std::size_t(level - 1)]) {
                t.rows.push_back({report.dependent, report.independent,
                                  std::to_string(report.lag_order),
                                  format_sig(report.f_statistic), format_sig(report.p_value),
                                  significance_code(report.p_value),
                                  std::to_string(report.nobs)});
            }
            t.footers.push_back(std::string("Signif. codes: ") + kSignificanceLegend);
            detail::write_file(out_dir / ("granger_scale" + std::to_string(level) +
                                          detail::extension(format)),
                               t.render(format), written);
        }
    }

    if (requested("periodogram")) {
        detail::write_file(out_dir / "periodogram.csv", periodogram_csv(*bundle.periodogram),
                           written);
    }

    if (requested("coherence")) {
        for (const auto& grid : bundle.coherence_grids) {
            detail::write_file(out_dir / (grid.name + ".csv"), coherence_grid_csv(grid.field),
                               written);
            detail::write_file(out_dir / (grid.name + ".pgm"), coherence_grid_pgm(grid.field),
                               written);
            if (grid.p_values) {
                detail::write_file(out_dir / (grid.name + "_significance.csv"),
                                   significance_grid_csv(grid.field, *grid.p_values), written);
            }
        }
    }

    if (requested("decomposition")) {
        for (const auto& named : bundle.decompositions) {
            detail::write_file(out_dir / ("decomposition_" + named.name + ".csv"),
                               decomposition_csv(named.decomposition), written);
        }
    }

    return written;
}

} // namespace comove
