#pragma once

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "comove/cointegration.hpp"
#include "comove/cwt.hpp"
#include "comove/errors.hpp"
#include "comove/ingest.hpp"
#include "comove/report.hpp"
#include "comove/rng.hpp"
#include "comove/spectral.hpp"
#include "comove/stats.hpp"
#include "comove/unitroot.hpp"
#include "comove/vargranger.hpp"
#include "comove/wavelets.hpp"

// End-to-end orchestration: ingest the four vendor files, convert to a
// common currency, and run every analysis stage in order, rendering a
// report bundle plus a manifest into the output directory. A stage failure
// is recorded, independent stages still run, partial outputs are written,
// and the first failure is rethrown with the stage name attached.

namespace comove {

inline constexpr const char* kOutputDirEnvVar = "COMOVE_OUTPUT_DIR";

struct RunConfig {
    // Input files: asset prices plus the USD/INR exchange rate used to
    // restate gold and crude in rupees.
    std::string nifty_path;
    std::string gold_usd_path;
    std::string wti_usd_path;
    std::string usdinr_path;
    std::string nifty_column = "nifty";
    std::string gold_column = "gold";
    std::string wti_column = "wti";
    std::string usdinr_column = "usdinr";
    std::string date_format = "%Y-%m-%d";

    // Analysis knobs, defaulted to the reproduction settings.
    std::vector<std::pair<std::size_t, std::size_t>> windows = {{0, 200}, {200, 700}, {700, 1200}};
    std::optional<int> adf_lag_order;        // pin the ADF lag; default AIC selection
    std::optional<int> adf_max_lags;
    std::optional<int> lrv_bandwidth = 23;   // Newey-West bandwidth for PP and KPSS
    int johansen_lag_order = 2;
    int dwt_levels = 7;
    int granger_lag_order = 3;
    std::size_t fourier_max_bin = 500;       // scan DFT bins 0..min(this, N-1)
    std::optional<std::vector<double>> cwt_scales;  // scale units; default grid if absent
    std::size_t n_surrogates = 300;
    std::uint64_t seed = 42;

    std::string output_dir;                  // empty: $COMOVE_OUTPUT_DIR, else "."
    TableFormat table_format = TableFormat::markdown;
};

struct StageStatus {
    std::string name;
    bool ran = false;
    bool ok = false;
    std::string message;
};

struct PipelineResult {
    ReportBundle bundle;
    AlignedPanel panel;
    std::vector<double> portfolio;
    std::vector<StageStatus> stages;
    std::vector<std::string> artifacts;      // absolute paths, manifest last
    std::string manifest_path;
    bool complete = false;
};

namespace detail {

inline std::uint64_t fnv1a64_bytes(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

[[noreturn]] inline void rethrow_with_stage(const std::string& stage, std::exception_ptr p) {
    try {
        std::rethrow_exception(p);
    } catch (const parse_error& e) {
        throw parse_error("stage " + stage + ": " + e.what());
    } catch (const alignment_error& e) {
        throw alignment_error("stage " + stage + ": " + e.what());
    } catch (const io_error& e) {
        throw io_error("stage " + stage + ": " + e.what());
    } catch (const validation_error& e) {
        throw validation_error("stage " + stage + ": " + e.what());
    } catch (const data_error& e) {
        throw data_error("stage " + stage + ": " + e.what());
    } catch (const argument_error& e) {
        throw argument_error("stage " + stage + ": " + e.what());
    } catch (const numerical_error& e) {
        throw numerical_error("stage " + stage + ": " + e.what());
    } catch (const std::exception& e) {
        throw error("stage " + stage + ": " + e.what());
    }
}

struct StageRunner {
    std::vector<StageStatus>& stages;
    std::string first_failed;
    std::exception_ptr first_error;

    template <class F>
    bool run(const std::string& name, bool dependencies_ok, F&& body) {
        StageStatus status;
        status.name = name;
        if (!dependencies_ok) {
            status.message = "skipped: an earlier stage it depends on failed";
            stages.push_back(std::move(status));
            return false;
        }
        status.ran = true;
        try {
            body();
            status.ok = true;
        } catch (const std::exception& e) {
            status.message = e.what();
            if (!first_error) {
                first_failed = name;
                first_error = std::current_exception();
            }
        }
        stages.push_back(std::move(status));
        return stages.back().ok;
    }
};

} // namespace detail

inline std::string resolve_output_dir(const RunConfig& config) {
    if (!config.output_dir.empty()) return config.output_dir;
    if (const char* env = std::getenv(kOutputDirEnvVar); env && *env) return env;
    return ".";
}

inline void validate_config(const RunConfig& config) {
    if (config.nifty_path.empty() || config.gold_usd_path.empty() ||
        config.wti_usd_path.empty() || config.usdinr_path.empty())
        throw argument_error("all four input file paths must be set");
    if (config.dwt_levels < 1 || config.dwt_levels > 10)
        throw argument_error("scale count must lie in [1, 10], got " +
                             std::to_string(config.dwt_levels));
    if (config.n_surrogates < 100)
        throw argument_error("significance needs at least 100 surrogates, got " +
                             std::to_string(config.n_surrogates));
    if (config.granger_lag_order < 1)
        throw argument_error("causality lag order must be positive");
    if (config.johansen_lag_order < 2)
        throw argument_error("cointegration lag order must be at least 2");
}

/// Load the four input files and produce the rupee-denominated
/// oil / gold / nifty panel used by every analysis stage.
inline AlignedPanel load_panel(const RunConfig& config) {
    RawSeries nifty = load_csv(config.nifty_path, config.nifty_column, config.date_format);
    RawSeries gold_usd = load_csv(config.gold_usd_path, config.gold_column, config.date_format);
    RawSeries wti_usd = load_csv(config.wti_usd_path, config.wti_column, config.date_format);
    RawSeries fx = load_csv(config.usdinr_path, config.usdinr_column, config.date_format);

    RawSeries oil = convert_currency(wti_usd, fx);
    oil.name = "oil";
    RawSeries gold = convert_currency(gold_usd, fx);
    gold.name = "gold";
    nifty.name = "nifty";
    return align_panel({oil, gold, nifty});
}

inline PipelineResult run_pipeline(const RunConfig& config) {
    validate_config(config);
    const std::filesystem::path out_dir = resolve_output_dir(config);

    PipelineResult result;
    detail::StageRunner runner{result.stages, {}, nullptr};

    const bool have_panel = runner.run("ingest", true, [&] {
        result.panel = load_panel(config);
    });
    const AlignedPanel& panel = result.panel;
    const std::size_t n = panel.rows();

    runner.run("correlation", have_panel, [&] {
        std::vector<std::pair<std::size_t, std::size_t>> windows;
        for (auto w : config.windows)
            if (w.first < n) windows.push_back(w);
        if (windows.empty())
            throw argument_error("no correlation window starts inside the sample of " +
                                 std::to_string(n) + " rows");
        result.bundle.correlation = windowed_correlations(panel, windows);
    });

    runner.run("anova", have_panel, [&] {
        const auto fit = ols_anova(panel.column("nifty"),
                                   {panel.column("oil"), panel.column("gold")});
        result.bundle.anova.emplace_back("nifty ~ oil + gold", fit);
    });

    runner.run("unitroot", have_panel, [&] {
        std::vector<std::pair<std::string, std::vector<double>>> rows;
        for (const char* name : {"oil", "gold", "nifty"}) {
            rows.emplace_back(name, panel.column(name));
            rows.emplace_back(std::string("d_") + name, difference(panel, name));
        }
        for (TrendSpec trend :
             {TrendSpec::none, TrendSpec::constant, TrendSpec::constant_and_linear}) {
            auto& table = result.bundle.unitroot[trend];
            for (const auto& [label, series] : rows) {
                UnitRootRow row;
                row.label = label;
                row.adf = adf_test(series, trend, config.adf_max_lags, config.adf_lag_order);
                row.pp = pp_test(series, trend, config.lrv_bandwidth);
                if (trend != TrendSpec::none)
                    row.kpss = kpss_test(series, trend, config.lrv_bandwidth);
                table.push_back(std::move(row));
            }
        }
    });

    const bool have_johansen = runner.run("johansen", have_panel, [&] {
        JohansenBlock block;
        block.report = johansen_trace(panel, config.johansen_lag_order);
        block.series_names = panel.names;
        result.bundle.johansen = std::move(block);
    });

    runner.run("portfolio", have_johansen, [&] {
        const auto& evec = result.bundle.johansen->report.eigenvectors;
        std::vector<double> weights(std::size_t(evec.rows()));
        for (Eigen::Index i = 0; i < evec.rows(); ++i) weights[std::size_t(i)] = evec(i, 0);
        result.portfolio = portfolio_series(panel, weights);
    });

    std::map<std::string, ScaleDecomposition> decompositions;
    const bool have_dwt = runner.run("dwt", have_panel, [&] {
        for (const auto& name : panel.names) {
            auto dec = haar_atrous_decompose(panel.column(name), config.dwt_levels);
            result.bundle.decompositions.push_back({name, dec});
            decompositions.emplace(name, std::move(dec));
        }
    });

    runner.run("granger", have_dwt, [&] {
        const std::vector<std::pair<std::string, std::string>> pairs = {
            {"oil", "nifty"}, {"nifty", "oil"}, {"gold", "nifty"}, {"nifty", "gold"}};
        result.bundle.scale_granger =
            scale_granger_matrix(decompositions, pairs, config.granger_lag_order);
    });

    runner.run("fourier", have_panel, [&] {
        const std::size_t top = std::min(config.fourier_max_bin, n - 1);
        std::vector<double> grid(top + 1);
        for (std::size_t k = 0; k <= top; ++k) grid[k] = double(k) / double(n);
        result.bundle.periodogram = frequency_scan(panel.column("nifty"), grid);
    });

    const std::vector<double> scales =
        have_panel ? (config.cwt_scales ? *config.cwt_scales : default_scale_grid(n))
                   : std::vector<double>{};

    const auto coherence_stage = [&](const std::string& stage, const std::string& first,
                                     const std::string& second) {
        runner.run(stage, have_panel, [&] {
            const auto& x = panel.column(first);
            const auto& y = panel.column(second);
            CoherenceGrid grid;
            grid.name = "coherence_" + first + "_" + second;
            grid.field = wavelet_coherence(x, y, scales);
            grid.p_values = coherence_significance(x, y, scales, config.n_surrogates,
                                                   derive_seed(config.seed, grid.name))
                                .p_values;
            result.bundle.coherence_grids.push_back(std::move(grid));
        });
    };
    coherence_stage("coherence nifty~gold", "nifty", "gold");
    coherence_stage("coherence nifty~oil", "nifty", "oil");

    runner.run("mwc", have_panel, [&] {
        const auto& z = panel.column("nifty");
        const auto& x = panel.column("gold");
        const auto& y = panel.column("oil");
        CoherenceGrid grid;
        grid.name = "mwc_nifty_gold_oil";
        grid.field = multiple_wavelet_coherence(z, x, y, scales);
        grid.p_values = mwc_significance(z, x, y, scales, config.n_surrogates,
                                         derive_seed(config.seed, grid.name))
                            .p_values;
        result.bundle.coherence_grids.push_back(std::move(grid));
    });

    runner.run("render", true, [&] {
        std::vector<std::string> sections;
        if (result.bundle.correlation) sections.push_back("correlation");
        if (!result.bundle.anova.empty()) sections.push_back("anova");
        if (!result.bundle.unitroot.empty()) sections.push_back("unitroot");
        if (result.bundle.johansen) sections.push_back("johansen");
        if (result.bundle.scale_granger) sections.push_back("granger");
        if (result.bundle.periodogram) sections.push_back("periodogram");
        if (!result.bundle.coherence_grids.empty()) sections.push_back("coherence");
        if (!result.bundle.decompositions.empty()) sections.push_back("decomposition");
        result.artifacts = render_tables(result.bundle, config.table_format, sections, out_dir);
        if (!result.portfolio.empty()) {
            std::string csv = "date,value\n";
            for (std::size_t t = 0; t < result.portfolio.size(); ++t) {
                csv += panel.dates[t].to_string();
                csv += ',';
                csv += format_sig(result.portfolio[t]);
                csv += '\n';
            }
            std::vector<std::string> written;
            detail::write_file(out_dir / "portfolio.csv", csv, written);
            result.artifacts.push_back(written.front());
        }
    });

    result.complete = true;
    for (const auto& stage : result.stages)
        if (!stage.ok) result.complete = false;

    runner.run("manifest", true, [&] {
        nlohmann::json manifest;
        manifest["tool"] = "comove";
        manifest["complete"] = result.complete;
        manifest["seed"] = config.seed;
        manifest["table_format"] = config.table_format == TableFormat::csv ? "csv" : "markdown";
        manifest["n_rows"] = n;
        manifest["series"] = panel.names;
        manifest["stages"] = nlohmann::json::array();
        for (const auto& stage : result.stages) {
            manifest["stages"].push_back({{"name", stage.name},
                                          {"ran", stage.ran},
                                          {"ok", stage.ok},
                                          {"message", stage.message}});
        }
        manifest["artifacts"] = nlohmann::json::array();
        for (const auto& path : result.artifacts) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw io_error("cannot reread artifact " + path);
            const std::string bytes{std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>()};
            char hash[20];
            std::snprintf(hash, sizeof hash, "%016llx",
                          static_cast<unsigned long long>(detail::fnv1a64_bytes(bytes)));
            manifest["artifacts"].push_back(
                {{"path", std::filesystem::path(path).filename().string()},
                 {"bytes", bytes.size()},
                 {"fnv1a64", hash}});
        }
        std::vector<std::string> written;
        detail::write_file(out_dir / "manifest.json", manifest.dump(2) + "\n", written);
        result.manifest_path = written.front();
        result.artifacts.push_back(result.manifest_path);
    });

    if (runner.first_error)
        detail::rethrow_with_stage(runner.first_failed, runner.first_error);
    return result;
}

} // namespace comove
