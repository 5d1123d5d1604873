#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "comove/pipeline.hpp"

using namespace comove;

namespace {

std::pair<std::size_t, std::size_t> parse_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
        throw argument_error("window '" + text + "' must look like start:end");
    try {
        const std::size_t start = std::stoull(text.substr(0, colon));
        const std::size_t end = std::stoull(text.substr(colon + 1));
        return {start, end};
    } catch (const std::exception&) {
        throw argument_error("window '" + text + "' must look like start:end");
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(text.substr(start));
            break;
        }
        out.push_back(text.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

struct CliState {
    RunConfig config;
    std::vector<std::string> windows;
    std::string format = "markdown";
    int adf_lags = -1;
    int adf_max_lags = -1;
    int bandwidth = 23;

    std::string trend = "constant";
    std::string test = "all";
    std::string column;
    std::string pair = "nifty,gold";
    std::string response = "nifty";
    std::string predictors = "gold,oil";
    bool demean = false;
};

void finalize(CliState& s) {
    if (!s.windows.empty()) {
        s.config.windows.clear();
        for (const auto& w : s.windows) s.config.windows.push_back(parse_window(w));
    }
    s.config.table_format = s.format == "csv" ? TableFormat::csv : TableFormat::markdown;
    s.config.adf_lag_order = s.adf_lags >= 0 ? std::optional<int>(s.adf_lags) : std::nullopt;
    s.config.adf_max_lags = s.adf_max_lags >= 0 ? std::optional<int>(s.adf_max_lags) : std::nullopt;
    s.config.lrv_bandwidth = s.bandwidth >= 0 ? std::optional<int>(s.bandwidth) : std::nullopt;
}

void add_input_options(CLI::App* cmd, CliState& s) {
    cmd->add_option("--nifty", s.config.nifty_path, "Nifty CSV file")->required();
    cmd->add_option("--gold", s.config.gold_usd_path, "Gold (USD) CSV file")->required();
    cmd->add_option("--wti", s.config.wti_usd_path, "WTI crude (USD) CSV file")->required();
    cmd->add_option("--usdinr", s.config.usdinr_path, "USD/INR exchange-rate CSV file")
        ->required();
    cmd->add_option("--nifty-column", s.config.nifty_column, "Value column in the Nifty file");
    cmd->add_option("--gold-column", s.config.gold_column, "Value column in the gold file");
    cmd->add_option("--wti-column", s.config.wti_column, "Value column in the WTI file");
    cmd->add_option("--usdinr-column", s.config.usdinr_column,
                    "Value column in the exchange-rate file");
    cmd->add_option("--date-format", s.config.date_format, "Date format of all input files");
    cmd->add_option("--out", s.config.output_dir,
                    "Output directory (default: $COMOVE_OUTPUT_DIR, else the working directory)");
    cmd->add_option("--seed", s.config.seed, "Seed for every random substream");
    cmd->add_option("--format", s.format, "Table format")
        ->check(CLI::IsMember({"markdown", "csv"}));
}

std::vector<std::string> render_sections(const CliState& s, const ReportBundle& bundle,
                                         const std::vector<std::string>& sections) {
    return render_tables(bundle, s.config.table_format, sections, resolve_output_dir(s.config));
}

void print_written(const std::vector<std::string>& paths) {
    for (const auto& path : paths) std::cout << path << '\n';
}

void cmd_run_pipeline(CliState& s) {
    const auto result = run_pipeline(s.config);
    print_written(result.artifacts);
    std::cout << (result.complete ? "complete" : "incomplete") << '\n';
}

void cmd_corr(CliState& s) {
    const auto panel = load_panel(s.config);
    std::vector<std::pair<std::size_t, std::size_t>> windows;
    for (auto w : s.config.windows)
        if (w.first < panel.rows()) windows.push_back(w);
    ReportBundle bundle;
    bundle.correlation = windowed_correlations(panel, windows);
    print_written(render_sections(s, bundle, {"correlation"}));
}

void cmd_anova(CliState& s) {
    const auto panel = load_panel(s.config);
    ReportBundle bundle;
    bundle.anova.emplace_back(
        "nifty ~ oil + gold",
        ols_anova(panel.column("nifty"), {panel.column("oil"), panel.column("gold")}));
    print_written(render_sections(s, bundle, {"anova"}));
}

void cmd_unitroot(CliState& s) {
    const auto panel = load_panel(s.config);
    const TrendSpec trend = trend_from_string(s.trend);

    std::vector<std::pair<std::string, std::vector<double>>> rows;
    for (const char* name : {"oil", "gold", "nifty"}) {
        rows.emplace_back(name, panel.column(name));
        rows.emplace_back(std::string("d_") + name, difference(panel, name));
    }
    if (!s.column.empty()) {
        std::erase_if(rows, [&](const auto& row) { return row.first != s.column; });
        if (rows.empty())
            throw argument_error("unknown column '" + s.column +
                                 "' (expected oil, gold, nifty or their d_ differences)");
    }
    if (s.test != "all" && s.test != "adf" && s.test != "pp" && s.test != "kpss")
        throw argument_error("unknown test '" + s.test + "'");

    ReportBundle bundle;
    auto& table = bundle.unitroot[trend];
    for (const auto& [label, series] : rows) {
        UnitRootRow row;
        row.label = label;
        if (s.test == "all" || s.test == "adf")
            row.adf = adf_test(series, trend, s.config.adf_max_lags, s.config.adf_lag_order);
        if (s.test == "all" || s.test == "pp")
            row.pp = pp_test(series, trend, s.config.lrv_bandwidth);
        if ((s.test == "all" && trend != TrendSpec::none) || s.test == "kpss")
            row.kpss = kpss_test(series, trend, s.config.lrv_bandwidth);
        table.push_back(std::move(row));
    }
    print_written(render_sections(s, bundle, {"unitroot"}));
}

void cmd_johansen(CliState& s) {
    const auto panel = load_panel(s.config);
    JohansenBlock block;
    block.report = johansen_trace(panel, s.config.johansen_lag_order);
    block.series_names = panel.names;
    ReportBundle bundle;
    bundle.johansen = std::move(block);
    print_written(render_sections(s, bundle, {"johansen"}));
}

void cmd_dwt(CliState& s) {
    const auto panel = load_panel(s.config);
    ReportBundle bundle;
    for (const auto& name : panel.names) {
        if (!s.column.empty() && name != s.column) continue;
        bundle.decompositions.push_back(
            {name, haar_atrous_decompose(panel.column(name), s.config.dwt_levels)});
    }
    if (bundle.decompositions.empty())
        throw argument_error("unknown column '" + s.column + "'");
    print_written(render_sections(s, bundle, {"decomposition"}));
}

void cmd_granger(CliState& s) {
    const auto panel = load_panel(s.config);
    std::map<std::string, ScaleDecomposition> decompositions;
    for (const auto& name : panel.names)
        decompositions.emplace(name, haar_atrous_decompose(panel.column(name),
                                                           s.config.dwt_levels));
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"oil", "nifty"}, {"nifty", "oil"}, {"gold", "nifty"}, {"nifty", "gold"}};
    ReportBundle bundle;
    bundle.scale_granger =
        scale_granger_matrix(decompositions, pairs, s.config.granger_lag_order);
    print_written(render_sections(s, bundle, {"granger"}));
}

void cmd_fourier(CliState& s) {
    const auto panel = load_panel(s.config);
    const std::string column = s.column.empty() ? "nifty" : s.column;
    const auto& x = panel.column(column);
    const std::size_t top = std::min(s.config.fourier_max_bin, panel.rows() - 1);
    std::vector<double> grid(top + 1);
    for (std::size_t k = 0; k <= top; ++k) grid[k] = double(k) / double(panel.rows());
    ReportBundle bundle;
    bundle.periodogram = frequency_scan(x, grid, s.demean);
    print_written(render_sections(s, bundle, {"periodogram"}));
}

void cmd_coherence(CliState& s) {
    const auto panel = load_panel(s.config);
    const auto names = split_list(s.pair);
    if (names.size() != 2 || names[0].empty() || names[1].empty())
        throw argument_error("--pair must name two comma-separated columns, got '" + s.pair +
                             "'");
    const auto& x = panel.column(names[0]);
    const auto& y = panel.column(names[1]);
    const auto scales = s.config.cwt_scales ? *s.config.cwt_scales
                                            : default_scale_grid(panel.rows());
    CoherenceGrid grid;
    grid.name = "coherence_" + names[0] + "_" + names[1];
    grid.field = wavelet_coherence(x, y, scales);
    grid.p_values = coherence_significance(x, y, scales, s.config.n_surrogates,
                                           derive_seed(s.config.seed, grid.name))
                        .p_values;
    ReportBundle bundle;
    bundle.coherence_grids.push_back(std::move(grid));
    print_written(render_sections(s, bundle, {"coherence"}));
}

void cmd_mwc(CliState& s) {
    const auto panel = load_panel(s.config);
    const auto predictors = split_list(s.predictors);
    if (predictors.size() != 2 || predictors[0].empty() || predictors[1].empty())
        throw argument_error("--predictors must name two comma-separated columns, got '" +
                             s.predictors + "'");
    const auto& z = panel.column(s.response);
    const auto& x = panel.column(predictors[0]);
    const auto& y = panel.column(predictors[1]);
    const auto scales = s.config.cwt_scales ? *s.config.cwt_scales
                                            : default_scale_grid(panel.rows());
    CoherenceGrid grid;
    grid.name = "mwc_" + s.response + "_" + predictors[0] + "_" + predictors[1];
    grid.field = multiple_wavelet_coherence(z, x, y, scales);
    grid.p_values = mwc_significance(z, x, y, scales, s.config.n_surrogates,
                                     derive_seed(s.config.seed, grid.name))
                        .p_values;
    ReportBundle bundle;
    bundle.coherence_grids.push_back(std::move(grid));
    print_written(render_sections(s, bundle, {"coherence"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"comove: co-movement analysis of weekly Nifty, gold, and crude series"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "INI config file; command-line flags win");

    CliState s;
    std::function<void(CliState&)> action;

    auto* full = app.add_subcommand("run_pipeline", "Run every analysis stage in order");
    add_input_options(full, s);
    full->add_option("--window", s.windows, "Correlation window start:end (repeatable)");
    full->add_option("--adf-lags", s.adf_lags, "Pin the ADF lag order (default: AIC)");
    full->add_option("--adf-max-lags", s.adf_max_lags, "Upper bound for ADF lag selection");
    full->add_option("--bandwidth", s.bandwidth,
                     "Newey-West bandwidth for PP and KPSS (-1: automatic)");
    full->add_option("--johansen-lags", s.config.johansen_lag_order, "Cointegration VAR lags");
    full->add_option("--levels", s.config.dwt_levels, "Wavelet decomposition levels J");
    full->add_option("--granger-lags", s.config.granger_lag_order, "Causality VAR lag order");
    full->add_option("--fourier-max-bin", s.config.fourier_max_bin, "Top DFT bin to scan");
    full->add_option("--surrogates", s.config.n_surrogates,
                     "Monte-Carlo surrogates for coherence significance");
    full->callback([&] { action = cmd_run_pipeline; });

    auto* corr = app.add_subcommand("corr", "Windowed pairwise correlations");
    add_input_options(corr, s);
    corr->add_option("--window", s.windows, "Window start:end (repeatable)");
    corr->callback([&] { action = cmd_corr; });

    auto* anova = app.add_subcommand("anova", "Regression of Nifty on oil and gold");
    add_input_options(anova, s);
    anova->callback([&] { action = cmd_anova; });

    auto* unitroot = app.add_subcommand("unitroot", "ADF, PP, and KPSS tests");
    add_input_options(unitroot, s);
    unitroot->add_option("--trend", s.trend, "none | constant | constant_and_linear");
    unitroot->add_option("--test", s.test, "adf | pp | kpss | all");
    unitroot->add_option("--column", s.column, "Restrict to one series (e.g. oil, d_oil)");
    unitroot->add_option("--adf-lags", s.adf_lags, "Pin the ADF lag order");
    unitroot->add_option("--adf-max-lags", s.adf_max_lags, "Upper bound for ADF lag selection");
    unitroot->add_option("--bandwidth", s.bandwidth, "Newey-West bandwidth for PP and KPSS");
    unitroot->callback([&] { action = cmd_unitroot; });

    auto* johansen = app.add_subcommand("johansen", "Johansen trace cointegration test");
    add_input_options(johansen, s);
    johansen->add_option("--lag-order", s.config.johansen_lag_order, "VAR lag order");
    johansen->callback([&] { action = cmd_johansen; });

    auto* dwt = app.add_subcommand("dwt", "Haar a trous wavelet decomposition");
    add_input_options(dwt, s);
    dwt->add_option("--levels", s.config.dwt_levels, "Decomposition levels J");
    dwt->add_option("--column", s.column, "Restrict to one series");
    dwt->callback([&] { action = cmd_dwt; });

    auto* granger = app.add_subcommand("granger", "Scale-wise Granger causality grid");
    add_input_options(granger, s);
    granger->add_option("--levels", s.config.dwt_levels, "Decomposition levels J");
    granger->add_option("--lag-order", s.config.granger_lag_order, "VAR lag order");
    granger->callback([&] { action = cmd_granger; });

    auto* fourier = app.add_subcommand("fourier", "Frequency scan of one series");
    add_input_options(fourier, s);
    fourier->add_option("--column", s.column, "Series to scan (default nifty)");
    fourier->add_option("--max-bin", s.config.fourier_max_bin, "Top DFT bin to scan");
    fourier->add_flag("--demean", s.demean, "Subtract the mean before scanning");
    fourier->callback([&] { action = cmd_fourier; });

    auto* coherence = app.add_subcommand("coherence", "Wavelet coherence of one pair");
    add_input_options(coherence, s);
    coherence->add_option("--pair", s.pair, "Two comma-separated columns, e.g. nifty,gold");
    coherence->add_option("--surrogates", s.config.n_surrogates, "Monte-Carlo surrogates");
    coherence->callback([&] { action = cmd_coherence; });

    auto* mwc = app.add_subcommand("mwc", "Multiple wavelet coherence");
    add_input_options(mwc, s);
    mwc->add_option("--response", s.response, "Response column (default nifty)");
    mwc->add_option("--predictors", s.predictors, "Two predictor columns (default gold,oil)");
    mwc->add_option("--surrogates", s.config.n_surrogates, "Monte-Carlo surrogates");
    mwc->callback([&] { action = cmd_mwc; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        finalize(s);
        action(s);
        return 0;
    } catch (const argument_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const numerical_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}
