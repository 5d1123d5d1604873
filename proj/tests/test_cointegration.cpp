#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "comove/cointegration.hpp"
#include "comove/rng.hpp"
#include "support/frozen_panel.hpp"

using namespace comove;
namespace ts = testsupport;

namespace {

AlignedPanel make_panel(std::vector<std::string> names,
                        std::vector<std::vector<double>> columns) {
    AlignedPanel p;
    p.names = std::move(names);
    p.columns = std::move(columns);
    const auto base = Date::from_ymd(2015, 1, 4).days();
    for (std::size_t i = 0; i < p.columns.front().size(); ++i)
        p.dates.push_back(Date(base + 7 * int(i)));
    return p;
}

AlignedPanel frozen3() {
    return make_panel({"a", "b", "c"},
                      {ts::frozen_panel_col0(), ts::frozen_panel_col1(),
                       ts::frozen_panel_col2()});
}

} // namespace

TEST_CASE("johansen matches frozen reference eigensystem, K=3") {
    const auto r = johansen_trace(frozen3(), 2);
    REQUIRE(r.eigenvalues.size() == 3);
    CHECK(r.nobs == 238);
    CHECK(r.eigenvalues[0] == Catch::Approx(0.24792543593522).margin(1e-10));
    CHECK(r.eigenvalues[1] == Catch::Approx(0.06092168580958).margin(1e-10));
    CHECK(r.eigenvalues[2] == Catch::Approx(0.00197828184295).margin(1e-10));
    CHECK(r.trace_stats[0] == Catch::Approx(83.24203471710767).margin(1e-7));
    CHECK(r.trace_stats[1] == Catch::Approx(15.43112098280942).margin(1e-7));
    CHECK(r.trace_stats[2] == Catch::Approx(0.47129741203755).margin(1e-7));

    CHECK(r.eigenvectors(0, 0) == 1.0);
    CHECK(r.eigenvectors(1, 0) == Catch::Approx(-1.948162898249).margin(1e-8));
    CHECK(r.eigenvectors(2, 0) == Catch::Approx(-0.029362960258).margin(1e-8));
    CHECK(r.eigenvectors(1, 1) == Catch::Approx(18.872814730495).margin(1e-6));
    CHECK(r.eigenvectors(2, 1) == Catch::Approx(-25.244328541647).margin(1e-6));

    // One shared trend between columns 0 and 1: rank 1 at the 10% level.
    CHECK(r.selected_rank(10) == 1);
}

TEST_CASE("johansen matches frozen reference at lag order 3") {
    const auto r = johansen_trace(frozen3(), 3);
    CHECK(r.eigenvalues[0] == Catch::Approx(0.23256125969364).margin(1e-10));
    CHECK(r.eigenvalues[1] == Catch::Approx(0.04974671960591).margin(1e-10));
    CHECK(r.eigenvalues[2] == Catch::Approx(0.00312332412599).margin(1e-10));
    CHECK(r.trace_stats[0] == Catch::Approx(75.56781753020412).margin(1e-7));
    CHECK(r.eigenvectors(1, 0) == Catch::Approx(-1.938951355797).margin(1e-8));
}

TEST_CASE("johansen matches frozen reference eigensystem, K=2") {
    const auto panel = make_panel(
        {"a", "c"}, {ts::frozen_panel_col0(), ts::frozen_panel_col2()});
    const auto r = johansen_trace(panel, 2);
    REQUIRE(r.eigenvalues.size() == 2);
    CHECK(r.eigenvalues[0] == Catch::Approx(0.06348758622329).margin(1e-10));
    CHECK(r.eigenvalues[1] == Catch::Approx(0.00284497033537).margin(1e-10));
    CHECK(r.trace_stats[0] == Catch::Approx(16.28908334039192).margin(1e-7));
    CHECK(r.trace_stats[1] == Catch::Approx(0.67806793940431).margin(1e-7));
    CHECK(r.eigenvectors(1, 0) == Catch::Approx(-2.330468754194).margin(1e-8));
    CHECK(r.eigenvectors(1, 1) == Catch::Approx(-0.114673327047).margin(1e-8));
}

TEST_CASE("johansen critical-value table by remaining trends") {
    const auto r3 = johansen_trace(frozen3(), 2);
    CHECK(r3.critical_values[0] == std::map<int, double>{{10, 28.71}, {5, 31.52}, {1, 37.22}});
    CHECK(r3.critical_values[1] == std::map<int, double>{{10, 15.66}, {5, 17.95}, {1, 23.52}});
    CHECK(r3.critical_values[2] == std::map<int, double>{{10, 6.50}, {5, 8.18}, {1, 11.65}});

    const auto panel2 = make_panel(
        {"a", "c"}, {ts::frozen_panel_col0(), ts::frozen_panel_col2()});
    const auto r2 = johansen_trace(panel2, 2);
    CHECK(r2.critical_values[0] == std::map<int, double>{{10, 15.66}, {5, 17.95}, {1, 23.52}});
    CHECK(r2.critical_values[1] == std::map<int, double>{{10, 6.50}, {5, 8.18}, {1, 11.65}});
}

TEST_CASE("johansen statistics survive positive column rescaling") {
    auto panel = frozen3();
    const auto base = johansen_trace(panel, 2);
    panel.columns[1] = panel.columns[1];
    for (double& v : panel.columns[1]) v *= 250.0;
    for (double& v : panel.columns[2]) v *= 0.004;
    const auto scaled = johansen_trace(panel, 2);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::fabs(base.eigenvalues[std::size_t(i)] -
                        scaled.eigenvalues[std::size_t(i)]) < 1e-8);
        CHECK(std::fabs(base.trace_stats[std::size_t(i)] -
                        scaled.trace_stats[std::size_t(i)]) < 1e-6);
    }
}

TEST_CASE("johansen trace statistics are nonnegative and weakly decreasing") {
    for (std::uint64_t s = 0; s < 8; ++s) {
        Rng rng = substream(5, "johansen-shape", s);
        std::vector<std::vector<double>> cols(3, std::vector<double>(150));
        for (auto& col : cols) {
            col[0] = 30.0 + rng.normal();
            for (std::size_t t = 1; t < col.size(); ++t) col[t] = col[t - 1] + rng.normal();
        }
        const auto r = johansen_trace(make_panel({"x", "y", "z"}, cols), 2);
        double prev = std::numeric_limits<double>::infinity();
        for (double t : r.trace_stats) {
            CHECK(t >= 0.0);
            CHECK(t <= prev);
            prev = t;
        }
        for (double l : r.eigenvalues) {
            CHECK(l >= -1e-12);
            CHECK(l < 1.0);
        }
        for (int j = 0; j < 3; ++j) CHECK(r.eigenvectors(0, j) == 1.0);
    }
}

TEST_CASE("planted cointegrating pair is recovered") {
    int reject_r0 = 0, keep_r1 = 0, vector_ok = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        Rng rng = substream(5, "johansen-planted", std::uint64_t(s));
        const std::size_t n = 1000;
        std::vector<double> x(n), y(n);
        double ar = 0.0;
        x[0] = 50.0;
        for (std::size_t t = 1; t < n; ++t) x[t] = x[t - 1] + rng.normal();
        for (std::size_t t = 0; t < n; ++t) {
            ar = 0.4 * ar + rng.normal();
            y[t] = 2.0 * x[t] + ar;
        }
        const auto r = johansen_trace(make_panel({"y", "x"}, {y, x}), 2);
        if (r.trace_stats[0] > r.critical_values[0].at(5)) ++reject_r0;
        if (r.trace_stats[1] < r.critical_values[1].at(5)) ++keep_r1;
        // Cointegrating direction (1, -2): compare the second weight.
        if (std::fabs(r.eigenvectors(1, 0) + 2.0) < 0.2) ++vector_ok;
    }
    CHECK(reject_r0 >= seeds * 9 / 10);
    CHECK(keep_r1 >= seeds * 8 / 10);
    CHECK(vector_ok >= seeds * 9 / 10);
}

TEST_CASE("independent random walks rarely show cointegration") {
    int reject = 0;
    const int seeds = 40;
    for (int s = 0; s < seeds; ++s) {
        Rng rng = substream(5, "johansen-null", std::uint64_t(s));
        const std::size_t n = 1000;
        std::vector<double> x(n), y(n);
        x[0] = 10.0;
        y[0] = 20.0;
        for (std::size_t t = 1; t < n; ++t) {
            x[t] = x[t - 1] + rng.normal();
            y[t] = y[t - 1] + rng.normal();
        }
        const auto r = johansen_trace(make_panel({"x", "y"}, {x, y}), 2);
        if (r.trace_stats[0] > r.critical_values[0].at(10)) ++reject;
    }
    CHECK(reject <= seeds / 4);
}

TEST_CASE("cointegrating direction sharpens with sample size") {
    auto angle_to_planted = [](std::size_t n, std::uint64_t s) {
        Rng rng = substream(5, "johansen-angle", s);
        std::vector<double> x(n), y(n);
        double ar = 0.0;
        x[0] = 50.0;
        for (std::size_t t = 1; t < n; ++t) x[t] = x[t - 1] + rng.normal();
        for (std::size_t t = 0; t < n; ++t) {
            ar = 0.4 * ar + rng.normal();
            y[t] = 2.0 * x[t] + ar;
        }
        AlignedPanel p;
        p.names = {"y", "x"};
        p.columns = {y, x};
        const auto base = Date::from_ymd(2015, 1, 4).days();
        for (std::size_t i = 0; i < n; ++i) p.dates.push_back(Date(base + 7 * int(i)));
        const auto r = johansen_trace(p, 2);
        const double b1 = 1.0, b2 = r.eigenvectors(1, 0);
        const double dot = b1 * 1.0 + b2 * (-2.0);
        const double cosang = std::fabs(dot) / (std::hypot(b1, b2) * std::hypot(1.0, 2.0));
        return std::acos(std::min(1.0, cosang)) * 180.0 / M_PI;
    };
    double sum_small = 0.0, sum_big = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        sum_small += angle_to_planted(200, s);
        sum_big += angle_to_planted(2000, s);
    }
    CHECK(sum_big / 10.0 < sum_small / 10.0 + 1e-12);
    CHECK(sum_big / 10.0 < 10.0);
}

TEST_CASE("johansen input validation") {
    const auto panel = frozen3();
    CHECK_THROWS_AS(johansen_trace(panel, 0), argument_error);
    CHECK_THROWS_AS(johansen_trace(panel, -3), argument_error);

    auto four = panel;
    four.names.push_back("d");
    four.columns.push_back(panel.columns[0]);
    CHECK_THROWS_AS(johansen_trace(four, 2), argument_error);

    AlignedPanel tiny = panel;
    for (auto& c : tiny.columns) c.resize(15);
    tiny.dates.resize(15);
    CHECK_THROWS_AS(johansen_trace(tiny, 2), validation_error);

    // A duplicated column makes the level moment matrix singular.
    auto dup = panel;
    dup.columns[2] = dup.columns[0];
    CHECK_THROWS_AS(johansen_trace(dup, 2), numerical_error);
}

TEST_CASE("portfolio_series combines columns") {
    const auto panel = frozen3();
    const auto sel = portfolio_series(panel, {1.0, 0.0, 0.0});
    CHECK(sel == panel.columns[0]);
    const auto zero = portfolio_series(panel, {0.0, 0.0, 0.0});
    CHECK(zero == std::vector<double>(panel.rows(), 0.0));
    const auto mix = portfolio_series(panel, {1.0, -2.0, 0.5});
    for (std::size_t t = 0; t < panel.rows(); ++t)
        CHECK(mix[t] == Catch::Approx(panel.columns[0][t] - 2.0 * panel.columns[1][t] +
                                      0.5 * panel.columns[2][t]));
    CHECK_THROWS_AS(portfolio_series(panel, {1.0, 2.0}), argument_error);
}
