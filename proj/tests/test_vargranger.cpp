#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "comove/rng.hpp"
#include "comove/vargranger.hpp"
#include "support/frozen_panel.hpp"
#include "support/oracles.hpp"

using namespace comove;
namespace ts = testsupport;

TEST_CASE("var_fit matches the frozen reference fit") {
    const auto& c0 = ts::frozen_panel_col0();
    const auto& c1 = ts::frozen_panel_col1();
    const auto fit = var_fit({c0, c1}, {"a", "b"}, 2);

    CHECK(fit.nobs == 238);
    // Equation order: intercept, lag-1 block, lag-2 block.
    CHECK(fit.coef[0][0] == Catch::Approx(-0.027307767143).margin(1e-8));
    CHECK(fit.coef[0][1] == Catch::Approx(0.723681747606).margin(1e-8));
    CHECK(fit.coef[0][2] == Catch::Approx(0.401951713325).margin(1e-8));
    CHECK(fit.coef[0][3] == Catch::Approx(0.021775266434).margin(1e-8));
    CHECK(fit.coef[0][4] == Catch::Approx(0.097243016823).margin(1e-8));
    CHECK(fit.coef[1][0] == Catch::Approx(-0.042928304129).margin(1e-8));
    CHECK(fit.coef[1][2] == Catch::Approx(0.509161167926).margin(1e-8));
    CHECK(fit.residual_cov(0, 0) == Catch::Approx(0.983656975611).margin(1e-8));
    CHECK(fit.residual_cov(0, 1) == Catch::Approx(0.46650147982).margin(1e-8));
    CHECK(fit.residual_cov(1, 1) == Catch::Approx(0.43125314707).margin(1e-8));
    CHECK(fit.coefficient(0, 1, 1) == fit.coef[0][2]);
    CHECK(fit.coefficient(1, 2, 0) == fit.coef[1][3]);
}

TEST_CASE("var_fit recovers planted VAR(1) coefficients") {
    Rng rng = substream(21, "var-planted");
    const std::size_t n = 2000;
    std::vector<double> a(n, 0.0), b(n, 0.0);
    for (std::size_t t = 1; t < n; ++t) {
        a[t] = 0.5 * a[t - 1] + 0.2 * b[t - 1] + rng.normal();
        b[t] = 0.3 * b[t - 1] + rng.normal();
    }
    const auto fit = var_fit({a, b}, {"a", "b"}, 1);
    CHECK(fit.coefficient(0, 1, 0) == Catch::Approx(0.5).margin(0.05));
    CHECK(fit.coefficient(0, 1, 1) == Catch::Approx(0.2).margin(0.05));
    CHECK(fit.coefficient(1, 1, 0) == Catch::Approx(0.0).margin(0.05));
    CHECK(fit.coefficient(1, 1, 1) == Catch::Approx(0.3).margin(0.05));
    CHECK(fit.residual_cov(0, 0) == Catch::Approx(1.0).margin(0.1));
    CHECK(fit.residual_cov(0, 1) == Catch::Approx(0.0).margin(0.1));
}

TEST_CASE("var_fit on white noise finds nothing") {
    Rng rng = substream(21, "var-noise");
    const auto a = rng.normal_vector(800);
    const auto b = rng.normal_vector(800);
    const auto fit = var_fit({a, b}, {"a", "b"}, 1);
    for (std::size_t eq = 0; eq < 2; ++eq)
        for (Eigen::Index j = 0; j < fit.coef[eq].size(); ++j)
            CHECK(std::fabs(fit.coef[eq][j]) < 0.1);
}

TEST_CASE("var_fit input validation") {
    const std::vector<double> c(50, 2.0);
    const std::vector<double> v{1, 2, 3};
    Rng rng = substream(21, "var-valid");
    const auto ok = rng.normal_vector(50);
    CHECK_THROWS_AS(var_fit({c, ok}, {"c", "ok"}, 1), numerical_error);
    CHECK_THROWS_AS(var_fit({ok}, {"ok"}, 1), argument_error);
    CHECK_THROWS_AS(var_fit({ok, v}, {"a", "b"}, 1), argument_error);
    CHECK_THROWS_AS(var_fit({ok, ok}, {"a"}, 1), argument_error);
    CHECK_THROWS_AS(var_fit({ok, ok}, {"a", "b"}, 0), argument_error);
    const std::vector<double> tiny(9, 1.0);
    CHECK_THROWS_AS(var_fit({tiny, tiny}, {"a", "b"}, 2), validation_error);
}

TEST_CASE("granger_test matches the frozen reference statistics") {
    const auto& c0 = ts::frozen_panel_col0();
    const auto& c1 = ts::frozen_panel_col1();

    auto r = granger_test(c0, c1, 1, "a", "b");
    CHECK(r.f_statistic == Catch::Approx(10.586046918167).margin(1e-7));
    CHECK(r.p_value == Catch::Approx(0.00130626231251).margin(1e-9));
    CHECK(r.nobs == 239);

    r = granger_test(c0, c1, 3, "a", "b");
    CHECK(r.f_statistic == Catch::Approx(4.158653538528).margin(1e-7));
    CHECK(r.p_value == Catch::Approx(0.00680521364342).margin(1e-9));
    CHECK(r.dependent == "a");
    CHECK(r.independent == "b");

    r = granger_test(c1, c0, 1, "b", "a");
    CHECK(r.f_statistic == Catch::Approx(25.363004438697).margin(1e-7));
    CHECK(r.p_value == Catch::Approx(0.00000094356731).margin(1e-9));

    r = granger_test(c1, c0, 3, "b", "a");
    CHECK(r.f_statistic == Catch::Approx(4.033484945635).margin(1e-7));
    CHECK(r.p_value == Catch::Approx(0.00803196467527).margin(1e-9));
}

TEST_CASE("granger_test agrees with the normal-equations oracle") {
    Rng rng = substream(21, "granger-oracle");
    for (int rep = 0; rep < 12; ++rep) {
        const std::size_t n = 150;
        std::vector<double> x(n), y(n, 0.0);
        for (std::size_t t = 0; t < n; ++t) x[t] = rng.normal();
        for (std::size_t t = 1; t < n; ++t)
            y[t] = 0.3 * y[t - 1] + 0.4 * x[t - 1] + rng.normal();
        const int p = 2;
        const std::size_t usable = n - std::size_t(p);

        std::vector<double> yv(usable);
        std::vector<double> ylag1(usable), ylag2(usable), xlag1(usable), xlag2(usable);
        for (std::size_t r = 0; r < usable; ++r) {
            yv[r] = y[r + 2];
            ylag1[r] = y[r + 1];
            ylag2[r] = y[r];
            xlag1[r] = x[r + 1];
            xlag2[r] = x[r];
        }
        const auto restricted = ts::oracle_ols(yv, {ylag1, ylag2});
        const auto unrestricted = ts::oracle_ols(yv, {ylag1, xlag1, ylag2, xlag2});
        REQUIRE(restricted.ssr >= unrestricted.ssr);
        const double want =
            ts::oracle_f_stat(restricted.ssr, unrestricted.ssr, p, usable - 2 * p - 1);

        const auto got = granger_test(y, x, p);
        REQUIRE(got.f_statistic == Catch::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("planted one-way causality is detected with the right direction") {
    Rng rng = substream(21, "granger-planted");
    const std::size_t n = 1000;
    std::vector<double> x(n), y(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) x[t] = rng.normal();
    for (std::size_t t = 1; t < n; ++t) y[t] = 0.9 * x[t - 1] + rng.normal();

    const auto fwd = granger_test(y, x, 3);
    const auto rev = granger_test(x, y, 3);
    CHECK(fwd.p_value < 0.001);
    CHECK(rev.p_value > 0.05);
}

TEST_CASE("perfect-fit degenerate case saturates instead of overflowing") {
    Rng rng = substream(21, "granger-degenerate");
    const std::size_t n = 200;
    std::vector<double> x(n);
    x[0] = 5.0;
    for (std::size_t t = 1; t < n; ++t) x[t] = x[t - 1] + rng.normal();
    std::vector<double> y(n, 0.0);
    for (std::size_t t = 1; t < n; ++t) y[t] = x[t - 1];

    const auto r = granger_test(y, x, 2);
    CHECK(r.f_statistic == DBL_MAX);
    CHECK(r.p_value == 0.0);
}

TEST_CASE("granger F is invariant under positive affine transforms") {
    Rng rng = substream(21, "granger-affine");
    const std::size_t n = 300;
    std::vector<double> x(n), y(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) x[t] = rng.normal();
    for (std::size_t t = 1; t < n; ++t) y[t] = 0.2 * y[t - 1] + 0.5 * x[t - 1] + rng.normal();

    const auto base = granger_test(y, x, 3);
    std::vector<double> ya(n), xa(n);
    for (std::size_t t = 0; t < n; ++t) {
        ya[t] = 12.0 * y[t] - 400.0;
        xa[t] = 0.03 * x[t] + 77.0;
    }
    const auto scaled = granger_test(ya, xa, 3);
    CHECK(std::fabs(base.f_statistic - scaled.f_statistic) <
          1e-8 * std::max(1.0, base.f_statistic));
}

TEST_CASE("null p-values behave like a uniform draw") {
    const int seeds = 200;
    int below_5 = 0;
    double mean = 0.0;
    for (int s = 0; s < seeds; ++s) {
        Rng rng = substream(21, "granger-null", std::uint64_t(s));
        const auto x = rng.normal_vector(200);
        const auto y = rng.normal_vector(200);
        const double p = granger_test(y, x, 3).p_value;
        mean += p;
        if (p < 0.05) ++below_5;
    }
    mean /= double(seeds);
    CHECK(mean == Catch::Approx(0.5).margin(0.07));
    CHECK(below_5 >= 2);
    CHECK(below_5 <= 22);
}

TEST_CASE("significance codes follow the table legend") {
    CHECK(std::string(kSignificanceLegend) == "0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1");
    CHECK(significance_code(0.0005) == "***");
    CHECK(significance_code(0.005) == "**");
    CHECK(significance_code(0.03) == "*");
    CHECK(significance_code(0.07) == ".");
    CHECK(significance_code(0.2) == "");
    CHECK(significance_code(0.001) == "**");
    CHECK(significance_code(0.05) == ".");
}

TEST_CASE("scale granger grid covers every scale and direction") {
    std::map<std::string, ScaleDecomposition> dec;
    for (const char* name : {"w", "x", "y", "z"}) {
        Rng rng = substream(21, std::string("grid-") + name);
        dec.emplace(name, haar_atrous_decompose(rng.normal_vector(640), 7));
    }
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"w", "x"}, {"x", "w"}, {"y", "z"}, {"z", "y"}};
    const auto table = scale_granger_matrix(dec, pairs, 3);

    REQUIRE(table.levels == 7);
    REQUIRE(table.rows.size() == 7);
    for (const auto& row : table.rows) {
        REQUIRE(row.size() == 4);
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(row[c].dependent == pairs[c].first);
            CHECK(row[c].independent == pairs[c].second);
            CHECK(row[c].f_statistic >= 0.0);
            CHECK(row[c].p_value >= 0.0);
            CHECK(row[c].p_value <= 1.0);
            // Independent inputs: nothing should look overwhelming.
            CHECK(row[c].p_value >= 0.0001);
        }
    }
}

TEST_CASE("scale granger grid handles identical pair members") {
    std::map<std::string, ScaleDecomposition> dec;
    Rng rng = substream(21, "grid-same");
    const auto x = rng.normal_vector(256);
    dec.emplace("a", haar_atrous_decompose(x, 5));
    dec.emplace("b", haar_atrous_decompose(x, 5));
    const auto table = scale_granger_matrix(dec, {{"a", "b"}}, 2);
    for (const auto& row : table.rows) {
        REQUIRE(row.size() == 1);
        CHECK(std::isfinite(row[0].p_value));
    }
}

TEST_CASE("scale granger grid validates labels and levels") {
    std::map<std::string, ScaleDecomposition> dec;
    Rng rng = substream(21, "grid-bad");
    dec.emplace("a", haar_atrous_decompose(rng.normal_vector(256), 5));
    dec.emplace("b", haar_atrous_decompose(rng.normal_vector(256), 4));
    CHECK_THROWS_AS(scale_granger_matrix(dec, {{"a", "b"}}, 2), argument_error);

    std::map<std::string, ScaleDecomposition> ok;
    ok.emplace("a", haar_atrous_decompose(rng.normal_vector(256), 5));
    CHECK_THROWS_AS(scale_granger_matrix(ok, {{"a", "missing"}}, 2), argument_error);
    CHECK_THROWS_AS(scale_granger_matrix(ok, {}, 2), argument_error);
}
