#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "comove/ingest.hpp"
#include "comove/rng.hpp"
#include "comove/stats.hpp"
#include "support/oracles.hpp"

using namespace comove;
namespace ts = testsupport;

namespace {

AlignedPanel make_panel(std::vector<std::string> names,
                        std::vector<std::vector<double>> columns) {
    AlignedPanel p;
    p.names = std::move(names);
    p.columns = std::move(columns);
    const auto base = Date::from_ymd(2020, 1, 5).days();
    for (std::size_t i = 0; i < p.columns.front().size(); ++i)
        p.dates.push_back(Date(base + 7 * int(i)));
    return p;
}

} // namespace

TEST_CASE("covariance hand cases") {
    CHECK(covariance(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) ==
          Catch::Approx(1.0));
    CHECK(covariance(std::vector<double>{1, 7, 3, 5}, std::vector<double>{4, 4, 4, 4}) == 0.0);
    CHECK_THROWS_AS(covariance(std::vector<double>{1, 2}, std::vector<double>{1}), argument_error);
    CHECK_THROWS_AS(covariance(std::vector<double>{1}, std::vector<double>{1}), argument_error);
}

TEST_CASE("covariance matches direct summation and is symmetric") {
    Rng rng = substream(11, "stats-cov");
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(50), y(50);
        for (int i = 0; i < 50; ++i) {
            x[i] = 100.0 + 10.0 * rng.normal();
            y[i] = -5.0 + 2.0 * rng.normal();
        }
        const double got = covariance(x, y);
        const double want = ts::oracle_covariance(x, y);
        REQUIRE(got == Catch::Approx(want).margin(1e-12));
        REQUIRE(covariance(x, y) == covariance(y, x));
    }
}

TEST_CASE("pearson basic identities") {
    Rng rng = substream(12, "stats-pearson");
    std::vector<double> x(40), negx(40);
    for (int i = 0; i < 40; ++i) {
        x[i] = rng.normal();
        negx[i] = -x[i];
    }
    CHECK(pearson(x, x) == 1.0);
    CHECK(pearson(x, negx) == -1.0);
    const std::vector<double> c(40, 3.0);
    CHECK_THROWS_AS(pearson(x, c), numerical_error);
}

TEST_CASE("pearson is invariant under positive affine transforms") {
    Rng rng = substream(13, "stats-affine");
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> x(60), y(60), ax(60), by(60);
        const double a = 0.5 + 3.0 * rng.uniform();
        const double b = 200.0 * rng.uniform() - 100.0;
        const double c = 0.1 + 2.0 * rng.uniform();
        const double d = 50.0 * rng.uniform();
        for (int i = 0; i < 60; ++i) {
            x[i] = rng.normal();
            y[i] = 0.3 * x[i] + rng.normal();
            ax[i] = a * x[i] + b;
            by[i] = c * y[i] + d;
        }
        const double r0 = pearson(x, y);
        REQUIRE(std::fabs(pearson(ax, y) - r0) < 1e-12);
        REQUIRE(std::fabs(pearson(x, by) - r0) < 1e-12);
        REQUIRE(std::fabs(r0) <= 1.0);
    }
}

TEST_CASE("windowed correlations agree with pearson and cap ranges") {
    Rng rng = substream(14, "stats-window");
    std::vector<double> a(120), b(120), c(120);
    for (int i = 0; i < 120; ++i) {
        a[i] = rng.normal();
        b[i] = 0.5 * a[i] + rng.normal();
        c[i] = rng.normal();
    }
    const auto panel = make_panel({"A", "B", "C"}, {a, b, c});

    const auto full = windowed_correlations(panel, {{0, 120}});
    REQUIRE(full.r.size() == 1);
    REQUIRE(full.pairs.size() == 3);
    CHECK(full.pair_labels[0] == "A~B");
    CHECK(full.r[0][0] == Catch::Approx(pearson(a, b)));
    CHECK(full.r[0][1] == Catch::Approx(pearson(a, c)));
    CHECK(full.r[0][2] == Catch::Approx(pearson(b, c)));

    // End beyond N is capped, matching the full-range result.
    const auto capped = windowed_correlations(panel, {{0, 1200}});
    CHECK(capped.windows[0].second == 120);
    CHECK(capped.r[0][0] == full.r[0][0]);

    CHECK_THROWS_AS(windowed_correlations(panel, {{120, 130}}), argument_error);
    CHECK_THROWS_AS(windowed_correlations(panel, {{30, 30}}), argument_error);
}

TEST_CASE("windowed correlations flag a constant column") {
    std::vector<double> a{1, 2, 3, 4, 5, 6};
    std::vector<double> b{5, 5, 5, 2, 7, 1};   // constant on rows [0,3)
    const auto panel = make_panel({"A", "B"}, {a, b});
    CHECK_THROWS_AS(windowed_correlations(panel, {{0, 3}}), numerical_error);
    CHECK_NOTHROW(windowed_correlations(panel, {{3, 6}}));
}

TEST_CASE("ols_anova recovers an exact line") {
    std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y{2, 4, 6, 8, 10};
    const auto rep = ols_anova(y, x);
    CHECK(rep.slope() == Catch::Approx(2.0).margin(1e-12));
    CHECK(rep.intercept == Catch::Approx(0.0).margin(1e-12));
    CHECK(rep.r_squared == Catch::Approx(1.0));
    for (double e : rep.residuals) CHECK(std::fabs(e) < 1e-10);
    CHECK(rep.f_p_value == 0.0);
    CHECK_FALSE(rep.durbin_watson.has_value());
}

TEST_CASE("ols_anova on independent noise shows no fit") {
    Rng rng = substream(15, "stats-nofit");
    std::vector<double> x(200), y(200);
    for (int i = 0; i < 200; ++i) {
        x[i] = rng.normal();
        y[i] = rng.normal();
    }
    const auto rep = ols_anova(y, x);
    CHECK(rep.r_squared < 0.05);
    CHECK(rep.f_p_value > 0.01);
    // Closed-form simple-regression oracle.
    const double want_slope = ts::oracle_covariance(x, y) / ts::oracle_covariance(x, x);
    CHECK(rep.slope() == Catch::Approx(want_slope).margin(1e-10));
}

TEST_CASE("ols_anova matches the normal-equations oracle on random instances") {
    Rng rng = substream(16, "stats-olsoracle");
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 80;
        std::vector<double> y(n), x1(n), x2(n);
        for (std::size_t i = 0; i < n; ++i) {
            x1[i] = 50.0 + 10.0 * rng.normal();
            x2[i] = -3.0 + rng.normal();
            y[i] = 4.0 + 0.7 * x1[i] - 2.0 * x2[i] + rng.normal();
        }
        const auto got = ols_anova(y, {x1, x2});
        const auto want = ts::oracle_ols(y, {x1, x2});
        REQUIRE(got.intercept == Catch::Approx(want.coef[0]).epsilon(1e-8));
        REQUIRE(got.slopes[0] == Catch::Approx(want.coef[1]).epsilon(1e-8));
        REQUIRE(got.slopes[1] == Catch::Approx(want.coef[2]).epsilon(1e-8));
        const double want_r2 = 1.0 - want.ssr / want.tss;
        REQUIRE(got.r_squared == Catch::Approx(want_r2).epsilon(1e-8));
        const double want_f = ((want.tss - want.ssr) / 2.0) / (want.ssr / double(n - 3));
        REQUIRE(got.f_statistic == Catch::Approx(want_f).epsilon(1e-8));

        // Residual orthogonality to the design columns.
        double e_dot_1 = 0.0, e_dot_x1 = 0.0, norm_e = 0.0, norm_x1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            e_dot_1 += got.residuals[i];
            e_dot_x1 += got.residuals[i] * x1[i];
            norm_e += got.residuals[i] * got.residuals[i];
            norm_x1 += x1[i] * x1[i];
        }
        REQUIRE(std::fabs(e_dot_1) < 1e-8 * std::sqrt(norm_e * double(n)) + 1e-12);
        REQUIRE(std::fabs(e_dot_x1) < 1e-8 * std::sqrt(norm_e * norm_x1) + 1e-12);
    }
}

TEST_CASE("ols_anova rejects degenerate inputs") {
    std::vector<double> y{1, 2, 3, 4, 5, 6};
    std::vector<double> x{2, 2, 2, 2, 2, 2};
    CHECK_THROWS_AS(ols_anova(y, x), numerical_error);           // constant regressor
    std::vector<double> x1{1, 2, 3, 4, 5, 6};
    CHECK_THROWS_AS(ols_anova(y, {x1, x1}), numerical_error);    // collinear pair
    CHECK_THROWS_AS(ols_anova(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                    argument_error);                             // too few rows
    std::vector<double> cy(6, 3.0);
    CHECK_THROWS_AS(ols_anova(cy, x1), numerical_error);         // constant dependent
}

TEST_CASE("durbin_watson hand and asymptotic cases") {
    std::vector<double> alt(100);
    for (int i = 0; i < 100; ++i) alt[i] = (i % 2 == 0) ? 1.0 : -1.0;
    CHECK(durbin_watson(alt) == Catch::Approx(3.96));

    Rng rng = substream(17, "stats-dw");
    const auto wn = rng.normal_vector(1000);
    CHECK(durbin_watson(wn) == Catch::Approx(2.0).margin(0.15));

    CHECK_THROWS_AS(durbin_watson(std::vector<double>(5, 0.0)), numerical_error);
    CHECK_THROWS_AS(durbin_watson(std::vector<double>{1.0}), argument_error);
}

TEST_CASE("durbin_watson tracks 2(1 - rho1) up to the exact edge term") {
    Rng rng = substream(18, "stats-dw-ar1");
    for (double phi : {0.0, 0.4, 0.8, -0.5}) {
        const std::size_t n = 400;
        std::vector<double> e(n);
        e[0] = rng.normal();
        for (std::size_t t = 1; t < n; ++t) e[t] = phi * e[t - 1] + rng.normal();

        double lag = 0.0, den = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            den += e[t] * e[t];
            if (t > 0) lag += e[t] * e[t - 1];
        }
        const double rho1 = lag / den;
        const double dw = durbin_watson(e);
        const double edge = (e.front() * e.front() + e.back() * e.back()) / den;
        // DW = 2(1 - rho1) - (e_1^2 + e_N^2)/sum(e^2), exactly.
        REQUIRE(dw == Catch::Approx(2.0 * (1.0 - rho1) - edge).margin(1e-12));
        REQUIRE(std::fabs(dw - 2.0 * (1.0 - rho1)) < 20.0 / double(n));
        REQUIRE(dw == Catch::Approx(ts::oracle_durbin_watson(e)).margin(1e-12));
    }
}
