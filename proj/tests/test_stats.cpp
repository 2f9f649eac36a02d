// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "dcs/rng.hpp"
#include "dcs/stats.hpp"

using namespace dcs;

namespace {

// Quadrature oracle: P(0 < T <= t) by Simpson integration of the t density.
double t_density(double x, double dof) {
    return std::exp(std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0)) /
           std::sqrt(dof * M_PI) * std::pow(1.0 + x * x / dof, -(dof + 1.0) / 2.0);
}

double t_cdf_oracle(double t, double dof) {
    const int n = 20000;  // Simpson panels over [0, |t|]
    const double hi = std::fabs(t);
    const double h = hi / (2 * n);
    double sum = t_density(0.0, dof) + t_density(hi, dof);
    for (int i = 1; i < 2 * n; ++i) {
        sum += t_density(i * h, dof) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    const double integral = sum * h / 3.0;
    return t >= 0.0 ? 0.5 + integral : 0.5 - integral;
}

std::vector<ScoreRow> rows_for(const std::string& model, const std::string& benchmark,
                               const std::vector<double>& dcs_values) {
    std::vector<ScoreRow> rows;
    for (std::size_t i = 0; i < dcs_values.size(); ++i) {
        ScoreRow r;
        r.model = model;
        r.benchmark = benchmark;
        r.sample_id = "s" + std::to_string(i);
        r.scores.dcs = dcs_values[i];
        r.scores.accuracy = dcs_values[i] > 0 ? 1 : 0;
        r.scores.cweighted = std::max(0.0, dcs_values[i]);
        r.scores.ternary = dcs_values[i] > 0 ? 1 : -1;
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace

TEST_CASE("summary statistics of a hand-computed sample") {
    const SummaryStats s = summarize({1.0, 0.0, 1.0, 0.0});
    CHECK(s.n == 4);
    CHECK(s.mean == 0.5);
    CHECK(std::fabs(s.sd - 0.5773502691896258) <= 1e-12);
    CHECK(std::fabs(s.se - 0.2886751345948129) <= 1e-12);

    const SummaryStats single = summarize({0.42});
    CHECK(single.n == 1);
    CHECK(single.mean == 0.42);
    CHECK(single.se == 0.0);

    const SummaryStats flat = summarize({2.0, 2.0, 2.0});
    CHECK(flat.sd == 0.0);
    CHECK(flat.se == 0.0);

    CHECK_THROWS_AS(summarize({}), std::domain_error);
}

TEST_CASE("summaries are bit-identical under permutation") {
    Rng rng(71);
    std::vector<double> values;
    for (int i = 0; i < 200; ++i) values.push_back(rng.uniform(-1.0, 1.0));
    const SummaryStats base = summarize(values);
    for (int shuffle = 0; shuffle < 20; ++shuffle) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[static_cast<std::size_t>(rng.uniform_int(
                                         static_cast<int>(i)))]);
        }
        const SummaryStats again = summarize(values);
        CHECK(again.mean == base.mean);
        CHECK(again.sd == base.sd);
        CHECK(again.se == base.se);
    }
}

TEST_CASE("aggregation groups by model and benchmark and adds Average rows") {
    std::vector<ScoreRow> rows = rows_for("m1", "alpha", {1.0, 0.0, 1.0, 0.0});
    const auto beta = rows_for("m1", "beta", {0.5, 0.5});
    const auto other = rows_for("m2", "alpha", {-0.25, -0.75});
    rows.insert(rows.end(), beta.begin(), beta.end());
    rows.insert(rows.end(), other.begin(), other.end());

    const AggregateResult agg = aggregate(rows);
    CHECK(agg.cells.size() == 3 * 4);  // three (model, benchmark) cells, four metrics

    const auto* m1_alpha_dcs = [&]() -> const AggregateCell* {
        for (const auto& c : agg.cells) {
            if (c.model == "m1" && c.benchmark == "alpha" && c.metric == MetricKind::dcs) {
                return &c;
            }
        }
        return nullptr;
    }();
    REQUIRE(m1_alpha_dcs != nullptr);
    CHECK(m1_alpha_dcs->n == 4);
    CHECK(m1_alpha_dcs->mean == 0.5);
    CHECK(std::fabs(m1_alpha_dcs->se - 0.2886751345948129) <= 1e-12);

    // Average row: unweighted mean of the benchmark cell means.
    const auto* m1_avg_dcs = [&]() -> const AggregateCell* {
        for (const auto& c : agg.averages) {
            if (c.model == "m1" && c.metric == MetricKind::dcs) return &c;
        }
        return nullptr;
    }();
    REQUIRE(m1_avg_dcs != nullptr);
    CHECK(m1_avg_dcs->benchmark == "Average");
    CHECK(m1_avg_dcs->n == 2);
    CHECK(m1_avg_dcs->mean == 0.5);

    // One model, one benchmark: the Average row equals the single cell.
    const AggregateResult solo = aggregate(rows_for("m", "only", {0.1, 0.3}));
    REQUIRE(solo.averages.size() == 4);
    for (const auto& avg : solo.averages) {
        for (const auto& cell : solo.cells) {
            if (cell.metric == avg.metric) CHECK(avg.mean == cell.mean);
        }
    }
}

TEST_CASE("incomplete beta against closed forms and identities") {
    CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    // I_x(a, a) at the midpoint is exactly one half.
    for (double a : {0.5, 1.0, 2.0, 7.5}) {
        CHECK(std::fabs(regularized_incomplete_beta(a, a, 0.5) - 0.5) <= 1e-12);
    }
    // I_x(1, b) = 1 - (1-x)^b.
    for (double x : {0.1, 0.4, 0.9}) {
        for (double b : {1.0, 2.5, 6.0}) {
            CHECK(std::fabs(regularized_incomplete_beta(1.0, b, x) -
                            (1.0 - std::pow(1.0 - x, b))) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(regularized_incomplete_beta(0.0, 1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(regularized_incomplete_beta(1.0, 1.0, -0.1), std::domain_error);
}

TEST_CASE("t distribution function against closed forms") {
    // dof 1: 1/2 + atan(t)/pi; dof 2: 1/2 + t / (2*sqrt(2 + t^2)).
    for (double t : {-8.0, -2.5, -1.0, -0.3, 0.0, 0.2, 1.0, 3.7, 12.0}) {
        CHECK(std::fabs(student_t_cdf(t, 1.0) - (0.5 + std::atan(t) / M_PI)) <= 1e-12);
        CHECK(std::fabs(student_t_cdf(t, 2.0) - (0.5 + t / (2.0 * std::sqrt(2.0 + t * t)))) <=
              1e-12);
    }
}

TEST_CASE("t distribution function against the quadrature oracle") {
    for (double dof : {1.0, 2.0, 3.0, 8.0, 20.5, 100.0}) {
        for (double t : {-4.0, -1.0, -0.5, 0.7, 1.0, 2.3}) {
            CHECK(std::fabs(student_t_cdf(t, dof) - t_cdf_oracle(t, dof)) <= 1e-10);
        }
    }
}

TEST_CASE("t quantile inverts the distribution function") {
    for (double dof : {1.0, 2.0, 5.0, 8.0, 33.0}) {
        for (double p : {0.001, 0.025, 0.31, 0.5, 0.75, 0.975, 0.999}) {
            const double q = student_t_quantile(p, dof);
            CHECK(std::fabs(student_t_cdf(q, dof) - p) <= 1e-10);
        }
    }
    CHECK(student_t_quantile(0.5, 7.0) == 0.0);
    CHECK_THROWS_AS(student_t_quantile(0.0, 7.0), std::domain_error);
    CHECK_THROWS_AS(student_t_quantile(1.0, 7.0), std::domain_error);
}

TEST_CASE("welch test reproduces the hand-computed case") {
    const std::vector<double> a = {1, 2, 3, 4, 5};
    const std::vector<double> b = {2, 3, 4, 5, 6};
    const TTestResult r = welch_ttest(a, b);
    CHECK(std::fabs(r.t - -1.0) <= 1e-12);
    CHECK(std::fabs(r.dof - 8.0) <= 1e-12);
    CHECK(std::fabs(r.p - 0.3466) <= 1e-3);
    CHECK(std::fabs(r.p - 2.0 * (1.0 - t_cdf_oracle(1.0, 8.0))) <= 1e-10);
    CHECK(r.ci_low < 0.0);
    CHECK(r.ci_high > 0.0);  // not significant: the CI straddles zero
    CHECK_FALSE(r.significant());

    // Equal-variance design: the pooled-variance test agrees here.
    const TTestResult s = student_ttest(a, b);
    CHECK(std::fabs(s.t - r.t) <= 1e-12);
    CHECK(std::fabs(s.dof - 8.0) <= 1e-12);
}

TEST_CASE("identical samples give t = 0 and p = 1") {
    const std::vector<double> a = {1.0, 2.0, 3.0};
    const TTestResult r = welch_ttest(a, a);
    CHECK(r.t == 0.0);
    CHECK(r.p == 1.0);
    CHECK(std::fabs(r.ci_low + r.ci_high) <= 1e-12);
}

TEST_CASE("well-separated samples are significant") {
    std::vector<double> a, b;
    Rng rng(73);
    for (int i = 0; i < 50; ++i) {
        a.push_back(rng.uniform(0.0, 0.1));
        b.push_back(rng.uniform(5.0, 5.1));
    }
    const TTestResult r = welch_ttest(a, b);
    CHECK(r.p < 1e-4);
    CHECK(r.ci_high < 0.0);  // CI excludes zero
    CHECK(r.significant());
}

TEST_CASE("degenerate t-test inputs are rejected") {
    const std::vector<double> constant = {1.0, 1.0, 1.0};
    const std::vector<double> one = {1.0};
    const std::vector<double> ok = {1.0, 2.0};
    CHECK_THROWS_WITH_AS(welch_ttest(constant, constant), doctest::Contains("no variance"),
                         std::domain_error);
    CHECK_THROWS_AS(welch_ttest(one, ok), std::domain_error);
    CHECK_THROWS_AS(student_ttest(constant, constant), std::domain_error);
    CHECK_NOTHROW(welch_ttest(constant, ok));  // one-sided variance is fine
}

TEST_CASE("t-test symmetry and CI/p consistency on random pairs") {
    Rng rng(79);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> a, b;
        const int na = 2 + rng.uniform_int(20);
        const int nb = 2 + rng.uniform_int(20);
        const double shift = rng.uniform(-0.5, 0.5);
        for (int i = 0; i < na; ++i) a.push_back(rng.uniform(0.0, 1.0));
        for (int i = 0; i < nb; ++i) b.push_back(shift + rng.uniform(0.0, 1.0));
        TTestResult f, g;
        try {
            f = welch_ttest(a, b);
            g = welch_ttest(b, a);
        } catch (const std::domain_error&) {
            continue;  // degenerate draw
        }
        CHECK(std::fabs(f.t + g.t) <= 1e-12);
        CHECK(std::fabs(f.dof - g.dof) <= 1e-12);
        CHECK(std::fabs(f.p - g.p) <= 1e-12);
        CHECK(std::fabs(f.ci_low + g.ci_high) <= 1e-9);
        CHECK(std::fabs(f.ci_high + g.ci_low) <= 1e-9);
        CHECK(f.ci_low <= f.ci_high);
        if (std::fabs(f.p - 0.05) > 1e-9) {
            const bool ci_excludes_zero = f.ci_low > 0.0 || f.ci_high < 0.0;
            CHECK(f.significant() == ci_excludes_zero);
        }
    }
}

TEST_CASE("p shrinks as |t| grows at fixed dof") {
    double prev = 1.0;
    for (double t : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double p = 2.0 * (1.0 - student_t_cdf(t, 11.0));
        CHECK(p <= prev + 1e-15);
        prev = p;
    }
}
