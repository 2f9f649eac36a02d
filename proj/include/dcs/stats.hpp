// SPDX-License-Identifier: Apache-2.0
//
// Aggregation of per-sample scores into (model, benchmark, metric) cells
// with means and standard errors, and unpaired t-tests for comparing metric
// or model populations. All reductions are permutation-invariant: values are
// sorted before accumulation, so results are bit-identical under any input
// order.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcs/metrics.hpp"
#include "dcs/tdist.hpp"

namespace dcs {

enum class MetricKind { dcs, accuracy, cweighted, ternary };

inline constexpr std::array<MetricKind, 4> kAllMetrics = {
    MetricKind::dcs, MetricKind::accuracy, MetricKind::cweighted, MetricKind::ternary};

inline const char* to_string(MetricKind m) {
    switch (m) {
        case MetricKind::dcs: return "dcs";
        case MetricKind::accuracy: return "accuracy";
        case MetricKind::cweighted: return "cweighted";
        case MetricKind::ternary: return "ternary";
    }
    return "?";
}

inline std::optional<MetricKind> metric_from_string(std::string_view s) {
    for (MetricKind m : kAllMetrics) {
        if (s == to_string(m)) return m;
    }
    return std::nullopt;
}

// One scored record.
struct ScoreRow {
    std::string benchmark;
    std::string sample_id;
    std::string model;
    SampleScores scores;

    double metric(MetricKind m) const {
        switch (m) {
            case MetricKind::dcs: return scores.dcs;
            case MetricKind::accuracy: return scores.accuracy;
            case MetricKind::cweighted: return scores.cweighted;
            case MetricKind::ternary: return scores.ternary;
        }
        return 0.0;
    }
};

struct SummaryStats {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation, n-1 denominator
    double se = 0.0;  // sd / sqrt(n); 0 when n == 1
};

inline SummaryStats summarize(std::vector<double> values) {
    if (values.empty()) throw std::domain_error("summarize: empty sample");
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    SummaryStats s;
    s.n = values.size();
    s.mean = sum / static_cast<double>(s.n);
    if (s.n == 1) return s;
    double ss = 0.0;
    for (double v : values) {
        const double d = v - s.mean;
        ss += d * d;
    }
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.se = s.sd / std::sqrt(static_cast<double>(s.n));
    return s;
}

// (model, benchmark, metric) -> n, mean, sd, se. Means are stored unscaled;
// presentation scaling happens at reporting.
struct AggregateCell {
    std::string model;
    std::string benchmark;
    MetricKind metric = MetricKind::dcs;
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;
};

struct AggregateResult {
    std::vector<AggregateCell> cells;  // sorted by (model, benchmark, metric)
    // Per (model, metric): unweighted mean over that model's benchmark cell
    // means; n counts benchmarks, sd/se describe spread across benchmarks.
    std::vector<AggregateCell> averages;
};

inline AggregateResult aggregate(const std::vector<ScoreRow>& rows) {
    std::map<std::pair<std::string, std::string>, std::array<std::vector<double>, 4>> groups;
    for (const ScoreRow& row : rows) {
        auto& vecs = groups[{row.model, row.benchmark}];
        for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
            vecs[i].push_back(row.metric(kAllMetrics[i]));
        }
    }

    AggregateResult result;
    std::map<std::pair<std::string, MetricKind>, std::vector<double>> model_cell_means;
    for (auto& [key, vecs] : groups) {
        for (std::size_t i = 0; i < kAllMetrics.size(); ++i) {
            const SummaryStats s = summarize(std::move(vecs[i]));
            AggregateCell cell;
            cell.model = key.first;
            cell.benchmark = key.second;
            cell.metric = kAllMetrics[i];
            cell.n = s.n;
            cell.mean = s.mean;
            cell.sd = s.sd;
            cell.se = s.se;
            result.cells.push_back(std::move(cell));
            model_cell_means[{key.first, kAllMetrics[i]}].push_back(s.mean);
        }
    }
    for (auto& [key, means] : model_cell_means) {
        const SummaryStats s = summarize(std::move(means));
        AggregateCell avg;
        avg.model = key.first;
        avg.benchmark = "Average";
        avg.metric = key.second;
        avg.n = s.n;
        avg.mean = s.mean;
        avg.sd = s.sd;
        avg.se = s.se;
        result.averages.push_back(std::move(avg));
    }
    return result;
}

struct TTestResult {
    double t = 0.0;
    double dof = 0.0;
    double p = 1.0;
    double ci_low = 0.0;   // 95% CI of mean(a) - mean(b)
    double ci_high = 0.0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;

    bool significant(double alpha = 0.05) const { return p < alpha; }
};

namespace detail {

inline TTestResult ttest_from_moments(const SummaryStats& a, const SummaryStats& b, double se_diff,
                                      double dof) {
    TTestResult r;
    r.mean_a = a.mean;
    r.mean_b = b.mean;
    r.n_a = a.n;
    r.n_b = b.n;
    r.dof = dof;
    const double diff = a.mean - b.mean;
    r.t = diff / se_diff;
    r.p = 2.0 * (1.0 - student_t_cdf(std::fabs(r.t), dof));
    const double crit = student_t_quantile(0.975, dof);
    r.ci_low = diff - crit * se_diff;
    r.ci_high = diff + crit * se_diff;
    return r;
}

inline std::pair<SummaryStats, SummaryStats> ttest_inputs(std::span<const double> a,
                                                          std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw std::domain_error("t-test: each sample needs at least 2 values");
    }
    const SummaryStats sa = summarize({a.begin(), a.end()});
    const SummaryStats sb = summarize({b.begin(), b.end()});
    if (sa.sd == 0.0 && sb.sd == 0.0) throw std::domain_error("t-test: no variance");
    return {sa, sb};
}

}  // namespace detail

// Unpaired t-test with unequal variances (Welch) and the Welch-Satterthwaite
// degrees of freedom; the default comparison.
inline TTestResult welch_ttest(std::span<const double> a, std::span<const double> b) {
    const auto [sa, sb] = detail::ttest_inputs(a, b);
    const double va_n = sa.sd * sa.sd / static_cast<double>(sa.n);
    const double vb_n = sb.sd * sb.sd / static_cast<double>(sb.n);
    const double se2 = va_n + vb_n;
    const double dof = se2 * se2 / (va_n * va_n / static_cast<double>(sa.n - 1) +
                                    vb_n * vb_n / static_cast<double>(sb.n - 1));
    return detail::ttest_from_moments(sa, sb, std::sqrt(se2), dof);
}

// Pooled-variance variant for callers that assume equal variances.
inline TTestResult student_ttest(std::span<const double> a, std::span<const double> b) {
    const auto [sa, sb] = detail::ttest_inputs(a, b);
    const auto na = static_cast<double>(sa.n);
    const auto nb = static_cast<double>(sb.n);
    const double pooled =
        ((na - 1.0) * sa.sd * sa.sd + (nb - 1.0) * sb.sd * sb.sd) / (na + nb - 2.0);
    const double se_diff = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    return detail::ttest_from_moments(sa, sb, se_diff, na + nb - 2.0);
}

}  // namespace dcs
