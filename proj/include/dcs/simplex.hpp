// SPDX-License-Identifier: Apache-2.0
//
// Brute-force and Monte Carlo verification of the score's guarantees:
// bounds and extrema over the belief domain, the hedging preference, the
// rational guessing threshold, and the information ceiling of
// zero-information tasks. Every stochastic routine takes an explicit seed
// and reports mean +/- standard error so pass/fail gates are reproducible.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dcs/metrics.hpp"
#include "dcs/rng.hpp"

namespace dcs {

// Lattice over the belief tetrahedron {p_c, p_w, p_idk >= 0, sum <= 1},
// interior included: C(n+3, 3) points for n subdivisions per axis.
struct SimplexGrid {
    double step = 1.0;
    int n = 1;

    static SimplexGrid make(double step) {
        if (!(step > 0.0 && step <= 1.0)) {
            throw std::domain_error("grid: step must lie in (0, 1]");
        }
        SimplexGrid g;
        g.step = step;
        g.n = static_cast<int>(std::lround(1.0 / step));
        return g;
    }

    std::size_t size() const {
        const auto m = static_cast<std::size_t>(n);
        return (m + 1) * (m + 2) * (m + 3) / 6;
    }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        const double d = static_cast<double>(n);
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; i + j <= n; ++j) {
                for (int k = 0; i + j + k <= n; ++k) {
                    fn(BeliefTriple{i / d, j / d, k / d});
                }
            }
        }
    }

    std::vector<BeliefTriple> points() const {
        std::vector<BeliefTriple> out;
        out.reserve(size());
        for_each([&](const BeliefTriple& b) { out.push_back(b); });
        return out;
    }
};

// Exhaustive scan of the score over a tetrahedron lattice.
struct BoundsReport {
    double step = 0.0;
    Loadings loadings;
    std::size_t points = 0;
    double min = 0.0, max = 0.0;
    BeliefTriple argmin, argmax;
    std::size_t violations = 0;  // points scoring outside [-l_w, l_c]
    // Scores at the domain corners: origin, all-correct, all-incorrect,
    // all-abstain.
    double vertex_origin = 0.0, vertex_correct = 0.0, vertex_incorrect = 0.0, vertex_idk = 0.0;

    bool pass() const {
        return violations == 0 && max == loadings.l_c && min == -loadings.l_w &&
               argmax.p_c == 1.0 && argmax.p_w == 0.0 && argmax.p_idk == 0.0 &&
               argmin.p_c == 0.0 && argmin.p_w == 1.0 && argmin.p_idk == 0.0 &&
               vertex_origin == 0.0 && vertex_correct == loadings.l_c &&
               vertex_incorrect == -loadings.l_w && vertex_idk == 0.0;
    }
};

inline BoundsReport verify_bounds(double step, const Loadings& l = {}) {
    if (!(step > 0.0 && step <= 0.5)) {
        throw std::domain_error("bounds: step must lie in (0, 0.5]");
    }
    validate(l);
    const SimplexGrid grid = SimplexGrid::make(step);
    BoundsReport r;
    r.step = step;
    r.loadings = l;
    r.min = std::numeric_limits<double>::infinity();
    r.max = -std::numeric_limits<double>::infinity();
    grid.for_each([&](const BeliefTriple& b) {
        const double s = score(b, l);
        ++r.points;
        if (s < r.min) {
            r.min = s;
            r.argmin = b;
        }
        if (s > r.max) {
            r.max = s;
            r.argmax = b;
        }
        if (s < -l.l_w || s > l.l_c) ++r.violations;
    });
    r.vertex_origin = score({0.0, 0.0, 0.0}, l);
    r.vertex_correct = score({1.0, 0.0, 0.0}, l);
    r.vertex_incorrect = score({0.0, 1.0, 0.0}, l);
    r.vertex_idk = score({0.0, 0.0, 1.0}, l);
    return r;
}

// Randomized check that, at equal correct mass and equal total mass,
// directing the residual mass to abstention instead of incorrect answers
// strictly raises the score, and that the gain matches the closed form
// (P_W2 - P_W1) * (p_c - 1).
struct HedgingReport {
    std::size_t trials = 0;
    double min_delta = std::numeric_limits<double>::infinity();
    double max_closed_form_err = 0.0;
    std::size_t sign_violations = 0;

    bool pass() const {
        return trials > 0 && sign_violations == 0 && min_delta > 0.0 &&
               max_closed_form_err <= kTightTol;
    }
};

inline HedgingReport verify_hedging_preference(std::size_t n_trials, std::uint64_t seed) {
    if (n_trials < 1) throw std::domain_error("hedging: n_trials must be >= 1");
    Rng rng(seed);
    HedgingReport r;
    while (r.trials < n_trials) {
        const double p_c = rng.uniform();
        if (p_c <= 0.0 || p_c >= 1.0) continue;
        const double residual = (1.0 - p_c) * rng.uniform();
        const double split = rng.uniform();
        const double hi = residual * std::max(split, 1.0 - split);
        const double lo = residual * std::min(split, 1.0 - split);
        if (hi == lo) continue;  // strict inequality between the pair required
        const BeliefTriple error_hedger{p_c, hi, lo};
        const BeliefTriple abstention_hedger{p_c, lo, hi};
        const double measured = score(abstention_hedger) - score(error_hedger);
        const double closed_form = (lo - hi) * (p_c - 1.0);
        ++r.trials;
        r.min_delta = std::min(r.min_delta, measured);
        r.max_closed_form_err = std::max(r.max_closed_form_err, std::fabs(measured - closed_form));
        if (measured <= 0.0) ++r.sign_violations;
    }
    return r;
}

// A rational agent that either commits its full output mass to its top pick
// or abstains.
struct AgentTask {
    int k = 4;                // answer-set size (excluding abstention)
    double confidence = 0.5;  // agent's probability its top pick is correct
    Loadings loadings;
};

struct AgentReport {
    double guess_score = 0.0;
    double abstain_score = 0.0;
    bool guess_is_optimal = false;  // strict improvement over abstention
    double empirical_threshold = 0.0;
    double closed_form_threshold = 0.0;
    double grid_step = 0.0;
};

// Score the agent receives for guessing with the given confidence: built
// through the pooled k-way distribution, not the closed form.
inline double agent_guess_score(int k, double confidence, const Loadings& l) {
    Distribution d;
    d.reserve(static_cast<std::size_t>(k) + 1);
    d.push_back({Role::correct, confidence});
    for (int i = 1; i < k; ++i) {
        d.push_back({Role::incorrect, (1.0 - confidence) / (k - 1)});
    }
    d.push_back({Role::idk, 0.0});
    return score(to_belief(d), l);
}

inline AgentReport simulate_agent(const AgentTask& task, double grid_step = 1e-3) {
    if (task.k < 2) throw std::domain_error("agent: k must be >= 2");
    if (!(task.confidence > 0.0 && task.confidence <= 1.0)) {
        throw std::domain_error("agent: confidence must lie in (0, 1]");
    }
    if (!(grid_step > 0.0 && grid_step <= 0.5)) {
        throw std::domain_error("agent: grid step must lie in (0, 0.5]");
    }
    validate(task.loadings);

    AgentReport r;
    r.grid_step = grid_step;
    r.guess_score = agent_guess_score(task.k, task.confidence, task.loadings);
    r.abstain_score = score({0.0, 0.0, 1.0}, task.loadings);
    r.guess_is_optimal = r.guess_score > r.abstain_score;
    r.closed_form_threshold = guessing_threshold(task.loadings);

    // Smallest grid confidence at which guessing strictly beats abstention.
    const int steps = static_cast<int>(std::lround(1.0 / grid_step));
    r.empirical_threshold = 1.0;
    for (int i = 1; i <= steps; ++i) {
        const double c = static_cast<double>(i) / steps;
        if (agent_guess_score(task.k, c, task.loadings) > r.abstain_score) {
            r.empirical_threshold = c;
            break;
        }
    }
    return r;
}

struct ThresholdCell {
    double l_c = 0.0;
    double l_w = 0.0;
    double threshold = 0.0;
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

// Guessing-threshold surface over a loading grid; plot data for external
// rendering.
inline std::vector<ThresholdCell> sweep_thresholds(Range lc_range, Range lw_range,
                                                   int resolution) {
    if (resolution < 1) throw std::domain_error("thresholds: resolution must be >= 1");
    auto axis = [resolution](Range r, const char* name) {
        if (!(r.lo > 0.0) || !(r.hi >= r.lo)) {
            throw std::domain_error(std::string("thresholds: ") + name +
                                    " range must be positive and ordered");
        }
        std::vector<double> v;
        v.reserve(static_cast<std::size_t>(resolution));
        if (resolution == 1) {
            v.push_back(r.lo);
        } else {
            for (int i = 0; i < resolution; ++i) {
                v.push_back(r.lo + (r.hi - r.lo) * i / (resolution - 1));
            }
        }
        return v;
    };
    const auto lcs = axis(lc_range, "l_c");
    const auto lws = axis(lw_range, "l_w");
    std::vector<ThresholdCell> cells;
    cells.reserve(lcs.size() * lws.size());
    for (double lc : lcs) {
        for (double lw : lws) {
            cells.push_back({lc, lw, guessing_threshold({lc, lw})});
        }
    }
    return cells;
}

// The nine reference thresholds realized with unit correct weight; the named
// slice emitted alongside every threshold sweep.
inline std::vector<ThresholdCell> reference_threshold_table() {
    std::vector<ThresholdCell> cells;
    for (double t : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
        const Loadings l = loading_for_threshold(t);
        cells.push_back({l.l_c, l.l_w, guessing_threshold(l)});
    }
    return cells;
}

// Agent sweep across a loading grid: empirical thresholds must match the
// closed form within one confidence-grid step, the default threshold must be
// exactly one half, and the reference table must round-trip bit-exactly.
struct ThresholdSuiteReport {
    double grid_step = 0.0;
    double max_abs_dev = 0.0;
    bool default_exact = false;
    bool table_roundtrip_exact = false;

    bool pass() const {
        return default_exact && table_roundtrip_exact && max_abs_dev <= grid_step + kTightTol;
    }
};

inline ThresholdSuiteReport verify_threshold(double grid_step = 1e-3) {
    static constexpr std::array<double, 9> weights = {1.0 / 9, 1.0 / 4, 3.0 / 7, 2.0 / 3, 1.0,
                                                      3.0 / 2, 7.0 / 3, 4.0,     9.0};
    ThresholdSuiteReport r;
    r.grid_step = grid_step;
    for (double lc : weights) {
        for (double lw : weights) {
            const AgentReport a = simulate_agent({4, 0.5, {lc, lw}}, grid_step);
            r.max_abs_dev = std::max(
                r.max_abs_dev, std::fabs(a.empirical_threshold - a.closed_form_threshold));
        }
    }
    r.default_exact = guessing_threshold({1.0, 1.0}) == 0.5;
    r.table_roundtrip_exact = true;
    for (double t : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
        if (guessing_threshold(loading_for_threshold(t)) != t) r.table_roundtrip_exact = false;
    }
    return r;
}

// Synthetic task whose data reveals the true answer with probability
// info_level and carries nothing otherwise.
struct InfoBoundExperiment {
    int k = 4;
    std::size_t n_queries = 10000;
    double info_level = 0.0;  // 0: no information, 1: answer fully determined
};

struct InfoBoundReport {
    int k = 0;
    double info_level = 0.0;
    std::size_t trials = 0;
    double ceiling = 0.0;  // (2 - k) / k: zero-information non-abstaining cap
    double nonabstain_mean = 0.0, nonabstain_se = 0.0;
    double policy_mean = 0.0, policy_se = 0.0;  // optimal guess-or-abstain policy
    double abstain_score = 0.0;

    // Gates at 3 sigma of the Monte Carlo error.
    bool pass_zero_info() const {
        bool ok = nonabstain_mean <= ceiling + 3.0 * nonabstain_se;
        if (k > 2) {
            ok = ok && abstain_score == 0.0 && nonabstain_mean < abstain_score &&
                 policy_mean == 0.0;
        }
        return ok;
    }
    bool pass_full_info() const { return std::fabs(policy_mean - 1.0) <= 3.0 * policy_se; }
};

inline InfoBoundReport run_info_bound(const InfoBoundExperiment& e, std::uint64_t seed,
                                      const Loadings& l = {}) {
    if (e.k < 2) throw std::domain_error("info bound: k must be >= 2");
    if (e.n_queries < 1) throw std::domain_error("info bound: n_queries must be >= 1");
    if (!(e.info_level >= 0.0 && e.info_level <= 1.0)) {
        throw std::domain_error("info bound: info_level must lie in [0, 1]");
    }
    validate(l);

    Rng rng(seed);
    const double threshold = guessing_threshold(l);
    double sum_g = 0.0, sumsq_g = 0.0;
    double sum_p = 0.0, sumsq_p = 0.0;
    for (std::size_t t = 0; t < e.n_queries; ++t) {
        const int truth = rng.uniform_int(e.k);
        const bool revealed = rng.uniform() < e.info_level;
        const int pick = revealed ? truth : rng.uniform_int(e.k);
        const bool hit = pick == truth;
        // Best non-abstaining policy: commit full mass to the pick.
        const double s_guess =
            score({hit ? 1.0 : 0.0, hit ? 0.0 : 1.0, 0.0}, l);
        // Optimal policy: guess only when the posterior correctness clears
        // the loading threshold, otherwise abstain for a certain 0.
        const double posterior = revealed ? 1.0 : 1.0 / e.k;
        const double s_policy = posterior > threshold ? s_guess : 0.0;
        sum_g += s_guess;
        sumsq_g += s_guess * s_guess;
        sum_p += s_policy;
        sumsq_p += s_policy * s_policy;
    }

    const auto n = static_cast<double>(e.n_queries);
    auto mean_se = [n](double sum, double sumsq, double& mean, double& se) {
        mean = sum / n;
        if (n < 2) {
            se = 0.0;
            return;
        }
        const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
        se = std::sqrt(var / n);
    };

    InfoBoundReport r;
    r.k = e.k;
    r.info_level = e.info_level;
    r.trials = e.n_queries;
    r.ceiling = (2.0 - e.k) / e.k;
    r.abstain_score = score({0.0, 0.0, 1.0}, l);
    mean_se(sum_g, sumsq_g, r.nonabstain_mean, r.nonabstain_se);
    mean_se(sum_p, sumsq_p, r.policy_mean, r.policy_se);
    return r;
}

}  // namespace dcs
