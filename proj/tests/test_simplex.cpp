// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "dcs/simplex.hpp"

using namespace dcs;

TEST_CASE("the half-step lattice is exactly the ten hand-enumerated points") {
    // All (i, j, k)/2 with i + j + k <= 2.
    const std::set<std::array<double, 3>> expected = {
        {0.0, 0.0, 0.0}, {0.0, 0.0, 0.5}, {0.0, 0.0, 1.0}, {0.0, 0.5, 0.0}, {0.0, 0.5, 0.5},
        {0.0, 1.0, 0.0}, {0.5, 0.0, 0.0}, {0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}, {1.0, 0.0, 0.0}};
    const auto points = SimplexGrid::make(0.5).points();
    std::set<std::array<double, 3>> got;
    for (const BeliefTriple& b : points) got.insert({b.p_c, b.p_w, b.p_idk});
    CHECK(points.size() == 10);
    CHECK(got == expected);
}

TEST_CASE("lattice point count follows the tetrahedral formula") {
    for (double step : {1.0, 0.5, 0.25, 0.2, 0.1, 0.05, 0.01}) {
        const SimplexGrid g = SimplexGrid::make(step);
        const auto n = static_cast<std::size_t>(g.n);
        CHECK(g.size() == (n + 1) * (n + 2) * (n + 3) / 6);
        std::size_t counted = 0;
        g.for_each([&](const BeliefTriple&) { ++counted; });
        CHECK(counted == g.size());
    }
    CHECK(SimplexGrid::make(0.01).size() == 176851);
    CHECK_THROWS_AS(SimplexGrid::make(0.0), std::domain_error);
    CHECK_THROWS_AS(SimplexGrid::make(1.5), std::domain_error);
}

TEST_CASE("bounds scan on the coarse lattice") {
    const BoundsReport r = verify_bounds(0.5);
    CHECK(r.points == 10);
    CHECK(r.min == -1.0);
    CHECK(r.max == 1.0);
    CHECK(r.violations == 0);
    CHECK(r.argmax.p_c == 1.0);
    CHECK(r.argmin.p_w == 1.0);
    CHECK(r.vertex_origin == 0.0);
    CHECK(r.vertex_correct == 1.0);
    CHECK(r.vertex_incorrect == -1.0);
    CHECK(r.vertex_idk == 0.0);
    CHECK(r.pass());
}

TEST_CASE("bounds scan on a fine lattice finds no violations") {
    const BoundsReport r = verify_bounds(0.02);
    CHECK(r.violations == 0);
    CHECK(r.pass());
    CHECK_THROWS_AS(verify_bounds(0.6), std::domain_error);
    CHECK_THROWS_AS(verify_bounds(0.0), std::domain_error);
}

TEST_CASE("bounds hold under asymmetric loadings") {
    const BoundsReport r = verify_bounds(0.1, {1.0, 3.0});
    CHECK(r.violations == 0);
    CHECK(r.max == 1.0);
    CHECK(r.min == -3.0);
    CHECK(r.pass());
}

TEST_CASE("observed extrema tighten with the lattice step") {
    // The score is 2-Lipschitz over the tetrahedron at unit loadings, so the
    // grid extrema sit within 2*step of the true ones.
    for (double step : {0.5, 0.25, 0.2, 0.1}) {
        const BoundsReport r = verify_bounds(step);
        CHECK(1.0 - r.max <= 2.0 * step + 1e-12);
        CHECK(r.min + 1.0 <= 2.0 * step + 1e-12);
    }
}

TEST_CASE("hedging preference: worked pair and both routes") {
    const BeliefTriple error_hedger{0.4, 0.39, 0.21};
    const BeliefTriple abstention_hedger{0.4, 0.21, 0.39};
    const double measured = score(abstention_hedger) - score(error_hedger);
    const double closed = (0.21 - 0.39) * (0.4 - 1.0);
    CHECK(std::fabs(closed - 0.108) <= 1e-12);
    CHECK(std::fabs(measured - closed) <= 1e-12);
    CHECK(std::fabs(score(abstention_hedger) - 0.1159) <= 1e-12);
    CHECK(std::fabs(score(error_hedger) - 0.0079) <= 1e-12);
}

TEST_CASE("hedging preference vanishes as correct mass saturates") {
    const double p_c = 1.0 - 1e-6;
    const double delta = score({p_c, 1e-7, 3e-7}) - score({p_c, 3e-7, 1e-7});
    CHECK(delta > 0.0);
    CHECK(delta <= 1e-9);
}

TEST_CASE("hedging preference holds over seeded trials") {
    const HedgingReport r = verify_hedging_preference(10000, 7);
    CHECK(r.trials == 10000);
    CHECK(r.sign_violations == 0);
    CHECK(r.min_delta > 0.0);
    CHECK(r.max_closed_form_err <= 1e-12);
    CHECK(r.pass());
    CHECK_THROWS_AS(verify_hedging_preference(0, 7), std::domain_error);
}

TEST_CASE("agent simulation matches the closed form") {
    const AgentReport a = simulate_agent({4, 0.6, {1.0, 1.0}});
    CHECK(std::fabs(a.guess_score - 0.2) <= 1e-12);
    CHECK(a.abstain_score == 0.0);
    CHECK(a.guess_is_optimal);

    // At the threshold the guess ties the abstention score and loses.
    const AgentReport b = simulate_agent({4, 0.5, {1.0, 1.0}});
    CHECK(std::fabs(b.guess_score) <= 1e-12);
    CHECK_FALSE(b.guess_is_optimal);
    CHECK(std::fabs(b.empirical_threshold - 0.5) <= b.grid_step + 1e-12);

    const AgentReport c = simulate_agent({4, 0.95, {1.0, 9.0}});
    CHECK(c.closed_form_threshold == 0.9);
    CHECK(std::fabs(c.empirical_threshold - 0.9) <= c.grid_step + 1e-12);

    CHECK_THROWS_AS(simulate_agent({1, 0.5, {1.0, 1.0}}), std::domain_error);
    CHECK_THROWS_AS(simulate_agent({4, 0.0, {1.0, 1.0}}), std::domain_error);
    CHECK_THROWS_AS(simulate_agent({4, 1.2, {1.0, 1.0}}), std::domain_error);
}

TEST_CASE("agent guess score does not depend on the answer-set size") {
    for (int k : {2, 3, 4, 10, 50}) {
        CHECK(std::fabs(agent_guess_score(k, 0.7, {1.0, 1.0}) - 0.4) <= 1e-12);
    }
}

TEST_CASE("empirical thresholds agree with the closed form over a loading sweep") {
    const ThresholdSuiteReport r = verify_threshold(1e-3);
    CHECK(r.default_exact);
    CHECK(r.table_roundtrip_exact);
    CHECK(r.max_abs_dev <= 1e-3 + 1e-12);
    CHECK(r.pass());
}

TEST_CASE("threshold sweep cells equal the closed form") {
    const auto diag = sweep_thresholds({1.0, 4.0}, {1.0, 4.0}, 4);
    CHECK(diag.size() == 16);
    for (const ThresholdCell& c : diag) {
        if (c.l_c == c.l_w) CHECK(c.threshold == 0.5);
        CHECK(c.threshold == guessing_threshold({c.l_c, c.l_w}));
    }

    const auto single = sweep_thresholds({1.0, 1.0}, {1.0, 1.0}, 1);
    CHECK(single.size() == 1);
    CHECK(single[0].threshold == 0.5);

    const auto cell = sweep_thresholds({3.0, 3.0}, {1.0, 1.0}, 1);
    CHECK(cell[0].threshold == 0.25);

    CHECK_THROWS_AS(sweep_thresholds({1.0, 2.0}, {1.0, 2.0}, 0), std::domain_error);
    CHECK_THROWS_AS(sweep_thresholds({0.0, 2.0}, {1.0, 2.0}, 3), std::domain_error);
    CHECK_THROWS_AS(sweep_thresholds({2.0, 1.0}, {1.0, 2.0}, 3), std::domain_error);
}

TEST_CASE("reference threshold table matches the nine published pairs") {
    const auto table = reference_threshold_table();
    REQUIRE(table.size() == 9);
    const std::array<double, 9> thresholds = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    const std::array<double, 9> weights = {1.0 / 9, 1.0 / 4, 3.0 / 7, 2.0 / 3, 1.0,
                                           3.0 / 2, 7.0 / 3, 4.0,     9.0};
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK(table[i].l_c == 1.0);
        CHECK(table[i].threshold == thresholds[i]);
        CHECK(std::fabs(table[i].l_w - weights[i]) <= 1e-12);
    }
}

TEST_CASE("info bound: zero-information ceilings per answer-set size") {
    for (const auto& [k, ceiling] : std::vector<std::pair<int, double>>{
             {2, 0.0}, {3, -1.0 / 3}, {4, -0.5}, {10, -0.8}}) {
        const InfoBoundReport r = run_info_bound({k, 20000, 0.0}, 19);
        CHECK(r.ceiling == ceiling);
        CHECK(r.nonabstain_mean <= r.ceiling + 3.0 * r.nonabstain_se);
        CHECK(r.nonabstain_mean >= r.ceiling - 3.0 * r.nonabstain_se);
        CHECK(r.abstain_score == 0.0);
        if (k > 2) {
            CHECK(r.policy_mean == 0.0);  // the optimal policy always abstains
            CHECK(r.nonabstain_mean < 0.0);
        }
        CHECK(r.pass_zero_info());
    }
}

TEST_CASE("info bound: full information saturates the score") {
    for (int k : {2, 4, 10}) {
        const InfoBoundReport r = run_info_bound({k, 5000, 1.0}, 23);
        CHECK(r.policy_mean == 1.0);
        CHECK(r.nonabstain_mean == 1.0);
        CHECK(r.pass_full_info());
    }
}

TEST_CASE("info bound: the optimum never degrades with more information") {
    const std::vector<double> levels = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<InfoBoundReport> reports;
    for (double info : levels) reports.push_back(run_info_bound({4, 20000, info}, 29));
    for (std::size_t i = 1; i < reports.size(); ++i) {
        const double se = std::hypot(reports[i].policy_se, reports[i - 1].policy_se);
        CHECK(reports[i].policy_mean >= reports[i - 1].policy_mean - 3.0 * se);
    }
}

TEST_CASE("info bound rejects invalid experiments") {
    CHECK_THROWS_AS(run_info_bound({1, 100, 0.0}, 1), std::domain_error);
    CHECK_THROWS_AS(run_info_bound({4, 0, 0.0}, 1), std::domain_error);
    CHECK_THROWS_AS(run_info_bound({4, 100, 1.5}, 1), std::domain_error);
}

TEST_CASE("seeded runs are reproducible") {
    const HedgingReport a = verify_hedging_preference(500, 99);
    const HedgingReport b = verify_hedging_preference(500, 99);
    CHECK(a.min_delta == b.min_delta);
    CHECK(a.max_closed_form_err == b.max_closed_form_err);
    const InfoBoundReport x = run_info_bound({4, 2000, 0.3}, 99);
    const InfoBoundReport y = run_info_bound({4, 2000, 0.3}, 99);
    CHECK(x.nonabstain_mean == y.nonabstain_mean);
    CHECK(x.policy_mean == y.policy_mean);
    const InfoBoundReport z = run_info_bound({4, 2000, 0.3}, 100);
    CHECK(z.nonabstain_mean != x.nonabstain_mean);
}
