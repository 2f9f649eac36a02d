// SPDX-License-Identifier: Apache-2.0
//
// Distribution-aware correctness scoring over answer-probability records.
//
// A model's answer distribution is summarized as probability mass on the
// correct answer(s), mass on the incorrect answers, and mass on an explicit
// abstention ("I don't know") option. The distributional correctness score
// rewards correct mass, penalizes incorrect mass, and damps the result
// toward zero in proportion to the abstention mass, so abstention acts as a
// neutral anchor at 0.

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dcs {

// Slack for probability-sum checks.
inline constexpr double kMassSlack = 1e-9;
// Tolerance for identity checks (recomposition, round-trips).
inline constexpr double kTightTol = 1e-12;

enum class Role { correct, incorrect, idk };

inline const char* to_string(Role r) {
    switch (r) {
        case Role::correct: return "correct";
        case Role::incorrect: return "incorrect";
        case Role::idk: return "idk";
    }
    return "?";
}

inline std::optional<Role> role_from_string(std::string_view s) {
    if (s == "correct") return Role::correct;
    if (s == "incorrect") return Role::incorrect;
    if (s == "idk") return Role::idk;
    return std::nullopt;
}

struct RoleProb {
    Role role;
    double prob;
};

// A full answer distribution: one entry per candidate answer.
using Distribution = std::vector<RoleProb>;

// (p_c, p_w, p_idk) summary of an answer distribution. The components may
// sum to less than 1; the residual is mass outside the candidate set.
struct BeliefTriple {
    double p_c = 0.0;
    double p_w = 0.0;
    double p_idk = 0.0;

    double total() const { return p_c + p_w + p_idk; }
};

// Reward weight on correct mass, penalty weight on incorrect mass. Their
// ratio sets the rational guessing threshold.
struct Loadings {
    double l_c = 1.0;
    double l_w = 1.0;
};

inline void validate(const BeliefTriple& b, bool require_normalized = false) {
    auto check = [](double v, const char* field) {
        if (!std::isfinite(v)) {
            throw std::domain_error(std::string("belief: ") + field + " is not finite");
        }
        if (v < 0.0) {
            throw std::domain_error(std::string("belief: negative mass in ") + field + " (" +
                                    std::to_string(v) + ")");
        }
    };
    check(b.p_c, "p_c");
    check(b.p_w, "p_w");
    check(b.p_idk, "p_idk");
    const double total = b.total();
    if (total > 1.0 + kMassSlack) {
        throw std::domain_error("belief: mass sum " + std::to_string(total) + " exceeds 1");
    }
    if (require_normalized && std::fabs(total - 1.0) > kMassSlack) {
        throw std::domain_error("belief: mass sum " + std::to_string(total) + " is not 1");
    }
}

inline void validate(const Loadings& l) {
    if (!std::isfinite(l.l_c) || l.l_c < 0.0) {
        throw std::domain_error("loadings: l_c must be finite and >= 0");
    }
    if (!std::isfinite(l.l_w) || l.l_w < 0.0) {
        throw std::domain_error("loadings: l_w must be finite and >= 0");
    }
    if (l.l_c == 0.0 && l.l_w == 0.0) {
        throw std::domain_error("loadings: l_c and l_w must not both be zero");
    }
}

// The distributional correctness score: (l_c*p_c - l_w*p_w) * (1 - p_idk).
// With unit loadings the value lies in [-1, 1].
inline double score(const BeliefTriple& b, const Loadings& l = {}) {
    validate(b);
    validate(l);
    return (l.l_c * b.p_c - l.l_w * b.p_w) * (1.0 - b.p_idk);
}

namespace detail {

// Largest candidate probability per role; -inf for roles that do not occur.
struct RoleMaxima {
    double correct = -std::numeric_limits<double>::infinity();
    double incorrect = -std::numeric_limits<double>::infinity();
    double idk = -std::numeric_limits<double>::infinity();
};

inline RoleMaxima role_maxima(const Distribution& d) {
    if (d.empty()) throw std::domain_error("answer distribution is empty");
    RoleMaxima m;
    for (const RoleProb& rp : d) {
        if (!std::isfinite(rp.prob)) {
            throw std::domain_error("answer distribution contains a non-finite probability");
        }
        switch (rp.role) {
            case Role::correct: m.correct = std::max(m.correct, rp.prob); break;
            case Role::incorrect: m.incorrect = std::max(m.incorrect, rp.prob); break;
            case Role::idk: m.idk = std::max(m.idk, rp.prob); break;
        }
    }
    return m;
}

}  // namespace detail

// Pool candidate masses by role. Multiple correct answers sum into p_c.
inline BeliefTriple to_belief(const Distribution& d) {
    if (d.empty()) throw std::domain_error("answer distribution is empty");
    BeliefTriple b;
    for (const RoleProb& rp : d) {
        if (!std::isfinite(rp.prob)) {
            throw std::domain_error("answer distribution contains a non-finite probability");
        }
        switch (rp.role) {
            case Role::correct: b.p_c += rp.prob; break;
            case Role::incorrect: b.p_w += rp.prob; break;
            case Role::idk: b.p_idk += rp.prob; break;
        }
    }
    validate(b);
    return b;
}

// 1 iff the most probable candidate is a correct answer. Pessimistic
// tie-break: a tie with any non-correct candidate scores 0.
inline int accuracy(const Distribution& d) {
    const auto m = detail::role_maxima(d);
    return (m.correct > m.incorrect && m.correct > m.idk) ? 1 : 0;
}

// Pooled correct mass when the most probable candidate is correct, else 0.
inline double cweighted_accuracy(const Distribution& d) {
    if (accuracy(d) == 0) return 0.0;
    double p_c = 0.0;
    for (const RoleProb& rp : d) {
        if (rp.role == Role::correct) p_c += rp.prob;
    }
    return p_c;
}

// +1 most probable candidate correct, 0 abstention, -1 incorrect. At a tie
// among non-correct candidates the abstention option wins.
inline int ternary(const Distribution& d) {
    const auto m = detail::role_maxima(d);
    if (m.correct > m.incorrect && m.correct > m.idk) return 1;
    return (m.idk >= m.incorrect) ? 0 : -1;
}

// Per-record values of all four metrics. Unscaled; presentation scaling is
// a reporting concern.
struct SampleScores {
    double dcs = 0.0;
    int accuracy = 0;
    double cweighted = 0.0;
    int ternary = 0;
};

inline SampleScores score_sample(const Distribution& d, const Loadings& l = {}) {
    SampleScores s;
    const BeliefTriple b = to_belief(d);
    s.dcs = score(b, l);
    s.accuracy = accuracy(d);
    s.cweighted = (s.accuracy == 1) ? b.p_c : 0.0;
    s.ternary = ternary(d);
    return s;
}

// Confidence above which guessing beats abstention: l_w / (l_c + l_w).
inline double guessing_threshold(const Loadings& l) {
    validate(l);
    return l.l_w / (l.l_c + l.l_w);
}

// Loadings with unit correct weight realizing a desired guessing threshold:
// (1, t/(1-t)). Among the representable weights within one ulp of the ratio,
// prefers one whose induced threshold reproduces the target bit-exactly.
inline Loadings loading_for_threshold(double target) {
    if (!(target > 0.0 && target < 1.0)) {
        throw std::domain_error("threshold target must lie strictly in (0, 1)");
    }
    const double l_w = target / (1.0 - target);
    const double inf = std::numeric_limits<double>::infinity();
    for (double candidate : {l_w, std::nextafter(l_w, inf), std::nextafter(l_w, 0.0)}) {
        if (guessing_threshold({1.0, candidate}) == target) return {1.0, candidate};
    }
    return {1.0, l_w};
}

// Conditional answer masses in the two branches of the abstention mixture:
// b_* given the model believes it knows the answer, bbar_* given it does
// not. The branch weight is the unconditional abstention mass, so the
// unconditional mass of answer a recomposes as
//   p_a = p_idk * bbar_a + (1 - p_idk) * b_a.
struct MixtureState {
    double p_idk = 0.0;
    double b_c = 0.0, b_w = 0.0, b_idk = 0.0;
    double bbar_c = 0.0, bbar_w = 0.0, bbar_idk = 0.0;
    // The doesn't-believe branch is (almost) all abstention.
    bool pure_idk = false;
};

// Conditional masses given the model believes it knows the answer.
struct BelievesProfile {
    double b_c = 0.0;
    double b_w = 0.0;
    double b_idk = 0.0;
};

inline BeliefTriple recompose(const MixtureState& m) {
    const double w = m.p_idk;
    return {w * m.bbar_c + (1.0 - w) * m.b_c,
            w * m.bbar_w + (1.0 - w) * m.b_w,
            w * m.bbar_idk + (1.0 - w) * m.b_idk};
}

// Split an unconditional distribution into the two-branch mixture fixed by
// the given believes-branch profile. Throws when no valid conditional split
// exists. With p_idk = 0 the doesn't-believe branch is unconstrained and
// defaults to pure abstention.
inline MixtureState decompose_mixture(const Distribution& unconditional, double p_idk,
                                      const BelievesProfile& believes) {
    const BeliefTriple u = to_belief(unconditional);
    if (!std::isfinite(p_idk) || p_idk < 0.0 || p_idk > 1.0 + kMassSlack) {
        throw std::domain_error("mixture: p_idk must lie in [0, 1]");
    }
    if (std::fabs(u.p_idk - p_idk) > kMassSlack) {
        throw std::domain_error("mixture: p_idk " + std::to_string(p_idk) +
                                " does not match the abstention mass " + std::to_string(u.p_idk));
    }
    auto check_conditional = [](double v, const char* field) {
        if (!std::isfinite(v) || v < -kMassSlack || v > 1.0 + kMassSlack) {
            throw std::domain_error(std::string("mixture: no valid conditional split (") + field +
                                    " = " + std::to_string(v) + ")");
        }
    };
    check_conditional(believes.b_c, "b_c");
    check_conditional(believes.b_w, "b_w");
    check_conditional(believes.b_idk, "b_idk");
    if (believes.b_c + believes.b_w + believes.b_idk > 1.0 + kMassSlack) {
        throw std::domain_error("mixture: believes-branch masses sum beyond 1");
    }

    MixtureState m;
    m.p_idk = p_idk;
    m.b_c = believes.b_c;
    m.b_w = believes.b_w;
    m.b_idk = believes.b_idk;
    if (p_idk == 0.0) {
        if (std::fabs(believes.b_c - u.p_c) > kMassSlack ||
            std::fabs(believes.b_w - u.p_w) > kMassSlack) {
            throw std::domain_error(
                "mixture: with p_idk = 0 the believes branch must equal the unconditional masses");
        }
        m.b_c = u.p_c;
        m.b_w = u.p_w;
        m.b_idk = 0.0;
        m.bbar_c = 0.0;
        m.bbar_w = 0.0;
        m.bbar_idk = 1.0;
    } else {
        m.bbar_c = (u.p_c - (1.0 - p_idk) * m.b_c) / p_idk;
        m.bbar_w = (u.p_w - (1.0 - p_idk) * m.b_w) / p_idk;
        m.bbar_idk = (u.p_idk - (1.0 - p_idk) * m.b_idk) / p_idk;
        check_conditional(m.bbar_c, "bbar_c");
        check_conditional(m.bbar_w, "bbar_w");
        check_conditional(m.bbar_idk, "bbar_idk");
    }
    m.pure_idk = m.bbar_idk >= 1.0 - 1e-6 && m.bbar_c <= 1e-6 && m.bbar_w <= 1e-6;
    return m;
}

// Exact score of the recomposed belief next to the believes-branch shorthand
// [l_c*b_c - l_w*b_w]*(1 - p_idk). The shorthand is an approximation even in
// a pure abstention state, so both values and their gap are reported instead
// of asserting equality.
struct MixtureScoreForms {
    double exact = 0.0;
    double branch = 0.0;
    double difference = 0.0;
};

inline MixtureScoreForms mixture_score_forms(const MixtureState& m, const Loadings& l = {}) {
    MixtureScoreForms f;
    f.exact = score(recompose(m), l);
    f.branch = (l.l_c * m.b_c - l.l_w * m.b_w) * (1.0 - m.p_idk);
    f.difference = f.exact - f.branch;
    return f;
}

}  // namespace dcs
