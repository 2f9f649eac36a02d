// SPDX-License-Identifier: Apache-2.0
//
// Deterministic synthetic answer-record corpora. Each record follows one of
// four epistemic patterns with fixed candidate masses, so every pattern has
// known per-record metric values and a corpus has an analytic expected mean
// per metric. Log-likelihoods are emitted as token_count * ln(mass), which
// the length-normalized softmax maps back onto the intended masses.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "dcs/record.hpp"
#include "dcs/rng.hpp"

namespace dcs {

enum class EpistemicPattern { confident_correct, error_hedging, abstention_hedging, uniform };

inline constexpr std::array<EpistemicPattern, 4> kAllPatterns = {
    EpistemicPattern::confident_correct, EpistemicPattern::error_hedging,
    EpistemicPattern::abstention_hedging, EpistemicPattern::uniform};

inline const char* to_string(EpistemicPattern p) {
    switch (p) {
        case EpistemicPattern::confident_correct: return "confident-correct";
        case EpistemicPattern::error_hedging: return "error-hedging";
        case EpistemicPattern::abstention_hedging: return "abstention-hedging";
        case EpistemicPattern::uniform: return "uniform";
    }
    return "?";
}

struct SynthProfile {
    std::size_t n = 0;
    int k = 4;  // answer options, excluding the abstention choice
    // Proportions: confident-correct, error-hedging, abstention-hedging,
    // uniform. Normalized internally.
    std::array<double, 4> mix = {1.0, 0.0, 0.0, 0.0};
    std::uint64_t seed = 0;
    std::string benchmark = "synthetic";
    std::string model = "synthetic-model";
};

// Candidate masses of one pattern over k answers plus the abstention option.
struct PatternMasses {
    double correct = 0.0;
    double incorrect_each = 0.0;  // each of the k-1 incorrect options
    double idk = 0.0;
};

inline PatternMasses pattern_masses(EpistemicPattern p, int k) {
    if (k < 2) throw std::domain_error("pattern: k must be >= 2");
    switch (p) {
        case EpistemicPattern::confident_correct:
            // 0.96/0.01/0.01 at k = 4.
            if (k > 90) throw std::domain_error("pattern: confident-correct needs k <= 90");
            return {1.0 - 0.01 * k, 0.01, 0.01};
        case EpistemicPattern::error_hedging:
            // Residual uncertainty spread over the incorrect options.
            return {0.40, 0.59 / (k - 1), 0.01};
        case EpistemicPattern::abstention_hedging:
            // Residual uncertainty directed at the abstention option.
            return {0.40, 0.21 / (k - 1), 0.39};
        case EpistemicPattern::uniform:
            // Near-chance spread with a small margin on the correct option;
            // 0.26 correct / 0.73 incorrect / 0.01 abstention at k = 4.
            return {1.04 / k, (0.99 - 1.04 / k) / (k - 1), 0.01};
    }
    throw std::domain_error("pattern: unknown pattern");
}

// Analytic per-record metric values of a pattern, written out directly from
// the masses. This is the generator-side expectation; it deliberately does
// not call the scoring functions.
struct MeanScores {
    double dcs = 0.0;
    double accuracy = 0.0;
    double cweighted = 0.0;
    double ternary = 0.0;
};

inline MeanScores pattern_scores(EpistemicPattern p, int k, const Loadings& l = {}) {
    const PatternMasses m = pattern_masses(p, k);
    const double p_w = m.incorrect_each * (k - 1);
    MeanScores s;
    s.dcs = (l.l_c * m.correct - l.l_w * p_w) * (1.0 - m.idk);
    const bool correct_wins = m.correct > m.incorrect_each && m.correct > m.idk;
    s.accuracy = correct_wins ? 1.0 : 0.0;
    s.cweighted = correct_wins ? m.correct : 0.0;
    s.ternary = correct_wins ? 1.0 : (m.idk >= m.incorrect_each ? 0.0 : -1.0);
    return s;
}

namespace detail {

inline std::array<double, 4> normalized_mix(const std::array<double, 4>& mix) {
    double total = 0.0;
    for (double w : mix) {
        if (!(w >= 0.0)) throw std::domain_error("mix: weights must be >= 0");
        total += w;
    }
    if (!(total > 0.0)) throw std::domain_error("mix: weights must not all be zero");
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < mix.size(); ++i) out[i] = mix[i] / total;
    return out;
}

}  // namespace detail

// Mix-weighted expected mean of each metric over a profile's corpus.
inline MeanScores expected_mean_scores(const SynthProfile& prof, const Loadings& l = {}) {
    const auto mix = detail::normalized_mix(prof.mix);
    MeanScores out;
    for (std::size_t i = 0; i < kAllPatterns.size(); ++i) {
        if (mix[i] == 0.0) continue;
        const MeanScores s = pattern_scores(kAllPatterns[i], prof.k, l);
        out.dcs += mix[i] * s.dcs;
        out.accuracy += mix[i] * s.accuracy;
        out.cweighted += mix[i] * s.cweighted;
        out.ternary += mix[i] * s.ternary;
    }
    return out;
}

inline std::vector<AnswerRecord> synthesize_records(const SynthProfile& prof) {
    if (prof.n < 1) throw std::domain_error("synthesize: n must be >= 1");
    if (prof.k < 2) throw std::domain_error("synthesize: k must be >= 2");
    const auto mix = detail::normalized_mix(prof.mix);
    for (std::size_t i = 0; i < kAllPatterns.size(); ++i) {
        if (mix[i] > 0.0) pattern_masses(kAllPatterns[i], prof.k);  // feasibility
    }

    Rng rng(prof.seed);
    std::vector<AnswerRecord> records;
    records.reserve(prof.n);
    for (std::size_t i = 0; i < prof.n; ++i) {
        const double u = rng.uniform();
        std::size_t pick = mix.size() - 1;
        double cumulative = 0.0;
        for (std::size_t j = 0; j < mix.size(); ++j) {
            cumulative += mix[j];
            if (u < cumulative) {
                pick = j;
                break;
            }
        }
        const EpistemicPattern pattern = kAllPatterns[pick];
        const PatternMasses masses = pattern_masses(pattern, prof.k);

        AnswerRecord r;
        r.benchmark = prof.benchmark;
        r.model = prof.model;
        char id[32];
        std::snprintf(id, sizeof(id), "q%06zu", i + 1);
        r.sample_id = id;
        const int correct_slot = rng.uniform_int(prof.k);
        for (int slot = 0; slot < prof.k; ++slot) {
            Choice c;
            c.text = "choice-" + std::to_string(slot + 1);
            c.role = slot == correct_slot ? Role::correct : Role::incorrect;
            c.token_count = 1 + rng.uniform_int(4);
            const double mass = slot == correct_slot ? masses.correct : masses.incorrect_each;
            c.loglik = c.token_count * std::log(mass);
            r.choices.push_back(std::move(c));
        }
        Choice idk;
        idk.text = "not sure";
        idk.role = Role::idk;
        idk.token_count = 1 + rng.uniform_int(4);
        idk.loglik = idk.token_count * std::log(masses.idk);
        r.choices.push_back(std::move(idk));
        r.meta["pattern"] = to_string(pattern);
        validate_record(r);
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace dcs
