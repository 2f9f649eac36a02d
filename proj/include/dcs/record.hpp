// SPDX-License-Identifier: Apache-2.0
//
// Line-delimited answer-record ingestion. Wire format: UTF-8 JSONL, one
// record per line:
//
//   {"benchmark": "...", "sample_id": "...", "model": "...",
//    "choices": [{"text": "...", "role": "correct"|"incorrect"|"idk",
//                 "loglik": <number> OR "prob": <number>,
//                 "token_count": <int>}, ...],
//    "meta": {"key": "value", ...}}        (meta optional)
//
// Log-likelihoods are natural logs. A record carries either loglik (with
// token_count) on every choice or prob on every choice, never a mix.
// Malformed lines are reported with line numbers, never silently dropped.

#pragma once

#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcs/metrics.hpp"

namespace dcs {

// How raw choice values become the probabilities the metrics consume.
// softmax_over_answers renormalizes length-normalized log-likelihoods over
// the candidate set; absolute takes externally computed probabilities as-is
// and allows residual mass outside the candidate set.
enum class NormalizationMode { softmax_over_answers, absolute };

inline const char* to_string(NormalizationMode m) {
    return m == NormalizationMode::softmax_over_answers ? "softmax" : "absolute";
}

inline std::optional<NormalizationMode> norm_mode_from_string(std::string_view s) {
    if (s == "softmax" || s == "softmax_over_answers") return NormalizationMode::softmax_over_answers;
    if (s == "absolute") return NormalizationMode::absolute;
    return std::nullopt;
}

struct Choice {
    std::string text;
    Role role = Role::incorrect;
    std::optional<double> loglik;  // natural-log sequence likelihood
    std::optional<double> prob;    // externally computed absolute probability
    int token_count = 1;
};

struct AnswerRecord {
    std::string benchmark;
    std::string sample_id;
    std::string model;
    std::vector<Choice> choices;
    std::map<std::string, std::string> meta;

    std::string key() const { return benchmark + "\x1f" + sample_id + "\x1f" + model; }
};

// Semantic checks shared by the parser and programmatic construction.
inline void validate_record(const AnswerRecord& r) {
    if (r.benchmark.empty() || r.sample_id.empty() || r.model.empty()) {
        throw std::domain_error("record: benchmark, sample_id and model must be non-empty");
    }
    if (r.choices.size() < 2) throw std::domain_error("record: needs at least 2 choices");
    std::size_t idk_count = 0, correct_count = 0, loglik_count = 0, prob_count = 0;
    for (const Choice& c : r.choices) {
        if (c.role == Role::idk) ++idk_count;
        if (c.role == Role::correct) ++correct_count;
        if (c.loglik && c.prob) {
            throw std::domain_error("record: choice carries both loglik and prob");
        }
        if (!c.loglik && !c.prob) {
            throw std::domain_error("record: choice carries neither loglik nor prob");
        }
        if (c.loglik) {
            ++loglik_count;
            if (!std::isfinite(*c.loglik)) throw std::domain_error("record: loglik is not finite");
            if (c.token_count < 1) throw std::domain_error("record: token_count must be >= 1");
        }
        if (c.prob) {
            ++prob_count;
            if (!std::isfinite(*c.prob) || *c.prob < 0.0 || *c.prob > 1.0) {
                throw std::domain_error("record: prob must lie in [0, 1]");
            }
        }
    }
    if (idk_count == 0) throw std::domain_error("record: no idk choice");
    if (idk_count > 1) throw std::domain_error("record: more than one idk choice");
    if (correct_count == 0) throw std::domain_error("record: no correct choice");
    if (loglik_count != 0 && prob_count != 0) {
        throw std::domain_error("record: mixes loglik and prob choices");
    }
}

// Data-authoring lint: the abstention text should be similar in character
// length to the other candidates so it is not favored or penalized by length
// effects. Returns a message when the deviation exceeds 50% of the mean.
inline std::optional<std::string> lint_idk_length(const AnswerRecord& r) {
    double sum = 0.0;
    std::size_t count = 0;
    double idk_len = 0.0;
    for (const Choice& c : r.choices) {
        if (c.role == Role::idk) {
            idk_len = static_cast<double>(c.text.size());
        } else {
            sum += static_cast<double>(c.text.size());
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    const double mean = sum / static_cast<double>(count);
    if (mean == 0.0) return std::nullopt;
    if (std::fabs(idk_len - mean) > 0.5 * mean) {
        return "idk text length " + std::to_string(static_cast<long>(idk_len)) +
               " deviates more than 50% from the mean choice length " + std::to_string(mean);
    }
    return std::nullopt;
}

struct ParseIssue {
    enum class Severity { warning, error };
    Severity severity = Severity::error;
    std::size_t line = 0;  // 1-based
    std::string message;
};

struct ParseOptions {
    bool strict = false;  // reject unknown fields instead of warning
};

struct ParseResult {
    std::vector<AnswerRecord> records;
    std::vector<ParseIssue> issues;
    std::size_t error_count = 0;

    bool ok() const { return error_count == 0; }
};

namespace detail {

inline const std::set<std::string>& record_fields() {
    static const std::set<std::string> fields = {"benchmark", "sample_id", "model", "choices",
                                                 "meta"};
    return fields;
}

inline const std::set<std::string>& choice_fields() {
    static const std::set<std::string> fields = {"text", "role", "loglik", "prob", "token_count"};
    return fields;
}

}  // namespace detail

// Parse a stream of JSONL records. Every yielded record satisfies the record
// invariants; offending lines become issues instead. Blank lines are skipped.
inline ParseResult parse_records(std::istream& in, const ParseOptions& opts = {}) {
    using nlohmann::json;
    ParseResult result;
    std::set<std::string> seen_keys;
    std::string line;
    std::size_t line_no = 0;

    auto error = [&](std::size_t ln, std::string msg) {
        result.issues.push_back({ParseIssue::Severity::error, ln, std::move(msg)});
        ++result.error_count;
    };
    auto warning = [&](std::size_t ln, std::string msg) {
        result.issues.push_back({ParseIssue::Severity::warning, ln, std::move(msg)});
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            error(line_no, "invalid JSON object");
            continue;
        }

        bool bad = false;
        auto fail = [&](std::string msg) {
            error(line_no, std::move(msg));
            bad = true;
        };

        for (const auto& item : j.items()) {
            if (!detail::record_fields().count(item.key())) {
                if (opts.strict) {
                    fail("unknown field '" + item.key() + "'");
                } else {
                    warning(line_no, "unknown field '" + item.key() + "' ignored");
                }
            }
        }

        AnswerRecord record;
        auto get_string = [&](const char* field, std::string& out) {
            if (!j.contains(field) || !j[field].is_string()) {
                fail(std::string("missing or non-string field '") + field + "'");
                return;
            }
            out = j[field].get<std::string>();
        };
        get_string("benchmark", record.benchmark);
        get_string("sample_id", record.sample_id);
        get_string("model", record.model);

        if (!j.contains("choices") || !j["choices"].is_array()) {
            fail("missing or non-array field 'choices'");
        } else {
            for (const auto& cj : j["choices"]) {
                if (!cj.is_object()) {
                    fail("choice is not an object");
                    break;
                }
                for (const auto& item : cj.items()) {
                    if (!detail::choice_fields().count(item.key())) {
                        if (opts.strict) {
                            fail("unknown choice field '" + item.key() + "'");
                        } else {
                            warning(line_no, "unknown choice field '" + item.key() + "' ignored");
                        }
                    }
                }
                Choice choice;
                if (!cj.contains("text") || !cj["text"].is_string()) {
                    fail("choice: missing or non-string 'text'");
                    break;
                }
                choice.text = cj["text"].get<std::string>();
                if (!cj.contains("role") || !cj["role"].is_string()) {
                    fail("choice: missing or non-string 'role'");
                    break;
                }
                const auto role = role_from_string(cj["role"].get<std::string>());
                if (!role) {
                    fail("choice: unknown role '" + cj["role"].get<std::string>() + "'");
                    break;
                }
                choice.role = *role;
                if (cj.contains("loglik")) {
                    if (!cj["loglik"].is_number()) {
                        fail("choice: 'loglik' is not a number");
                        break;
                    }
                    choice.loglik = cj["loglik"].get<double>();
                }
                if (cj.contains("prob")) {
                    if (!cj["prob"].is_number()) {
                        fail("choice: 'prob' is not a number");
                        break;
                    }
                    choice.prob = cj["prob"].get<double>();
                }
                if (cj.contains("token_count")) {
                    if (!cj["token_count"].is_number_integer()) {
                        fail("choice: 'token_count' is not an integer");
                        break;
                    }
                    choice.token_count = cj["token_count"].get<int>();
                }
                record.choices.push_back(std::move(choice));
            }
        }
        if (bad) continue;

        try {
            validate_record(record);
        } catch (const std::domain_error& e) {
            error(line_no, e.what());
            continue;
        }

        if (j.contains("meta")) {
            if (!j["meta"].is_object()) {
                error(line_no, "field 'meta' is not an object");
                continue;
            }
            bool bad_meta = false;
            for (const auto& item : j["meta"].items()) {
                if (!item.value().is_string()) {
                    error(line_no, "meta value for '" + item.key() + "' is not a string");
                    bad_meta = true;
                    break;
                }
                record.meta[item.key()] = item.value().get<std::string>();
            }
            if (bad_meta) continue;
        }

        if (!seen_keys.insert(record.key()).second) {
            error(line_no, "duplicate record key (" + record.benchmark + ", " + record.sample_id +
                               ", " + record.model + ")");
            continue;
        }

        if (auto lint = lint_idk_length(record)) warning(line_no, *lint);
        result.records.push_back(std::move(record));
    }
    return result;
}

// One JSONL line, fields in wire order.
inline std::string serialize_record(const AnswerRecord& r) {
    nlohmann::ordered_json j;
    j["benchmark"] = r.benchmark;
    j["sample_id"] = r.sample_id;
    j["model"] = r.model;
    j["choices"] = nlohmann::ordered_json::array();
    for (const Choice& c : r.choices) {
        nlohmann::ordered_json cj;
        cj["text"] = c.text;
        cj["role"] = to_string(c.role);
        if (c.loglik) {
            cj["loglik"] = *c.loglik;
            cj["token_count"] = c.token_count;
        } else if (c.prob) {
            cj["prob"] = *c.prob;
        }
        j["choices"].push_back(std::move(cj));
    }
    if (!r.meta.empty()) {
        j["meta"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : r.meta) j["meta"][k] = v;
    }
    return j.dump();
}

// Convert a record into per-candidate probabilities.
//
// softmax mode: each choice scores loglik / token_count (length
// normalization), then a max-subtracted softmax over the candidate set;
// masses sum to 1. absolute mode: probabilities pass through; their sum may
// fall short of 1 but must not exceed it.
inline Distribution to_distribution(const AnswerRecord& r, NormalizationMode mode) {
    if (r.choices.empty()) throw std::domain_error("record has no choices");
    Distribution d;
    d.reserve(r.choices.size());
    if (mode == NormalizationMode::softmax_over_answers) {
        std::vector<double> scores;
        scores.reserve(r.choices.size());
        double max_score = -std::numeric_limits<double>::infinity();
        for (const Choice& c : r.choices) {
            if (!c.loglik) {
                throw std::domain_error("softmax mode requires loglik on every choice");
            }
            if (!std::isfinite(*c.loglik)) throw std::domain_error("loglik is not finite");
            if (c.token_count < 1) throw std::domain_error("token_count must be >= 1");
            const double s = *c.loglik / static_cast<double>(c.token_count);
            scores.push_back(s);
            max_score = std::max(max_score, s);
        }
        double denom = 0.0;
        for (double s : scores) denom += std::exp(s - max_score);
        for (std::size_t i = 0; i < scores.size(); ++i) {
            d.push_back({r.choices[i].role, std::exp(scores[i] - max_score) / denom});
        }
    } else {
        double total = 0.0;
        for (const Choice& c : r.choices) {
            if (!c.prob) throw std::domain_error("absolute mode requires prob on every choice");
            if (!std::isfinite(*c.prob) || *c.prob < 0.0) {
                throw std::domain_error("prob must be a finite non-negative number");
            }
            total += *c.prob;
            d.push_back({c.role, *c.prob});
        }
        if (total > 1.0 + kMassSlack) {
            throw std::domain_error("absolute probabilities sum to " + std::to_string(total) +
                                    " > 1");
        }
    }
    return d;
}

}  // namespace dcs
