// SPDX-License-Identifier: Apache-2.0
//
// Table and plot-data rendering: per-sample score files, aggregate tables,
// threshold surfaces, and t-test reports in csv, markdown, or json. Numbers
// print in shortest round-trip form so outputs are byte-stable and re-parse
// to the exact values.

#pragma once

#include <algorithm>
#include <charconv>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcs/record.hpp"
#include "dcs/simplex.hpp"
#include "dcs/stats.hpp"

namespace dcs {

enum class OutputFormat { csv, markdown, json };

inline const char* to_string(OutputFormat f) {
    switch (f) {
        case OutputFormat::csv: return "csv";
        case OutputFormat::markdown: return "markdown";
        case OutputFormat::json: return "json";
    }
    return "?";
}

inline std::optional<OutputFormat> format_from_string(std::string_view s) {
    if (s == "csv") return OutputFormat::csv;
    if (s == "markdown") return OutputFormat::markdown;
    if (s == "json") return OutputFormat::json;
    return std::nullopt;
}

// Shortest decimal form that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("not a number: '" + std::string(s) + "'");
    }
    return v;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Per-sample score files
// ---------------------------------------------------------------------------

struct ScoreFileHeader {
    Loadings loadings;
    NormalizationMode norm = NormalizationMode::softmax_over_answers;
};

struct ScoreFile {
    ScoreFileHeader header;
    std::vector<ScoreRow> rows;
};

inline std::string format_scores(const std::vector<ScoreRow>& rows, const ScoreFileHeader& h,
                                 OutputFormat format) {
    std::ostringstream out;
    switch (format) {
        case OutputFormat::csv: {
            out << "# dcs-scores v1\n";
            out << "# lc=" << format_double(h.loadings.l_c) << " lw="
                << format_double(h.loadings.l_w) << " norm=" << to_string(h.norm) << "\n";
            out << "benchmark,sample_id,model,dcs,accuracy,cweighted,ternary\n";
            for (const ScoreRow& r : rows) {
                out << detail::csv_field(r.benchmark) << ',' << detail::csv_field(r.sample_id)
                    << ',' << detail::csv_field(r.model) << ',' << format_double(r.scores.dcs)
                    << ',' << r.scores.accuracy << ',' << format_double(r.scores.cweighted) << ','
                    << r.scores.ternary << '\n';
            }
            break;
        }
        case OutputFormat::json: {
            nlohmann::ordered_json j;
            j["lc"] = h.loadings.l_c;
            j["lw"] = h.loadings.l_w;
            j["norm"] = to_string(h.norm);
            j["scores"] = nlohmann::ordered_json::array();
            for (const ScoreRow& r : rows) {
                nlohmann::ordered_json rj;
                rj["benchmark"] = r.benchmark;
                rj["sample_id"] = r.sample_id;
                rj["model"] = r.model;
                rj["dcs"] = r.scores.dcs;
                rj["accuracy"] = r.scores.accuracy;
                rj["cweighted"] = r.scores.cweighted;
                rj["ternary"] = r.scores.ternary;
                j["scores"].push_back(std::move(rj));
            }
            out << j.dump(2) << '\n';
            break;
        }
        case OutputFormat::markdown: {
            out << "lc: " << format_double(h.loadings.l_c) << ", lw: "
                << format_double(h.loadings.l_w) << ", norm: " << to_string(h.norm) << "\n\n";
            out << "| benchmark | sample_id | model | dcs | accuracy | cweighted | ternary |\n";
            out << "|---|---|---|---|---|---|---|\n";
            for (const ScoreRow& r : rows) {
                out << "| " << r.benchmark << " | " << r.sample_id << " | " << r.model << " | "
                    << format_double(r.scores.dcs) << " | " << r.scores.accuracy << " | "
                    << format_double(r.scores.cweighted) << " | " << r.scores.ternary << " |\n";
            }
            break;
        }
    }
    return out.str();
}

// Reads score files in either the csv or json form emitted above; the format
// is detected from the first non-blank character.
inline ScoreFile parse_score_file(std::istream& in) {
    ScoreFile file;
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto first = content.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return file;

    if (content[first] == '{') {
        const auto j = nlohmann::json::parse(content);
        file.header.loadings.l_c = j.value("lc", 1.0);
        file.header.loadings.l_w = j.value("lw", 1.0);
        if (j.contains("norm")) {
            if (auto m = norm_mode_from_string(j["norm"].get<std::string>())) {
                file.header.norm = *m;
            }
        }
        for (const auto& rj : j.at("scores")) {
            ScoreRow row;
            row.benchmark = rj.at("benchmark").get<std::string>();
            row.sample_id = rj.at("sample_id").get<std::string>();
            row.model = rj.at("model").get<std::string>();
            row.scores.dcs = rj.at("dcs").get<double>();
            row.scores.accuracy = rj.at("accuracy").get<int>();
            row.scores.cweighted = rj.at("cweighted").get<double>();
            row.scores.ternary = rj.at("ternary").get<int>();
            file.rows.push_back(std::move(row));
        }
        return file;
    }

    std::istringstream lines(content);
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string tok;
            while (meta >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = tok.substr(0, eq);
                const std::string value = tok.substr(eq + 1);
                if (key == "lc") file.header.loadings.l_c = parse_double(value);
                if (key == "lw") file.header.loadings.l_w = parse_double(value);
                if (key == "norm") {
                    if (auto m = norm_mode_from_string(value)) file.header.norm = *m;
                }
            }
            continue;
        }
        const auto fields = detail::split_csv_line(line);
        if (!header_seen) {
            if (fields.size() != 7 || fields[0] != "benchmark") {
                throw std::runtime_error("score file line " + std::to_string(line_no) +
                                         ": unexpected header");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 7) {
            throw std::runtime_error("score file line " + std::to_string(line_no) +
                                     ": expected 7 fields, got " + std::to_string(fields.size()));
        }
        ScoreRow row;
        row.benchmark = fields[0];
        row.sample_id = fields[1];
        row.model = fields[2];
        row.scores.dcs = parse_double(fields[3]);
        row.scores.accuracy = static_cast<int>(parse_double(fields[4]));
        row.scores.cweighted = parse_double(fields[5]);
        row.scores.ternary = static_cast<int>(parse_double(fields[6]));
        file.rows.push_back(std::move(row));
    }
    return file;
}

// ---------------------------------------------------------------------------
// Aggregate tables
// ---------------------------------------------------------------------------

// Renders cells and Average rows with means, sd and se multiplied by scale.
// Pass a metric to restrict the output, or nullopt for all four.
inline std::string format_aggregate(const AggregateResult& agg, OutputFormat format, double scale,
                                    std::optional<MetricKind> only = std::nullopt) {
    auto keep = [&](const AggregateCell& c) { return !only || c.metric == *only; };
    std::ostringstream out;
    switch (format) {
        case OutputFormat::csv: {
            out << "model,benchmark,metric,n,mean,se,sd\n";
            auto emit = [&](const AggregateCell& c) {
                if (!keep(c)) return;
                out << detail::csv_field(c.model) << ',' << detail::csv_field(c.benchmark) << ','
                    << to_string(c.metric) << ',' << c.n << ',' << format_double(scale * c.mean)
                    << ',' << format_double(scale * c.se) << ',' << format_double(scale * c.sd)
                    << '\n';
            };
            for (const auto& c : agg.cells) emit(c);
            for (const auto& c : agg.averages) emit(c);
            break;
        }
        case OutputFormat::json: {
            nlohmann::ordered_json j;
            j["scale"] = scale;
            auto cell_json = [&](const AggregateCell& c) {
                nlohmann::ordered_json cj;
                cj["model"] = c.model;
                cj["benchmark"] = c.benchmark;
                cj["metric"] = to_string(c.metric);
                cj["n"] = c.n;
                cj["mean"] = scale * c.mean;
                cj["se"] = scale * c.se;
                cj["sd"] = scale * c.sd;
                return cj;
            };
            j["cells"] = nlohmann::ordered_json::array();
            for (const auto& c : agg.cells) {
                if (keep(c)) j["cells"].push_back(cell_json(c));
            }
            j["averages"] = nlohmann::ordered_json::array();
            for (const auto& c : agg.averages) {
                if (keep(c)) j["averages"].push_back(cell_json(c));
            }
            out << j.dump(2) << '\n';
            break;
        }
        case OutputFormat::markdown: {
            // One wide table per metric: benchmarks down, models across.
            std::vector<MetricKind> metrics;
            if (only) {
                metrics.push_back(*only);
            } else {
                metrics.assign(kAllMetrics.begin(), kAllMetrics.end());
            }
            std::vector<std::string> models;
            std::vector<std::string> benchmarks;
            for (const auto& c : agg.cells) {
                if (std::find(models.begin(), models.end(), c.model) == models.end()) {
                    models.push_back(c.model);
                }
                if (std::find(benchmarks.begin(), benchmarks.end(), c.benchmark) ==
                    benchmarks.end()) {
                    benchmarks.push_back(c.benchmark);
                }
            }
            std::sort(models.begin(), models.end());
            std::sort(benchmarks.begin(), benchmarks.end());
            auto find_cell = [&](const std::vector<AggregateCell>& cells, const std::string& model,
                                 const std::string& benchmark,
                                 MetricKind m) -> const AggregateCell* {
                for (const auto& c : cells) {
                    if (c.model == model && c.benchmark == benchmark && c.metric == m) return &c;
                }
                return nullptr;
            };
            for (MetricKind m : metrics) {
                out << "### " << to_string(m) << " (x" << format_double(scale) << ")\n\n";
                out << "| benchmark |";
                for (const auto& model : models) out << ' ' << model << " |";
                out << "\n|---|";
                for (std::size_t i = 0; i < models.size(); ++i) out << "---|";
                out << '\n';
                for (const auto& benchmark : benchmarks) {
                    out << "| " << benchmark << " |";
                    for (const auto& model : models) {
                        if (const auto* c = find_cell(agg.cells, model, benchmark, m)) {
                            out << ' ' << format_double(scale * c->mean) << " ± "
                                << format_double(scale * c->se) << " |";
                        } else {
                            out << " — |";
                        }
                    }
                    out << '\n';
                }
                out << "| Average |";
                for (const auto& model : models) {
                    if (const auto* c = find_cell(agg.averages, model, "Average", m)) {
                        out << ' ' << format_double(scale * c->mean) << " |";
                    } else {
                        out << " — |";
                    }
                }
                out << "\n\n";
            }
            break;
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Threshold plot data
// ---------------------------------------------------------------------------

struct ThresholdTable {
    std::vector<ThresholdCell> grid;
    std::vector<ThresholdCell> reference;  // the named unit-l_c slice
};

inline std::string format_thresholds(const ThresholdTable& table, OutputFormat format) {
    std::ostringstream out;
    switch (format) {
        case OutputFormat::csv: {
            out << "lc,lw,threshold,slice\n";
            for (const auto& c : table.grid) {
                out << format_double(c.l_c) << ',' << format_double(c.l_w) << ','
                    << format_double(c.threshold) << ",grid\n";
            }
            for (const auto& c : table.reference) {
                out << format_double(c.l_c) << ',' << format_double(c.l_w) << ','
                    << format_double(c.threshold) << ",reference\n";
            }
            break;
        }
        case OutputFormat::json: {
            nlohmann::ordered_json j;
            auto cell_json = [](const ThresholdCell& c) {
                nlohmann::ordered_json cj;
                cj["lc"] = c.l_c;
                cj["lw"] = c.l_w;
                cj["threshold"] = c.threshold;
                return cj;
            };
            j["grid"] = nlohmann::ordered_json::array();
            for (const auto& c : table.grid) j["grid"].push_back(cell_json(c));
            j["reference"] = nlohmann::ordered_json::array();
            for (const auto& c : table.reference) j["reference"].push_back(cell_json(c));
            out << j.dump(2) << '\n';
            break;
        }
        case OutputFormat::markdown: {
            out << "| lc | lw | threshold | slice |\n|---|---|---|---|\n";
            for (const auto& c : table.grid) {
                out << "| " << format_double(c.l_c) << " | " << format_double(c.l_w) << " | "
                    << format_double(c.threshold) << " | grid |\n";
            }
            for (const auto& c : table.reference) {
                out << "| " << format_double(c.l_c) << " | " << format_double(c.l_w) << " | "
                    << format_double(c.threshold) << " | reference |\n";
            }
            break;
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// T-test reports
// ---------------------------------------------------------------------------

// Means and the CI are presented in scaled units; t, dof and p are
// scale-invariant.
inline std::string format_ttest(const TTestResult& r, const std::string& label_a,
                                const std::string& label_b, double scale, OutputFormat format,
                                double alpha = 0.05) {
    std::ostringstream out;
    switch (format) {
        case OutputFormat::json: {
            nlohmann::ordered_json j;
            j["a"] = label_a;
            j["b"] = label_b;
            j["n_a"] = r.n_a;
            j["n_b"] = r.n_b;
            j["mean_a"] = scale * r.mean_a;
            j["mean_b"] = scale * r.mean_b;
            j["t"] = r.t;
            j["dof"] = r.dof;
            j["p"] = r.p;
            j["ci_low"] = scale * r.ci_low;
            j["ci_high"] = scale * r.ci_high;
            j["alpha"] = alpha;
            j["significant"] = r.significant(alpha);
            out << j.dump(2) << '\n';
            break;
        }
        case OutputFormat::csv: {
            out << "a,b,n_a,n_b,mean_a,mean_b,t,dof,p,ci_low,ci_high,significant\n";
            out << detail::csv_field(label_a) << ',' << detail::csv_field(label_b) << ',' << r.n_a
                << ',' << r.n_b << ',' << format_double(scale * r.mean_a) << ','
                << format_double(scale * r.mean_b) << ',' << format_double(r.t) << ','
                << format_double(r.dof) << ',' << format_double(r.p) << ','
                << format_double(scale * r.ci_low) << ',' << format_double(scale * r.ci_high)
                << ',' << (r.significant(alpha) ? "yes" : "no") << '\n';
            break;
        }
        case OutputFormat::markdown: {
            out << "comparison: " << label_a << " vs " << label_b << "\n";
            out << "n: " << r.n_a << " vs " << r.n_b << "\n";
            out << "mean: " << format_double(scale * r.mean_a) << " vs "
                << format_double(scale * r.mean_b) << "\n";
            out << "t = " << format_double(r.t) << ", dof = " << format_double(r.dof)
                << ", p = " << format_double(r.p) << "\n";
            out << "95% CI of difference: [" << format_double(scale * r.ci_low) << ", "
                << format_double(scale * r.ci_high) << "]\n";
            out << "significant at alpha=" << format_double(alpha) << ": "
                << (r.significant(alpha) ? "yes" : "no") << "\n";
            break;
        }
    }
    return out.str();
}

}  // namespace dcs
