// SPDX-License-Identifier: Apache-2.0
//
// dcs: distribution-aware correctness scoring over answer-probability
// records. Subcommands: score, aggregate, compare, thresholds, verify,
// simulate. Exit codes: 0 success, 1 data error, 2 usage error,
// 3 verification failure.

#include <atomic>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcs/record.hpp"
#include "dcs/report.hpp"
#include "dcs/simplex.hpp"
#include "dcs/stats.hpp"
#include "dcs/synth.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kDataError = 1;
constexpr int kUsageError = 2;
constexpr int kVerifyFailure = 3;

struct GlobalOpts {
    double lc = 1.0;
    double lw = 1.0;
    double threshold = 0.0;
    bool threshold_set = false;
    std::string norm = "softmax";
    double scale = 100.0;
    std::string format;  // empty: per-command default
    std::uint64_t seed = 0;
    bool strict = false;
    bool skip_bad = false;
    int jobs = 1;
};

dcs::Loadings effective_loadings(const GlobalOpts& g) {
    if (g.threshold_set) return dcs::loading_for_threshold(g.threshold);
    return {g.lc, g.lw};
}

dcs::OutputFormat parse_format(const GlobalOpts& g, dcs::OutputFormat fallback) {
    if (g.format.empty()) return fallback;
    return *dcs::format_from_string(g.format);  // choices enforced by CLI11
}

bool write_output(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        return true;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot open output file '" << path << "'\n";
        return false;
    }
    out << content;
    return out.good();
}

std::optional<std::string> read_input(const std::string& path) {
    if (path == "-") {
        return std::string((std::istreambuf_iterator<char>(std::cin)),
                           std::istreambuf_iterator<char>());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void print_issues(const dcs::ParseResult& parsed) {
    for (const auto& issue : parsed.issues) {
        const char* tag =
            issue.severity == dcs::ParseIssue::Severity::error ? "error" : "warning";
        std::cerr << tag << ": line " << issue.line << ": " << issue.message << "\n";
    }
}

// Scores records in input order, optionally across threads; output order is
// independent of the thread count.
int score_records(const std::vector<dcs::AnswerRecord>& records, const dcs::Loadings& loadings,
                  dcs::NormalizationMode mode, int jobs, bool skip_bad,
                  std::vector<dcs::ScoreRow>& rows_out) {
    const std::size_t n = records.size();
    std::vector<std::optional<dcs::ScoreRow>> slots(n);
    std::vector<std::string> errors(n);
    const int workers = std::min<int>(std::max(jobs, 1), static_cast<int>(n));
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                const dcs::Distribution dist = dcs::to_distribution(records[i], mode);
                dcs::ScoreRow row;
                row.benchmark = records[i].benchmark;
                row.sample_id = records[i].sample_id;
                row.model = records[i].model;
                row.scores = dcs::score_sample(dist, loadings);
                slots[i] = std::move(row);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    bool failed = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (!errors[i].empty()) {
            std::cerr << (skip_bad ? "warning" : "error") << ": record (" << records[i].benchmark
                      << ", " << records[i].sample_id << ", " << records[i].model
                      << "): " << errors[i] << "\n";
            failed = true;
        } else if (slots[i]) {
            rows_out.push_back(std::move(*slots[i]));
        }
    }
    if (failed && !skip_bad) return kDataError;
    return kOk;
}

int cmd_score(const GlobalOpts& g, const std::string& input, const std::string& output) {
    const auto content = read_input(input);
    if (!content) {
        std::cerr << "cannot open input file '" << input << "'\n";
        return kDataError;
    }
    std::istringstream stream(*content);
    const dcs::ParseResult parsed = dcs::parse_records(stream, {g.strict});
    print_issues(parsed);
    if (!parsed.ok() && !g.skip_bad) return kDataError;
    if (parsed.records.empty()) {
        std::cerr << "no records\n";
        return kUsageError;
    }

    const dcs::Loadings loadings = effective_loadings(g);
    const auto mode = *dcs::norm_mode_from_string(g.norm);
    std::vector<dcs::ScoreRow> rows;
    rows.reserve(parsed.records.size());
    const int rc = score_records(parsed.records, loadings, mode, g.jobs, g.skip_bad, rows);
    if (rc != kOk) return rc;
    if (rows.empty()) {
        std::cerr << "no records\n";
        return kUsageError;
    }

    const std::string text =
        dcs::format_scores(rows, {loadings, mode}, parse_format(g, dcs::OutputFormat::csv));
    return write_output(output, text) ? kOk : kDataError;
}

std::optional<dcs::ScoreFile> load_score_file(const std::string& input) {
    const auto content = read_input(input);
    if (!content) {
        std::cerr << "cannot open input file '" << input << "'\n";
        return std::nullopt;
    }
    std::istringstream stream(*content);
    try {
        return dcs::parse_score_file(stream);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return std::nullopt;
    }
}

int cmd_aggregate(const GlobalOpts& g, const std::string& input, const std::string& metric,
                  const std::string& output) {
    std::optional<dcs::MetricKind> only;
    if (metric != "all") {
        const auto m = dcs::metric_from_string(metric);
        if (!m) {
            std::cerr << "unknown metric '" << metric
                      << "' (valid: dcs, accuracy, cweighted, ternary, all)\n";
            return kUsageError;
        }
        only = *m;
    }
    const auto file = load_score_file(input);
    if (!file) return kDataError;
    if (file->rows.empty()) {
        std::cerr << "no records\n";
        return kUsageError;
    }
    const dcs::AggregateResult agg = dcs::aggregate(file->rows);
    const std::string text =
        dcs::format_aggregate(agg, parse_format(g, dcs::OutputFormat::csv), g.scale, only);
    return write_output(output, text) ? kOk : kDataError;
}

int cmd_compare(const GlobalOpts& g, const std::string& input, const std::string& metric_a,
                const std::string& metric_b, const std::string& model_a,
                const std::string& model_b, const std::string& metric,
                const std::string& benchmark_filter, const std::string& model_filter,
                bool student, const std::string& output) {
    const bool metric_mode = !metric_a.empty() || !metric_b.empty();
    const bool model_mode = !model_a.empty() || !model_b.empty();
    if (metric_mode == model_mode) {
        std::cerr << "choose exactly one comparison: --metric-a/--metric-b or "
                     "--model-a/--model-b\n";
        return kUsageError;
    }
    if (metric_mode && (metric_a.empty() || metric_b.empty())) {
        std::cerr << "both --metric-a and --metric-b are required\n";
        return kUsageError;
    }
    if (model_mode && (model_a.empty() || model_b.empty())) {
        std::cerr << "both --model-a and --model-b are required\n";
        return kUsageError;
    }

    const auto file = load_score_file(input);
    if (!file) return kDataError;

    auto filtered = [&](const dcs::ScoreRow& row) {
        if (!benchmark_filter.empty() && row.benchmark != benchmark_filter) return false;
        if (!model_filter.empty() && row.model != model_filter) return false;
        return true;
    };

    std::vector<double> a, b;
    std::string label_a, label_b;
    if (metric_mode) {
        const auto ma = dcs::metric_from_string(metric_a);
        const auto mb = dcs::metric_from_string(metric_b);
        if (!ma || !mb) {
            std::cerr << "unknown metric '" << (ma ? metric_b : metric_a)
                      << "' (valid: dcs, accuracy, cweighted, ternary)\n";
            return kUsageError;
        }
        for (const auto& row : file->rows) {
            if (!filtered(row)) continue;
            a.push_back(row.metric(*ma));
            b.push_back(row.metric(*mb));
        }
        label_a = metric_a;
        label_b = metric_b;
    } else {
        const auto m = dcs::metric_from_string(metric);
        if (!m) {
            std::cerr << "unknown metric '" << metric
                      << "' (valid: dcs, accuracy, cweighted, ternary)\n";
            return kUsageError;
        }
        for (const auto& row : file->rows) {
            if (!benchmark_filter.empty() && row.benchmark != benchmark_filter) continue;
            if (row.model == model_a) a.push_back(row.metric(*m));
            if (row.model == model_b) b.push_back(row.metric(*m));
        }
        label_a = model_a + "/" + metric;
        label_b = model_b + "/" + metric;
    }

    if (a.empty() || b.empty()) {
        std::cerr << "missing population: '" << (a.empty() ? label_a : label_b)
                  << "' matched no samples\n";
        return kDataError;
    }
    try {
        const dcs::TTestResult r =
            student ? dcs::student_ttest(a, b) : dcs::welch_ttest(a, b);
        const std::string text = dcs::format_ttest(r, label_a, label_b, g.scale,
                                                   parse_format(g, dcs::OutputFormat::markdown));
        return write_output(output, text) ? kOk : kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    }
}

int cmd_thresholds(const GlobalOpts& g, double lc_min, double lc_max, double lw_min,
                   double lw_max, int resolution, const std::string& output) {
    dcs::ThresholdTable table;
    try {
        table.grid = dcs::sweep_thresholds({lc_min, lc_max}, {lw_min, lw_max}, resolution);
        table.reference = dcs::reference_threshold_table();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    }
    const std::string text =
        dcs::format_thresholds(table, parse_format(g, dcs::OutputFormat::csv));
    return write_output(output, text) ? kOk : kDataError;
}

int cmd_simulate(const GlobalOpts& g, double confidence, int k, double grid_step,
                 const std::string& output) {
    dcs::AgentReport r;
    try {
        r = dcs::simulate_agent({k, confidence, effective_loadings(g)}, grid_step);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    }
    std::ostringstream out;
    if (parse_format(g, dcs::OutputFormat::markdown) == dcs::OutputFormat::json) {
        nlohmann::ordered_json j;
        j["k"] = k;
        j["confidence"] = confidence;
        j["guess_score"] = r.guess_score;
        j["abstain_score"] = r.abstain_score;
        j["optimal_action"] = r.guess_is_optimal ? "guess" : "abstain";
        j["empirical_threshold"] = r.empirical_threshold;
        j["closed_form_threshold"] = r.closed_form_threshold;
        j["grid_step"] = r.grid_step;
        out << j.dump(2) << '\n';
    } else {
        out << "guess_score=" << dcs::format_double(r.guess_score)
            << " abstain_score=" << dcs::format_double(r.abstain_score)
            << " optimal_action=" << (r.guess_is_optimal ? "guess" : "abstain")
            << " empirical_threshold=" << dcs::format_double(r.empirical_threshold)
            << " closed_form_threshold=" << dcs::format_double(r.closed_form_threshold)
            << " grid_step=" << dcs::format_double(r.grid_step) << "\n";
    }
    return write_output(output, out.str()) ? kOk : kDataError;
}

struct VerifySummary {
    std::vector<std::pair<std::string, nlohmann::ordered_json>> suites;
    bool all_pass = true;

    void add(const std::string& name, nlohmann::ordered_json j, bool pass) {
        j["pass"] = pass;
        suites.emplace_back(name, std::move(j));
        all_pass = all_pass && pass;
    }
};

void run_verify_bounds(VerifySummary& summary, double step) {
    const dcs::BoundsReport r = dcs::verify_bounds(step);
    nlohmann::ordered_json j;
    j["step"] = r.step;
    j["points"] = r.points;
    j["min"] = r.min;
    j["max"] = r.max;
    j["argmin"] = {r.argmin.p_c, r.argmin.p_w, r.argmin.p_idk};
    j["argmax"] = {r.argmax.p_c, r.argmax.p_w, r.argmax.p_idk};
    j["violations"] = r.violations;
    j["vertices"] = {r.vertex_origin, r.vertex_correct, r.vertex_incorrect, r.vertex_idk};
    summary.add("bounds", std::move(j), r.pass());
}

void run_verify_hedging(VerifySummary& summary, std::size_t trials, std::uint64_t seed) {
    const dcs::HedgingReport r = dcs::verify_hedging_preference(trials, seed);
    nlohmann::ordered_json j;
    j["trials"] = r.trials;
    j["min_delta"] = r.min_delta;
    j["max_closed_form_err"] = r.max_closed_form_err;
    j["sign_violations"] = r.sign_violations;
    summary.add("hedging", std::move(j), r.pass());
}

void run_verify_threshold(VerifySummary& summary, double grid_step) {
    const dcs::ThresholdSuiteReport r = dcs::verify_threshold(grid_step);
    nlohmann::ordered_json j;
    j["grid_step"] = r.grid_step;
    j["max_abs_dev"] = r.max_abs_dev;
    j["default_exact"] = r.default_exact;
    j["table_roundtrip_exact"] = r.table_roundtrip_exact;
    summary.add("threshold", std::move(j), r.pass());
}

void run_verify_infobound(VerifySummary& summary, const std::vector<int>& ks, std::size_t trials,
                          std::uint64_t seed) {
    bool pass = true;
    nlohmann::ordered_json j;
    j["trials"] = trials;
    j["runs"] = nlohmann::ordered_json::array();
    for (int k : ks) {
        for (double info : {0.0, 1.0}) {
            const dcs::InfoBoundReport r = dcs::run_info_bound({k, trials, info}, seed);
            const bool run_pass = info == 0.0 ? r.pass_zero_info() : r.pass_full_info();
            nlohmann::ordered_json rj;
            rj["k"] = r.k;
            rj["info_level"] = r.info_level;
            rj["ceiling"] = r.ceiling;
            rj["nonabstain_mean"] = r.nonabstain_mean;
            rj["nonabstain_se"] = r.nonabstain_se;
            rj["policy_mean"] = r.policy_mean;
            rj["policy_se"] = r.policy_se;
            rj["abstain_score"] = r.abstain_score;
            rj["pass"] = run_pass;
            j["runs"].push_back(std::move(rj));
            pass = pass && run_pass;
        }
    }
    summary.add("infobound", std::move(j), pass);
}

void flatten(const nlohmann::ordered_json& j, const std::string& prefix, std::ostream& out) {
    for (const auto& item : j.items()) {
        const std::string key = prefix.empty() ? item.key() : prefix + "." + item.key();
        if (item.value().is_object()) {
            flatten(item.value(), key, out);
        } else {
            out << ' ' << key << '=' << item.value().dump();
        }
    }
}

int cmd_verify(const GlobalOpts& g, const std::string& suite, double step, std::size_t trials,
               int k, double grid_step, const std::string& output) {
    static const std::vector<std::string> suites = {"bounds", "hedging", "threshold", "infobound",
                                                    "all"};
    if (std::find(suites.begin(), suites.end(), suite) == suites.end()) {
        std::cerr << "unknown suite '" << suite
                  << "' (valid: bounds, hedging, threshold, infobound, all)\n";
        return kUsageError;
    }
    VerifySummary summary;
    try {
        if (suite == "bounds" || suite == "all") run_verify_bounds(summary, step);
        if (suite == "hedging" || suite == "all") run_verify_hedging(summary, trials, g.seed);
        if (suite == "threshold" || suite == "all") run_verify_threshold(summary, grid_step);
        if (suite == "infobound" || suite == "all") {
            const std::vector<int> ks = suite == "all" ? std::vector<int>{2, 3, 4, 10}
                                                       : std::vector<int>{k};
            run_verify_infobound(summary, ks, trials, g.seed);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    }

    std::ostringstream out;
    if (parse_format(g, dcs::OutputFormat::markdown) == dcs::OutputFormat::json) {
        nlohmann::ordered_json j;
        for (auto& [name, sj] : summary.suites) j[name] = std::move(sj);
        j["pass"] = summary.all_pass;
        out << j.dump(2) << '\n';
    } else {
        for (const auto& [name, sj] : summary.suites) {
            out << "suite=" << name;
            flatten(sj, "", out);
            out << '\n';
        }
        out << "verify=" << (summary.all_pass ? "PASS" : "FAIL") << '\n';
    }
    if (!write_output(output, out.str())) return kDataError;
    return summary.all_pass ? kOk : kVerifyFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distribution-aware correctness scoring over answer-probability records"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.set_config("--config", "", "key=value config file; flags win on conflict")
        ->envname("DCS_CONFIG");
    auto* opt_lc = app.add_option("--lc", g.lc, "reward weight on correct mass");
    auto* opt_lw = app.add_option("--lw", g.lw, "penalty weight on incorrect mass");
    auto* opt_threshold =
        app.add_option("--threshold", g.threshold,
                       "desired guessing threshold in (0,1); sets loadings (1, t/(1-t))");
    opt_threshold->excludes(opt_lc)->excludes(opt_lw);
    app.add_option("--norm-mode", g.norm, "probability construction")
        ->check(CLI::IsMember({"softmax", "absolute"}))
        ->capture_default_str();
    app.add_option("--scale", g.scale, "presentation scale for reported scores")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--format", g.format, "output format")
        ->check(CLI::IsMember({"csv", "markdown", "json"}));
    app.add_option("--seed", g.seed, "seed for stochastic commands")->capture_default_str();
    app.add_flag("--strict", g.strict, "reject unknown record fields");
    app.add_flag("--skip-bad", g.skip_bad, "skip bad lines/records instead of failing");
    app.add_option("-j,--jobs", g.jobs, "worker threads for scoring")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    std::string input, output = "-";
    std::string metric = "all";
    std::string metric_a, metric_b, model_a, model_b, benchmark_filter, model_filter;
    std::string cmp_metric = "dcs";
    bool student = false;
    double lc_min = 0.25, lc_max = 4.0, lw_min = 0.25, lw_max = 4.0;
    int resolution = 16;
    double confidence = 0.5;
    int k = 4;
    double step = 0.01;
    double grid_step = 1e-3;
    std::size_t trials = 10000;
    std::string suite = "all";

    auto* score = app.add_subcommand("score", "score records into per-sample metric rows");
    score->fallthrough();
    score->add_option("input", input, "record file in the wire format, or - for stdin")
        ->required();
    score->add_option("-o,--output", output, "output path, - for stdout");

    auto* agg = app.add_subcommand("aggregate", "aggregate a score file into a table");
    agg->fallthrough();
    agg->add_option("input", input, "score file from `dcs score`, or - for stdin")->required();
    agg->add_option("--metric", metric, "dcs, accuracy, cweighted, ternary, or all");
    agg->add_option("-o,--output", output, "output path, - for stdout");

    auto* cmp = app.add_subcommand("compare", "unpaired t-test between two populations");
    cmp->fallthrough();
    cmp->add_option("input", input, "score file from `dcs score`, or - for stdin")->required();
    cmp->add_option("--metric-a", metric_a, "first metric (metric comparison)");
    cmp->add_option("--metric-b", metric_b, "second metric (metric comparison)");
    cmp->add_option("--model-a", model_a, "first model (model comparison)");
    cmp->add_option("--model-b", model_b, "second model (model comparison)");
    cmp->add_option("--metric", cmp_metric, "metric for model comparison");
    cmp->add_option("--benchmark", benchmark_filter, "restrict to one benchmark");
    cmp->add_option("--model", model_filter, "restrict metric comparison to one model");
    cmp->add_flag("--student", student, "pooled-variance test instead of Welch");
    cmp->add_option("-o,--output", output, "output path, - for stdout");

    auto* thr = app.add_subcommand("thresholds", "guessing-threshold surface as plot data");
    thr->fallthrough();
    thr->add_option("--lc-min", lc_min, "")->capture_default_str();
    thr->add_option("--lc-max", lc_max, "")->capture_default_str();
    thr->add_option("--lw-min", lw_min, "")->capture_default_str();
    thr->add_option("--lw-max", lw_max, "")->capture_default_str();
    thr->add_option("--resolution", resolution, "grid points per axis")->capture_default_str();
    thr->add_option("-o,--output", output, "output path, - for stdout");

    auto* ver = app.add_subcommand("verify", "run the property suites");
    ver->fallthrough();
    ver->add_option("suite", suite, "bounds, hedging, threshold, infobound, or all");
    ver->add_option("--step", step, "lattice step for bounds")->capture_default_str();
    ver->add_option("--trials", trials, "trials for stochastic suites")->capture_default_str();
    ver->add_option("--k", k, "answer-set size for infobound")->capture_default_str();
    ver->add_option("--grid-step", grid_step, "confidence grid step for threshold")
        ->capture_default_str();
    ver->add_option("-o,--output", output, "output path, - for stdout");

    auto* sim = app.add_subcommand("simulate", "rational guess-or-abstain agent");
    sim->fallthrough();
    sim->add_option("--confidence", confidence, "agent confidence in (0,1]")->required();
    sim->add_option("--k", k, "answer-set size")->capture_default_str();
    sim->add_option("--grid-step", grid_step, "confidence grid step")->capture_default_str();
    sim->add_option("-o,--output", output, "output path, - for stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsageError;
    }
    g.threshold_set = opt_threshold->count() > 0;
    if (g.threshold_set && !(g.threshold > 0.0 && g.threshold < 1.0)) {
        std::cerr << "--threshold must lie strictly in (0, 1)\n";
        return kUsageError;
    }

    try {
        if (score->parsed()) return cmd_score(g, input, output);
        if (agg->parsed()) return cmd_aggregate(g, input, metric, output);
        if (cmp->parsed()) {
            return cmd_compare(g, input, metric_a, metric_b, model_a, model_b, cmp_metric,
                               benchmark_filter, model_filter, student, output);
        }
        if (thr->parsed()) {
            return cmd_thresholds(g, lc_min, lc_max, lw_min, lw_max, resolution, output);
        }
        if (ver->parsed()) return cmd_verify(g, suite, step, trials, k, grid_step, output);
        if (sim->parsed()) return cmd_simulate(g, confidence, k, grid_step, output);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    }
    return kUsageError;
}
