// dnscov - passive-DNS covert-channel detection engine, command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data error (unreadable or malformed
// inputs, corrupt models, insufficient training data), 3 internal error.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dnscov/dnscov.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

std::atomic<bool> g_interrupted{false};

void handle_signal(int) { g_interrupted.store(true); }

dnscov::LogFormat parse_format(const std::string& s) {
    const auto f = dnscov::log_format_from_string(s);
    if (!f) throw CLI::ValidationError("--format", "expected 'csv' or 'jsonl'");
    return *f;
}

std::vector<dnscov::DnsQueryRecord> read_sorted_log(const std::string& path,
                                                    dnscov::LogFormat format, bool quiet) {
    std::unique_ptr<std::istream> owned;
    std::istream* in = nullptr;
    if (path == "-") {
        in = &std::cin;
    } else {
        owned = std::make_unique<std::ifstream>(path);
        if (!*owned) throw dnscov::Error("cannot open log file: " + path);
        in = owned.get();
    }
    dnscov::LogReadResult result = dnscov::read_log(*in, format);
    if (result.parse_errors > 0 && !quiet) {
        std::cerr << "warning: skipped " << result.parse_errors << " malformed line(s)\n";
        for (const auto& msg : result.error_messages) std::cerr << "  " << msg << "\n";
    }
    std::stable_sort(result.records.begin(), result.records.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    return std::move(result.records);
}

void dump_features_csv(const std::string& path,
                       const std::vector<dnscov::FilteredRecord>& survivors) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw dnscov::Error("cannot open feature dump file: " + path);
    out << "qname,uppercase_ratio,digits_ratio,total_label_ratio,per_label_ratio\n";
    out.precision(17);
    for (const auto& fr : survivors) {
        const auto fv = dnscov::extract_features(fr.parsed);
        out << fr.record.qname << ',' << fv.uppercase_ratio << ',' << fv.digits_ratio << ','
            << fv.total_label_ratio << ',' << fv.per_label_ratio << '\n';
    }
}

/// Filter chain over a parsed batch, as the offline path sees it.
std::vector<dnscov::FilteredRecord> filtered_survivors(
    const std::vector<dnscov::DnsQueryRecord>& records, const dnscov::EngineConfig& cfg) {
    std::vector<dnscov::FilteredRecord> batch;
    for (const auto& rec : records) {
        try {
            batch.push_back({rec, dnscov::split_hostname(rec.qname, cfg.suffixes)});
        } catch (const dnscov::InvalidHostname&) {
        }
    }
    return dnscov::apply_filter_chain(batch, cfg.filters).survivors;
}

struct CommonOpts {
    std::string format = "csv";
    bool quiet = false;
};

int cmd_train(const std::string& history_path, const std::string& config_path,
              const std::string& out_path, const CommonOpts& common,
              const std::string& dump_path) {
    const dnscov::EngineConfig cfg = dnscov::load_engine_config(config_path);
    const auto records = read_sorted_log(history_path, parse_format(common.format), common.quiet);
    if (records.empty()) throw dnscov::Error("history is empty: " + history_path);

    const dnscov::TimestampMs start =
        dnscov::align_down(records.front().timestamp, cfg.pipeline.online_window);
    const dnscov::TimestampMs end = records.back().timestamp + 1;
    const auto outcome = dnscov::offline_run(records, start, end, cfg.suffixes, cfg.filters,
                                             cfg.analytics, cfg.pipeline, 0);
    dnscov::write_model_file(out_path, outcome.state->model, &outcome.state->baseline);

    if (!dump_path.empty()) dump_features_csv(dump_path, filtered_survivors(records, cfg));
    if (!common.quiet) {
        std::cerr << "trained on " << outcome.training_vectors << " vectors; best (gamma, nu) = ("
                  << outcome.grid.best_gamma << ", " << outcome.grid.best_nu << "); "
                  << outcome.state->model.support_vectors.size() << " support vectors\n";
        std::cerr << "baseline: " << outcome.state->baseline.built_from << "\n";
        std::cerr << "model written to " << out_path << "\n";
    }
    return kExitOk;
}

int cmd_classify(const std::string& model_path, const std::string& window_path,
                 const std::string& config_path, const std::string& out_path,
                 const CommonOpts& common, const std::string& dump_path) {
    const dnscov::EngineConfig cfg = dnscov::load_engine_config(config_path);
    const dnscov::LoadedModel loaded = dnscov::read_model_file(model_path);

    dnscov::EngineState state;
    state.model = loaded.model;
    state.baseline = loaded.baseline;
    state.generation = 1;

    const auto records = read_sorted_log(window_path, parse_format(common.format), common.quiet);
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw dnscov::Error("cannot open report file: " + out_path);

    std::uint64_t suspicious = 0, reported = 0, next_id = 0;
    std::size_t i = 0;
    while (i < records.size()) {
        const dnscov::TimestampMs window_start =
            dnscov::align_down(records[i].timestamp, cfg.pipeline.online_window);
        const dnscov::TimestampMs window_end = window_start + cfg.pipeline.online_window;
        std::vector<dnscov::DnsQueryRecord> window;
        const std::uint64_t first_id = next_id;
        while (i < records.size() && records[i].timestamp < window_end) {
            window.push_back(records[i]);
            ++i;
            ++next_id;
        }
        const auto result =
            dnscov::online_step(window, window_start, window_end, state, cfg.suffixes,
                                cfg.filters, cfg.analytics, cfg.profiles, first_id);
        for (const auto& r : result.reports) {
            out << dnscov::to_json(r).dump() << '\n';
            ++reported;
            if (r.verdict == dnscov::Verdict::Suspicious) ++suspicious;
        }
    }
    if (!dump_path.empty()) dump_features_csv(dump_path, filtered_survivors(records, cfg));
    if (!common.quiet)
        std::cerr << "assessed " << reported << " nonconforming queries, " << suspicious
                  << " suspicious; reports written to " << out_path << "\n";
    return kExitOk;
}

int cmd_run(const std::string& config_path, const std::string& input_path,
            const std::string& reports_path, const std::string& status_path,
            const CommonOpts& common) {
    const dnscov::EngineConfig cfg = dnscov::load_engine_config(config_path);
    const auto records = read_sorted_log(input_path, parse_format(common.format), common.quiet);

    std::ofstream reports(reports_path, std::ios::trunc);
    if (!reports) throw dnscov::Error("cannot open report file: " + reports_path);

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    dnscov::Engine engine(cfg.suffixes, cfg.filters, cfg.analytics, cfg.pipeline, cfg.profiles);
    const dnscov::RunSummary summary = engine.run(
        records, [&](const dnscov::AnomalyReport& r) { reports << dnscov::to_json(r).dump() << '\n'; },
        &g_interrupted);
    reports.flush();

    nlohmann::json status;
    status["generation"] = summary.generation;
    status["last_trained_at"] =
        summary.last_trained_at ? dnscov::format_rfc3339(summary.last_trained_at) : "";
    status["windows_processed"] = summary.windows_processed;
    status["collect_only_windows"] = summary.collect_only_windows;
    status["trainings"] = summary.trainings;
    status["training_failures"] = summary.training_failures;
    status["suspicious_reports"] = summary.suspicious_reports;
    status["counters"] = {{"total", summary.counters.total},
                          {"errored", summary.counters.errored},
                          {"filtered", summary.counters.filtered},
                          {"classified_normal", summary.counters.classified_normal},
                          {"reported", summary.counters.reported}};
    status["notes"] = summary.notes;
    if (status_path.empty()) {
        std::cout << status.dump(2) << "\n";
    } else {
        std::ofstream st(status_path, std::ios::trunc);
        if (!st) throw dnscov::Error("cannot open status file: " + status_path);
        st << status.dump(2) << "\n";
    }
    for (const auto& note : summary.notes)
        if (!common.quiet) std::cerr << note << "\n";
    return kExitOk;
}

int cmd_generate(const std::string& profile, double duration_s, std::uint64_t seed,
                 const std::string& out_path, const std::string& truth_path,
                 const std::string& start_s, const CommonOpts& common) {
    const auto start = dnscov::parse_rfc3339(start_s);
    if (!start) throw dnscov::Error("bad --start instant: " + start_s);
    const auto duration = static_cast<dnscov::DurationMs>(duration_s * 1000.0);

    std::vector<dnscov::DnsQueryRecord> records;
    std::vector<dnscov::GroundTruthEntry> truth;
    if (profile == "benign") {
        records = dnscov::generate_benign(dnscov::load_benign_profile(profile), duration, seed,
                                          *start);
    } else {
        const dnscov::ToolProfile tp = dnscov::load_tool_profile(profile);
        records = dnscov::generate_covert(tp, duration, seed, *start);
        truth.push_back({dnscov::to_lower(tp.domain), tp.name});
    }

    std::ofstream out(out_path, std::ios::trunc);
    if (!out) throw dnscov::Error("cannot open output file: " + out_path);
    dnscov::write_log(out, records, parse_format(common.format));

    if (!truth_path.empty()) {
        std::ofstream ts(truth_path, std::ios::trunc);
        if (!ts) throw dnscov::Error("cannot open truth file: " + truth_path);
        dnscov::write_ground_truth(ts, truth);
    }
    if (!common.quiet)
        std::cerr << "wrote " << records.size() << " records to " << out_path << "\n";
    return kExitOk;
}

int cmd_evaluate(const std::string& reports_path, const std::string& truth_path,
                 const std::string& queries_path, const std::string& json_path,
                 const CommonOpts& common) {
    std::ifstream truth_in(truth_path);
    if (!truth_in) throw dnscov::MissingGroundTruth("cannot open ground truth: " + truth_path);
    const auto truth = dnscov::read_ground_truth(truth_in);
    std::set<std::string> truth_domains;
    for (const auto& t : truth) truth_domains.insert(t.domain);

    std::ifstream reports_in(reports_path);
    if (!reports_in) throw dnscov::Error("cannot open reports: " + reports_path);
    std::vector<dnscov::AnomalyReport> reports;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(reports_in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw dnscov::ParseError("line", line_no, "report line is not JSON");
        reports.push_back(dnscov::report_from_json(j));
    }

    const auto records = read_sorted_log(queries_path, parse_format(common.format), common.quiet);
    const auto uniques = dnscov::unique_queries(records);

    const dnscov::ConfusionMatrix cm = dnscov::score(reports, truth_domains, uniques);
    const dnscov::Metrics m = dnscov::metrics(cm);
    const auto scenarios = dnscov::scenario_results(reports, truth, uniques);

    std::printf("confusion matrix over %llu unique queries\n",
                static_cast<unsigned long long>(cm.total()));
    std::printf("  %-18s %12s %12s\n", "", "actual-norm", "actual-mal");
    std::printf("  %-18s %12llu %12llu\n", "predicted-normal",
                static_cast<unsigned long long>(cm.tn), static_cast<unsigned long long>(cm.fn));
    std::printf("  %-18s %12llu %12llu\n", "predicted-malicious",
                static_cast<unsigned long long>(cm.fp), static_cast<unsigned long long>(cm.tp));
    auto show = [](const std::optional<double>& v) {
        return v ? std::to_string(*v) : std::string("undefined");
    };
    std::printf("recall    = %s\n", show(m.recall).c_str());
    std::printf("precision = %s\n", show(m.precision).c_str());
    std::printf("f-score   = %s\n", show(m.f_score).c_str());
    if (!scenarios.empty()) {
        std::printf("%-16s %-28s %10s %10s %8s %8s\n", "scenario", "domain", "injected",
                    "detected", "det%", "A");
        for (const auto& s : scenarios)
            std::printf("%-16s %-28s %10llu %10llu %7.1f%% %7.2f\n", s.scenario.c_str(),
                        s.domain.c_str(), static_cast<unsigned long long>(s.injected_unique),
                        static_cast<unsigned long long>(s.detected_unique),
                        100.0 * s.detection_pct, s.anomaly_a);
    }

    if (!json_path.empty()) {
        std::ofstream js(json_path, std::ios::trunc);
        if (!js) throw dnscov::Error("cannot open json output: " + json_path);
        js << dnscov::to_json(cm, m, scenarios).dump(2) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dnscov - passive-DNS covert-channel detection engine"};
    app.require_subcommand(1);

    CommonOpts common;
    app.add_option("--format", common.format, "log format: csv or jsonl")->capture_default_str();
    app.add_flag("--quiet", common.quiet, "suppress progress output");

    auto* train = app.add_subcommand("train", "build a model from historical traffic");
    std::string history, config, model_out, dump;
    train->add_option("--history", history, "historical log file")->required();
    train->add_option("--config", config, "engine config file")->required();
    train->add_option("--out", model_out, "model output path")->required();
    train->add_option("--dump-features", dump, "write surviving feature vectors as CSV");

    auto* classify = app.add_subcommand("classify", "classify a window with a trained model");
    std::string model_in, window, reports_out;
    classify->add_option("--model", model_in, "model file from train")->required();
    classify->add_option("--window", window, "log file to classify")->required();
    classify->add_option("--config", config, "engine config file")->required();
    classify->add_option("--out", reports_out, "JSONL report output")->required();
    classify->add_option("--dump-features", dump, "write surviving feature vectors as CSV");

    auto* run = app.add_subcommand("run", "dual-phase engine over a log stream");
    std::string input, status_out;
    run->add_option("--config", config, "engine config file")->required();
    run->add_option("--input", input, "log file, or - for stdin")->required();
    run->add_option("--reports", reports_out, "JSONL report output")->required();
    run->add_option("--status-out", status_out, "status JSON (stdout when omitted)");

    auto* generate = app.add_subcommand("generate", "synthesize benign or covert traffic");
    std::string profile, gen_out, truth_out, start_s = "2023-01-01T00:00:00Z";
    double duration_s = 600.0;
    std::uint64_t seed = 1;
    generate->add_option("--profile", profile,
                         "'benign', a built-in tool name, or a profile file")->required();
    generate->add_option("--duration", duration_s, "seconds of traffic")->capture_default_str();
    generate->add_option("--seed", seed, "generator seed")->capture_default_str();
    generate->add_option("--out", gen_out, "log output path")->required();
    generate->add_option("--truth", truth_out, "ground-truth sidecar output");
    generate->add_option("--start", start_s, "timeline origin")->capture_default_str();

    auto* evaluate = app.add_subcommand("evaluate", "score reports against ground truth");
    std::string ev_reports, ev_truth, ev_queries, ev_json;
    evaluate->add_option("--reports", ev_reports, "JSONL reports")->required();
    evaluate->add_option("--truth", ev_truth, "ground-truth sidecar")->required();
    evaluate->add_option("--queries", ev_queries, "full query log")->required();
    evaluate->add_option("--json", ev_json, "machine-readable result output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (train->parsed()) return cmd_train(history, config, model_out, common, dump);
        if (classify->parsed())
            return cmd_classify(model_in, window, config, reports_out, common, dump);
        if (run->parsed()) return cmd_run(config, input, reports_out, status_out, common);
        if (generate->parsed())
            return cmd_generate(profile, duration_s, seed, gen_out, truth_out, start_s, common);
        if (evaluate->parsed())
            return cmd_evaluate(ev_reports, ev_truth, ev_queries, ev_json, common);
        return kExitUsage;
    } catch (const dnscov::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
