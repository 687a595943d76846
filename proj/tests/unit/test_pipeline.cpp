#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "dnscov/model_io.hpp"
#include "dnscov/pipeline.hpp"
#include "dnscov/traffic_gen.hpp"
#include "support/test_paths.hpp"

using namespace dnscov;

namespace {

struct Fixture {
    SuffixList suffixes;
    FilterConfig filters;
    AnalyticsConfig analytics;
    PipelineConfig pipeline;
    std::vector<LanguageProfile> profiles;

    Fixture() {
        suffixes = SuffixList::load_file(testsupport::data_path("public_suffix_list.dat"));
        filters.add_whitelist("google.com");
        filters.add_whitelist("microsoft.com");
        filters.add_whitelist("facebook.com");
        filters.add_cdn("cloudfront.net");
        filters.add_cdn("akamai.net");
        filters.add_local("corp");
        filters.add_local("internal");
        pipeline.min_training_records = 100;
        pipeline.max_training_records = 600;
        pipeline.retrain_period = 2 * kMillisPerHour;
        pipeline.online_window = kMillisPerHour;
        // a narrow grid keeps unit runtime low; the full grid runs in the
        // acceptance suite
        pipeline.grid = {{0.1, 0.1}, {1.0, 0.1}, {0.1, 0.01}};
        profiles.push_back(LanguageProfile::load_files(
            "english", testsupport::data_path("profiles/english_mono.tsv"),
            testsupport::data_path("profiles/english_bi.tsv"), analytics.bigram_top_k));
        profiles.push_back(LanguageProfile::load_files(
            "italian", testsupport::data_path("profiles/italian_mono.tsv"),
            testsupport::data_path("profiles/italian_bi.tsv"), analytics.bigram_top_k));
    }

    BenignProfile benign_profile() const {
        BenignProfile p = BenignProfile::defaults();
        p.query_rate = 6000.0 / 60.0;  // lighter than production shape for unit speed
        return p;
    }
};

}  // namespace

TEST_CASE("offline run trains a model and a baseline from history", "[pipeline]") {
    Fixture fx;
    const TimestampMs start = kDefaultGenerationStart;
    const auto history = generate_benign(fx.benign_profile(), 2 * kMillisPerHour, 21, start);

    const auto outcome = offline_run(history, start, start + 2 * kMillisPerHour, fx.suffixes,
                                     fx.filters, fx.analytics, fx.pipeline, 0);
    REQUIRE(outcome.state);
    CHECK(outcome.state->generation == 1);
    CHECK(outcome.state->model.training_size >= fx.pipeline.min_training_records);
    CHECK(outcome.state->baseline.built);
    CHECK(outcome.state->baseline.unique_requests_p90 >= 1.0);
    CHECK(outcome.state->baseline.unique_hostnames_p90 >= 1.0);
    CHECK(outcome.state->model.trained_at > start);

    // trained model accepts most of its own distribution
    const auto probe = generate_benign(fx.benign_profile(), 30 * kMillisPerMinute, 22,
                                       start + 2 * kMillisPerHour);
    const auto result = online_step(probe, start + 2 * kMillisPerHour,
                                    start + 3 * kMillisPerHour, *outcome.state, fx.suffixes,
                                    fx.filters, fx.analytics, fx.profiles);
    CHECK(result.counters.total == probe.size());
    const double suspicious_rate =
        static_cast<double>(result.counters.reported) /
        static_cast<double>(std::max<std::uint64_t>(1, result.counters.total));
    CHECK(suspicious_rate < 0.10);
}

TEST_CASE("offline run is deterministic given seed and history", "[pipeline]") {
    Fixture fx;
    const TimestampMs start = kDefaultGenerationStart;
    const auto history = generate_benign(fx.benign_profile(), 2 * kMillisPerHour, 33, start);

    const auto a = offline_run(history, start, start + 2 * kMillisPerHour, fx.suffixes,
                               fx.filters, fx.analytics, fx.pipeline, 0);
    const auto b = offline_run(history, start, start + 2 * kMillisPerHour, fx.suffixes,
                               fx.filters, fx.analytics, fx.pipeline, 0);
    const auto bytes_a = save_model(a.state->model, &a.state->baseline);
    const auto bytes_b = save_model(b.state->model, &b.state->baseline);
    CHECK(bytes_a == bytes_b);
}

TEST_CASE("insufficient history raises and keeps nothing", "[pipeline]") {
    Fixture fx;
    CHECK_THROWS_AS(offline_run({}, 0, kMillisPerHour, fx.suffixes, fx.filters, fx.analytics,
                                fx.pipeline, 3),
                    InsufficientData);
}

TEST_CASE("online step requires a trained generation", "[pipeline]") {
    Fixture fx;
    EngineState state;  // generation 0
    CHECK_THROWS_AS(online_step({}, 0, kMillisPerHour, state, fx.suffixes, fx.filters,
                                fx.analytics, fx.profiles),
                    Error);
}

TEST_CASE("windows of whitelisted-only traffic yield no reports", "[pipeline]") {
    Fixture fx;
    const TimestampMs start = kDefaultGenerationStart;
    const auto history = generate_benign(fx.benign_profile(), 2 * kMillisPerHour, 21, start);
    const auto outcome = offline_run(history, start, start + 2 * kMillisPerHour, fx.suffixes,
                                     fx.filters, fx.analytics, fx.pipeline, 0);

    std::vector<DnsQueryRecord> window;
    for (int i = 0; i < 50; ++i) {
        DnsQueryRecord r;
        r.timestamp = start + 2 * kMillisPerHour + i * 1000;
        r.source = "10.0.0.77";
        r.qname = "service-" + std::to_string(i) + ".google.com";
        r.qtype = {QueryType::A, 0};
        r.rcode = 0;
        window.push_back(r);
    }
    const auto result = online_step(window, start + 2 * kMillisPerHour,
                                    start + 3 * kMillisPerHour, *outcome.state, fx.suffixes,
                                    fx.filters, fx.analytics, fx.profiles);
    CHECK(result.reports.empty());
    CHECK(result.counters.filtered == window.size());
}

TEST_CASE("every record is accounted for across the online step", "[pipeline]") {
    Fixture fx;
    const TimestampMs start = kDefaultGenerationStart;
    const auto history = generate_benign(fx.benign_profile(), 2 * kMillisPerHour, 21, start);
    const auto outcome = offline_run(history, start, start + 2 * kMillisPerHour, fx.suffixes,
                                     fx.filters, fx.analytics, fx.pipeline, 0);

    auto window = generate_benign(fx.benign_profile(), 20 * kMillisPerMinute, 55,
                                  start + 2 * kMillisPerHour);
    auto covert = generate_covert(builtin_tool_profiles().at("iodine"), 20 * kMillisPerMinute,
                                  56, start + 2 * kMillisPerHour);
    auto merged = merge_by_timestamp({std::move(window), std::move(covert)});
    // one unparseable qname
    DnsQueryRecord bad;
    bad.timestamp = start + 2 * kMillisPerHour + 1;
    bad.source = "10.0.0.1";
    bad.qname = std::string(70, 'x') + ".example.com";  // label over 63
    bad.qtype = {QueryType::A, 0};
    bad.rcode = 0;
    merged.push_back(bad);

    const auto result = online_step(merged, start + 2 * kMillisPerHour,
                                    start + 3 * kMillisPerHour, *outcome.state, fx.suffixes,
                                    fx.filters, fx.analytics, fx.profiles);
    CHECK(result.counters.total == merged.size());
    CHECK(result.counters.errored == 1);
    CHECK(result.counters.total == result.counters.errored + result.counters.filtered +
                                       result.counters.classified_normal +
                                       result.counters.reported);

    // the injected tunnel dominates the reports
    std::size_t tunnel_reports = 0;
    for (const auto& r : result.reports)
        if (r.domain == "tunnel-probe.net") ++tunnel_reports;
    CHECK(tunnel_reports > 0);
    CHECK(result.counters.reported >= tunnel_reports);
}

TEST_CASE("engine drives windows, retrains and swaps generations", "[pipeline]") {
    Fixture fx;
    fx.pipeline.min_training_records = 100;
    const TimestampMs start = kDefaultGenerationStart;

    // 5 hours of traffic: first 2h train generation 1, next 2h generation 2
    const auto records = generate_benign(fx.benign_profile(), 5 * kMillisPerHour, 77, start);
    Engine engine(fx.suffixes, fx.filters, fx.analytics, fx.pipeline, fx.profiles);
    std::vector<AnomalyReport> reports;
    const RunSummary summary =
        engine.run(records, [&](const AnomalyReport& r) { reports.push_back(r); });

    CHECK(summary.windows_processed == 5);
    CHECK(summary.collect_only_windows == 2);  // before the first generation exists
    CHECK(summary.trainings == 2);
    CHECK(summary.generation == 2);
    CHECK(summary.counters.total + 0 >= reports.size());
    CHECK(engine.state_holder().snapshot()->generation == 2);

    // determinism end to end
    Engine engine2(fx.suffixes, fx.filters, fx.analytics, fx.pipeline, fx.profiles);
    std::vector<AnomalyReport> reports2;
    engine2.run(records, [&](const AnomalyReport& r) { reports2.push_back(r); });
    REQUIRE(reports2.size() == reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        CHECK(reports2[i].qname == reports[i].qname);
        CHECK(reports2[i].rescaled_a == reports[i].rescaled_a);
    }
}

TEST_CASE("engine state holder swaps atomically between generations", "[pipeline]") {
    EngineStateHolder holder;
    CHECK(holder.snapshot()->generation == 0);

    auto g1 = std::make_shared<EngineState>();
    g1->generation = 1;
    g1->baseline.built = true;
    holder.publish(g1);

    const auto snap = holder.snapshot();
    CHECK(snap->generation == 1);
    CHECK(snap->baseline.built);

    auto g2 = std::make_shared<EngineState>();
    g2->generation = 2;
    holder.publish(g2);
    CHECK(snap->generation == 1);  // old snapshot stays coherent
    CHECK(holder.snapshot()->generation == 2);
}

TEST_CASE("pipeline config validation", "[pipeline]") {
    PipelineConfig cfg;
    cfg.retrain_period = kMillisPerHour;
    cfg.online_window = 2 * kMillisPerHour;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.online_window = kMillisPerHour;
    cfg.min_training_records = 10;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.min_training_records = 100;
    CHECK_NOTHROW(cfg.validate());
}
