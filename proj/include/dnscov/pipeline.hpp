#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "dnscov/analytics.hpp"
#include "dnscov/dns_record.hpp"
#include "dnscov/features.hpp"
#include "dnscov/filters.hpp"
#include "dnscov/hostname.hpp"
#include "dnscov/ocsvm.hpp"
#include "dnscov/suffix_list.hpp"
#include "dnscov/time.hpp"

namespace dnscov {

struct PipelineConfig {
    DurationMs retrain_period = 6 * kMillisPerHour;
    DurationMs online_window = 1 * kMillisPerHour;
    std::size_t min_training_records = 100;
    /// Cap on the QP size; training data beyond this is subsampled with the
    /// seed. 0 disables the cap.
    std::size_t max_training_records = 2000;
    std::uint64_t rng_seed = 42;
    double split_fraction = 0.75;
    std::vector<HyperPair> grid = default_grid();
    TrainOptions train_options;

    void validate() const {
        if (retrain_period < online_window)
            throw ConfigError("retrain_period must be >= online_window");
        if (min_training_records < 100)
            throw ConfigError("min_training_records must be >= 100");
        if (online_window <= 0) throw ConfigError("online_window must be positive");
    }
};

/// Everything the online path needs from the last offline run. Immutable
/// once published; readers always see a matching (model, baseline) pair.
struct EngineState {
    OcsvmModel model;
    BaselineDistributions baseline;
    std::uint64_t generation = 0;
};

class EngineStateHolder {
public:
    EngineStateHolder() : state_(std::make_shared<const EngineState>()) {}

    std::shared_ptr<const EngineState> snapshot() const {
        std::lock_guard lock(mu_);
        return state_;
    }

    void publish(std::shared_ptr<const EngineState> next) {
        std::lock_guard lock(mu_);
        state_ = std::move(next);
    }

private:
    mutable std::mutex mu_;
    std::shared_ptr<const EngineState> state_;
};

namespace detail {

struct ParsedBatch {
    std::vector<FilteredRecord> entries;
    std::vector<std::uint64_t> record_ids;
    std::uint64_t errored = 0;
};

inline ParsedBatch parse_batch(const std::vector<DnsQueryRecord>& records,
                               const SuffixList& suffixes, std::uint64_t first_record_id) {
    ParsedBatch out;
    out.entries.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        try {
            ParsedHostname parsed = split_hostname(records[i].qname, suffixes);
            out.entries.push_back({records[i], std::move(parsed)});
            out.record_ids.push_back(first_record_id + i);
        } catch (const InvalidHostname&) {
            ++out.errored;
        }
    }
    return out;
}

/// Dedup without the per-domain grouping: the shared basis for baseline
/// building and window accounting.
inline std::vector<std::size_t> dedup_indices(const std::vector<FilteredRecord>& entries) {
    std::vector<std::size_t> kept;
    std::unordered_set<std::string> seen;
    seen.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        std::string key = entries[i].record.source;
        key += '|';
        key += to_lower(entries[i].record.qname);
        key += '|';
        key += to_string(entries[i].record.qtype.type);
        if (seen.insert(std::move(key)).second) kept.push_back(i);
    }
    return kept;
}

inline std::size_t bucket_of(TimestampMs ts, TimestampMs start, DurationMs span, int buckets) {
    if (span <= 0) return 0;
    auto b = static_cast<std::int64_t>((ts - start) * buckets / span);
    if (b < 0) b = 0;
    if (b >= buckets) b = buckets - 1;
    return static_cast<std::size_t>(b);
}

}  // namespace detail

/// Builds the tail thresholds from one offline period. Counts are taken
/// over buckets of the same span as one online sub-window so they compare
/// one-to-one with the online series.
inline BaselineDistributions build_baseline(const std::vector<FilteredRecord>& deduped,
                                            TimestampMs period_start, TimestampMs period_end,
                                            DurationMs bucket_span) {
    BaselineDistributions out;
    if (deduped.empty() || bucket_span <= 0) return out;

    const DurationMs span = period_end - period_start;
    const int buckets = static_cast<int>(std::max<DurationMs>(1, span / bucket_span));

    std::map<std::pair<std::string, std::string>, std::map<int, std::set<std::string>>> requests;
    std::map<std::string, std::map<int, std::set<std::string>>> hostnames;
    for (const auto& fr : deduped) {
        const int b = static_cast<int>(
            detail::bucket_of(fr.record.timestamp, period_start, span, buckets));
        const std::string domain = to_lower(fr.parsed.registered_domain);
        const std::string qname = to_lower(fr.record.qname);
        requests[{fr.record.source, domain}][b].insert(qname);
        hostnames[domain][b].insert(qname);
    }

    std::vector<double> request_counts, hostname_counts;
    for (const auto& [key, per_bucket] : requests)
        for (const auto& [b, names] : per_bucket)
            request_counts.push_back(static_cast<double>(names.size()));
    for (const auto& [domain, per_bucket] : hostnames)
        for (const auto& [b, names] : per_bucket)
            hostname_counts.push_back(static_cast<double>(names.size()));

    out.built = true;
    out.unique_requests_p90 = percentile(request_counts, 0.90);
    out.unique_hostnames_p90 = percentile(hostname_counts, 0.90);
    out.built_from = format_rfc3339(period_start) + "/" + format_rfc3339(period_end) +
                     " bucket=" + std::to_string(bucket_span / 1000) +
                     "s obs_r=" + std::to_string(request_counts.size()) +
                     " obs_h=" + std::to_string(hostname_counts.size());
    return out;
}

struct OfflineOutcome {
    std::shared_ptr<const EngineState> state;
    GridSearchResult grid;
    std::size_t training_vectors = 0;
};

/// One offline run: filter the period's history, extract features, grid
/// search and retrain on everything, rebuild the baseline. Throws
/// InsufficientData when too few records survive the filters (the caller
/// keeps the previous generation in that case).
inline OfflineOutcome offline_run(const std::vector<DnsQueryRecord>& history,
                                  TimestampMs period_start, TimestampMs period_end,
                                  const SuffixList& suffixes, const FilterConfig& filter_cfg,
                                  const AnalyticsConfig& analytics_cfg,
                                  const PipelineConfig& pipeline_cfg,
                                  std::uint64_t previous_generation) {
    detail::ParsedBatch batch = detail::parse_batch(history, suffixes, 0);

    std::vector<FilteredRecord> record_pass;
    for (const auto& fr : batch.entries)
        if (apply_record_filters(fr.record, fr.parsed, filter_cfg).keep)
            record_pass.push_back(fr);

    std::vector<FilteredRecord> deduped;
    for (std::size_t i : detail::dedup_indices(record_pass)) deduped.push_back(record_pass[i]);

    FilterConfig group_cfg = filter_cfg;  // grouping over the whole training period
    GroupFilterResult grouped = apply_group_filters(deduped, group_cfg);

    std::vector<FeatureVector> features;
    features.reserve(grouped.survivors.size());
    TimestampMs latest = period_start;
    for (const auto& fr : grouped.survivors) {
        features.push_back(extract_features(fr.parsed));
        latest = std::max(latest, fr.record.timestamp);
    }
    if (features.size() < pipeline_cfg.min_training_records)
        throw InsufficientData(features.size(), pipeline_cfg.min_training_records);

    if (pipeline_cfg.max_training_records > 0 &&
        features.size() > pipeline_cfg.max_training_records) {
        Rng rng(pipeline_cfg.rng_seed ^ 0x5u);
        for (std::size_t i = 0; i < pipeline_cfg.max_training_records; ++i) {
            const std::size_t j = i + rng.below(features.size() - i);
            std::swap(features[i], features[j]);
        }
        features.resize(pipeline_cfg.max_training_records);
    }

    TrainOptions opts = pipeline_cfg.train_options;
    opts.trained_at = latest;  // a data property, so retraining is reproducible
    GridSearchOutcome outcome = grid_search(features, pipeline_cfg.grid,
                                            pipeline_cfg.split_fraction, pipeline_cfg.rng_seed,
                                            opts);

    const DurationMs bucket_span = pipeline_cfg.online_window / analytics_cfg.subwindow_count;
    auto state = std::make_shared<EngineState>();
    state->model = std::move(outcome.model);
    state->baseline = build_baseline(deduped, period_start, period_end, bucket_span);
    state->generation = previous_generation + 1;

    OfflineOutcome result;
    result.state = std::move(state);
    result.grid = std::move(outcome.result);
    result.training_vectors = features.size();
    return result;
}

struct StepCounters {
    std::uint64_t total = 0;
    std::uint64_t errored = 0;
    std::uint64_t filtered = 0;
    std::uint64_t classified_normal = 0;
    std::uint64_t reported = 0;

    void add(const StepCounters& o) {
        total += o.total;
        errored += o.errored;
        filtered += o.filtered;
        classified_normal += o.classified_normal;
        reported += o.reported;
    }
};

struct OnlineResult {
    std::vector<AnomalyReport> reports;
    StepCounters counters;
    std::map<std::string_view, std::uint64_t> drop_counts;
};

/// One online window: filter, classify against the generation's model, and
/// assess every nonconforming query with the analytics indicators. Requires
/// generation >= 1.
inline OnlineResult online_step(const std::vector<DnsQueryRecord>& window,
                                TimestampMs window_start, TimestampMs window_end,
                                const EngineState& state, const SuffixList& suffixes,
                                const FilterConfig& filter_cfg,
                                const AnalyticsConfig& analytics_cfg,
                                const std::vector<LanguageProfile>& profiles,
                                std::uint64_t first_record_id = 0) {
    if (state.generation < 1) throw Error("online_step requires a trained generation");

    OnlineResult out;
    out.counters.total = window.size();

    std::unordered_map<std::string, std::uint64_t> n_tot;  // pre-filter, per source
    for (const auto& rec : window) ++n_tot[rec.source];

    detail::ParsedBatch batch = detail::parse_batch(window, suffixes, first_record_id);
    out.counters.errored = batch.errored;

    std::vector<std::size_t> record_pass;  // indices into batch.entries
    for (std::size_t i = 0; i < batch.entries.size(); ++i) {
        const FilterDecision d =
            apply_record_filters(batch.entries[i].record, batch.entries[i].parsed, filter_cfg);
        if (d.keep) record_pass.push_back(i);
        else {
            ++out.counters.filtered;
            ++out.drop_counts[d.dropped_by];
        }
    }

    std::vector<FilteredRecord> passed;
    passed.reserve(record_pass.size());
    for (std::size_t i : record_pass) passed.push_back(batch.entries[i]);
    const std::vector<std::size_t> dedup_keep = detail::dedup_indices(passed);

    // window accounting over the deduplicated record-filter survivors
    const int subwindows = analytics_cfg.subwindow_count;
    std::unordered_map<std::string, SourceWindowStats> per_source;
    std::unordered_map<std::string, std::vector<std::set<std::string>>> domain_hosts;
    std::unordered_map<std::string, std::map<std::string, std::vector<std::set<std::string>>>>
        source_domain_requests;
    for (std::size_t j : dedup_keep) {
        const auto& fr = passed[j];
        const std::string domain = to_lower(fr.parsed.registered_domain);
        const std::string qname = to_lower(fr.record.qname);
        const std::size_t b = detail::bucket_of(fr.record.timestamp, window_start,
                                                window_end - window_start, subwindows);
        auto& req = source_domain_requests[fr.record.source][domain];
        req.resize(subwindows);
        req[b].insert(qname);
        auto& hosts = domain_hosts[domain];
        hosts.resize(subwindows);
        hosts[b].insert(qname);
    }

    for (auto& [source, domains] : source_domain_requests) {
        SourceWindowStats stats;
        stats.source = source;
        stats.window_start = window_start;
        stats.window_end = window_end;
        stats.n_tot = n_tot[source];
        for (auto& [domain, buckets] : domains) {
            std::set<std::string> all;
            std::vector<std::uint32_t> counts(subwindows, 0);
            for (std::size_t b = 0; b < buckets.size(); ++b) {
                counts[b] = static_cast<std::uint32_t>(buckets[b].size());
                all.insert(buckets[b].begin(), buckets[b].end());
            }
            stats.per_domain_unique_requests[domain] = static_cast<std::uint32_t>(all.size());
            stats.per_domain_unique_hostnames[domain] = static_cast<std::uint32_t>(all.size());
            stats.per_domain_request_subcounts[domain] = std::move(counts);
        }
        per_source[source] = std::move(stats);
    }

    std::unordered_map<std::string, DomainWindowStats> per_domain;
    for (auto& [domain, buckets] : domain_hosts) {
        DomainWindowStats d;
        d.domain = domain;
        d.hostname_subcounts.assign(subwindows, 0);
        for (std::size_t b = 0; b < buckets.size(); ++b)
            d.hostname_subcounts[b] = static_cast<std::uint32_t>(buckets[b].size());
        per_domain[domain] = std::move(d);
    }

    // survivors of the full chain feed the classifier; the trace identifies
    // them by position in `passed`, which maps back to the input record ids
    GroupFilterResult grouped = apply_group_filters(passed, filter_cfg);
    for (const auto& [name, count] : grouped.trace.drop_counts) {
        out.drop_counts[name] += count;
        out.counters.filtered += count;
    }

    struct Flagged {
        std::size_t passed_index;
        std::uint64_t record_id;
    };
    std::vector<Flagged> flagged;
    std::unordered_map<std::string, std::uint64_t> n_s;
    for (std::size_t j = 0; j < passed.size(); ++j) {
        if (grouped.trace.dropped_by[j] != filter_names::passed) continue;
        const FeatureVector fv = extract_features(passed[j].parsed);
        if (decision(state.model, fv) < 0.0) {
            ++n_s[passed[j].record.source];
            flagged.push_back({j, batch.record_ids[record_pass[j]]});
        } else {
            ++out.counters.classified_normal;
        }
    }

    static const DomainWindowStats empty_domain{};
    for (const auto& f : flagged) {
        const FilteredRecord& fr = passed[f.passed_index];
        auto& stats = per_source[fr.record.source];
        stats.n_s = n_s[fr.record.source];
        const std::string domain = to_lower(fr.parsed.registered_domain);
        const auto dit = per_domain.find(domain);
        const DomainWindowStats& dstats = dit == per_domain.end() ? empty_domain : dit->second;
        out.reports.push_back(classify_query(f.record_id, fr.record, fr.parsed, stats, dstats,
                                             state.baseline, profiles, analytics_cfg));
        ++out.counters.reported;
    }
    return out;
}

struct RunSummary {
    std::uint64_t windows_processed = 0;
    std::uint64_t collect_only_windows = 0;
    std::uint64_t trainings = 0;
    std::uint64_t training_failures = 0;
    std::uint64_t generation = 0;
    TimestampMs last_trained_at = 0;
    StepCounters counters;
    std::uint64_t suspicious_reports = 0;
    std::vector<std::string> notes;
};

/// Batch engine over a timestamp-sorted record stream: hourly windows,
/// periodic retraining, reports streamed to a sink. The retrain for a
/// completed period runs on a separate worker and is joined at the period
/// boundary, so window composition and outputs are reproducible; until the
/// first training succeeds the engine runs collect-only.
class Engine {
public:
    Engine(SuffixList suffixes, FilterConfig filter_cfg, AnalyticsConfig analytics_cfg,
           PipelineConfig pipeline_cfg, std::vector<LanguageProfile> profiles)
        : suffixes_(std::move(suffixes)),
          filter_cfg_(std::move(filter_cfg)),
          analytics_cfg_(analytics_cfg),
          pipeline_cfg_(pipeline_cfg),
          profiles_(std::move(profiles)) {
        pipeline_cfg_.validate();
    }

    const EngineStateHolder& state_holder() const { return holder_; }

    /// stop, when non-null, is polled between windows; the current window is
    /// always finished and flushed.
    RunSummary run(const std::vector<DnsQueryRecord>& sorted,
                   const std::function<void(const AnomalyReport&)>& sink,
                   const std::atomic<bool>* stop = nullptr) {
        RunSummary summary;
        if (sorted.empty()) return summary;

        const DurationMs window_len = pipeline_cfg_.online_window;
        const DurationMs period_len = pipeline_cfg_.retrain_period;
        TimestampMs period_start = align_down(sorted.front().timestamp, period_len);
        std::vector<DnsQueryRecord> period_records;
        std::future<OfflineOutcome> pending_train;
        TimestampMs pending_period_start = 0;

        auto join_pending = [&] {
            if (!pending_train.valid()) return;
            try {
                OfflineOutcome outcome = pending_train.get();
                holder_.publish(outcome.state);
                ++summary.trainings;
                summary.generation = outcome.state->generation;
                summary.last_trained_at = outcome.state->model.trained_at;
            } catch (const InsufficientData& e) {
                ++summary.training_failures;
                summary.notes.push_back(std::string("offline run skipped: ") + e.what());
            } catch (const Error& e) {
                ++summary.training_failures;
                summary.notes.push_back(std::string("offline run failed: ") + e.what());
            }
        };

        std::size_t i = 0;
        std::uint64_t next_record_id = 0;
        while (i < sorted.size()) {
            const TimestampMs window_start = align_down(sorted[i].timestamp, window_len);
            const TimestampMs window_end = window_start + window_len;

            if (window_start >= period_start + period_len) {
                // the period that just completed trains the next generation
                auto history = std::make_shared<std::vector<DnsQueryRecord>>(
                    std::move(period_records));
                period_records.clear();
                const TimestampMs ps = period_start;
                const std::uint64_t prev_gen = holder_.snapshot()->generation;
                pending_train = std::async(std::launch::async, [this, history, ps, period_len,
                                                                prev_gen] {
                    return offline_run(*history, ps, ps + period_len, suffixes_, filter_cfg_,
                                       analytics_cfg_, pipeline_cfg_, prev_gen);
                });
                pending_period_start = ps;
                period_start = align_down(window_start, period_len);
                join_pending();  // batch mode: new generation applies from this window on
                (void)pending_period_start;
            }

            std::vector<DnsQueryRecord> window;
            const std::uint64_t first_record_id = next_record_id;
            while (i < sorted.size() && sorted[i].timestamp < window_end) {
                window.push_back(sorted[i]);
                period_records.push_back(sorted[i]);
                ++i;
                ++next_record_id;
            }

            auto state = holder_.snapshot();
            if (state->generation == 0) {
                ++summary.collect_only_windows;
                summary.counters.total += window.size();
            } else {
                OnlineResult result =
                    online_step(window, window_start, window_end, *state, suffixes_, filter_cfg_,
                                analytics_cfg_, profiles_, first_record_id);
                summary.counters.add(result.counters);
                for (const auto& r : result.reports) {
                    if (r.verdict == Verdict::Suspicious) ++summary.suspicious_reports;
                    sink(r);
                }
            }
            ++summary.windows_processed;
            if (stop && stop->load()) {
                summary.notes.push_back("interrupted; stopped at window boundary");
                break;
            }
        }
        join_pending();
        summary.generation = holder_.snapshot()->generation;
        return summary;
    }

private:
    SuffixList suffixes_;
    FilterConfig filter_cfg_;
    AnalyticsConfig analytics_cfg_;
    PipelineConfig pipeline_cfg_;
    std::vector<LanguageProfile> profiles_;
    EngineStateHolder holder_;
};

}  // namespace dnscov
