#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnscov/analytics.hpp"
#include "dnscov/dns_record.hpp"
#include "dnscov/filters.hpp"
#include "dnscov/traffic_gen.hpp"

namespace dnscov {

/// Confusion matrix over unique queries.
struct ConfusionMatrix {
    std::uint64_t tn = 0, fn = 0, fp = 0, tp = 0;

    std::uint64_t total() const { return tn + fn + fp + tp; }
};

/// Recall, precision and F-score; a metric is unset when its denominator
/// is zero.
struct Metrics {
    std::optional<double> recall;
    std::optional<double> precision;
    std::optional<double> f_score;
};

inline Metrics metrics(const ConfusionMatrix& cm) {
    Metrics m;
    if (cm.tp + cm.fn > 0)
        m.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    if (cm.tp + cm.fp > 0)
        m.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    if (m.recall && m.precision && (*m.recall + *m.precision) > 0.0)
        m.f_score = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    return m;
}

/// Unique-query identity: lowercased qname plus query type. Sources are
/// deliberately ignored.
struct UniqueQuery {
    std::string qname_lower;
    QueryType qtype = QueryType::Other;

    auto operator<=>(const UniqueQuery&) const = default;
};

inline std::set<UniqueQuery> unique_queries(const std::vector<DnsQueryRecord>& records) {
    std::set<UniqueQuery> out;
    for (const auto& r : records) out.insert({to_lower(r.qname), r.qtype.type});
    return out;
}

namespace detail {

inline bool matches_attacker_domain(const std::string& qname_lower,
                                    const std::set<std::string>& truth_domains) {
    for (const auto& d : truth_domains)
        if (ends_with_suffix(qname_lower, d)) return true;
    return false;
}

}  // namespace detail

/// Scores suspicious verdicts against the injected attacker domains at
/// unique-query granularity. A unique query is predicted positive when any
/// report marks it suspicious; its actual class comes from ground-truth
/// domain membership.
inline ConfusionMatrix score(const std::vector<AnomalyReport>& reports,
                             const std::set<std::string>& truth_domains,
                             const std::set<UniqueQuery>& all_queries) {
    std::set<UniqueQuery> flagged;
    for (const auto& r : reports)
        if (r.verdict == Verdict::Suspicious) flagged.insert({to_lower(r.qname), r.qtype});

    ConfusionMatrix cm;
    for (const auto& q : all_queries) {
        const bool predicted = flagged.count(q) > 0;
        const bool actual = detail::matches_attacker_domain(q.qname_lower, truth_domains);
        if (predicted && actual) ++cm.tp;
        else if (predicted && !actual) ++cm.fp;
        else if (!predicted && actual) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

/// Per-scenario detection: detected unique queries over injected unique
/// queries, plus the maximum rescaled anomaly index reached.
struct ScenarioResult {
    std::string scenario;
    std::string domain;
    std::uint64_t injected_unique = 0;
    std::uint64_t detected_unique = 0;
    double detection_pct = 0.0;  ///< in [0, 1]
    double anomaly_a = 0.0;      ///< max rescaled A over the scenario's reports
};

inline std::vector<ScenarioResult> scenario_results(
    const std::vector<AnomalyReport>& reports, const std::vector<GroundTruthEntry>& truth,
    const std::set<UniqueQuery>& all_queries) {
    std::vector<ScenarioResult> out;
    for (const auto& entry : truth) {
        ScenarioResult sr;
        sr.scenario = entry.scenario.empty() ? entry.domain : entry.scenario;
        sr.domain = entry.domain;

        std::set<UniqueQuery> injected;
        for (const auto& q : all_queries)
            if (detail::ends_with_suffix(q.qname_lower, entry.domain)) injected.insert(q);
        sr.injected_unique = injected.size();

        std::set<UniqueQuery> detected;
        for (const auto& r : reports) {
            if (r.verdict != Verdict::Suspicious) continue;
            const UniqueQuery q{to_lower(r.qname), r.qtype};
            if (injected.count(q)) detected.insert(q);
        }
        sr.detected_unique = detected.size();
        sr.detection_pct = injected.empty() ? 0.0
                                            : static_cast<double>(detected.size()) /
                                                  static_cast<double>(injected.size());
        for (const auto& r : reports)
            if (detail::ends_with_suffix(to_lower(r.qname), entry.domain))
                sr.anomaly_a = std::max(sr.anomaly_a, r.rescaled_a);
        out.push_back(std::move(sr));
    }
    return out;
}

inline nlohmann::json to_json(const ConfusionMatrix& cm, const Metrics& m,
                              const std::vector<ScenarioResult>& scenarios) {
    nlohmann::json j;
    j["confusion_matrix"] = {{"tn", cm.tn}, {"fn", cm.fn}, {"fp", cm.fp}, {"tp", cm.tp}};
    j["metrics"] = nlohmann::json::object();
    if (m.recall) j["metrics"]["recall"] = *m.recall;
    if (m.precision) j["metrics"]["precision"] = *m.precision;
    if (m.f_score) j["metrics"]["f_score"] = *m.f_score;
    j["scenarios"] = nlohmann::json::array();
    for (const auto& s : scenarios) {
        j["scenarios"].push_back({{"scenario", s.scenario},
                                  {"domain", s.domain},
                                  {"injected_unique", s.injected_unique},
                                  {"detected_unique", s.detected_unique},
                                  {"detection_pct", s.detection_pct},
                                  {"anomaly_A", s.anomaly_a}});
    }
    return j;
}

}  // namespace dnscov
