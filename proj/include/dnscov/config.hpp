#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dnscov/analytics.hpp"
#include "dnscov/codecs.hpp"
#include "dnscov/errors.hpp"
#include "dnscov/filters.hpp"
#include "dnscov/pipeline.hpp"
#include "dnscov/suffix_list.hpp"
#include "dnscov/traffic_gen.hpp"

namespace dnscov {

/// Flat `key = value` file with `#` comments. Path values are resolved
/// relative to the file's own directory.
class KeyValueFile {
public:
    static KeyValueFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        KeyValueFile kv;
        kv.base_dir_ = std::filesystem::path(path).parent_path();
        std::string line;
        std::uint64_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                if (line.find_first_not_of(" \t") != std::string::npos)
                    throw ConfigError(path + ":" + std::to_string(line_no) +
                                      ": expected 'key = value'");
                continue;
            }
            auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t");
                if (b == std::string::npos) return std::string();
                const auto e = s.find_last_not_of(" \t");
                return s.substr(b, e - b + 1);
            };
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
            kv.values_[key] = value;
        }
        return kv;
    }

    std::optional<std::string> get(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }

    std::string get_or(const std::string& key, std::string fallback) const {
        return get(key).value_or(std::move(fallback));
    }

    double get_double(const std::string& key, double fallback) const {
        const auto v = get(key);
        if (!v) return fallback;
        try {
            return std::stod(*v);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "' is not a number: '" + *v + "'");
        }
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
        const auto v = get(key);
        if (!v) return fallback;
        try {
            return std::stoll(*v);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "' is not an integer: '" + *v + "'");
        }
    }

    /// Relative paths resolve against the config file's directory.
    std::string get_path(const std::string& key, std::string fallback = "") const {
        const std::string v = get_or(key, std::move(fallback));
        if (v.empty()) return v;
        std::filesystem::path p(v);
        if (p.is_absolute()) return p.string();
        return (base_dir_ / p).string();
    }

    std::vector<std::string> get_list(const std::string& key) const {
        std::vector<std::string> out;
        const auto v = get(key);
        if (!v) return out;
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto b = item.find_first_not_of(" \t");
            if (b == std::string::npos) continue;
            const auto e = item.find_last_not_of(" \t");
            out.push_back(item.substr(b, e - b + 1));
        }
        return out;
    }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::filesystem::path base_dir_;
};

/// Everything the engine needs, assembled from one config file.
struct EngineConfig {
    SuffixList suffixes;
    FilterConfig filters;
    AnalyticsConfig analytics;
    PipelineConfig pipeline;
    std::vector<LanguageProfile> profiles;
};

inline EngineConfig load_engine_config(const std::string& path) {
    const KeyValueFile kv = KeyValueFile::load(path);
    EngineConfig cfg;

    const std::string suffix_path = kv.get_path("suffix_list_path");
    if (!suffix_path.empty()) cfg.suffixes = SuffixList::load_file(suffix_path);

    cfg.filters.min_longest_label =
        static_cast<int>(kv.get_int("filters.min_longest_label", cfg.filters.min_longest_label));
    cfg.filters.min_hostnames_per_domain = static_cast<int>(
        kv.get_int("filters.min_hostnames_per_domain", cfg.filters.min_hostnames_per_domain));
    if (cfg.filters.min_longest_label < 1 || cfg.filters.min_hostnames_per_domain < 1)
        throw ConfigError("filter thresholds must be >= 1");
    if (const auto qtypes = kv.get_list("filters.allowed_qtypes"); !qtypes.empty()) {
        cfg.filters.allowed_qtypes.clear();
        for (const auto& s : qtypes) {
            const QueryTypeInfo qi = query_type_from_string(s);
            if (qi.type == QueryType::Other)
                throw ConfigError("unknown qtype in filters.allowed_qtypes: '" + s + "'");
            cfg.filters.allowed_qtypes.insert(qi.type);
        }
    }
    cfg.filters = load_filter_lists(std::move(cfg.filters),
                                    kv.get_path("filters.whitelist_path"),
                                    kv.get_path("filters.cdn_suffixes_path"),
                                    kv.get_path("filters.overloaded_dns_path"),
                                    kv.get_path("filters.local_domains_path"));

    cfg.analytics.b = kv.get_double("analytics.b", cfg.analytics.b);
    cfg.analytics.c = kv.get_double("analytics.c", cfg.analytics.c);
    cfg.analytics.a_threshold = kv.get_double("analytics.a_threshold", cfg.analytics.a_threshold);
    cfg.analytics.subwindow_count =
        static_cast<int>(kv.get_int("analytics.subwindow_count", cfg.analytics.subwindow_count));
    cfg.analytics.entropy_alphabet_bits =
        kv.get_double("analytics.entropy_alphabet_bits", cfg.analytics.entropy_alphabet_bits);
    cfg.analytics.bigram_top_k =
        static_cast<int>(kv.get_int("analytics.bigram_top_k", cfg.analytics.bigram_top_k));
    if (!(cfg.analytics.a_threshold > 0.0 && cfg.analytics.a_threshold < 1.0))
        throw ConfigError("analytics.a_threshold must be in (0, 1)");
    if (cfg.analytics.subwindow_count < 1)
        throw ConfigError("analytics.subwindow_count must be >= 1");

    struct LangPaths {
        std::string lang, mono_key, bi_key;
    };
    for (const auto& lp : {LangPaths{"english", "analytics.profile_english_mono",
                                     "analytics.profile_english_bi"},
                           LangPaths{"italian", "analytics.profile_italian_mono",
                                     "analytics.profile_italian_bi"}}) {
        const std::string mono = kv.get_path(lp.mono_key);
        const std::string bi = kv.get_path(lp.bi_key);
        if (!mono.empty() && !bi.empty())
            cfg.profiles.push_back(
                LanguageProfile::load_files(lp.lang, mono, bi, cfg.analytics.bigram_top_k));
    }

    cfg.pipeline.retrain_period =
        kv.get_int("pipeline.retrain_period_minutes", 360) * kMillisPerMinute;
    cfg.pipeline.online_window =
        kv.get_int("pipeline.online_window_minutes", 60) * kMillisPerMinute;
    cfg.pipeline.min_training_records = static_cast<std::size_t>(
        kv.get_int("pipeline.min_training_records",
                   static_cast<std::int64_t>(cfg.pipeline.min_training_records)));
    cfg.pipeline.max_training_records = static_cast<std::size_t>(
        kv.get_int("pipeline.max_training_records",
                   static_cast<std::int64_t>(cfg.pipeline.max_training_records)));
    cfg.pipeline.rng_seed = static_cast<std::uint64_t>(
        kv.get_int("pipeline.rng_seed", static_cast<std::int64_t>(cfg.pipeline.rng_seed)));
    cfg.pipeline.split_fraction = kv.get_double("svm.split_fraction", 0.75);
    cfg.pipeline.train_options.tol = kv.get_double("svm.tolerance", 1e-6);
    cfg.pipeline.train_options.max_iter =
        static_cast<std::uint64_t>(kv.get_int("svm.max_iterations", 100000));

    const auto gammas = kv.get_list("svm.grid_gammas");
    const auto nus = kv.get_list("svm.grid_nus");
    if (!gammas.empty() && !nus.empty()) {
        cfg.pipeline.grid.clear();
        for (const auto& g : gammas)
            for (const auto& v : nus) cfg.pipeline.grid.push_back({std::stod(g), std::stod(v)});
    }

    cfg.pipeline.validate();
    return cfg;
}

/// Loads a tool profile file, or one of the built-in profiles when `name`
/// matches. File keys mirror the ToolProfile fields.
inline ToolProfile load_tool_profile(const std::string& name_or_path) {
    const auto builtin = builtin_tool_profiles();
    if (const auto it = builtin.find(name_or_path); it != builtin.end()) return it->second;
    if (!std::filesystem::exists(name_or_path))
        throw ConfigError("unknown profile '" + name_or_path +
                          "' (not a built-in name or a profile file)");
    const KeyValueFile kv = KeyValueFile::load(name_or_path);
    ToolProfile p;
    p.name = kv.get_or("name", std::filesystem::path(name_or_path).stem().string());
    const std::string codec_s = kv.get_or("codec", "base64");
    const auto codec = codec_from_string(codec_s);
    if (!codec) throw UnsupportedCodec(codec_s);
    p.codec = *codec;
    if (const auto qtypes = kv.get_list("qtypes"); !qtypes.empty()) {
        p.qtypes.clear();
        for (const auto& s : qtypes) {
            const QueryTypeInfo qi = query_type_from_string(s);
            if (qi.type == QueryType::Other) throw ConfigError("unknown qtype '" + s + "'");
            p.qtypes.push_back(qi.type);
        }
    }
    p.label_len = static_cast<std::size_t>(kv.get_int("label_len", 57));
    p.hostname_budget = static_cast<std::size_t>(kv.get_int("hostname_budget", 230));
    p.domain = kv.get_or("domain", "");
    if (p.domain.empty()) throw ConfigError("tool profile needs a 'domain'");
    p.query_rate = kv.get_double("query_rate", 120.0);
    p.client_source = kv.get_or("client_source", "10.99.0.21");
    p.state_query_fraction = kv.get_double("state_query_fraction", 0.0);
    p.payload_path = kv.get_path("payload_path");
    p.rc4_key = kv.get_or("rc4_key", std::string(kDefaultRc4Key));
    return p;
}

/// Loads a benign profile file, or the built-in defaults for "benign".
inline BenignProfile load_benign_profile(const std::string& name_or_path) {
    if (name_or_path == "benign") return BenignProfile::defaults();
    if (!std::filesystem::exists(name_or_path))
        throw ConfigError("unknown profile '" + name_or_path +
                          "' (not 'benign' or a profile file)");
    const KeyValueFile kv = KeyValueFile::load(name_or_path);
    BenignProfile p = BenignProfile::defaults();
    if (const auto corpus = kv.get_list("domain_corpus"); !corpus.empty()) p.domain_corpus = corpus;
    const std::string vocab_path = kv.get_path("subdomain_vocab_path");
    if (!vocab_path.empty()) {
        std::ifstream in(vocab_path);
        if (!in) throw ConfigError("cannot open wordlist: " + vocab_path);
        p.subdomain_vocab.clear();
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            p.subdomain_vocab.push_back(line);
        }
        if (p.subdomain_vocab.empty()) throw ConfigError("wordlist is empty: " + vocab_path);
    }
    p.query_rate = kv.get_double("query_rate", p.query_rate);
    p.repeat_factor = kv.get_double("repeat_factor", p.repeat_factor);
    p.source_count = static_cast<int>(kv.get_int("source_count", p.source_count));
    p.error_rcode_fraction = kv.get_double("error_rcode_fraction", p.error_rcode_fraction);
    if (const auto mix = kv.get_list("qtype_mix"); !mix.empty()) {
        p.qtype_mix.clear();
        for (const auto& item : mix) {
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                throw ConfigError("qtype_mix entries look like 'A:0.7'");
            const QueryTypeInfo qi = query_type_from_string(item.substr(0, colon));
            if (qi.type == QueryType::Other)
                throw ConfigError("unknown qtype in qtype_mix: '" + item + "'");
            p.qtype_mix.push_back({qi.type, std::stod(item.substr(colon + 1))});
        }
    }
    return p;
}

}  // namespace dnscov
