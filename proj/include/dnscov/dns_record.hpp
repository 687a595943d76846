#pragma once

#include <arpa/inet.h>

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dnscov/errors.hpp"
#include "dnscov/time.hpp"

namespace dnscov {

/// DNS query types the engine distinguishes. Everything else is kept as
/// Other with its numeric code for audit and is always filtered out before
/// analysis.
enum class QueryType : std::uint8_t {
    A,
    AAAA,
    TXT,
    CNAME,
    MX,
    SRV,
    Null,
    Key,
    PTR,
    Other,
};

struct QueryTypeInfo {
    QueryType type = QueryType::Other;
    /// Numeric code carried only when type == Other (-1 for unknown strings).
    std::int32_t other_code = -1;

    bool operator==(const QueryTypeInfo& rhs) const {
        return type == rhs.type && (type != QueryType::Other || other_code == rhs.other_code);
    }
};

inline std::string_view to_string(QueryType t) {
    switch (t) {
        case QueryType::A: return "A";
        case QueryType::AAAA: return "AAAA";
        case QueryType::TXT: return "TXT";
        case QueryType::CNAME: return "CNAME";
        case QueryType::MX: return "MX";
        case QueryType::SRV: return "SRV";
        case QueryType::Null: return "NULL";
        case QueryType::Key: return "KEY";
        case QueryType::PTR: return "PTR";
        case QueryType::Other: return "OTHER";
    }
    return "OTHER";
}

inline QueryTypeInfo query_type_from_string(std::string_view s) {
    if (s == "A") return {QueryType::A, 0};
    if (s == "AAAA") return {QueryType::AAAA, 0};
    if (s == "TXT") return {QueryType::TXT, 0};
    if (s == "CNAME") return {QueryType::CNAME, 0};
    if (s == "MX") return {QueryType::MX, 0};
    if (s == "SRV") return {QueryType::SRV, 0};
    if (s == "NULL") return {QueryType::Null, 0};
    if (s == "KEY") return {QueryType::Key, 0};
    if (s == "PTR") return {QueryType::PTR, 0};
    return {QueryType::Other, -1};
}

/// One observed DNS query from the resolver log.
struct DnsQueryRecord {
    TimestampMs timestamp = 0;
    std::string source;       ///< querying host, IPv4 or IPv6 text form
    std::string qname;        ///< raw hostname, trailing dot stripped, case preserved
    QueryTypeInfo qtype;
    std::int32_t rcode = -1;  ///< -1 when the log had no response code
};

enum class LogFormat { CSV, JSONL };

inline std::optional<LogFormat> log_format_from_string(std::string_view s) {
    if (s == "csv" || s == "CSV") return LogFormat::CSV;
    if (s == "jsonl" || s == "JSONL") return LogFormat::JSONL;
    return std::nullopt;
}

namespace detail {

inline bool valid_address(const std::string& s) {
    std::array<unsigned char, sizeof(struct in6_addr)> buf{};
    return inet_pton(AF_INET, s.c_str(), buf.data()) == 1 ||
           inet_pton(AF_INET6, s.c_str(), buf.data()) == 1;
}

inline std::string normalize_qname(std::string_view raw) {
    std::string q(raw);
    if (!q.empty() && q.back() == '.') q.pop_back();
    return q;
}

}  // namespace detail

constexpr std::size_t kMaxQnameChars = 255;

/// Parses one log line into a record. CSV lines follow the column order
/// `timestamp,source,qname,qtype,rcode`; JSONL lines carry the same field
/// names. Unknown qtype strings map to Other(-1); a missing or empty rcode
/// maps to -1 so the response-code filter removes the record. Oversize
/// qnames (> 255 chars as read) are rejected, never truncated.
inline DnsQueryRecord parse_record(std::string_view line, LogFormat format,
                                   std::uint64_t line_no = 0) {
    std::string timestamp_s, source, qname_raw, qtype_s;
    std::string rcode_s;
    bool rcode_present = false;

    if (format == LogFormat::CSV) {
        std::array<std::string_view, 5> fields;
        std::size_t nfields = 0;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                if (nfields == fields.size())
                    throw ParseError("line", line_no, "expected 5 comma-separated fields");
                fields[nfields++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (nfields != 5) throw ParseError("line", line_no, "expected 5 comma-separated fields");
        timestamp_s = std::string(fields[0]);
        source = std::string(fields[1]);
        qname_raw = std::string(fields[2]);
        qtype_s = std::string(fields[3]);
        rcode_s = std::string(fields[4]);
        rcode_present = !rcode_s.empty();
    } else {
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw ParseError("line", line_no, "not a JSON object");
        auto fetch = [&](const char* key) -> std::string {
            auto it = j.find(key);
            if (it == j.end() || !it->is_string())
                throw ParseError(key, line_no, "missing or non-string field");
            return it->get<std::string>();
        };
        timestamp_s = fetch("timestamp");
        source = fetch("source");
        qname_raw = fetch("qname");
        qtype_s = fetch("qtype");
        auto it = j.find("rcode");
        if (it != j.end() && !it->is_null()) {
            if (!it->is_number_integer()) throw ParseError("rcode", line_no, "not an integer");
            rcode_s = std::to_string(it->get<std::int64_t>());
            rcode_present = true;
        }
    }

    DnsQueryRecord rec;
    auto ts = parse_rfc3339(timestamp_s);
    if (!ts) throw ParseError("timestamp", line_no, "not an RFC 3339 instant: '" + timestamp_s + "'");
    rec.timestamp = *ts;

    if (!detail::valid_address(source))
        throw ParseError("source", line_no, "not an IPv4/IPv6 address: '" + source + "'");
    rec.source = source;

    if (qname_raw.size() > kMaxQnameChars)
        throw ParseError("qname", line_no,
                         "oversize qname (" + std::to_string(qname_raw.size()) + " > " +
                             std::to_string(kMaxQnameChars) + " chars)");
    if (qname_raw.empty()) throw ParseError("qname", line_no, "empty qname");
    rec.qname = detail::normalize_qname(qname_raw);

    rec.qtype = query_type_from_string(qtype_s);

    if (rcode_present) {
        try {
            std::size_t used = 0;
            rec.rcode = std::stoi(rcode_s, &used);
            if (used != rcode_s.size()) throw std::invalid_argument(rcode_s);
        } catch (const std::exception&) {
            throw ParseError("rcode", line_no, "not an integer: '" + rcode_s + "'");
        }
    } else {
        rec.rcode = -1;
    }
    return rec;
}

inline constexpr std::string_view kCsvHeader = "timestamp,source,qname,qtype,rcode";

inline std::string format_record_csv(const DnsQueryRecord& rec) {
    std::string out = format_rfc3339(rec.timestamp);
    out += ',';
    out += rec.source;
    out += ',';
    out += rec.qname;
    out += ',';
    out += to_string(rec.qtype.type);
    out += ',';
    out += std::to_string(rec.rcode);
    return out;
}

inline std::string format_record_jsonl(const DnsQueryRecord& rec) {
    nlohmann::json j;
    j["timestamp"] = format_rfc3339(rec.timestamp);
    j["source"] = rec.source;
    j["qname"] = rec.qname;
    j["qtype"] = std::string(to_string(rec.qtype.type));
    j["rcode"] = rec.rcode;
    return j.dump();
}

struct LogReadResult {
    std::vector<DnsQueryRecord> records;
    std::uint64_t parse_errors = 0;
    std::vector<std::string> error_messages;  ///< capped; for diagnostics
};

/// Reads a whole log stream. A CSV header line is recognized and skipped.
/// When strict is true the first malformed line throws; otherwise bad lines
/// are counted and skipped.
inline LogReadResult read_log(std::istream& in, LogFormat format, bool strict = false) {
    LogReadResult out;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (format == LogFormat::CSV && line_no == 1 && line == kCsvHeader) continue;
        try {
            out.records.push_back(parse_record(line, format, line_no));
        } catch (const ParseError& e) {
            if (strict) throw;
            ++out.parse_errors;
            if (out.error_messages.size() < 20) out.error_messages.push_back(e.what());
        }
    }
    return out;
}

inline void write_log(std::ostream& os, const std::vector<DnsQueryRecord>& records,
                      LogFormat format) {
    if (format == LogFormat::CSV) {
        os << kCsvHeader << '\n';
        for (const auto& r : records) os << format_record_csv(r) << '\n';
    } else {
        for (const auto& r : records) os << format_record_jsonl(r) << '\n';
    }
}

}  // namespace dnscov
