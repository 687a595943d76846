#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "dnscov/dns_record.hpp"

using namespace dnscov;

TEST_CASE("csv record maps fields directly", "[dns_record]") {
    const auto rec =
        parse_record("2023-01-01T00:00:00.000Z,10.0.0.5,www.example.com,A,0", LogFormat::CSV, 1);
    CHECK(rec.timestamp == 1672531200000);
    CHECK(rec.source == "10.0.0.5");
    CHECK(rec.qname == "www.example.com");
    CHECK(rec.qtype.type == QueryType::A);
    CHECK(rec.rcode == 0);
}

TEST_CASE("oversize qname is rejected, not truncated", "[dns_record]") {
    const std::string big(300, 'a');
    const std::string line = "2023-01-01T00:00:00Z,10.0.0.5," + big + ".example.com,A,0";
    CHECK_THROWS_MATCHES(parse_record(line, LogFormat::CSV, 7), ParseError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("oversize qname") &&
                             Catch::Matchers::ContainsSubstring("line 7")));
}

TEST_CASE("NULL qtype is recognized", "[dns_record]") {
    const auto rec =
        parse_record("2023-01-01T00:00:00Z,10.0.0.5,z.teriava.com,NULL,0", LogFormat::CSV, 1);
    CHECK(rec.qtype.type == QueryType::Null);
    CHECK(rec.qname == "z.teriava.com");
}

TEST_CASE("unknown qtype maps to OTHER(-1)", "[dns_record]") {
    const auto rec =
        parse_record("2023-01-01T00:00:00Z,10.0.0.5,a.example.com,HINFO,0", LogFormat::CSV, 1);
    CHECK(rec.qtype.type == QueryType::Other);
    CHECK(rec.qtype.other_code == -1);
}

TEST_CASE("missing rcode becomes -1", "[dns_record]") {
    const auto rec =
        parse_record("2023-01-01T00:00:00Z,10.0.0.5,a.example.com,A,", LogFormat::CSV, 1);
    CHECK(rec.rcode == -1);
}

TEST_CASE("invalid source address names the field", "[dns_record]") {
    CHECK_THROWS_MATCHES(
        parse_record("2023-01-01T00:00:00Z,999.0.0.5,a.example.com,A,0", LogFormat::CSV, 3),
        ParseError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("source")));
    // IPv6 sources are accepted
    const auto rec =
        parse_record("2023-01-01T00:00:00Z,2001:db8::1,a.example.com,A,0", LogFormat::CSV, 1);
    CHECK(rec.source == "2001:db8::1");
}

TEST_CASE("malformed csv shape raises", "[dns_record]") {
    CHECK_THROWS_AS(parse_record("only,three,fields", LogFormat::CSV, 1), ParseError);
    CHECK_THROWS_AS(parse_record("a,b,c,d,e,f", LogFormat::CSV, 1), ParseError);
    CHECK_THROWS_AS(
        parse_record("not-a-time,10.0.0.5,a.example.com,A,0", LogFormat::CSV, 1), ParseError);
    CHECK_THROWS_AS(
        parse_record("2023-01-01T00:00:00Z,10.0.0.5,a.example.com,A,zero", LogFormat::CSV, 1),
        ParseError);
}

TEST_CASE("jsonl records parse with the same field names", "[dns_record]") {
    const auto rec = parse_record(
        R"({"timestamp":"2023-01-01T00:00:00.000Z","source":"10.0.0.5","qname":"www.example.com","qtype":"AAAA","rcode":0})",
        LogFormat::JSONL, 1);
    CHECK(rec.qtype.type == QueryType::AAAA);
    CHECK(rec.source == "10.0.0.5");

    const auto no_rcode = parse_record(
        R"({"timestamp":"2023-01-01T00:00:00Z","source":"10.0.0.5","qname":"a.example.com","qtype":"A"})",
        LogFormat::JSONL, 1);
    CHECK(no_rcode.rcode == -1);

    CHECK_THROWS_AS(parse_record("{not json", LogFormat::JSONL, 1), ParseError);
    CHECK_THROWS_AS(parse_record(R"({"timestamp":"2023-01-01T00:00:00Z"})", LogFormat::JSONL, 1),
                    ParseError);
}

TEST_CASE("trailing dot is normalized away, case preserved", "[dns_record]") {
    const auto rec =
        parse_record("2023-01-01T00:00:00Z,10.0.0.5,MiXeD.Example.COM.,A,0", LogFormat::CSV, 1);
    CHECK(rec.qname == "MiXeD.Example.COM");
}

TEST_CASE("log round trip through both formats", "[dns_record]") {
    std::vector<DnsQueryRecord> records;
    for (int i = 0; i < 20; ++i) {
        DnsQueryRecord r;
        r.timestamp = 1672531200000 + i * 1234;
        r.source = "10.0.0." + std::to_string(i + 1);
        r.qname = "host" + std::to_string(i) + ".example.com";
        r.qtype = {i % 2 ? QueryType::A : QueryType::TXT, 0};
        r.rcode = i % 5 == 0 ? 3 : 0;
        records.push_back(r);
    }
    for (const LogFormat fmt : {LogFormat::CSV, LogFormat::JSONL}) {
        std::stringstream ss;
        write_log(ss, records, fmt);
        const LogReadResult got = read_log(ss, fmt);
        CHECK(got.parse_errors == 0);
        REQUIRE(got.records.size() == records.size());
        for (std::size_t i = 0; i < records.size(); ++i) {
            CHECK(got.records[i].timestamp == records[i].timestamp);
            CHECK(got.records[i].qname == records[i].qname);
            CHECK(got.records[i].qtype.type == records[i].qtype.type);
            CHECK(got.records[i].rcode == records[i].rcode);
        }
    }
}

TEST_CASE("non-strict reads count bad lines and continue", "[dns_record]") {
    std::stringstream ss;
    ss << kCsvHeader << "\n"
       << "2023-01-01T00:00:00Z,10.0.0.5,a.example.com,A,0\n"
       << "garbage line\n"
       << "2023-01-01T00:00:01Z,10.0.0.5,b.example.com,A,0\n";
    const LogReadResult got = read_log(ss, LogFormat::CSV);
    CHECK(got.records.size() == 2);
    CHECK(got.parse_errors == 1);
}
