#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dnscov {

/// Base class for all engine errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A log line could not be turned into a query record. Carries the
/// offending field and the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(std::string field, std::uint64_t line, const std::string& msg)
        : Error("line " + std::to_string(line) + ", field '" + field + "': " + msg),
          field_(std::move(field)),
          line_(line) {}

    const std::string& field() const noexcept { return field_; }
    std::uint64_t line() const noexcept { return line_; }

private:
    std::string field_;
    std::uint64_t line_;
};

/// A hostname violates the label grammar (empty label, label > 63 chars,
/// total length > 253).
class InvalidHostname : public Error {
public:
    explicit InvalidHostname(const std::string& msg) : Error(msg) {}
};

class EmptySubdomain : public Error {
public:
    EmptySubdomain() : Error("hostname has no subdomain labels") {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Solver hit the iteration cap before reaching the requested tolerance.
class NoConvergence : public Error {
public:
    explicit NoConvergence(std::uint64_t max_iter)
        : Error("solver did not converge within " + std::to_string(max_iter) + " iterations") {}
};

/// All training points are identical; no boundary can be estimated.
class DegenerateData : public Error {
public:
    DegenerateData() : Error("training data has zero variance") {}
};

class CorruptModel : public Error {
public:
    explicit CorruptModel(const std::string& msg) : Error("corrupt model file: " + msg) {}
};

class VersionMismatch : public Error {
public:
    explicit VersionMismatch(std::uint32_t got, std::uint32_t want)
        : Error("model file version " + std::to_string(got) + " not supported (expected " +
                std::to_string(want) + ")") {}
};

class EmptyBaseline : public Error {
public:
    EmptyBaseline() : Error("baseline distributions have not been built") {}
};

class InvalidCounts : public Error {
public:
    InvalidCounts(std::uint64_t n_s, std::uint64_t n_tot)
        : Error("invalid suspicious/total counts: n_s=" + std::to_string(n_s) +
                " n_tot=" + std::to_string(n_tot)) {}
};

class InsufficientData : public Error {
public:
    InsufficientData(std::size_t got, std::size_t need)
        : Error("insufficient training data: " + std::to_string(got) + " records after filtering, " +
                std::to_string(need) + " required") {}
};

class UnsupportedCodec : public Error {
public:
    explicit UnsupportedCodec(const std::string& name) : Error("unsupported codec: " + name) {}
};

class MissingGroundTruth : public Error {
public:
    explicit MissingGroundTruth(const std::string& msg) : Error(msg) {}
};

}  // namespace dnscov
