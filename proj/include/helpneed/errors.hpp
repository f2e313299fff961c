#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace helpneed {

// Base for every error raised by the engine. ValidationError marks bad user
// input (the CLI maps it to exit code 1); everything else is internal.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class SyntaxError : public ValidationError {
public:
    SyntaxError(std::size_t position, std::string expected, const std::string& text)
        : ValidationError("syntax error at position " + std::to_string(position) + " in \"" + text +
                          "\": expected " + expected),
          position_(position),
          expected_(std::move(expected)) {}
    std::size_t position() const { return position_; }
    const std::string& expected() const { return expected_; }

private:
    std::size_t position_;
    std::string expected_;
};

class SchemaError : public ValidationError {
public:
    SchemaError(std::size_t line, std::string field, const std::string& detail = {})
        : ValidationError("line " + std::to_string(line) + ": invalid field '" + field + "'" +
                          (detail.empty() ? std::string{} : ": " + detail)),
          line_(line),
          field_(std::move(field)) {}
    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

class ChainBreak : public ValidationError {
public:
    ChainBreak(std::size_t line, const std::string& detail)
        : ValidationError("line " + std::to_string(line) + ": chain break: " + detail), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class FormatError : public ValidationError {
public:
    FormatError(int version, std::size_t offset, const std::string& detail)
        : ValidationError("network file format error (version " + std::to_string(version) + ", offset " +
                          std::to_string(offset) + "): " + detail),
          version_(version),
          offset_(offset) {}
    int version() const { return version_; }
    std::size_t offset() const { return offset_; }

private:
    int version_;
    std::size_t offset_;
};

class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class NoGoal : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    explicit NonConvergence(long max_iterations)
        : Error("value iteration did not converge within " + std::to_string(max_iterations) + " iterations") {}
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class UnknownState : public Error {
public:
    explicit UnknownState(const std::string& key) : Error("state not in quality table: " + key), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

class DegenerateQuartiles : public Error {
public:
    using Error::Error;
};

class ZeroVariance : public Error {
public:
    using Error::Error;
};

class SingleClass : public Error {
public:
    using Error::Error;
};

class ManifestMismatch : public Error {
public:
    using Error::Error;
};

class TooFewGroups : public Error {
public:
    using Error::Error;
};

class NoSuccessor : public Error {
public:
    using Error::Error;
};

class UnsolvableProblem : public Error {
public:
    using Error::Error;
};

}  // namespace helpneed
