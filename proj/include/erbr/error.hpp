#pragma once

#include <stdexcept>
#include <string>

namespace erbr {

// Base for every error raised by the library. Model diagnoses (an input that
// is well formed but not explained by the model) are returned as values, not
// thrown.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or mismatched structure: bad partitions, wrong vector lengths,
// state spaces that do not match.
class StructuralError : public Error {
public:
    using Error::Error;
};

// Numeric argument outside the domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// A partition needed by the support construction is absent from a collection.
class MissingDataError : public Error {
public:
    MissingDataError(const std::string& what, std::string needed)
        : Error(what), needed_(std::move(needed)) {}
    const std::string& needed_partition() const noexcept { return needed_; }

private:
    std::string needed_;
};

// Alternative chains through a collection disagree beyond tolerance.
class ConsistencyError : public Error {
public:
    ConsistencyError(const std::string& what, double discrepancy)
        : Error(what), discrepancy_(discrepancy) {}
    double discrepancy() const noexcept { return discrepancy_; }

private:
    double discrepancy_;
};

// A binary partition whose induced probability is 1/2 cannot match an
// empirical value other than 1/2 for any parameter.
class NoExactFit : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0, std::string field = {})
        : Error(decorate(what, line, field)), message_(what), line_(line), field_(std::move(field)) {}
    const std::string& message() const noexcept { return message_; }  // without location
    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    static std::string decorate(const std::string& what, std::size_t line, const std::string& field) {
        std::string out = what;
        if (line > 0) out += " (line " + std::to_string(line) + ")";
        if (!field.empty()) out += " [field '" + field + "']";
        return out;
    }
    std::string message_;
    std::size_t line_;
    std::string field_;
};

class ConfigurationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace erbr
