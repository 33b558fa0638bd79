#pragma once

#include <stdexcept>
#include <string>

namespace msarch {

// Failure categories. The CLI maps them onto exit codes.
enum class ErrorKind {
    Validation,  // precondition or configuration violated
    Numeric,     // divergent moments, unstable series, budget exhausted
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class PreconditionViolation : public Error {
public:
    explicit PreconditionViolation(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class MomentDiverges : public Error {
public:
    explicit MomentDiverges(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class SeriesUnstable : public Error {
public:
    explicit SeriesUnstable(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class BudgetExceeded : public Error {
public:
    explicit BudgetExceeded(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class DegenerateModulation : public Error {
public:
    explicit DegenerateModulation(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class UnsupportedMixture : public Error {
public:
    explicit UnsupportedMixture(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class ZeroVariance : public Error {
public:
    explicit ZeroVariance(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class NoFeasiblePoint : public Error {
public:
    explicit NoFeasiblePoint(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class NonPositivePrice : public Error {
public:
    explicit NonPositivePrice(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class WindowTooWide : public Error {
public:
    explicit WindowTooWide(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, long line)
        : Error(ErrorKind::Validation, "line " + std::to_string(line) + ": " + what), line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace msarch
