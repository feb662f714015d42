#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rimk {

// Exit codes used by the command-line driver.
enum class ExitCode : int { Success = 0, Usage = 2, Io = 3, Numerical = 4 };

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual ExitCode exit_code() const noexcept = 0;
};

/// Bad arguments: dimension mismatch, invalid index sets, out-of-range parameters.
class UsageError : public Error {
public:
    using Error::Error;
    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::Usage; }
};

/// A run cannot be configured, e.g. no reference solution is obtainable.
class ConfigError : public UsageError {
public:
    using UsageError::UsageError;
};

/// A dense fallback was requested on a problem above the desk-scale size guard.
class CapacityExceeded : public UsageError {
public:
    using UsageError::UsageError;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::Io; }
    /// 1-based line of the offending input, 0 when not tied to a line.
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class UnsupportedFormat : public IoError {
public:
    using IoError::IoError;
};

/// Floating-point breakdown of a quantity that is positive in exact arithmetic.
class NumericalBreakdown : public Error {
public:
    NumericalBreakdown(const std::string& what, std::size_t index)
        : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

    [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::Numerical; }
    /// Pivot or scalar position where positivity failed.
    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

}  // namespace rimk
