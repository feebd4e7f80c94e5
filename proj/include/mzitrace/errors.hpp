#ifndef MZITRACE_ERRORS_HPP
#define MZITRACE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mzitrace {

/// Bad input to an operation: unknown labels, length mismatches, violated preconditions.
class domain_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A quantity the caller asked for does not exist for these amplitudes
/// (vanishing post-selection amplitude, degenerate partition, zero density).
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class capacity_error : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Scenario text could not be turned into a valid scenario.
class spec_error : public std::runtime_error {
public:
    spec_error(const std::string& message, std::size_t line = 0, std::size_t column = 0)
        : std::runtime_error(line == 0 ? message
                                       : "line " + std::to_string(line) + ", column " +
                                             std::to_string(column) + ": " + message),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

} // namespace mzitrace

#endif // MZITRACE_ERRORS_HPP
