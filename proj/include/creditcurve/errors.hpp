#pragma once

#include <stdexcept>
#include <string>

namespace credit {

/// Argument outside the mathematical domain of an operation (negative tenor,
/// recovery >= 1, probabilities not summing to one, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure could not produce an answer (no bracketing
/// interval, no positive-hazard solution, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input. `line` is 1-based, 0 when the
/// error is not tied to a particular line.
class InputError : public std::runtime_error {
public:
    InputError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace credit
