#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hpl {

/// An argument lies outside the domain of the operation (negative mean,
/// k > bins, g2 <= 1 for the Schmidt number, ...).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// A ratio estimator has a zero denominator, usually because a count is
/// zero. Acquiring more pulses is the usual remedy.
class UndefinedResult : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The Fock-space truncation cannot be certified at the requested tolerance.
class TruncationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(std::size_t line, const std::string &what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

class OverflowError : public std::overflow_error {
  public:
    using std::overflow_error::overflow_error;
};

} // namespace hpl
