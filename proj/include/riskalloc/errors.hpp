#pragma once

#include <stdexcept>
#include <string>

namespace riskalloc {

/// Raised when a text input (CSV table, tree file) is malformed.
/// Carries the 1-based line number of the offending record.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& source, int line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Raised when an iterative solver exhausts its iteration budget without
/// meeting its stopping rule.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, int iterations, double residual)
        : std::runtime_error(what), iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

}  // namespace riskalloc
