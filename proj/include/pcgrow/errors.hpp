#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pcg {

// Bad arguments, out-of-domain values, contract violations. CLI exit code 2.
class ArgError : public std::runtime_error {
public:
    explicit ArgError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files. `line` is the 1-based offset of the offending line.
// CLI exit code 3.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int64_t line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    int64_t line() const { return line_; }

private:
    int64_t line_;
};

// Numeric failures such as a -inf likelihood under the labeled head.
// CLI exit code 1.
class NumericError : public std::runtime_error {
public:
    NumericError(const std::string& msg, int64_t sample_index)
        : std::runtime_error(msg + " (sample " + std::to_string(sample_index) + ")"),
          sample_(sample_index) {}
    int64_t sample_index() const { return sample_; }

private:
    int64_t sample_;
};

}  // namespace pcg
