#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcmot {

/// Malformed input file content. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Missing or invalid configuration (CLI flags, config files, seqinfo keys).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Violated precondition or invariant of a library call.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace mcmot
