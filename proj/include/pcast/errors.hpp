#ifndef PCAST_ERRORS_HPP
#define PCAST_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcast {

// Input could not be decoded (bad CSV/JSON). Carries the offending line when known.
class ParseError : public std::runtime_error {
public:
  ParseError(std::string msg, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

// Input decoded fine but violates a domain invariant.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad configuration (CLI arguments, config files, parameter combinations).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace pcast

#endif
