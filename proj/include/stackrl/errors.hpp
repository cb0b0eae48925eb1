#ifndef STACKRL_ERRORS_HPP_
#define STACKRL_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace stackrl {

// Bad user input: config values, shapes that do not chain, unknown keys.
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
  ConfigError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const { return line_; }

 private:
  int line_ = 0;
};

// A numerical or structural invariant broke at runtime (non-finite gradient,
// non-positive sigma, ...). The CLI maps this to exit code 3.
class InvariantViolation : public std::logic_error {
 public:
  explicit InvariantViolation(const std::string& what) : std::logic_error(what) {}
};

// I/O and format failures (checkpoint truncation, version mismatch).
class RuntimeFault : public std::runtime_error {
 public:
  explicit RuntimeFault(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stackrl

#endif  // STACKRL_ERRORS_HPP_
