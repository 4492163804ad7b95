#ifndef CFR_ERRORS_HPP_
#define CFR_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace cfr {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A caller broke an operation's precondition (shape mismatch, bad argument).
class ContractError : public Error {
public:
  explicit ContractError(const std::string& msg) : Error(msg) {}
};

/// Bad or inconsistent run configuration (unknown key, invalid value).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Filesystem / serialization failure. Carries the offending path in the message.
class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

/// A forward or backward pass produced a non-finite value. Names the op.
class NumericError : public Error {
public:
  NumericError(const std::string& op, const std::string& msg)
      : Error("non-finite value in op '" + op + "': " + msg), op_name(op) {}
  std::string op_name;
};

}  // namespace cfr

#define CFR_CHECK(cond, msg)                              \
  do {                                                    \
    if (!(cond)) throw ::cfr::ContractError(msg);         \
  } while (0)

#endif  // CFR_ERRORS_HPP_
