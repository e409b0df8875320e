#pragma once

#include <stdexcept>
#include <string>

namespace sdafc {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmptyInputError : std::runtime_error {
  explicit EmptyInputError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : std::invalid_argument {
  explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct PreconditionError : std::invalid_argument {
  explicit PreconditionError(const std::string& msg)
      : std::invalid_argument(msg) {}
};

struct ContractError : std::logic_error {
  explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

// Thrown when the pure per-class quota of a non-IID partition cannot be
// filled; carries the largest non-IID level the dataset supports.
struct QuotaShortfallError : std::runtime_error {
  QuotaShortfallError(const std::string& msg, double achievable)
      : std::runtime_error(msg), achievable_p(achievable) {}
  double achievable_p;
};

struct TrainingDivergedError : std::runtime_error {
  TrainingDivergedError(const std::string& msg, int at_epoch)
      : std::runtime_error(msg), epoch(at_epoch) {}
  int epoch;
};

struct NumericOverflowError : std::runtime_error {
  explicit NumericOverflowError(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace sdafc
