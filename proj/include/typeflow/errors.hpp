#pragma once

#include <stdexcept>
#include <string>

namespace typeflow {

// Work would exceed a configured enumeration or size budget.
struct BudgetError : std::runtime_error {
  explicit BudgetError(const std::string& m) : std::runtime_error(m) {}
};

// A rate whose e^{nR} is not an admissible set size.
struct RateError : std::invalid_argument {
  explicit RateError(const std::string& m) : std::invalid_argument(m) {}
};

}  // namespace typeflow
