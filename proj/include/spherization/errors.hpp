// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spherization {

// Error categories double as CLI exit codes.
enum class ErrorCategory : int {
  ConfigInvalid = 2,
  BudgetExceeded = 3,
  IntegrationDiverged = 4,
  InvariantFailure = 5,
};

std::string_view category_name(ErrorCategory c);

class LabError : public std::runtime_error {
 public:
  LabError(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

inline LabError config_error(const std::string& what) {
  return {ErrorCategory::ConfigInvalid, what};
}
inline LabError budget_error(const std::string& what) {
  return {ErrorCategory::BudgetExceeded, what};
}
inline LabError divergence_error(const std::string& what) {
  return {ErrorCategory::IntegrationDiverged, what};
}
inline LabError invariant_error(const std::string& what) {
  return {ErrorCategory::InvariantFailure, what};
}

}  // namespace spherization
