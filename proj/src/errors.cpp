// SPDX-License-Identifier: Apache-2.0
#include "spherization/errors.hpp"

namespace spherization {

std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::ConfigInvalid: return "config-invalid";
    case ErrorCategory::BudgetExceeded: return "budget-exceeded";
    case ErrorCategory::IntegrationDiverged: return "integration-diverged";
    case ErrorCategory::InvariantFailure: return "invariant-failure";
  }
  return "unknown";
}

}  // namespace spherization
