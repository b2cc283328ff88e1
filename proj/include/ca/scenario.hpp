// scenario.hpp - problem description: carriers, users, run settings.

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ca/protocol.hpp"
#include "ca/utility.hpp"

namespace ca {

struct CarrierSpec {
  int carrier_id;
  double capacity;  // R_l
};

struct UserSpec {
  int ue_id;
  UtilityFunction utility;
  std::vector<int> coverage;  // carrier ids this UE is in range of
};

struct Settings {
  double delta = 1e-3;
  int max_iterations = 5000;
  double initial_bid = 1.0;
  DecayPolicy decay = DecayPolicy::exponential(10.0, 50.0);
  double solver_tol = kDefaultSolverTol;
};

struct Scenario {
  std::vector<CarrierSpec> carriers;
  std::vector<UserSpec> users;
  Settings settings;

  double total_capacity() const;
};

// Carries every violation found, not just the first.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Throws ValidationError listing all problems; returns normally when valid.
void validate(const Scenario& scenario);

}  // namespace ca
