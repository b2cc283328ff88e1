// scenario.cpp - scenario validation.

#include "ca/scenario.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace ca {

double Scenario::total_capacity() const {
  double sum = 0.0;
  for (const CarrierSpec& c : carriers) sum += c.capacity;
  return sum;
}

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::ostringstream out;
  out << "invalid scenario:";
  for (const std::string& p : parts) out << "\n  - " << p;
  return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

void validate(const Scenario& scenario) {
  std::vector<std::string> v;

  if (scenario.carriers.empty()) v.push_back("no carriers");
  if (scenario.users.empty()) v.push_back("no users");

  std::set<int> carrier_ids;
  for (const CarrierSpec& c : scenario.carriers) {
    if (!carrier_ids.insert(c.carrier_id).second)
      v.push_back("duplicate carrier_id " + std::to_string(c.carrier_id));
    if (!std::isfinite(c.capacity) || c.capacity <= 0.0)
      v.push_back("carrier " + std::to_string(c.carrier_id) +
                  ": capacity must be finite and positive");
  }

  std::set<int> ue_ids;
  for (const UserSpec& u : scenario.users) {
    const std::string who = "ue " + std::to_string(u.ue_id);
    if (!ue_ids.insert(u.ue_id).second)
      v.push_back("duplicate ue_id " + std::to_string(u.ue_id));
    if (u.coverage.empty()) v.push_back(who + ": empty coverage");
    std::set<int> seen;
    for (int l : u.coverage) {
      if (!seen.insert(l).second)
        v.push_back(who + ": duplicate carrier " + std::to_string(l) +
                    " in coverage");
      else if (!carrier_ids.count(l))
        v.push_back(who + ": coverage references missing carrier " +
                    std::to_string(l));
    }
  }

  const Settings& s = scenario.settings;
  if (!std::isfinite(s.delta) || s.delta <= 0.0)
    v.push_back("settings: delta must be finite and positive");
  if (s.max_iterations < 1) v.push_back("settings: max_iterations must be >= 1");
  if (!std::isfinite(s.initial_bid) || s.initial_bid <= 0.0)
    v.push_back("settings: initial_bid must be finite and positive");
  if (!std::isfinite(s.solver_tol) || s.solver_tol <= 0.0)
    v.push_back("settings: solver_tol must be finite and positive");

  if (!v.empty()) throw ValidationError(std::move(v));
}

}  // namespace ca
