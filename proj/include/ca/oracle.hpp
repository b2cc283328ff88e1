// oracle.hpp - centralized brute-force reference solver.
//
// Validates the distributed algorithm's fixed point without sharing any of
// its machinery: per-user totals are enumerated on a regular grid, carrier
// feasibility is enforced combinatorially, and the best total vector is
// split into a per-carrier matrix by integral max-flow. The only thing it
// shares with the system under test is the utility evaluation.

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ca/engine.hpp"
#include "ca/scenario.hpp"

namespace ca {

struct AllocationMatrix {
  std::map<std::pair<int, int>, double> entries;  // (carrier_id, ue_id) -> r

  std::map<int, double> user_totals() const;
};

class FeasibilityError : public std::runtime_error {
 public:
  explicit FeasibilityError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Sum of log U_i over user totals. Throws FeasibilityError (listing every
// violated constraint) on coverage violations, negative entries, carrier
// overruns beyond 1e-9 relative slack, or any zero user total.
double primal_objective(const Scenario& scenario,
                        const AllocationMatrix& alloc);

// Exhaustive maximization of the primal objective over per-user total rates
// in multiples of `resolution` (minimum one step each, so log U stays
// finite), subject to every carrier-subset capacity bound. Ties in the
// objective resolve to the lexicographically smallest total vector in
// ascending ue_id order. Refuses grids whose feasible point count exceeds
// 1e8.
AllocationMatrix grid_solve(const Scenario& scenario, double resolution);

struct CompareReport {
  double max_abs_dev = 0.0;   // over per-user totals
  double mean_abs_dev = 0.0;
  double objective_gap = 0.0;  // distributed minus oracle
};

// Final-rate matrix of a trace in oracle keying.
AllocationMatrix to_allocation(const RunTrace& trace);

CompareReport compare(const Scenario& scenario, const RunTrace& trace,
                      const AllocationMatrix& oracle_alloc);

}  // namespace ca
