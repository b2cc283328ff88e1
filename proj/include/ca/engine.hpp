// engine.hpp - synchronous round loop, trace recording, regime
// classification, and fluctuation diagnostics.
//
// A round n: every carrier consumes the bid vector w(n) and publishes a
// quote (price + stop flag); if all carriers stop the run terminates,
// otherwise every UE consumes the quotes and produces w(n+1). Everything is
// single-threaded and keyed by id, so a scenario maps to exactly one trace.

#pragma once

#include <map>
#include <utility>
#include <vector>

#include "ca/scenario.hpp"

namespace ca {

struct IterationRecord {
  int iteration = 0;
  std::map<std::pair<int, int>, double> bids;  // (ue_id, carrier_id) -> w
  std::map<int, double> prices;                // carrier_id -> p
  std::map<int, bool> stops;                   // carrier_id -> stop flag
};

struct RunTrace {
  std::vector<IterationRecord> records;
  std::map<std::pair<int, int>, double> final_rates;  // (ue_id, carrier_id)
  int iterations_used = 0;
  bool converged = false;

  std::map<int, double> user_totals() const;
  std::map<int, double> final_prices() const;
};

enum class Regime { Abundant, Scarce, Borderline };

const char* to_string(Regime r);

struct RegimeReport {
  // Sum of inflection rates of the users each carrier covers, vs R_l.
  std::map<int, double> carrier_inflection_sum;
  std::map<int, double> carrier_capacity;
  // Same sums grouped by exact coverage set, vs the summed capacity of that
  // set (users in the class can draw from nothing else).
  std::map<std::vector<int>, double> class_inflection_sum;
  std::map<std::vector<int>, double> class_capacity;
  Regime classification = Regime::Borderline;
  // Steady-state price bound a*d/(1-d) + a/2 maximized over the sigmoidal
  // users; +infinity when there are none.
  double price_bound = 0.0;
};

struct FluctuationMetric {
  double amplitude = 0.0;      // max over (ue, carrier) of max-min bid
  int sign_alternations = 0;   // direction flips of successive bid deltas
};

// Runs to global stop (every carrier converged in the same round) or to
// settings.max_iterations. Throws ValidationError on an invalid scenario.
RunTrace run(const Scenario& scenario);

// Abundant when every carrier's covered inflection sum is at most half its
// capacity; Scarce when some exclusive-coverage class outweighs the whole
// capacity it can reach; Borderline otherwise.
RegimeReport classify_regime(const Scenario& scenario);

// Oscillation over the last `window` iterations; 1 <= window <= #records.
FluctuationMetric detect_fluctuation(const RunTrace& trace, int window);

// The twelve-user two-carrier reference scenario: six utility profiles,
// two users each; users 1-6 reach carrier 1 only, users 7-12 reach both.
Scenario table1_scenario(double r1, double r2);

// Bitwise trace equality (used by the CLI's determinism check).
bool traces_identical(const RunTrace& lhs, const RunTrace& rhs);

}  // namespace ca
