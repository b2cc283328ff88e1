// protocol.hpp - bid/price message types and the two agent update rules
//
// One round of the distributed allocation is two pure state transitions:
//   carrier_update: bids in, shadow price quote out (price = sum of bids / R,
//                   stop flag when every bid moved by less than delta)
//   ue_update:      quotes in, one bid per in-range carrier out (demand from
//                   inverse log-slope at the cheapest prices, per-iteration
//                   bid movement capped by the fluctuation-decay limit)
// Both take their state by value-in/value-out style (mutate a caller-owned
// state struct) and are deterministic.

#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ca/utility.hpp"

namespace ca {

// Published price when a carrier receives an all-zero bid vector; keeps the
// UE subproblem (which needs price > 0) defined on degenerate rounds.
inline constexpr double kPriceFloor = 1e-9;

class ProtocolError : public std::runtime_error {
 public:
  explicit ProtocolError(const std::string& what)
      : std::runtime_error(what) {}
};

struct Bid {
  int ue_id = 0;
  int carrier_id = 0;
  double amount = 0.0;  // w_{li}, price*rate units
  int iteration = 0;
};

struct PriceQuote {
  int carrier_id = 0;
  double price = 0.0;  // p_l, per unit rate
  int iteration = 0;
  bool stop = false;
};

// Per-iteration cap on bid movement. Off disables the cap; the other two
// shrink it monotonically so persistent oscillation is forced to settle.
class DecayPolicy {
 public:
  enum class Kind { Off, Exponential, Rational };

  static DecayPolicy off();
  static DecayPolicy exponential(double h1, double h2);  // h1*e^{-n/h2}
  static DecayPolicy rational(double h3);                // h3/n

  Kind kind() const { return kind_; }
  double h1() const { return h1_; }
  double h2() const { return h2_; }
  double h3() const { return h3_; }

 private:
  DecayPolicy() = default;
  Kind kind_ = Kind::Off;
  double h1_ = 0.0, h2_ = 0.0, h3_ = 0.0;
};

// Cap value at iteration n >= 1; +infinity when the policy is Off.
double decay_limit(const DecayPolicy& policy, int n);

struct UserAgentState {
  int ue_id;
  UtilityFunction utility;
  std::vector<int> coverage;            // in-range carrier ids, ascending
  std::map<int, double> prev_bids;      // carrier -> w(n-1), zero at start
  DecayPolicy decay;
  double initial_bid;
  double demand_cap;                    // r_cap for inverse_log_slope
  double solver_tol;
};

struct CarrierAgentState {
  int carrier_id;
  double capacity;                      // R_l
  std::map<int, double> prev_bids;      // ue -> w(n-1), zero at start
  std::vector<double> price_history;
  double delta;                         // convergence threshold on bid moves
  bool stopped;
};

UserAgentState make_user_agent(int ue_id, const UtilityFunction& utility,
                               std::vector<int> coverage,
                               const DecayPolicy& decay, double initial_bid,
                               double demand_cap,
                               double solver_tol = kDefaultSolverTol);

CarrierAgentState make_carrier_agent(int carrier_id, double capacity,
                                     const std::vector<int>& covered_ues,
                                     double delta);

// Opening bids (iteration 1): the configured initial bid to every in-range
// carrier, uncapped. Updates prev_bids.
std::vector<Bid> emit_initial_bids(UserAgentState& state);

// Algorithm: sort quoted prices ascending (ties by carrier id); walk the
// carriers cheapest-first, asking the utility for its total demand at each
// price and bidding price * (demand not yet covered by cheaper carriers);
// cap each bid's movement from the previous one by decay_limit(decay, n).
// Emits exactly one bid (possibly zero) per in-range carrier.
std::vector<Bid> ue_update(UserAgentState& state,
                           const std::vector<PriceQuote>& quotes, int n);

// Convergence test against the previously received bids, then the shadow
// price for this round's bids: p = max(sum/R, kPriceFloor). The price is
// computed and recorded on stop rounds too, so allocations always divide a
// bid vector by the price derived from that same vector.
PriceQuote carrier_update(CarrierAgentState& state,
                          const std::vector<Bid>& bids, int n);

// Rates from the final round: r = last bid / last price. Requires the
// carrier to have stopped.
std::map<int, double> final_allocation(const CarrierAgentState& carrier);

}  // namespace ca
