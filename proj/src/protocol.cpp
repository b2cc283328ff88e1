// protocol.cpp - agent update rules for the bid/price iteration.

#include "ca/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ca {

namespace {

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0)
    throw std::invalid_argument(std::string(name) +
                                " must be finite and positive");
}

}  // namespace

DecayPolicy DecayPolicy::off() { return DecayPolicy(); }

DecayPolicy DecayPolicy::exponential(double h1, double h2) {
  require_positive(h1, "h1");
  require_positive(h2, "h2");
  DecayPolicy p;
  p.kind_ = Kind::Exponential;
  p.h1_ = h1;
  p.h2_ = h2;
  return p;
}

DecayPolicy DecayPolicy::rational(double h3) {
  require_positive(h3, "h3");
  DecayPolicy p;
  p.kind_ = Kind::Rational;
  p.h3_ = h3;
  return p;
}

double decay_limit(const DecayPolicy& policy, int n) {
  if (n < 1) throw std::invalid_argument("decay_limit: n must be >= 1");
  switch (policy.kind()) {
    case DecayPolicy::Kind::Off:
      return std::numeric_limits<double>::infinity();
    case DecayPolicy::Kind::Exponential:
      return policy.h1() * std::exp(-static_cast<double>(n) / policy.h2());
    case DecayPolicy::Kind::Rational:
      return policy.h3() / static_cast<double>(n);
  }
  throw std::logic_error("decay_limit: unknown policy kind");
}

UserAgentState make_user_agent(int ue_id, const UtilityFunction& utility,
                               std::vector<int> coverage,
                               const DecayPolicy& decay, double initial_bid,
                               double demand_cap, double solver_tol) {
  if (coverage.empty())
    throw std::invalid_argument("user agent needs at least one carrier");
  std::sort(coverage.begin(), coverage.end());
  if (std::adjacent_find(coverage.begin(), coverage.end()) != coverage.end())
    throw std::invalid_argument("duplicate carrier in coverage");
  require_positive(initial_bid, "initial_bid");
  require_positive(demand_cap, "demand_cap");
  require_positive(solver_tol, "solver_tol");
  UserAgentState s{ue_id,       utility,    std::move(coverage), {},
                   decay,       initial_bid, demand_cap,         solver_tol};
  for (int l : s.coverage) s.prev_bids[l] = 0.0;
  return s;
}

CarrierAgentState make_carrier_agent(int carrier_id, double capacity,
                                     const std::vector<int>& covered_ues,
                                     double delta) {
  require_positive(capacity, "capacity");
  require_positive(delta, "delta");
  CarrierAgentState s{carrier_id, capacity, {}, {}, delta, false};
  for (int ue : covered_ues) {
    if (!s.prev_bids.emplace(ue, 0.0).second)
      throw std::invalid_argument("duplicate ue in carrier coverage");
  }
  return s;
}

std::vector<Bid> emit_initial_bids(UserAgentState& state) {
  std::vector<Bid> bids;
  bids.reserve(state.coverage.size());
  for (int l : state.coverage) {
    bids.push_back(Bid{state.ue_id, l, state.initial_bid, 1});
    state.prev_bids[l] = state.initial_bid;
  }
  return bids;
}

std::vector<Bid> ue_update(UserAgentState& state,
                           const std::vector<PriceQuote>& quotes, int n) {
  if (n < 1) throw std::invalid_argument("ue_update: n must be >= 1");

  std::map<int, double> price;  // carrier -> quoted price
  for (const PriceQuote& q : quotes) {
    if (!std::isfinite(q.price) || q.price <= 0.0)
      throw ProtocolError("ue " + std::to_string(state.ue_id) +
                          ": non-positive price from carrier " +
                          std::to_string(q.carrier_id));
    if (!price.emplace(q.carrier_id, q.price).second)
      throw ProtocolError("ue " + std::to_string(state.ue_id) +
                          ": duplicate quote from carrier " +
                          std::to_string(q.carrier_id));
  }
  for (int l : state.coverage) {
    if (!price.count(l))
      throw ProtocolError("ue " + std::to_string(state.ue_id) +
                          ": missing quote from in-range carrier " +
                          std::to_string(l));
  }
  if (price.size() != state.coverage.size())
    throw ProtocolError("ue " + std::to_string(state.ue_id) +
                        ": quote from carrier outside coverage");

  // Cheapest-first carrier order; equal prices fall back to carrier id so
  // runs stay deterministic.
  std::vector<std::pair<double, int>> order;
  order.reserve(state.coverage.size());
  for (int l : state.coverage) order.emplace_back(price.at(l), l);
  std::sort(order.begin(), order.end());

  const double limit = decay_limit(state.decay, n);
  std::map<int, double> emitted;
  double covered = 0.0;  // demand already placed on cheaper carriers
  for (const auto& [p, l] : order) {
    const double total =
        state.utility.inverse_log_slope(p, state.demand_cap, state.solver_tol);
    const double increment = std::max(0.0, total - covered);
    covered += increment;
    double w = p * increment;
    const double prev = state.prev_bids.at(l);
    if (std::abs(w - prev) > limit)
      w = prev + std::copysign(limit, w - prev);
    emitted[l] = w;
  }

  std::vector<Bid> bids;
  bids.reserve(state.coverage.size());
  for (int l : state.coverage) {  // stable output order: ascending carrier id
    const double w = emitted.at(l);
    bids.push_back(Bid{state.ue_id, l, w, n});
    state.prev_bids[l] = w;
  }
  return bids;
}

PriceQuote carrier_update(CarrierAgentState& state,
                          const std::vector<Bid>& bids, int n) {
  if (n < 1) throw std::invalid_argument("carrier_update: n must be >= 1");

  std::map<int, double> received;
  for (const Bid& b : bids) {
    if (!std::isfinite(b.amount) || b.amount < 0.0)
      throw ProtocolError("carrier " + std::to_string(state.carrier_id) +
                          ": negative bid from ue " + std::to_string(b.ue_id));
    if (!state.prev_bids.count(b.ue_id))
      throw ProtocolError("carrier " + std::to_string(state.carrier_id) +
                          ": bid from uncovered ue " + std::to_string(b.ue_id));
    if (!received.emplace(b.ue_id, b.amount).second)
      throw ProtocolError("carrier " + std::to_string(state.carrier_id) +
                          ": duplicate bid from ue " + std::to_string(b.ue_id));
  }
  if (received.size() != state.prev_bids.size())
    throw ProtocolError("carrier " + std::to_string(state.carrier_id) +
                        ": missing bid from a covered ue");

  bool converged = true;
  double total = 0.0;
  for (const auto& [ue, w] : received) {
    if (std::abs(w - state.prev_bids.at(ue)) >= state.delta) converged = false;
    total += w;
  }

  const double p = std::max(total / state.capacity, kPriceFloor);
  state.price_history.push_back(p);
  for (const auto& [ue, w] : received) state.prev_bids[ue] = w;
  state.stopped = converged;
  return PriceQuote{state.carrier_id, p, n, converged};
}

std::map<int, double> final_allocation(const CarrierAgentState& carrier) {
  if (!carrier.stopped)
    throw std::logic_error("final_allocation: carrier has not stopped");
  if (carrier.price_history.empty())
    throw std::logic_error("final_allocation: no published price");
  const double p = carrier.price_history.back();
  std::map<int, double> rates;
  for (const auto& [ue, w] : carrier.prev_bids) rates[ue] = w / p;
  return rates;
}

}  // namespace ca
