// engine.cpp - round loop, regime classification, fluctuation metric.

#include "ca/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ca {

std::map<int, double> RunTrace::user_totals() const {
  std::map<int, double> totals;
  for (const auto& [key, r] : final_rates) totals[key.first] += r;
  return totals;
}

std::map<int, double> RunTrace::final_prices() const {
  if (records.empty()) return {};
  return records.back().prices;
}

const char* to_string(Regime r) {
  switch (r) {
    case Regime::Abundant:
      return "Abundant";
    case Regime::Scarce:
      return "Scarce";
    case Regime::Borderline:
      return "Borderline";
  }
  return "?";
}

RunTrace run(const Scenario& scenario) {
  validate(scenario);
  const Settings& st = scenario.settings;
  const double r_cap = scenario.total_capacity();

  std::map<int, std::vector<int>> covered_ues;
  for (const UserSpec& u : scenario.users)
    for (int l : u.coverage) covered_ues[l].push_back(u.ue_id);

  std::map<int, CarrierAgentState> carriers;
  for (const CarrierSpec& c : scenario.carriers)
    carriers.emplace(c.carrier_id,
                     make_carrier_agent(c.carrier_id, c.capacity,
                                        covered_ues[c.carrier_id], st.delta));

  std::map<int, UserAgentState> users;
  for (const UserSpec& u : scenario.users)
    users.emplace(u.ue_id,
                  make_user_agent(u.ue_id, u.utility, u.coverage, st.decay,
                                  st.initial_bid, r_cap, st.solver_tol));

  std::map<int, std::vector<Bid>> inbox;  // carrier -> this round's bids
  for (auto& [uid, ua] : users)
    for (const Bid& b : emit_initial_bids(ua)) inbox[b.carrier_id].push_back(b);

  RunTrace trace;
  for (int n = 1; n <= st.max_iterations; ++n) {
    IterationRecord rec;
    rec.iteration = n;
    bool all_stop = true;
    std::map<int, PriceQuote> quotes;
    for (auto& [lid, agent] : carriers) {
      const std::vector<Bid>& bids = inbox[lid];
      for (const Bid& b : bids) rec.bids[{b.ue_id, lid}] = b.amount;
      const PriceQuote q = carrier_update(agent, bids, n);
      quotes[lid] = q;
      rec.prices[lid] = q.price;
      rec.stops[lid] = q.stop;
      all_stop = all_stop && q.stop;
    }
    trace.records.push_back(std::move(rec));
    trace.iterations_used = n;

    if (all_stop) {
      trace.converged = true;
      for (const auto& [lid, agent] : carriers)
        for (const auto& [ue, r] : final_allocation(agent))
          trace.final_rates[{ue, lid}] = r;
      break;
    }
    if (n == st.max_iterations) {
      // Iteration cap: report the last iterate through the same division.
      for (const auto& [lid, agent] : carriers) {
        const double p = agent.price_history.back();
        for (const auto& [ue, w] : agent.prev_bids)
          trace.final_rates[{ue, lid}] = w / p;
      }
      break;
    }

    inbox.clear();
    for (auto& [uid, ua] : users) {
      std::vector<PriceQuote> qs;
      qs.reserve(ua.coverage.size());
      for (int l : ua.coverage) qs.push_back(quotes.at(l));
      for (const Bid& b : ue_update(ua, qs, n + 1))
        inbox[b.carrier_id].push_back(b);
    }
  }
  return trace;
}

RegimeReport classify_regime(const Scenario& scenario) {
  validate(scenario);
  RegimeReport rep;
  for (const CarrierSpec& c : scenario.carriers) {
    rep.carrier_capacity[c.carrier_id] = c.capacity;
    rep.carrier_inflection_sum[c.carrier_id] = 0.0;
  }

  bool any_sigmoidal = false;
  double bound = 0.0;
  for (const UserSpec& u : scenario.users) {
    const double rinf = u.utility.inflection_rate();
    std::vector<int> cls = u.coverage;
    std::sort(cls.begin(), cls.end());
    for (int l : cls) rep.carrier_inflection_sum[l] += rinf;
    rep.class_inflection_sum[cls] += rinf;
    if (!rep.class_capacity.count(cls)) {
      double sum = 0.0;
      for (int l : cls) sum += rep.carrier_capacity.at(l);
      rep.class_capacity[cls] = sum;
    }
    if (u.utility.kind() == UtilityFunction::Kind::Sigmoidal) {
      any_sigmoidal = true;
      bound = std::max(bound, u.utility.steady_price_bound());
    }
  }
  rep.price_bound =
      any_sigmoidal ? bound : std::numeric_limits<double>::infinity();

  bool abundant = true;
  for (const auto& [lid, sum] : rep.carrier_inflection_sum)
    if (sum > 0.5 * rep.carrier_capacity.at(lid)) abundant = false;
  bool scarce = false;
  for (const auto& [cls, sum] : rep.class_inflection_sum)
    if (sum > rep.class_capacity.at(cls)) scarce = true;

  rep.classification = abundant  ? Regime::Abundant
                       : scarce ? Regime::Scarce
                                : Regime::Borderline;
  return rep;
}

FluctuationMetric detect_fluctuation(const RunTrace& trace, int window) {
  if (window < 1 ||
      static_cast<size_t>(window) > trace.records.size())
    throw std::invalid_argument("detect_fluctuation: bad window");

  const size_t start = trace.records.size() - static_cast<size_t>(window);
  std::map<std::pair<int, int>, std::vector<double>> series;
  for (size_t i = start; i < trace.records.size(); ++i)
    for (const auto& [key, w] : trace.records[i].bids)
      series[key].push_back(w);

  FluctuationMetric m;
  for (const auto& [key, ws] : series) {
    const auto [lo, hi] = std::minmax_element(ws.begin(), ws.end());
    m.amplitude = std::max(m.amplitude, *hi - *lo);
    for (size_t i = 2; i < ws.size(); ++i) {
      const double d0 = ws[i - 1] - ws[i - 2];
      const double d1 = ws[i] - ws[i - 1];
      if (d0 * d1 < 0.0) ++m.sign_alternations;
    }
  }
  return m;
}

Scenario table1_scenario(double r1, double r2) {
  Scenario s;
  s.carriers = {{1, r1}, {2, r2}};
  const UtilityFunction profiles[6] = {
      UtilityFunction::sigmoidal(5.0, 10.0),
      UtilityFunction::sigmoidal(3.0, 20.0),
      UtilityFunction::sigmoidal(1.0, 30.0),
      UtilityFunction::logarithmic(15.0, 100.0),
      UtilityFunction::logarithmic(3.0, 100.0),
      UtilityFunction::logarithmic(0.5, 100.0),
  };
  for (int i = 0; i < 6; ++i)
    s.users.push_back(UserSpec{i + 1, profiles[i], {1}});
  for (int i = 0; i < 6; ++i)
    s.users.push_back(UserSpec{i + 7, profiles[i], {1, 2}});
  s.settings.delta = 1e-3;
  return s;
}

bool traces_identical(const RunTrace& lhs, const RunTrace& rhs) {
  if (lhs.iterations_used != rhs.iterations_used ||
      lhs.converged != rhs.converged ||
      lhs.records.size() != rhs.records.size() ||
      lhs.final_rates != rhs.final_rates)
    return false;
  for (size_t i = 0; i < lhs.records.size(); ++i) {
    const IterationRecord& a = lhs.records[i];
    const IterationRecord& b = rhs.records[i];
    if (a.iteration != b.iteration || a.bids != b.bids ||
        a.prices != b.prices || a.stops != b.stops)
      return false;
  }
  return true;
}

}  // namespace ca
