// oracle.cpp - grid enumeration with carrier-subset pruning, bound-and-prune
// on the objective, and an integral max-flow split of the winning totals.

#include "ca/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace ca {

std::map<int, double> AllocationMatrix::user_totals() const {
  std::map<int, double> totals;
  for (const auto& [key, r] : entries) totals[key.second] += r;
  return totals;
}

namespace {

std::string join_violations(const std::vector<std::string>& parts) {
  std::ostringstream out;
  out << "infeasible allocation:";
  for (const std::string& p : parts) out << "\n  - " << p;
  return out.str();
}

}  // namespace

FeasibilityError::FeasibilityError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)),
      violations_(std::move(violations)) {}

double primal_objective(const Scenario& scenario,
                        const AllocationMatrix& alloc) {
  validate(scenario);
  std::vector<std::string> viol;

  std::map<int, double> capacity;
  for (const CarrierSpec& c : scenario.carriers)
    capacity[c.carrier_id] = c.capacity;
  std::map<int, std::set<int>> coverage;
  std::map<int, double> total;
  for (const UserSpec& u : scenario.users) {
    coverage[u.ue_id] = {u.coverage.begin(), u.coverage.end()};
    total[u.ue_id] = 0.0;
  }

  std::map<int, double> column;
  for (const auto& [key, r] : alloc.entries) {
    const auto [l, ue] = key;
    const std::string where =
        "entry (carrier " + std::to_string(l) + ", ue " + std::to_string(ue) + ")";
    if (!capacity.count(l) || !coverage.count(ue) ||
        !coverage.at(ue).count(l)) {
      viol.push_back(where + ": outside coverage");
      continue;
    }
    if (!std::isfinite(r) || r < 0.0) {
      viol.push_back(where + ": negative or non-finite rate");
      continue;
    }
    column[l] += r;
    total[ue] += r;
  }

  for (const auto& [l, sum] : column) {
    const double cap = capacity.at(l);
    if (sum > cap + 1e-9 * std::max(1.0, cap))
      viol.push_back("carrier " + std::to_string(l) + ": allocated " +
                     std::to_string(sum) + " of " + std::to_string(cap));
  }
  for (const auto& [ue, t] : total)
    if (t <= 0.0)
      viol.push_back("ue " + std::to_string(ue) + ": zero total rate");

  if (!viol.empty()) throw FeasibilityError(std::move(viol));

  double obj = 0.0;
  for (const UserSpec& u : scenario.users)
    obj += u.utility.log_evaluate(total.at(u.ue_id));
  return obj;
}

namespace {

// #{t_1..t_M >= 0, t_i <= u_i, sum t_i <= budget} by inclusion-exclusion,
// as a double (only compared against the size guard).
double count_capped_simplex(const std::vector<long long>& u, long long budget) {
  const int m = static_cast<int>(u.size());
  if (m > 24) return std::numeric_limits<double>::infinity();
  auto choose = [m](double x) {  // C(x + m, m) for real x >= 0
    double v = 1.0;
    for (int j = 1; j <= m; ++j) v *= (x + j) / j;
    return v;
  };
  double count = 0.0;
  for (unsigned sub = 0; sub < (1u << m); ++sub) {
    double x = static_cast<double>(budget);
    int bits = 0;
    for (int i = 0; i < m; ++i)
      if (sub >> i & 1u) {
        x -= static_cast<double>(u[i] + 1);
        ++bits;
      }
    if (x < 0.0) continue;
    count += (bits % 2 ? -1.0 : 1.0) * choose(x);
  }
  return count;
}

struct GridSearch {
  int users = 0;
  int full = 0;                        // all-carriers bitmask
  std::vector<int> mask;               // per-user coverage bitmask
  std::vector<long long> ucap;         // per-user max steps
  std::vector<long long> subset_cap;   // carrier subset -> total steps
  std::vector<long long> used;         // carrier subset -> steps taken
  std::vector<std::vector<int>> need;  // need[i][T]: users >= i with mask in T
  std::vector<double> suffix_best;
  const std::vector<std::vector<double>>* value = nullptr;  // [i][m]

  double best = -std::numeric_limits<double>::infinity();
  std::vector<long long> pick, best_pick;

  void dfs(int i, double obj) {
    if (i == users) {
      if (obj > best) {
        best = obj;
        best_pick = pick;
      }
      return;
    }
    if (obj + suffix_best[i] <= best) return;

    long long ub = ucap[i];
    for (int s = mask[i];; s = (s + 1) | mask[i]) {
      ub = std::min(ub, subset_cap[s] - used[s] - need[i + 1][s]);
      if (s == full) break;
    }
    for (long long m = 1; m <= ub; ++m) {
      for (int s = mask[i];; s = (s + 1) | mask[i]) {
        ++used[s];
        if (s == full) break;
      }
      pick[i] = m;
      dfs(i + 1, obj + (*value)[i][static_cast<size_t>(m)]);
    }
    if (ub >= 1) {
      for (int s = mask[i];; s = (s + 1) | mask[i]) {
        used[s] -= ub;
        if (s == full) break;
      }
    }
  }
};

// Integral max-flow (shortest augmenting paths) on the tiny bipartite
// user/carrier network; node 0 is the source, 1..M users, M+1..M+K
// carriers, M+K+1 the sink.
struct FlowNet {
  struct Edge {
    int to;
    long long cap;
    size_t rev;
  };
  std::vector<std::vector<Edge>> adj;

  explicit FlowNet(int n) : adj(n) {}

  void add(int a, int b, long long cap) {
    adj[a].push_back({b, cap, adj[b].size()});
    adj[b].push_back({a, 0, adj[a].size() - 1});
  }

  long long augment(int s, int t) {
    std::vector<std::pair<int, size_t>> parent(adj.size(), {-1, 0});
    parent[s] = {s, 0};
    std::vector<int> queue{s};
    for (size_t qi = 0; qi < queue.size() && parent[t].first < 0; ++qi) {
      const int v = queue[qi];
      for (size_t e = 0; e < adj[v].size(); ++e) {
        const Edge& ed = adj[v][e];
        if (ed.cap > 0 && parent[ed.to].first < 0) {
          parent[ed.to] = {v, e};
          queue.push_back(ed.to);
        }
      }
    }
    if (parent[t].first < 0) return 0;
    long long bottleneck = std::numeric_limits<long long>::max();
    for (int v = t; v != s;) {
      const auto [pv, pe] = parent[v];
      bottleneck = std::min(bottleneck, adj[pv][pe].cap);
      v = pv;
    }
    for (int v = t; v != s;) {
      const auto [pv, pe] = parent[v];
      adj[pv][pe].cap -= bottleneck;
      adj[adj[pv][pe].to][adj[pv][pe].rev].cap += bottleneck;
      v = pv;
    }
    return bottleneck;
  }

  long long max_flow(int s, int t) {
    long long flow = 0;
    while (long long pushed = augment(s, t)) flow += pushed;
    return flow;
  }
};

}  // namespace

AllocationMatrix grid_solve(const Scenario& scenario, double resolution) {
  validate(scenario);
  if (!std::isfinite(resolution) || resolution <= 0.0)
    throw std::invalid_argument("grid_solve: resolution must be positive");

  std::vector<CarrierSpec> carriers = scenario.carriers;
  std::sort(carriers.begin(), carriers.end(),
            [](const CarrierSpec& a, const CarrierSpec& b) {
              return a.carrier_id < b.carrier_id;
            });
  const int K = static_cast<int>(carriers.size());
  if (K > 16)
    throw std::invalid_argument("grid_solve: too many carriers to enumerate");

  std::map<int, int> carrier_index;
  std::vector<long long> unit_cap(K);
  for (int k = 0; k < K; ++k) {
    carrier_index[carriers[k].carrier_id] = k;
    unit_cap[k] =
        static_cast<long long>(carriers[k].capacity / resolution + 1e-9);
  }

  const int full = (1 << K) - 1;
  std::vector<long long> subset_cap(1 << K, 0);
  for (int t = 1; t <= full; ++t)
    for (int k = 0; k < K; ++k)
      if (t >> k & 1) subset_cap[t] += unit_cap[k];

  std::vector<UserSpec> users = scenario.users;
  std::sort(users.begin(), users.end(),
            [](const UserSpec& a, const UserSpec& b) {
              return a.ue_id < b.ue_id;
            });
  const int M = static_cast<int>(users.size());

  std::vector<int> mask(M, 0);
  for (int i = 0; i < M; ++i)
    for (int l : users[i].coverage) mask[i] |= 1 << carrier_index.at(l);

  const long long total_units = subset_cap[full];
  std::vector<long long> ucap(M);
  for (int i = 0; i < M; ++i) {
    ucap[i] = std::min(subset_cap[mask[i]], total_units - (M - 1));
    if (ucap[i] < 1)
      throw std::invalid_argument(
          "grid_solve: no feasible grid point (ue " +
          std::to_string(users[i].ue_id) + " cannot receive one step)");
  }

  std::vector<long long> slack(M);
  for (int i = 0; i < M; ++i) slack[i] = ucap[i] - 1;
  const double points = count_capped_simplex(slack, total_units - M);
  if (!(points <= 1e8)) {
    std::ostringstream msg;
    msg << "grid_solve: about " << points
        << " feasible grid points exceeds the 1e8 guard";
    throw std::invalid_argument(msg.str());
  }

  GridSearch search;
  std::vector<std::vector<double>> value(M);
  if (M == 1) {
    // log U is strictly increasing: the lone user takes every reachable step.
    search.best_pick = {ucap[0]};
  } else {
    // log U per user per step count; totals-only objective, so this is the
    // entire cost model of the search.
    for (int i = 0; i < M; ++i) {
      value[i].resize(static_cast<size_t>(ucap[i]) + 1, 0.0);
      for (long long m = 1; m <= ucap[i]; ++m)
        value[i][static_cast<size_t>(m)] =
            users[i].utility.log_evaluate(static_cast<double>(m) * resolution);
    }
    search.users = M;
    search.full = full;
    search.mask = mask;
    search.ucap = ucap;
    search.subset_cap = subset_cap;
    search.used.assign(1 << K, 0);
    search.need.assign(M + 1, std::vector<int>(1 << K, 0));
    for (int i = M - 1; i >= 0; --i)
      for (int t = 0; t <= full; ++t)
        search.need[i][t] =
            search.need[i + 1][t] + ((mask[i] & ~t) == 0 ? 1 : 0);
    search.suffix_best.assign(M + 1, 0.0);
    for (int i = M - 1; i >= 0; --i)
      search.suffix_best[i] =
          search.suffix_best[i + 1] + value[i][static_cast<size_t>(ucap[i])];
    search.value = &value;
    search.pick.assign(M, 0);
    search.dfs(0, 0.0);
  }

  if (search.best_pick.empty())
    throw std::invalid_argument("grid_solve: no feasible grid point");

  // Split the winning totals across carriers.
  const int source = 0, sink = M + K + 1;
  FlowNet net(M + K + 2);
  std::vector<size_t> user_edge(M);
  for (int i = 0; i < M; ++i) {
    user_edge[i] = net.adj[source].size();
    net.add(source, 1 + i, search.best_pick[i]);
  }
  std::vector<std::vector<size_t>> cover_edge(M);
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < K; ++k)
      if (mask[i] >> k & 1) {
        cover_edge[i].push_back(net.adj[1 + i].size());
        net.add(1 + i, 1 + M + k, search.best_pick[i]);
      }
  for (int k = 0; k < K; ++k) net.add(1 + M + k, sink, unit_cap[k]);

  long long want = 0;
  for (int i = 0; i < M; ++i) want += search.best_pick[i];
  if (net.max_flow(source, sink) != want)
    throw std::logic_error("grid_solve: split failed for a feasible vector");

  AllocationMatrix alloc;
  for (int i = 0; i < M; ++i) {
    size_t ei = 0;
    for (int k = 0; k < K; ++k) {
      if (!(mask[i] >> k & 1)) continue;
      const FlowNet::Edge& e = net.adj[1 + i][cover_edge[i][ei++]];
      const long long sent = search.best_pick[i] - e.cap;
      alloc.entries[{carriers[k].carrier_id, users[i].ue_id}] =
          static_cast<double>(sent) * resolution;
    }
  }
  return alloc;
}

AllocationMatrix to_allocation(const RunTrace& trace) {
  AllocationMatrix a;
  for (const auto& [key, r] : trace.final_rates)
    a.entries[{key.second, key.first}] = r;
  return a;
}

CompareReport compare(const Scenario& scenario, const RunTrace& trace,
                      const AllocationMatrix& oracle_alloc) {
  const std::map<int, double> dist = trace.user_totals();
  const std::map<int, double> orc = oracle_alloc.user_totals();
  if (dist.size() != orc.size())
    throw std::invalid_argument("compare: user sets differ");
  for (const auto& [ue, t] : dist)
    if (!orc.count(ue))
      throw std::invalid_argument("compare: user sets differ");

  CompareReport rep;
  double sum = 0.0;
  for (const auto& [ue, t] : dist) {
    const double dev = std::abs(t - orc.at(ue));
    rep.max_abs_dev = std::max(rep.max_abs_dev, dev);
    sum += dev;
  }
  rep.mean_abs_dev = dist.empty() ? 0.0 : sum / static_cast<double>(dist.size());
  rep.objective_gap = primal_objective(scenario, to_allocation(trace)) -
                      primal_objective(scenario, oracle_alloc);
  return rep;
}

}  // namespace ca
