#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

namespace vrptd::testing {

namespace {
constexpr double kTieTol = 1e-9;
constexpr double kTimeTol = 1e-6;
}  // namespace

std::map<VertexId, double> enumerate_earliest_arrivals(const RoadGraph& g,
                                                       int vtype,
                                                       VertexId origin,
                                                       double departure) {
  const int n = static_cast<int>(g.num_vertices());
  std::map<VertexId, double> best;
  std::vector<char> visited(n, 0);
  const int s = g.index_of(origin);

  // FIFO makes the per-hop greedy arc choice optimal for a fixed vertex
  // path, so carrying the arrival along the DFS equals evaluating each
  // complete path with the composition fold.
  std::function<void(int, double)> dfs = [&](int at, double arrival) {
    VertexId id = g.id_of(at);
    auto it = best.find(id);
    if (it == best.end() || arrival < it->second) best[id] = arrival;
    visited[at] = 1;
    std::set<int> heads;
    for (int k : g.out_arcs(at)) heads.insert(g.arc(k).head);
    for (int head : heads) {
      if (visited[head]) continue;
      double hop = kInf;
      for (int k : g.out_arcs(at)) {
        const auto& arc = g.arc(k);
        if (arc.head != head) continue;
        hop = std::min(hop, arc.ttf[vtype].arrival(arrival));
      }
      dfs(head, hop);
    }
    visited[at] = 0;
  };
  dfs(s, departure);
  return best;
}

std::map<VertexId, double> bellman_ford_distances(const RoadGraph& g,
                                                  VertexId origin) {
  const int n = static_cast<int>(g.num_vertices());
  std::vector<double> dist(n, kInf);
  dist[g.index_of(origin)] = 0.0;
  for (int round = 0; round + 1 < n; ++round) {
    bool changed = false;
    for (std::size_t k = 0; k < g.num_arcs(); ++k) {
      const auto& arc = g.arc(static_cast<int>(k));
      if (dist[arc.tail] == kInf) continue;
      if (dist[arc.tail] + arc.length_m < dist[arc.head]) {
        dist[arc.head] = dist[arc.tail] + arc.length_m;
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::map<VertexId, double> out;
  for (int v = 0; v < n; ++v) {
    if (dist[v] < kInf) out[g.id_of(v)] = dist[v];
  }
  return out;
}

Route brute_candidate_route(const Problem& problem, const Route& base,
                            const Request& r, int i, int j, LegTag detour_tag,
                            LegTag metric) {
  Subtour st;
  st.worker_id = base.subtour.worker_id;
  std::vector<int> origin;
  const int n = base.size();
  for (int k = 0; k <= i; ++k) {
    st.nodes.push_back(base.subtour.nodes[k]);
    origin.push_back(k);
  }
  st.nodes.push_back(make_pickup_node(r));
  origin.push_back(-1);
  for (int k = i + 1; k <= j; ++k) {
    st.nodes.push_back(base.subtour.nodes[k]);
    origin.push_back(k);
  }
  st.nodes.push_back(make_delivery_node(r));
  origin.push_back(-1);
  for (int k = j + 1; k < n; ++k) {
    st.nodes.push_back(base.subtour.nodes[k]);
    origin.push_back(k);
  }
  std::vector<LegTag> tags(st.size() - 1, metric);
  for (int k = 0; k + 1 < st.size(); ++k) {
    int u = origin[k], v = origin[k + 1];
    if (u == -1 || v == -1) {
      tags[k] = detour_tag;
    } else if (v == u + 1) {
      tags[k] = base.legs[u].tag;
    }
  }
  return realize_route(problem, std::move(st), std::move(tags));
}

namespace {

bool gate_ok(const Route& route, int i, double gate_time) {
  const PDNode& next = route.subtour.nodes[i + 1];
  if (!next.is_service()) return true;
  return route.labels[i + 1].departure >= gate_time - kTimeTol;
}

void brute_pass(const Problem& problem, const FleetState& fleet,
                const Request& r, const SchedulerConfig& config,
                double gate_time, bool contingency, BruteResult& best) {
  std::vector<int> order(problem.workers.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return problem.workers[a].id < problem.workers[b].id;
  });
  const LegTag detour = contingency ? LegTag::Time : config.metric;
  for (int w : order) {
    if (!r.eligible(problem.workers[w].vehicle_type)) continue;
    const Route& base = fleet.routes[w];
    double factor = wb_multiplier(problem, fleet, w, config);
    double old_cost = route_cost(base, config.metric);
    double old_powed = config.norm == 2 ? old_cost * old_cost : old_cost;
    for (int i = 0; i <= base.size() - 2; ++i) {
      if (!gate_ok(base, i, gate_time)) continue;
      for (int j = i; j <= base.size() - 2; ++j) {
        Route cand =
            brute_candidate_route(problem, base, r, i, j, detour, config.metric);
        if (!check_feasible(problem, cand).empty()) continue;
        double cost = route_cost(cand, config.metric);
        double powed = config.norm == 2 ? cost * cost : cost;
        double score = powed - old_powed;
        double adjusted = score * factor;
        if (adjusted < best.adjusted_score - kTieTol) {
          best.assigned = true;
          best.worker_index = w;
          best.i = i;
          best.j = j;
          best.score = score;
          best.adjusted_score = adjusted;
          best.contingency = contingency;
          best.route = std::move(cand);
        }
      }
    }
  }
}

}  // namespace

BruteResult brute_force_assign(const Problem& problem, const FleetState& fleet,
                               const Request& r, const SchedulerConfig& config,
                               double gate_time) {
  BruteResult best;
  brute_pass(problem, fleet, r, config, gate_time, false, best);
  if (!best.assigned && config.metric == LegTag::Distance) {
    brute_pass(problem, fleet, r, config, gate_time, true, best);
  }
  return best;
}

std::vector<PruneAudit> audit_pruning(const Problem& problem,
                                      const FleetState& fleet,
                                      const Request& r,
                                      const SchedulerConfig& config,
                                      double gate_time) {
  std::vector<PruneAudit> out;
  for (std::size_t w = 0; w < fleet.routes.size(); ++w) {
    if (!r.eligible(problem.workers[w].vehicle_type)) continue;
    const Route& base = fleet.routes[w];
    CheckIndicators ind = compute_indicators(problem, base);
    for (int i = 0; i <= base.size() - 2; ++i) {
      for (int j = i; j <= base.size() - 2; ++j) {
        TryInsertOptions opt;
        opt.gate_time = gate_time;
        InsertionCandidate cand =
            try_insert(problem, base, ind, r, i, j, config, opt);
        if (cand.status != CandidateStatus::PrunedSlack &&
            cand.status != CandidateStatus::PrunedCapacity) {
          continue;
        }
        Route full = brute_candidate_route(problem, base, r, i, j,
                                           config.metric, config.metric);
        PruneAudit audit;
        audit.worker_index = static_cast<int>(w);
        audit.i = i;
        audit.j = j;
        audit.status = cand.status;
        audit.oracle_feasible = check_feasible(problem, full).empty();
        out.push_back(audit);
      }
    }
  }
  return out;
}

}  // namespace vrptd::testing
