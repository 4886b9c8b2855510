#include "vrptd/insertion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace vrptd {

namespace {
constexpr double kTimeTol = 1e-6;
constexpr double kScoreTieTol = 1e-9;
constexpr double kRrImprovementTol = 1e-6;

double powed(double cost, int norm) { return norm == 2 ? cost * cost : cost; }
}  // namespace

FleetState init_fleet(const Problem& problem, LegTag metric) {
  FleetState fleet;
  fleet.routes.reserve(problem.workers.size());
  for (const auto& w : problem.workers) {
    fleet.routes.push_back(realize_route(problem, empty_subtour(w), metric));
  }
  return fleet;
}

double fleet_objective(const FleetState& fleet, const SchedulerConfig& config) {
  double total = 0.0;
  for (const auto& route : fleet.routes) {
    total += route_objective(route, config.metric, config.norm);
  }
  return total;
}

int served_real_count(const Problem& problem, const FleetState& fleet) {
  int n = 0;
  for (const auto& [rid, w] : fleet.assigned) {
    if (!problem.request(rid).is_virtual) ++n;
  }
  return n;
}

std::vector<int> operational_workers(const Problem& problem, double t) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(problem.workers.size()); ++i) {
    const auto& w = problem.workers[i];
    if (w.shift_start_s <= t && t < w.shift_end_s) out.push_back(i);
  }
  return out;
}

double wb_multiplier(const Problem& problem, const FleetState& fleet,
                     int worker_index, const SchedulerConfig& config) {
  if (!config.wb_enabled) return 1.0;
  auto ops = operational_workers(problem, fleet.clock);
  if (ops.empty()) return 1.0;
  if (std::find(ops.begin(), ops.end(), worker_index) == ops.end()) return 1.0;
  double total = 0.0;
  for (int o : ops) total += fleet.routes[o].cost_length_m;
  double average = total / static_cast<double>(ops.size());
  if (fleet.routes[worker_index].cost_length_m > config.wb_theta * average) {
    return 1.0 + config.wb_penalty;
  }
  return 1.0;
}

double apply_wb(const Problem& problem, const FleetState& fleet,
                int worker_index, double raw_score,
                const SchedulerConfig& config) {
  return wb_multiplier(problem, fleet, worker_index, config) * raw_score;
}

CheckIndicators compute_indicators(const Problem& problem, const Route& route) {
  if (!route.feasible) {
    throw std::invalid_argument("indicators undefined for infeasible route");
  }
  const int n = route.size();
  const Worker& w = problem.worker_by_id(route.subtour.worker_id);
  CheckIndicators ind;
  ind.ddl.assign(n, kInf);
  ind.slack.assign(n, kInf);

  auto service_time = [&](int k) -> double {
    const PDNode& node = route.subtour.nodes[k];
    if (node.kind == NodeKind::Pickup)
      return problem.request(node.owner).pickup_service_s;
    if (node.kind == NodeKind::Delivery)
      return problem.request(node.owner).delivery_service_s;
    return 0.0;
  };

  std::unordered_map<int, int> delivery_index;
  for (int k = 0; k < n; ++k) {
    if (route.subtour.nodes[k].kind == NodeKind::Delivery) {
      delivery_index[route.subtour.nodes[k].owner] = k;
    }
  }

  for (int k = 0; k < n; ++k) {
    const PDNode& node = route.subtour.nodes[k];
    switch (node.kind) {
      case NodeKind::ShiftEnd:
        ind.ddl[k] = w.shift_end_s;
        break;
      case NodeKind::Delivery:
        ind.ddl[k] = problem.request(node.owner).latest_delivery_s;
        break;
      case NodeKind::Pickup: {
        const Request& r = problem.request(node.owner);
        auto it = delivery_index.find(node.owner);
        if (it == delivery_index.end()) {
          ind.ddl[k] = r.latest_delivery_s;  // delivery dropped (virtual)
          break;
        }
        const int j = it->second;
        double detour = 0.0;
        for (int m = k; m < j; ++m) {
          detour += (route.labels[m + 1].arrival - route.labels[m].departure) +
                    service_time(m) - route.labels[m].waiting;
        }
        ind.ddl[k] = r.latest_delivery_s - detour;
        break;
      }
      default:
        break;  // shift start: unused
    }
  }

  for (int k = n - 2; k >= 0; --k) {
    ind.slack[k] = std::min(ind.ddl[k + 1] - route.labels[k + 1].arrival,
                            ind.slack[k + 1] + route.labels[k + 1].waiting);
  }
  return ind;
}

namespace {

// The release gate applies to service points only: a request may not precede
// a pickup/delivery whose departure already happened. The shift-end node
// never gates, otherwise a worker whose planned return lies in the past
// could not be redispatched.
bool release_gate_ok(const Route& route, int i, double gate_time) {
  const PDNode& next = route.subtour.nodes[i + 1];
  if (!next.is_service()) return true;
  return route.labels[i + 1].departure >= gate_time - kTimeTol;
}

bool any_droppable_after(const std::vector<char>* mask, int i, int n) {
  if (!mask) return false;
  for (int k = i + 1; k <= n - 2; ++k) {
    if ((*mask)[k]) return true;
  }
  return false;
}

// Delay the pickup detour alone inflicts on the arrival at v_{i+1}.
double probe_detour_delay(const Problem& problem, const Route& route,
                          const Request& r, int i, LegTag detour_tag,
                          int vtype) {
  const PDNode pickup = make_pickup_node(r);
  const PDNode& vi = route.subtour.nodes[i];
  const PDNode& vnext = route.subtour.nodes[i + 1];
  double depart_i = route.labels[i].departure;
  RouteLeg to_p =
      problem.legs->leg(detour_tag, vi.vertex, pickup.vertex, vtype, depart_i);
  double arrive_p = depart_i + to_p.travel_s;
  double depart_p =
      std::max(arrive_p, r.earliest_pickup_s) + r.pickup_service_s;
  RouteLeg to_next = problem.legs->leg(detour_tag, pickup.vertex, vnext.vertex,
                                       vtype, depart_p);
  return depart_p + to_next.travel_s - route.labels[i + 1].arrival;
}

struct RowPruneResult {
  bool pruned = false;
  CandidateStatus status = CandidateStatus::Feasible;
};

RowPruneResult row_prune(const Problem& problem, const Route& route,
                         const CheckIndicators& ind, const Request& r, int i,
                         const Worker& w, LegTag detour_tag, int vtype,
                         const TryInsertOptions& opt) {
  if (route.labels[i].load + r.load > w.capacity + kTimeTol) {
    if (opt.stats) opt.stats->capacity_prunes++;
    return {true, CandidateStatus::PrunedCapacity};
  }
  // The slack test assumes the downstream nodes stay; skip it when a
  // droppable virtual pickup could be removed by some (i, j) of this row.
  if (!any_droppable_after(opt.droppable, i, route.size())) {
    double delay = probe_detour_delay(problem, route, r, i, detour_tag, vtype);
    if (delay > ind.slack[i] + kTimeTol) {
      if (opt.stats) opt.stats->slack_prunes++;
      return {true, CandidateStatus::PrunedSlack};
    }
  }
  return {};
}

}  // namespace

InsertionCandidate try_insert(const Problem& problem, const Route& route,
                              const CheckIndicators& ind, const Request& r,
                              int i, int j, const SchedulerConfig& config,
                              const TryInsertOptions& opt) {
  const int n = route.size();
  if (i < 0 || j < i || j > n - 2) {
    throw std::out_of_range("insertion positions out of range");
  }
  InsertionCandidate cand;
  cand.worker_index = -1;
  cand.i = i;
  cand.j = j;
  cand.contingency = opt.contingency;

  const Worker& w = problem.worker_by_id(route.subtour.worker_id);
  const int vtype = problem.vtype_of(w);
  const LegTag detour_tag = opt.contingency ? LegTag::Time : config.metric;

  if (!release_gate_ok(route, i, opt.gate_time)) {
    if (opt.stats) opt.stats->gate_skips++;
    cand.status = CandidateStatus::Gated;
    return cand;
  }
  auto prune = row_prune(problem, route, ind, r, i, w, detour_tag, vtype, opt);
  if (prune.pruned) {
    cand.status = prune.status;
    cand.row_prunable = true;
    return cand;
  }

  // Build the expanded subtour. origin[k] = index in the current subtour, or
  // -1 for r's new nodes.
  Subtour st;
  st.worker_id = route.subtour.worker_id;
  std::vector<int> origin;
  std::vector<int> dropped;
  for (int k = 0; k <= i; ++k) {
    st.nodes.push_back(route.subtour.nodes[k]);
    origin.push_back(k);
  }
  st.nodes.push_back(make_pickup_node(r));
  origin.push_back(-1);
  for (int k = i + 1; k <= j; ++k) {
    if (opt.droppable && (*opt.droppable)[k]) {
      dropped.push_back(route.subtour.nodes[k].owner);
      continue;
    }
    st.nodes.push_back(route.subtour.nodes[k]);
    origin.push_back(k);
  }
  st.nodes.push_back(make_delivery_node(r));
  origin.push_back(-1);
  for (int k = j + 1; k < n; ++k) {
    st.nodes.push_back(route.subtour.nodes[k]);
    origin.push_back(k);
  }

  const int m = st.size();
  Route next;
  next.subtour = std::move(st);
  next.labels.resize(m);
  next.legs.resize(m - 1);
  for (int k = 0; k + 1 < m; ++k) {
    int u = origin[k], v = origin[k + 1];
    if (u == -1 || v == -1) {
      next.legs[k].tag = detour_tag;  // touches one of r's nodes
    } else if (v == u + 1) {
      next.legs[k] = route.legs[u];  // untouched original leg
    } else {
      next.legs[k].tag = config.metric;  // reconnection across dropped nodes
    }
  }
  for (int k = 0; k <= i; ++k) next.labels[k] = route.labels[k];

  if (opt.stats) opt.stats->suffix_relabels++;

  const double old_cost = route_cost(route, config.metric);
  const double old_powed = powed(old_cost, config.norm);
  double prefix_len = 0.0, prefix_time = 0.0;
  for (int k = 0; k < i; ++k) {
    prefix_len += route.legs[k].length_m;
    prefix_time += route.legs[k].travel_s;
  }

  std::set<int> picked;
  for (int k = 1; k <= i; ++k) {
    if (next.subtour.nodes[k].kind == NodeKind::Pickup) {
      picked.insert(next.subtour.nodes[k].owner);
    }
  }
  double run_len = prefix_len, run_time = prefix_time;
  for (int k = i; k + 1 < m; ++k) {
    const PDNode& to = next.subtour.nodes[k + 1];
    RouteLeg leg =
        problem.legs->leg(next.legs[k].tag, next.subtour.nodes[k].vertex,
                          to.vertex, vtype, next.labels[k].departure);
    next.legs[k] = std::move(leg);
    double arrival = next.labels[k].departure + next.legs[k].travel_s;
    next.labels[k + 1] = fold_label(problem, to, arrival, next.labels[k].load);
    run_len += next.legs[k].length_m;
    run_time += next.legs[k].travel_s;

    // Constraint checks along the rebuilt suffix.
    const NodeLabels& l = next.labels[k + 1];
    if (to.kind == NodeKind::Pickup) picked.insert(to.owner);
    if (to.kind == NodeKind::Delivery) {
      if (!picked.count(to.owner) ||
          l.arrival >
              problem.request(to.owner).latest_delivery_s + kTimeTol) {
        cand.status = CandidateStatus::Infeasible;
        if (opt.stats) opt.stats->full_checks++;
        return cand;
      }
    }
    if (to.kind == NodeKind::ShiftEnd && l.arrival > w.shift_end_s + kTimeTol) {
      cand.status = CandidateStatus::Infeasible;
      if (opt.stats) opt.stats->full_checks++;
      return cand;
    }
    if (l.load > w.capacity + kTimeTol || l.load < -kTimeTol) {
      cand.status = CandidateStatus::Infeasible;
      if (opt.stats) opt.stats->full_checks++;
      return cand;
    }

    // Early abandon: the running cost only grows with the remaining legs.
    double run_cost = config.metric == LegTag::Distance ? run_len : run_time;
    double lower_bound =
        (powed(run_cost, config.norm) - old_powed) * opt.wb_factor;
    if (lower_bound > opt.incumbent + kScoreTieTol) {
      cand.status = CandidateStatus::Abandoned;
      if (opt.stats) {
        opt.stats->abandoned++;
        opt.stats->full_checks++;
      }
      return cand;
    }
  }
  if (opt.stats) opt.stats->full_checks++;

  next.cost_length_m = 0.0;
  next.cost_time_s = 0.0;
  for (const auto& leg : next.legs) {
    next.cost_length_m += leg.length_m;
    next.cost_time_s += leg.travel_s;
  }
  next.feasible = true;

  cand.status = CandidateStatus::Feasible;
  cand.score = powed(route_cost(next, config.metric), config.norm) - old_powed;
  cand.adjusted_score = cand.score * opt.wb_factor;
  cand.route = std::move(next);
  cand.dropped_requests = std::move(dropped);
  return cand;
}

namespace {

bool better_candidate(const InsertionCandidate& a, double best_adjusted) {
  return a.adjusted_score < best_adjusted - kScoreTieTol;
}

void scan_worker(const Problem& problem, const FleetState& fleet,
                 const Request& r, const SchedulerConfig& config,
                 int worker_index, bool contingency, double gate_time,
                 const std::vector<char>* droppable, InsertionStats* stats,
                 AssignDecision& best) {
  const Route& route = fleet.routes[worker_index];
  const Worker& w = problem.workers[worker_index];
  if (!r.eligible(w.vehicle_type)) return;
  const int vtype = problem.vtype_of(w);
  const int n = route.size();
  const double factor = wb_multiplier(problem, fleet, worker_index, config);
  const LegTag detour_tag = contingency ? LegTag::Time : config.metric;
  CheckIndicators ind = compute_indicators(problem, route);

  TryInsertOptions opt;
  opt.gate_time = gate_time;
  opt.wb_factor = factor;
  opt.contingency = contingency;
  opt.droppable = droppable;
  opt.stats = stats;

  for (int i = 0; i <= n - 2; ++i) {
    if (!release_gate_ok(route, i, gate_time)) {
      if (stats) stats->gate_skips++;
      continue;
    }
    auto prune =
        row_prune(problem, route, ind, r, i, w, detour_tag, vtype, opt);
    if (prune.pruned) continue;  // every (i, m), m >= i is rejected

    for (int j = i; j <= n - 2; ++j) {
      TryInsertOptions local = opt;
      local.incumbent = best.adjusted_score;
      // Row-level checks already passed; try_insert repeats them cheaply via
      // the cache, which keeps its contract self-contained.
      InsertionCandidate cand =
          try_insert(problem, route, ind, r, i, j, config, local);
      if (cand.status != CandidateStatus::Feasible) continue;
      if (better_candidate(cand, best.adjusted_score)) {
        best.assigned = true;
        best.worker_index = worker_index;
        best.i = i;
        best.j = j;
        best.score = cand.score;
        best.adjusted_score = cand.adjusted_score;
        best.contingency = cand.contingency;
        best.new_route = std::move(cand.route);
        best.dropped_requests = std::move(cand.dropped_requests);
      }
    }
  }
}

}  // namespace

AssignDecision assign_request(const Problem& problem, const FleetState& fleet,
                              const Request& r, const SchedulerConfig& config,
                              const AssignContext& ctx) {
  const double gate_time = ctx.gate_time.value_or(r.release_s);
  AssignDecision best;

  // Deterministic scan order: ascending worker id, then i, then j. The
  // strict improvement test in better_candidate makes the first of any tie
  // set win, which realizes the documented tie-break.
  std::vector<int> order(problem.workers.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return problem.workers[a].id < problem.workers[b].id;
  });

  auto mask_for = [&](int widx) -> const std::vector<char>* {
    if (!ctx.droppable_per_worker) return nullptr;
    const auto& m = (*ctx.droppable_per_worker)[widx];
    return m.empty() ? nullptr : &m;
  };

  for (int widx : order) {
    scan_worker(problem, fleet, r, config, widx, /*contingency=*/false,
                gate_time, mask_for(widx), ctx.stats, best);
  }
  if (!best.assigned && config.metric == LegTag::Distance) {
    // Distance-metric contingency: retry every pair with time-optimal legs
    // for the new detours only.
    for (int widx : order) {
      scan_worker(problem, fleet, r, config, widx, /*contingency=*/true,
                  gate_time, mask_for(widx), ctx.stats, best);
    }
  }
  return best;
}

void commit_assignment(FleetState& fleet, const Request& r,
                       const AssignDecision& decision) {
  if (!decision.assigned) return;
  fleet.routes[decision.worker_index] = decision.new_route;
  fleet.assigned[r.id] = decision.worker_index;
  for (int dropped : decision.dropped_requests) fleet.assigned.erase(dropped);
}

Route remove_request_from_route(const Problem& problem, const Route& route,
                                int request_id, LegTag reconnect) {
  const int n = route.size();
  int first_removed = n;
  Subtour st;
  st.worker_id = route.subtour.worker_id;
  std::vector<int> origin;
  for (int k = 0; k < n; ++k) {
    const PDNode& node = route.subtour.nodes[k];
    if (node.is_service() && node.owner == request_id) {
      first_removed = std::min(first_removed, k);
      continue;
    }
    st.nodes.push_back(node);
    origin.push_back(k);
  }
  if (first_removed == n) {
    throw std::invalid_argument("request not present in route");
  }
  const int m = st.size();
  Route next;
  next.subtour = std::move(st);
  next.labels.resize(m);
  next.legs.resize(m - 1);
  for (int k = 0; k + 1 < m; ++k) {
    int u = origin[k], v = origin[k + 1];
    if (v == u + 1) {
      next.legs[k] = route.legs[u];
    } else {
      next.legs[k].tag = reconnect;
    }
  }
  // Labels up to the node right before the first removal stay valid.
  const int anchor = first_removed - 1;
  for (int k = 0; k <= anchor; ++k) next.labels[k] = route.labels[k];
  relabel_suffix(problem, next, anchor);
  return next;
}

RelocationSweep relocate_requests(const Problem& problem, FleetState& fleet,
                                  const SchedulerConfig& config,
                                  InsertionStats* stats) {
  RelocationSweep sweep;
  sweep.objective_before = fleet_objective(fleet, config);
  sweep.served_before = served_real_count(problem, fleet);
  double current = sweep.objective_before;

  std::vector<int> order(problem.workers.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return problem.workers[a].id < problem.workers[b].id;
  });

  for (int widx : order) {
    // Snapshot the candidates first; the route mutates as moves are kept.
    std::vector<int> candidates;
    {
      const Route& route = fleet.routes[widx];
      for (int k = 1; k + 1 < route.size(); ++k) {
        const PDNode& node = route.subtour.nodes[k];
        if (node.kind != NodeKind::Pickup) continue;
        const Request& r = problem.request(node.owner);
        if (r.is_virtual) continue;
        if (route.labels[k].departure > fleet.clock + kTimeTol) {
          candidates.push_back(node.owner);
        }
      }
    }
    for (int rid : candidates) {
      // The request may have been relocated away by an earlier move.
      auto it = fleet.assigned.find(rid);
      if (it == fleet.assigned.end() || it->second != widx) continue;
      const Request& r = problem.request(rid);

      FleetState trial = fleet;
      trial.routes[widx] = remove_request_from_route(problem, trial.routes[widx],
                                                     rid, config.metric);
      trial.assigned.erase(rid);

      AssignContext ctx;
      ctx.gate_time = fleet.clock;
      ctx.stats = stats;
      AssignDecision decision = assign_request(problem, trial, r, config, ctx);
      if (!decision.assigned) continue;  // restore by not committing
      commit_assignment(trial, r, decision);
      double objective = fleet_objective(trial, config);
      if (objective < current - kRrImprovementTol) {
        sweep.moves.push_back({rid, problem.workers[widx].id,
                               problem.workers[decision.worker_index].id,
                               decision.i, decision.j, objective - current});
        current = objective;
        fleet = std::move(trial);
      }
    }
  }
  sweep.objective_after = current;
  sweep.served_after = served_real_count(problem, fleet);
  return sweep;
}

}  // namespace vrptd
