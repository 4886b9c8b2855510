#include "vrptd/prophet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vrptd {

namespace {
constexpr double kTimeTol = 1e-6;

// Removes the nodes at the given (sorted, interior) positions, splicing the
// remaining sequence back together. Reconnection legs take `reconnect`.
Route remove_positions(const Problem& problem, const Route& route,
                       const std::vector<int>& positions, LegTag reconnect) {
  const int n = route.size();
  std::vector<char> drop(n, 0);
  int first = n;
  for (int p : positions) {
    drop[p] = 1;
    first = std::min(first, p);
  }
  Subtour st;
  st.worker_id = route.subtour.worker_id;
  std::vector<int> origin;
  for (int k = 0; k < n; ++k) {
    if (drop[k]) continue;
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
    if (v == u + 1) {
      next.legs[k] = route.legs[u];
    } else {
      next.legs[k].tag = reconnect;
    }
  }
  const int anchor = first - 1;
  for (int k = 0; k <= anchor; ++k) next.labels[k] = route.labels[k];
  relabel_suffix(problem, next, anchor);
  return next;
}

int find_node_position(const Route& route, NodeKind kind, int owner) {
  for (int k = 0; k < route.size(); ++k) {
    const PDNode& n = route.subtour.nodes[k];
    if (n.kind == kind && n.owner == owner) return k;
  }
  return -1;
}

}  // namespace

std::vector<SeedDecision> seed_forecasts(Problem& problem, FleetState& fleet,
                                         const std::vector<int>& forecast_ids,
                                         const SchedulerConfig& config,
                                         ProphetState& state) {
  std::vector<SeedDecision> out;
  SchedulerConfig seeding = config;
  seeding.wb_enabled = true;

  for (int id : forecast_ids) {
    const Request& f = problem.request(id);
    if (!f.is_virtual) {
      throw std::invalid_argument("seed_forecasts expects virtual requests");
    }
    ForecastBinding binding;
    binding.virtual_id = id;
    AssignContext ctx;
    ctx.gate_time = fleet.clock;
    AssignDecision decision = assign_request(problem, fleet, f, seeding, ctx);
    SeedDecision sd;
    sd.virtual_id = id;
    sd.assigned = decision.assigned;
    if (decision.assigned) {
      commit_assignment(fleet, f, decision);
      sd.worker_index = decision.worker_index;
      sd.i = decision.i;
      sd.j = decision.j;
      binding.status = ForecastBinding::Status::Pending;
    } else {
      binding.status = ForecastBinding::Status::Dropped;
    }
    state.bindings[id] = binding;
    out.push_back(sd);
  }

  // Deactivate spatiotemporal constraints of the scheduled predictions.
  for (int id : forecast_ids) {
    if (!fleet.assigned.count(id)) continue;
    Request& f = problem.request(id);
    f.load = 0.0;
    f.latest_delivery_s = kInf;
  }
  for (auto& route : fleet.routes) relabel_suffix(problem, route, 0);

  // Low-probability predictions keep only their pickup node.
  for (int id : forecast_ids) {
    auto it = fleet.assigned.find(id);
    if (it == fleet.assigned.end()) continue;
    const Request& f = problem.request(id);
    if (f.probability >= state.probability_threshold) continue;
    Route& route = fleet.routes[it->second];
    int pos = find_node_position(route, NodeKind::Delivery, id);
    if (pos >= 0) {
      route = remove_positions(problem, route, {pos}, config.metric);
    }
  }
  return out;
}

std::vector<std::vector<char>> droppable_masks(const Problem& problem,
                                               const FleetState& fleet,
                                               const ProphetState& state) {
  std::vector<std::vector<char>> masks(fleet.routes.size());
  for (std::size_t w = 0; w < fleet.routes.size(); ++w) {
    const Route& route = fleet.routes[w];
    std::vector<char> mask(route.size(), 0);
    bool any = false;
    for (int k = 1; k + 1 < route.size(); ++k) {
      const PDNode& node = route.subtour.nodes[k];
      if (node.kind != NodeKind::Pickup) continue;
      const Request& r = problem.request(node.owner);
      if (!r.is_virtual || r.probability >= state.probability_threshold) continue;
      auto it = state.bindings.find(node.owner);
      if (it == state.bindings.end() ||
          it->second.status != ForecastBinding::Status::Pending) {
        continue;
      }
      mask[k] = 1;
      any = true;
    }
    if (any) masks[w] = std::move(mask);
  }
  return masks;
}

AssignDecision handle_real_request(const Problem& problem,
                                   const FleetState& fleet,
                                   const ProphetState& state, const Request& r,
                                   const SchedulerConfig& config,
                                   InsertionStats* stats) {
  auto masks = droppable_masks(problem, fleet, state);
  AssignContext ctx;
  ctx.droppable_per_worker = &masks;
  ctx.stats = stats;
  return assign_request(problem, fleet, r, config, ctx);
}

void commit_prophet_assignment(FleetState& fleet, ProphetState& state,
                               const Request& r, const AssignDecision& d) {
  commit_assignment(fleet, r, d);
  for (int dropped : d.dropped_requests) {
    auto it = state.bindings.find(dropped);
    if (it != state.bindings.end()) {
      it->second.status = ForecastBinding::Status::Dropped;
    }
  }
}

std::optional<MatchResult> try_match(const Problem& problem, FleetState& fleet,
                                     ProphetState& state, const Request& r,
                                     const SchedulerConfig& config) {
  int best_id = -1;
  double best_gap = kInf;
  int best_worker = -1;
  int best_pos = -1;
  for (auto& [vid, binding] : state.bindings) {
    if (binding.status != ForecastBinding::Status::Pending) continue;
    const Request& v = problem.request(vid);
    if (v.pickup_vertex != r.pickup_vertex) continue;
    double gap = std::fabs(r.earliest_pickup_s - v.earliest_pickup_s);
    if (gap > state.match_window_s + kTimeTol) continue;
    auto it = fleet.assigned.find(vid);
    if (it == fleet.assigned.end()) continue;
    const Route& route = fleet.routes[it->second];
    int pos = find_node_position(route, NodeKind::Pickup, vid);
    if (pos < 0) continue;
    // The pickup itself may have a planned departure in the past (the worker
    // keeps waiting there for verification), but service nodes behind it are
    // history and cannot be rewritten.
    bool downstream_executed = false;
    for (int k = pos + 1; k + 1 < route.size(); ++k) {
      if (route.labels[k].departure <= fleet.clock + kTimeTol) {
        downstream_executed = true;
        break;
      }
    }
    if (downstream_executed) continue;
    if (gap < best_gap - kTimeTol ||
        (std::fabs(gap - best_gap) <= kTimeTol && vid < best_id)) {
      best_gap = gap;
      best_id = vid;
      best_worker = it->second;
      best_pos = pos;
    }
  }
  if (best_id < 0) return std::nullopt;

  ForecastBinding& binding = state.bindings.at(best_id);
  if (binding.status == ForecastBinding::Status::Verified) {
    throw std::logic_error("forecast already bound to a request");
  }

  // Substitute r's real nodes in place and relabel.
  const Route& route = fleet.routes[best_worker];
  Route next = route;
  next.subtour.nodes[best_pos] = make_pickup_node(r);
  int dpos = find_node_position(route, NodeKind::Delivery, best_id);
  if (dpos >= 0) {
    next.subtour.nodes[dpos] = make_delivery_node(r);
  } else {
    // The prediction's delivery node was dropped at seeding; reinstate the
    // real one right after the pickup.
    next.subtour.nodes.insert(next.subtour.nodes.begin() + best_pos + 1,
                              make_delivery_node(r));
    next.labels.insert(next.labels.begin() + best_pos + 1, NodeLabels{});
    RouteLeg fresh;
    fresh.tag = config.metric;
    next.legs.insert(next.legs.begin() + best_pos, fresh);
    next.legs[best_pos + 1] = RouteLeg{};
    next.legs[best_pos + 1].tag = config.metric;
  }
  relabel_suffix(problem, next, std::max(best_pos - 1, 0));
  if (!next.feasible) return std::nullopt;  // fall back to normal insertion

  fleet.routes[best_worker] = std::move(next);
  fleet.assigned.erase(best_id);
  fleet.assigned[r.id] = best_worker;
  binding.status = ForecastBinding::Status::Verified;
  binding.matched_request = r.id;
  return MatchResult{best_id, best_worker};
}

std::vector<int> expire_due(const Problem& problem, FleetState& fleet,
                            ProphetState& state, double clock,
                            const SchedulerConfig& config, bool force) {
  std::vector<int> due;
  for (auto& [vid, binding] : state.bindings) {
    if (binding.status != ForecastBinding::Status::Pending) continue;
    const Request& v = problem.request(vid);
    if (force ||
        v.earliest_pickup_s + state.match_window_s < clock - kTimeTol) {
      due.push_back(vid);
    }
  }
  std::sort(due.begin(), due.end());
  std::vector<int> expired;
  for (int vid : due) {
    auto it = fleet.assigned.find(vid);
    if (it != fleet.assigned.end()) {
      Route& route = fleet.routes[it->second];
      std::vector<int> positions;
      for (int k = 1; k + 1 < route.size(); ++k) {
        const PDNode& node = route.subtour.nodes[k];
        if (!node.is_service() || node.owner != vid) continue;
        // Nodes already traversed stay in the realized route.
        if (route.labels[k].departure > clock + kTimeTol) positions.push_back(k);
      }
      if (!positions.empty()) {
        route = remove_positions(problem, route, positions, config.metric);
      }
      bool any_left =
          find_node_position(route, NodeKind::Pickup, vid) >= 0 ||
          find_node_position(route, NodeKind::Delivery, vid) >= 0;
      if (!any_left) fleet.assigned.erase(vid);
    }
    state.bindings.at(vid).status = ForecastBinding::Status::Expired;
    expired.push_back(vid);
  }
  return expired;
}

}  // namespace vrptd
