#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "vrptd/insertion.hpp"

namespace vrptd {

struct ForecastBinding {
  int virtual_id = -1;
  std::optional<int> matched_request;
  enum class Status { Pending, Verified, Expired, Dropped } status =
      Status::Pending;
};

struct ProphetState {
  std::unordered_map<int, ForecastBinding> bindings;  // by virtual id
  double probability_threshold = 0.8;
  double match_window_s = 900.0;  // forecast verification window
};

struct SeedDecision {
  int virtual_id = -1;
  bool assigned = false;
  int worker_index = -1;
  int i = -1, j = -1;
};

// Pre-assigns virtual requests with the workload balancer forced on, then
// deactivates their spatiotemporal constraints (load 0, no deadline) and
// immediately removes the delivery nodes of low-probability predictions.
// The forecasts must already be registered in the problem's request map.
std::vector<SeedDecision> seed_forecasts(Problem& problem, FleetState& fleet,
                                         const std::vector<int>& forecast_ids,
                                         const SchedulerConfig& config,
                                         ProphetState& state);

// Per-worker masks of ignorable nodes: pending virtual pickups whose
// appearance probability is below the threshold.
std::vector<std::vector<char>> droppable_masks(const Problem& problem,
                                               const FleetState& fleet,
                                               const ProphetState& state);

// assign_request with low-probability pending virtual pickups between i and
// j treated as absent; committed candidates remove them for good.
AssignDecision handle_real_request(const Problem& problem,
                                   const FleetState& fleet,
                                   const ProphetState& state, const Request& r,
                                   const SchedulerConfig& config,
                                   InsertionStats* stats = nullptr);

void commit_prophet_assignment(FleetState& fleet, ProphetState& state,
                               const Request& r, const AssignDecision& d);

struct MatchResult {
  int virtual_id = -1;
  int worker_index = -1;
};

// Binds r to a pending forecast when r's pickup vertex equals the forecast's
// and their earliest pickup times differ by at most the match window. The
// virtual nodes are replaced in place (real constraints reactivated) and no
// candidate search runs. Only forecasts whose pickup has not been serviced
// yet are considered; the substitution commits only if the relabeled route
// stays feasible. Throws on a double-binding attempt.
std::optional<MatchResult> try_match(const Problem& problem, FleetState& fleet,
                                     ProphetState& state, const Request& r,
                                     const SchedulerConfig& config);

// Expires pending forecasts once the clock passes their earliest pickup time
// plus the match window, shortcutting their not-yet-visited nodes out of the
// routes. Returns the expired ids. `force` expires every pending forecast
// regardless of the window (used once at the end of a replay).
std::vector<int> expire_due(const Problem& problem, FleetState& fleet,
                            ProphetState& state, double clock,
                            const SchedulerConfig& config, bool force = false);

}  // namespace vrptd
