#pragma once

#include <string>
#include <vector>

#include "vrptd/problem.hpp"

namespace vrptd {

// Ordered service events for one worker, shift-start first, shift-end last.
// Stores events only; all geometry lives in Route.
struct Subtour {
  int worker_id = -1;
  std::vector<PDNode> nodes;

  int size() const { return static_cast<int>(nodes.size()); }
};

Subtour empty_subtour(const Worker& w);

// Throws std::invalid_argument if the sequence is malformed: wrong end
// nodes, a delivery before its pickup, a duplicated node, or a real
// request's delivery without its pickup (virtual pickups may appear alone,
// their delivery nodes can be dropped by the forecast scheduler).
void validate_subtour(const Problem& problem, const Subtour& s);

struct NodeLabels {
  double arrival = 0.0;    // a(v)
  double departure = 0.0;  // d(v)
  double waiting = 0.0;    // b(v)
  double load = 0.0;       // C(v)
};

// Labeled realization of a subtour: interconnecting road legs plus the
// arrival/departure/waiting/load labels and route totals.
struct Route {
  Subtour subtour;
  std::vector<NodeLabels> labels;  // per node
  std::vector<RouteLeg> legs;      // size() - 1 entries
  double cost_length_m = 0.0;      // sum of realized leg lengths
  double cost_time_s = 0.0;        // sum of a(head) - d(tail) per leg
  bool feasible = false;

  int size() const { return subtour.size(); }
};

// Interconnects consecutive nodes with tag-optimal road paths and folds the
// label recurrences left to right. Departure from the shift start is pinned
// to the worker's shift-start time.
Route realize_route(const Problem& problem, Subtour subtour, LegTag metric);
Route realize_route(const Problem& problem, Subtour subtour,
                    std::vector<LegTag> leg_tags);

// Recomputes legs with index >= anchor and labels of nodes > anchor, keeping
// each leg's existing metric tag (distance legs keep their path and are only
// re-timed; time legs are re-routed at the new departure). anchor == 0 also
// resets the first node's labels, which makes it equivalent to a full
// realize_route.
void relabel_suffix(const Problem& problem, Route& route, int anchor);

struct Violation {
  enum class Kind { DeliveryDeadline, ShiftEnd, Capacity, Precedence };
  Kind kind;
  int node_index;
  double amount;  // by how much the constraint is missed
  std::string describe(const Route& route) const;
};

// Lists every violated constraint; empty report <=> feasible. Deadlines and
// shift ends are inclusive (arrival == bound is feasible) with tolerance
// 1e-6 s.
std::vector<Violation> check_feasible(const Problem& problem, const Route& route);

// Global objective contribution of one route: Cost_kappa(route)^nu.
double route_cost(const Route& route, LegTag metric);
double route_objective(const Route& route, LegTag metric, int norm);

// Applies the per-kind label recurrence for a node reached at `arrival` with
// load `prev_load` on arrival.
NodeLabels fold_label(const Problem& problem, const PDNode& node,
                      double arrival, double prev_load);

}  // namespace vrptd
