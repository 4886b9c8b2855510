#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "vrptd/route.hpp"

namespace vrptd {

struct SchedulerConfig {
  LegTag metric = LegTag::Distance;  // kappa
  int norm = 1;                      // nu: 1 or 2
  bool wb_enabled = false;
  double wb_theta = 1.5;   // workload threshold (>= 1)
  double wb_penalty = 2.0; // penalty factor mu (>= 1)
  bool rr_enabled = false;
};

// Fleet snapshot: one labeled route per worker (aligned with the problem's
// worker order) plus the request -> worker map and the event clock. A value
// type; candidate evaluation copies or views it immutably.
struct FleetState {
  std::vector<Route> routes;
  std::unordered_map<int, int> assigned;  // request id -> worker index
  double clock = 0.0;
};

FleetState init_fleet(const Problem& problem, LegTag metric);

double fleet_objective(const FleetState& fleet, const SchedulerConfig& config);
int served_real_count(const Problem& problem, const FleetState& fleet);

// Workers whose shift covers t: ws <= t < we.
std::vector<int> operational_workers(const Problem& problem, double t);

// Workload-balancer multiplier: (1 + mu) when the worker is operational and
// its route length exceeds theta times the operational fleet's average
// length; 1 otherwise. The workload test always uses the (distance, l1)
// cost, whatever the configured metric and norm.
double wb_multiplier(const Problem& problem, const FleetState& fleet,
                     int worker_index, const SchedulerConfig& config);
double apply_wb(const Problem& problem, const FleetState& fleet,
                int worker_index, double raw_score,
                const SchedulerConfig& config);

// Backward-DP pruning indicators. slack(v) bounds the detour delay tolerable
// right after v; ddl(v) bounds the arrival at v itself.
struct CheckIndicators {
  std::vector<double> slack;
  std::vector<double> ddl;
};

// Requires a labeled feasible route; throws std::invalid_argument otherwise.
CheckIndicators compute_indicators(const Problem& problem, const Route& route);

struct InsertionStats {
  long gate_skips = 0;
  long capacity_prunes = 0;
  long slack_prunes = 0;
  long suffix_relabels = 0;
  long full_checks = 0;
  long abandoned = 0;
};

enum class CandidateStatus {
  Feasible,
  Gated,           // release-time gate failed
  PrunedCapacity,  // rejected without a suffix relabel
  PrunedSlack,     // rejected without a suffix relabel
  Infeasible,      // full check found a violated constraint
  Abandoned        // partial score already above the incumbent
};

struct InsertionCandidate {
  int worker_index = -1;
  int i = -1;
  int j = -1;
  CandidateStatus status = CandidateStatus::Infeasible;
  double score = kInf;           // Score_{kappa,l_nu}; finite iff feasible
  double adjusted_score = kInf;  // wb multiplier applied
  bool row_prunable = false;     // prune applies to every (i, m), m >= i
  bool contingency = false;      // detour legs forced time-optimal
  Route route;                   // resulting route when feasible
  std::vector<int> dropped_requests;  // ignored virtual pickups removed
};

struct TryInsertOptions {
  double gate_time = 0.0;
  double wb_factor = 1.0;
  double incumbent = kInf;  // adjusted-score incumbent for early abandon
  bool contingency = false;
  // Optional per-node mask of ignorable nodes (pending low-probability
  // virtual pickups); masked nodes strictly between i and j contribute no
  // service, load or detour and are dropped on commit.
  const std::vector<char>* droppable = nullptr;
  InsertionStats* stats = nullptr;
};

// Evaluates placing r's pickup right after position i and its delivery right
// after position j (0 <= i <= j <= |S|-2). Infeasibility is a value, not an
// error.
InsertionCandidate try_insert(const Problem& problem, const Route& route,
                              const CheckIndicators& ind, const Request& r,
                              int i, int j, const SchedulerConfig& config,
                              const TryInsertOptions& opt = {});

struct AssignContext {
  std::optional<double> gate_time;  // defaults to the request's release time
  const std::vector<std::vector<char>>* droppable_per_worker = nullptr;
  InsertionStats* stats = nullptr;
};

struct AssignDecision {
  bool assigned = false;
  int worker_index = -1;
  int i = -1;
  int j = -1;
  double score = kInf;
  double adjusted_score = kInf;
  bool contingency = false;
  Route new_route;
  std::vector<int> dropped_requests;
};

// Evaluates all eligible (worker, i, j) candidates and picks the argmin of
// the (wb-adjusted) score; ties go to the smaller (worker id, i, j). Under
// the distance metric, when every candidate is infeasible a second pass
// retries each pair with time-optimal legs for the new detours only.
AssignDecision assign_request(const Problem& problem, const FleetState& fleet,
                              const Request& r, const SchedulerConfig& config,
                              const AssignContext& ctx = {});

void commit_assignment(FleetState& fleet, const Request& r,
                       const AssignDecision& decision);

// Removes one request's nodes from a route, shortcutting and relabeling the
// suffix. Reconnection legs take `reconnect` as their metric tag.
Route remove_request_from_route(const Problem& problem, const Route& route,
                                int request_id, LegTag reconnect);

struct RelocationMove {
  int request_id = -1;
  int from_worker = -1;
  int to_worker = -1;
  int i = -1, j = -1;
  double objective_delta = 0.0;
};

struct RelocationSweep {
  std::vector<RelocationMove> moves;
  double objective_before = 0.0;
  double objective_after = 0.0;
  int served_before = 0;
  int served_after = 0;
};

// One full sweep of single-request relocation: every assigned, not yet
// picked up real request is removed, shortcut and re-offered to the whole
// fleet; the move is kept only when the global objective strictly improves
// by more than 1e-6.
RelocationSweep relocate_requests(const Problem& problem, FleetState& fleet,
                                  const SchedulerConfig& config,
                                  InsertionStats* stats = nullptr);

}  // namespace vrptd
