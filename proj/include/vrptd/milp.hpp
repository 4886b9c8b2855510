#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vrptd/insertion.hpp"
#include "vrptd/route.hpp"

namespace vrptd {

// Static scalarization of the PD graph. Each arc carries a travel-time value
// computed at the departure time the connection would plausibly be used
// (phase 1: shift start; phase 2: pickup ready time; phase 3: arrival at the
// delivery), with the destination's service time embedded, plus the static
// shortest distance. Under the distance objective each connection carries
// the two Pareto-optimal road routes as separate parallel arcs.
struct ScalarArc {
  int from = -1;  // PD node index
  int to = -1;
  enum class Variant { Single, DistanceLeg, TimeLeg } variant = Variant::Single;
  int pd_arc = -1;      // index into PDGraph::arcs
  double tau_s = 0.0;   // travel time incl. destination service
  double service_s = 0.0;
  double lambda_m = 0.0;
  int only_worker = -1;  // >= 0: usable by that worker index only
};

struct ScalarizedPDGraph {
  PDGraph pd;
  std::vector<ScalarArc> arcs;
  bool pareto = false;
  std::vector<std::string> diagnostics;  // dropped unreachable arcs etc.

  // Arc indices by (from, to) PD node pair.
  std::vector<int> arcs_between(int from, int to) const;
};

// Requires a single vehicle type across all workers (the offline model keeps
// the online schedulers' type eligibility out of scope).
ScalarizedPDGraph scalarize(const PDGraph& pd, const Problem& problem,
                            LegTag objective);

struct MilpModel {
  struct Term {
    std::string var;
    double coef = 0.0;
    bool operator==(const Term&) const = default;
  };
  struct Row {
    std::string name;
    std::vector<Term> terms;
    char sense = 'L';  // 'L' <=, 'G' >=, 'E' =
    double rhs = 0.0;
    bool operator==(const Row&) const = default;
  };
  struct Var {
    std::string name;
    double lb = 0.0;
    double ub = 0.0;
    bool is_binary = false;
    bool operator==(const Var&) const = default;
  };

  std::vector<Var> vars;         // declaration order
  std::vector<Term> objective;   // minimized
  std::vector<Row> rows;

  bool operator==(const MilpModel&) const = default;
};

struct MilpOptions {
  std::optional<double> sigma_override;  // uniform request profit
};

MilpModel build_milp(const ScalarizedPDGraph& sc, const Problem& problem,
                     LegTag objective, const MilpOptions& opt = {});

double default_sigma(const ScalarizedPDGraph& sc, const Problem& problem,
                     LegTag objective);

// LP-format text, deterministic naming: x_e{arc}_w{worker id},
// x_r{request id}_w{worker id}, a_{node}, q_{node}. emit -> parse -> emit is
// the identity.
std::string emit_model(const MilpModel& model);
MilpModel parse_model(const std::string& text);

// Checks a full variable assignment against every row and bound; returns
// human-readable descriptions of the violations (empty = all satisfied).
std::vector<std::string> evaluate_model(
    const MilpModel& model,
    const std::unordered_map<std::string, double>& values, double tol = 1e-6);

struct TinySolution {
  bool feasible = false;
  double objective = 0.0;
  // Service-node sequences per worker (PD node indices) plus the scalar arcs
  // (including the chosen Pareto variants) realizing them.
  std::vector<std::vector<int>> nodes_per_worker;
  std::vector<std::vector<int>> arcs_per_worker;
  std::vector<int> served_requests;
};

// Exhaustive assignment + ordering search over the scalarized graph,
// limited to at most 6 requests and 3 workers. Feasibility follows the
// model's completion-time semantics.
TinySolution solve_exact_tiny(const ScalarizedPDGraph& sc,
                              const Problem& problem, LegTag objective,
                              const MilpOptions& opt = {});

// Derives the model variable values realized by a tiny solution (arrival
// and load propagation along each worker's arc path; free nodes pinned to
// their lower bounds).
std::unordered_map<std::string, double> solution_to_values(
    const ScalarizedPDGraph& sc, const Problem& problem,
    const TinySolution& sol);

// Objective value of an online fleet under the scalar metric: the sum of
// scalar arc costs along each non-empty subtour (legs mapped to their
// Pareto variant by tag) minus sigma per served request. Idle workers
// contribute nothing, mirroring the model's arc set.
double fleet_scalar_objective(const ScalarizedPDGraph& sc,
                              const Problem& problem, const FleetState& fleet,
                              LegTag objective, const MilpOptions& opt = {});

struct WorkerCheck {
  Subtour subtour;
  Route route;  // final, possibly repaired
  std::vector<Violation> remaining;
  int swaps = 0;
  enum class Status { Feasible, Repaired, Rejected } status = Status::Feasible;
};

struct SolutionCheckReport {
  std::vector<WorkerCheck> workers;
  std::vector<std::string> cuts;  // LP rows blocking rejected subtours
  bool accepted = false;          // no worker rejected
};

// Relabels each subtour under the true time-dependent metric. On a deadline
// violation the distance-optimal legs are swapped to time-optimal ones one
// at a time, nearest to the violation first, relabeling after each swap;
// when no swappable leg remains the solution is rejected and a no-good cut
// over the subtour's arcs is emitted.
SolutionCheckReport check_and_repair(const Problem& problem,
                                     const ScalarizedPDGraph& sc,
                                     const std::vector<Subtour>& subtours,
                                     LegTag objective);

// Subtour from explicit PD service-node ids for one worker.
Subtour subtour_from_nodes(const Problem& problem, const PDGraph& pd,
                           int worker_id, const std::vector<int>& node_ids);

}  // namespace vrptd
