#include "vrptd/replay.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "vrptd/instance_io.hpp"

namespace vrptd {

using nlohmann::ordered_json;

std::string RunConfig::variant_name() const {
  std::string name =
      scheduler == Scheduler::Insertion ? "td-insertion" : "td-prophet";
  name += sched.metric == LegTag::Distance ? "_dist" : "_time";
  name += sched.norm == 2 ? "_l2" : "_l1";
  if (sched.wb_enabled) name += "_wb";
  if (sched.rr_enabled) name += "_rr";
  return name;
}

namespace {

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void log_relocations(std::vector<ordered_json>& events, double t,
                     const RelocationSweep& sweep) {
  for (const auto& move : sweep.moves) {
    events.push_back(ordered_json{{"t", t},
                                  {"event", "relocation"},
                                  {"request", move.request_id},
                                  {"from_worker", move.from_worker},
                                  {"to_worker", move.to_worker},
                                  {"i", move.i},
                                  {"j", move.j},
                                  {"objective_delta", move.objective_delta}});
  }
}

}  // namespace

ReplayResult replay(Problem& problem, const RunConfig& config,
                    const std::vector<Request>& forecasts) {
  ReplayResult result;
  auto& events = result.events;

  const bool prophet = config.scheduler == RunConfig::Scheduler::Prophet;
  FleetState fleet = init_fleet(problem, config.sched.metric);
  fleet.clock = 0.0;

  ProphetState prophet_state;
  prophet_state.probability_threshold = config.prophet_threshold;
  prophet_state.match_window_s = config.prophet_window_s;

  if (prophet) {
    std::vector<int> forecast_ids;
    for (const auto& f : forecasts) {
      Request copy = f;
      copy.is_virtual = true;
      copy.pickup_vertex = problem.graph.snap_to_graph(copy.pickup_point);
      copy.delivery_vertex = problem.graph.snap_to_graph(copy.delivery_point);
      if (!problem.requests.emplace(copy.id, copy).second) {
        throw std::invalid_argument("forecast id collides with a request id: " +
                                    std::to_string(copy.id));
      }
      forecast_ids.push_back(copy.id);
    }
    auto seeded =
        seed_forecasts(problem, fleet, forecast_ids, config.sched, prophet_state);
    for (const auto& sd : seeded) {
      ordered_json e{{"t", 0.0},
                     {"event", sd.assigned ? "seed_assignment" : "seed_rejection"},
                     {"virtual", sd.virtual_id}};
      if (sd.assigned) {
        e["worker"] = problem.workers[sd.worker_index].id;
        e["i"] = sd.i;
        e["j"] = sd.j;
      }
      events.push_back(std::move(e));
    }
  } else if (!forecasts.empty()) {
    throw std::invalid_argument("forecasts supplied to a non-prophet run");
  }

  std::vector<int> ids = release_order(problem);
  std::vector<double> latencies;
  latencies.reserve(ids.size());
  double last_release = 0.0;

  for (int rid : ids) {
    const Request& r = problem.request(rid);
    fleet.clock = r.release_s;
    last_release = std::max(last_release, r.release_s);
    problem.legs->begin_epoch();
    const double t0 = now_ms();

    bool handled = false;
    if (prophet) {
      for (int vid : expire_due(problem, fleet, prophet_state, fleet.clock,
                                config.sched)) {
        events.push_back(ordered_json{
            {"t", fleet.clock}, {"event", "forecast_expired"}, {"virtual", vid}});
      }
      if (auto match =
              try_match(problem, fleet, prophet_state, r, config.sched)) {
        events.push_back(ordered_json{{"t", fleet.clock},
                                      {"event", "forecast_verified"},
                                      {"virtual", match->virtual_id},
                                      {"request", rid},
                                      {"worker",
                                       problem.workers[match->worker_index].id}});
        handled = true;
      }
    }

    if (!handled) {
      AssignDecision decision;
      if (prophet) {
        decision = handle_real_request(problem, fleet, prophet_state, r,
                                       config.sched, &result.stats);
      } else {
        AssignContext ctx;
        ctx.stats = &result.stats;
        decision = assign_request(problem, fleet, r, config.sched, ctx);
      }
      if (decision.assigned) {
        // The worker deviates mid-plan when it already departed the node the
        // new pickup follows.
        bool detour =
            fleet.routes[decision.worker_index].labels[decision.i].departure <=
            fleet.clock;
        if (prophet) {
          commit_prophet_assignment(fleet, prophet_state, r, decision);
        } else {
          commit_assignment(fleet, r, decision);
        }
        ordered_json e{{"t", fleet.clock},
                       {"event", "assignment"},
                       {"request", rid},
                       {"worker", problem.workers[decision.worker_index].id},
                       {"i", decision.i},
                       {"j", decision.j},
                       {"score", decision.score},
                       {"contingency", decision.contingency}};
        if (!decision.dropped_requests.empty()) {
          e["ignored_virtual"] = decision.dropped_requests;
        }
        events.push_back(std::move(e));
        if (detour) {
          events.push_back(ordered_json{
              {"t", fleet.clock},
              {"event", "detour"},
              {"request", rid},
              {"worker", problem.workers[decision.worker_index].id},
              {"at_index", decision.i}});
        }
      } else {
        events.push_back(ordered_json{
            {"t", fleet.clock}, {"event", "rejection"}, {"request", rid}});
      }
    }

    if (config.sched.rr_enabled) {
      RelocationSweep sweep =
          relocate_requests(problem, fleet, config.sched, &result.stats);
      log_relocations(events, fleet.clock, sweep);
      result.sweeps.push_back(std::move(sweep));
    }
    latencies.push_back(now_ms() - t0);
  }

  if (prophet) {
    fleet.clock = std::max(fleet.clock, last_release);
    for (int vid : expire_due(problem, fleet, prophet_state, fleet.clock,
                              config.sched, /*force=*/true)) {
      events.push_back(ordered_json{
          {"t", fleet.clock}, {"event", "forecast_expired"}, {"virtual", vid}});
    }
  }

  result.metrics = compute_metrics(problem, fleet, config.variant_name());
  if (!latencies.empty()) {
    double sum = 0.0, mx = 0.0;
    for (double l : latencies) {
      sum += l;
      mx = std::max(mx, l);
    }
    result.metrics.latency_mean_ms = sum / latencies.size();
    result.metrics.latency_max_ms = mx;
  }
  result.fleet = std::move(fleet);
  return result;
}

ReplayResult evaluate_baseline(Problem& problem,
                               const std::vector<Subtour>& subtours) {
  ReplayResult result;
  FleetState fleet = init_fleet(problem, LegTag::Distance);
  for (const auto& st : subtours) {
    int widx = problem.worker_index(st.worker_id);
    Route route = realize_route(problem, st, LegTag::Distance);
    for (const auto& violation : check_feasible(problem, route)) {
      result.events.push_back(
          ordered_json{{"t", 0.0},
                       {"event", "baseline_violation"},
                       {"worker", st.worker_id},
                       {"detail", violation.describe(route)}});
    }
    for (const auto& node : st.nodes) {
      if (node.kind == NodeKind::Pickup) {
        fleet.assigned[node.owner] = widx;
      }
    }
    fleet.routes[widx] = std::move(route);
  }
  result.metrics = compute_metrics(problem, fleet, "baseline");
  result.fleet = std::move(fleet);
  return result;
}

RunMetrics compute_metrics(const Problem& problem, const FleetState& fleet,
                           const std::string& variant) {
  RunMetrics m;
  m.variant = variant;
  m.instance_hash = problem.instance_hash;
  int total_real = 0;
  for (const auto& [id, r] : problem.requests) {
    if (!r.is_virtual) ++total_real;
  }
  m.served = served_real_count(problem, fleet);
  m.rejected = total_real - m.served;
  for (const auto& route : fleet.routes) {
    m.total_travel_time_h += route.cost_time_s / 3600.0;
    m.total_length_km += route.cost_length_m / 1000.0;
    m.workloads_km.push_back(route.cost_length_m / 1000.0);
  }
  if (!m.workloads_km.empty()) {
    double mean = 0.0;
    for (double w : m.workloads_km) mean += w;
    mean /= m.workloads_km.size();
    double var = 0.0;
    for (double w : m.workloads_km) var += (w - mean) * (w - mean);
    var /= m.workloads_km.size();
    m.pathlen_avg_km = mean;
    m.pathlen_var_km2 = var;
  }
  return m;
}

std::string events_to_jsonl(const std::vector<ordered_json>& events) {
  std::ostringstream os;
  for (const auto& e : events) os << e.dump() << "\n";
  return os.str();
}

ordered_json routes_to_json(const Problem& problem, const FleetState& fleet) {
  ordered_json out = ordered_json::array();
  for (std::size_t w = 0; w < fleet.routes.size(); ++w) {
    const Route& route = fleet.routes[w];
    ordered_json nodes = ordered_json::array();
    for (int k = 0; k < route.size(); ++k) {
      const PDNode& node = route.subtour.nodes[k];
      const NodeLabels& l = route.labels[k];
      const char* kind = node.kind == NodeKind::ShiftStart ? "shift_start"
                         : node.kind == NodeKind::ShiftEnd ? "shift_end"
                         : node.kind == NodeKind::Pickup   ? "pickup"
                                                           : "delivery";
      nodes.push_back(ordered_json{{"kind", kind},
                                   {"owner", node.owner},
                                   {"vertex", node.vertex},
                                   {"arrival", l.arrival},
                                   {"departure", l.departure},
                                   {"waiting", l.waiting},
                                   {"load", l.load}});
    }
    ordered_json legs = ordered_json::array();
    for (const auto& leg : route.legs) {
      legs.push_back(
          ordered_json{{"metric", leg.tag == LegTag::Distance ? "dist" : "time"},
                       {"length_m", leg.length_m},
                       {"travel_s", leg.travel_s}});
    }
    ordered_json violations = ordered_json::array();
    for (const auto& v : check_feasible(problem, route)) {
      violations.push_back(v.describe(route));
    }
    out.push_back(ordered_json{{"worker", problem.workers[w].id},
                               {"nodes", nodes},
                               {"legs", legs},
                               {"length_m", route.cost_length_m},
                               {"travel_s", route.cost_time_s},
                               {"feasible", route.feasible},
                               {"violations", violations}});
  }
  return out;
}

namespace {
std::string csv_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}
}  // namespace

std::string metrics_csv_header() {
  return "variant,instance_hash,served,rejected,total_travel_time_h,"
         "total_length_km,pathlen_avg_km,pathlen_var_km2,workloads_km";
}

std::string metrics_csv_row(const RunMetrics& m) {
  std::ostringstream os;
  os << m.variant << "," << m.instance_hash << "," << m.served << ","
     << m.rejected << "," << csv_num(m.total_travel_time_h) << ","
     << csv_num(m.total_length_km) << "," << csv_num(m.pathlen_avg_km) << ","
     << csv_num(m.pathlen_var_km2) << ",";
  for (std::size_t k = 0; k < m.workloads_km.size(); ++k) {
    if (k) os << ";";
    os << csv_num(m.workloads_km[k]);
  }
  return os.str();
}

RunMetrics metrics_from_csv_row(const std::string& header,
                                const std::string& row) {
  if (header != metrics_csv_header()) {
    throw std::invalid_argument("unrecognized metrics csv header");
  }
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(row);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (cells.size() != 9) throw std::invalid_argument("bad metrics csv row");
  RunMetrics m;
  m.variant = cells[0];
  m.instance_hash = cells[1];
  m.served = std::stoi(cells[2]);
  m.rejected = std::stoi(cells[3]);
  m.total_travel_time_h = std::stod(cells[4]);
  m.total_length_km = std::stod(cells[5]);
  m.pathlen_avg_km = std::stod(cells[6]);
  m.pathlen_var_km2 = std::stod(cells[7]);
  std::istringstream ws(cells[8]);
  std::string w;
  while (std::getline(ws, w, ';')) {
    if (!w.empty()) m.workloads_km.push_back(std::stod(w));
  }
  return m;
}

}  // namespace vrptd
