#include "vrptd/instance_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace vrptd {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw std::invalid_argument(where + ": " + what);
}

double require_number(const json& j, const std::string& field,
                      const std::string& where) {
  if (!j.contains(field) || !j[field].is_number()) {
    schema_error(where, "missing or non-numeric field '" + field + "'");
  }
  return j[field].get<double>();
}

Point point_from(const json& j, const std::string& field,
                 const std::string& where) {
  if (!j.contains(field) || !j[field].is_object()) {
    schema_error(where, "missing point field '" + field + "'");
  }
  const json& p = j[field];
  return {require_number(p, "x", where + "." + field),
          require_number(p, "y", where + "." + field)};
}

ordered_json point_to(const Point& p) {
  return ordered_json{{"x", p.x}, {"y", p.y}};
}

}  // namespace

RoadGraph graph_from_json(const json& j) {
  RoadGraph g;
  if (!j.contains("vertices") || !j["vertices"].is_array()) {
    schema_error("graph", "missing 'vertices' array");
  }
  for (const auto& v : j["vertices"]) {
    g.add_vertex(static_cast<VertexId>(require_number(v, "id", "vertex")),
                 {require_number(v, "x", "vertex"),
                  require_number(v, "y", "vertex")});
  }
  if (!j.contains("arcs") || !j["arcs"].is_array()) {
    schema_error("graph", "missing 'arcs' array");
  }
  for (const auto& a : j["arcs"]) {
    std::map<std::string, TravelTimeFunction> ttfs;
    if (!a.contains("ttf") || !a["ttf"].is_object()) {
      schema_error("arc", "missing 'ttf' object");
    }
    for (const auto& [type, f] : a["ttf"].items()) {
      double period = require_number(f, "period_s", "ttf");
      std::vector<TravelTimeFunction::Breakpoint> bps;
      if (!f.contains("breakpoints") || !f["breakpoints"].is_array()) {
        schema_error("ttf", "missing 'breakpoints' array");
      }
      for (const auto& bp : f["breakpoints"]) {
        if (!bp.is_array() || bp.size() != 2) {
          schema_error("ttf", "breakpoints must be [t, value] pairs");
        }
        bps.push_back({bp[0].get<double>(), bp[1].get<double>()});
      }
      ttfs.emplace(type, TravelTimeFunction(period, std::move(bps)));
    }
    g.add_arc(static_cast<VertexId>(require_number(a, "tail", "arc")),
              static_cast<VertexId>(require_number(a, "head", "arc")),
              require_number(a, "length_m", "arc"), std::move(ttfs));
  }
  g.finalize();
  return g;
}

ordered_json graph_to_json(const RoadGraph& g) {
  ordered_json out;
  out["vertices"] = ordered_json::array();
  for (std::size_t i = 0; i < g.num_vertices(); ++i) {
    VertexId id = g.id_of(static_cast<int>(i));
    Point p = g.location_of(id);
    out["vertices"].push_back(
        ordered_json{{"id", id}, {"x", p.x}, {"y", p.y}});
  }
  out["arcs"] = ordered_json::array();
  for (std::size_t k = 0; k < g.num_arcs(); ++k) {
    const auto& a = g.arc(static_cast<int>(k));
    ordered_json ttfs;
    for (std::size_t t = 0; t < g.vehicle_types().size(); ++t) {
      ordered_json bps = ordered_json::array();
      for (const auto& bp : a.ttf[t].breakpoints()) {
        bps.push_back(ordered_json::array({bp.t, bp.value}));
      }
      ttfs[g.vehicle_types()[t]] =
          ordered_json{{"period_s", a.ttf[t].period()}, {"breakpoints", bps}};
    }
    out["arcs"].push_back(ordered_json{{"tail", g.id_of(a.tail)},
                                       {"head", g.id_of(a.head)},
                                       {"length_m", a.length_m},
                                       {"ttf", ttfs}});
  }
  return out;
}

Request request_from_json(const json& j, const ScenarioDefaults& d) {
  Request r;
  r.id = static_cast<int>(require_number(j, "id", "request"));
  const std::string where = "request " + std::to_string(r.id);
  r.pickup_point = point_from(j, "pickup_point", where);
  r.delivery_point = point_from(j, "delivery_point", where);
  r.earliest_pickup_s = require_number(j, "earliest_pickup_time", where);
  r.latest_delivery_s = j.contains("latest_delivery_time")
                            ? j["latest_delivery_time"].get<double>()
                            : r.earliest_pickup_s + d.window_s;
  r.pickup_service_s = j.value("pickup_service_time", d.service_s);
  r.delivery_service_s = j.value("delivery_service_time", d.service_s);
  r.load = j.value("load", d.load);
  if (j.contains("vehicle_types")) {
    for (const auto& t : j["vehicle_types"]) {
      r.vehicle_types.push_back(t.get<std::string>());
    }
  }
  r.release_s = j.value("release_time", r.earliest_pickup_s);
  r.is_virtual = j.value("is_virtual", false);
  if (j.contains("probability")) {
    r.is_virtual = true;
    r.probability = j["probability"].get<double>();
  }
  if (!(r.earliest_pickup_s < r.latest_delivery_s)) {
    schema_error(where, "earliest pickup must precede latest delivery");
  }
  if (r.load < 0) schema_error(where, "load must be non-negative");
  if (!r.is_virtual && r.release_s > r.earliest_pickup_s) {
    schema_error(where, "release time must not exceed earliest pickup");
  }
  if (r.is_virtual && (r.probability < 0.0 || r.probability > 1.0)) {
    schema_error(where, "probability must lie in [0, 1]");
  }
  return r;
}

ordered_json request_to_json(const Request& r) {
  ordered_json out{{"id", r.id},
                   {"pickup_point", point_to(r.pickup_point)},
                   {"earliest_pickup_time", r.earliest_pickup_s},
                   {"pickup_service_time", r.pickup_service_s},
                   {"delivery_point", point_to(r.delivery_point)},
                   {"latest_delivery_time", r.latest_delivery_s},
                   {"delivery_service_time", r.delivery_service_s},
                   {"load", r.load},
                   {"release_time", r.release_s}};
  if (!r.vehicle_types.empty()) out["vehicle_types"] = r.vehicle_types;
  if (r.is_virtual) out["probability"] = r.probability;
  return out;
}

Worker worker_from_json(const json& j, const ScenarioDefaults& d,
                        const std::vector<std::string>& graph_types) {
  Worker w;
  w.id = static_cast<int>(require_number(j, "id", "worker"));
  const std::string where = "worker " + std::to_string(w.id);
  w.start_point = point_from(j, "start_point", where);
  w.end_point = point_from(j, "end_point", where);
  w.shift_start_s = require_number(j, "shift_start_time", where);
  w.shift_end_s = require_number(j, "shift_end_time", where);
  w.capacity = j.value("capacity", d.capacity);
  if (j.contains("vehicle_type")) {
    w.vehicle_type = j["vehicle_type"].get<std::string>();
  } else if (graph_types.size() == 1) {
    w.vehicle_type = graph_types.front();
  } else {
    schema_error(where, "vehicle_type required (graph declares several types)");
  }
  if (!(w.shift_start_s < w.shift_end_s)) {
    schema_error(where, "shift start must precede shift end");
  }
  if (!(w.capacity > 0)) schema_error(where, "capacity must be positive");
  return w;
}

ordered_json worker_to_json(const Worker& w) {
  return ordered_json{{"id", w.id},
                      {"start_point", point_to(w.start_point)},
                      {"shift_start_time", w.shift_start_s},
                      {"end_point", point_to(w.end_point)},
                      {"shift_end_time", w.shift_end_s},
                      {"capacity", w.capacity},
                      {"vehicle_type", w.vehicle_type}};
}

Problem load_instance_json(const json& graph_json, const json& instance_json,
                           const ScenarioDefaults& defaults) {
  Problem problem;
  problem.graph = graph_from_json(graph_json);
  if (!instance_json.contains("requests") ||
      !instance_json["requests"].is_array()) {
    schema_error("instance", "missing 'requests' array");
  }
  if (!instance_json.contains("workers") ||
      !instance_json["workers"].is_array()) {
    schema_error("instance", "missing 'workers' array");
  }
  for (const auto& wj : instance_json["workers"]) {
    Worker w = worker_from_json(wj, defaults, problem.graph.vehicle_types());
    problem.graph.vehicle_type_index(w.vehicle_type);  // must exist
    w.start_vertex = problem.graph.snap_to_graph(w.start_point);
    w.end_vertex = problem.graph.snap_to_graph(w.end_point);
    problem.workers.push_back(std::move(w));
  }
  for (const auto& rj : instance_json["requests"]) {
    Request r = request_from_json(rj, defaults);
    r.pickup_vertex = problem.graph.snap_to_graph(r.pickup_point);
    r.delivery_vertex = problem.graph.snap_to_graph(r.delivery_point);
    if (!problem.requests.emplace(r.id, r).second) {
      schema_error("instance", "duplicate request id " +
                                   std::to_string(r.id));
    }
  }
  problem.init_cache();
  return problem;
}

Problem load_instance(const std::string& graph_path,
                      const std::string& instance_path,
                      const ScenarioDefaults& defaults) {
  std::string graph_bytes = read_file(graph_path);
  std::string instance_bytes = read_file(instance_path);
  Problem problem = load_instance_json(json::parse(graph_bytes),
                                       json::parse(instance_bytes), defaults);
  problem.instance_hash = content_hash(graph_bytes + instance_bytes);
  return problem;
}

std::vector<int> release_order(const Problem& problem) {
  std::vector<int> ids;
  for (const auto& [id, r] : problem.requests) {
    if (!r.is_virtual) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    const Request& ra = problem.request(a);
    const Request& rb = problem.request(b);
    if (ra.release_s != rb.release_s) return ra.release_s < rb.release_s;
    return a < b;
  });
  return ids;
}

std::vector<Request> forecasts_from_json(const json& j,
                                         const ScenarioDefaults& defaults) {
  if (!j.is_array()) schema_error("forecasts", "expected a JSON array");
  std::vector<Request> out;
  for (const auto& rj : j) {
    Request r = request_from_json(rj, defaults);
    r.is_virtual = true;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Request> load_forecasts(const std::string& path,
                                    const ScenarioDefaults& defaults) {
  return forecasts_from_json(json::parse(read_file(path)), defaults);
}

ordered_json forecasts_to_json(const std::vector<Request>& forecasts) {
  ordered_json out = ordered_json::array();
  for (const auto& r : forecasts) out.push_back(request_to_json(r));
  return out;
}

std::vector<HistoryRequest> history_from_json(const json& j,
                                              const ScenarioDefaults& defaults) {
  const json& arr = j.is_object() && j.contains("requests") ? j["requests"] : j;
  if (!arr.is_array()) schema_error("history", "expected a request array");
  std::vector<HistoryRequest> out;
  for (const auto& rj : arr) {
    HistoryRequest h;
    h.request = request_from_json(rj, defaults);
    if (!rj.contains("day")) schema_error("history", "request missing 'day' tag");
    h.day = rj["day"].get<int>();
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<HistoryRequest> load_history(const std::string& path,
                                         const ScenarioDefaults& defaults) {
  return history_from_json(json::parse(read_file(path)), defaults);
}

ordered_json history_to_json(const std::vector<HistoryRequest>& history) {
  ordered_json arr = ordered_json::array();
  for (const auto& h : history) {
    ordered_json r = request_to_json(h.request);
    r["day"] = h.day;
    arr.push_back(std::move(r));
  }
  return ordered_json{{"requests", arr}};
}

std::vector<Subtour> baseline_from_json(const json& j, const Problem& problem) {
  if (!j.is_array()) schema_error("baseline", "expected a JSON array");
  std::vector<Subtour> out;
  for (const auto& sj : j) {
    int wid = static_cast<int>(require_number(sj, "worker", "baseline entry"));
    const Worker& w = problem.worker_by_id(wid);
    Subtour st;
    st.worker_id = wid;
    st.nodes.push_back(make_shift_start_node(w));
    if (!sj.contains("sequence") || !sj["sequence"].is_array()) {
      schema_error("baseline", "entry missing 'sequence' array");
    }
    for (const auto& ev : sj["sequence"]) {
      std::string kind = ev.value("kind", "");
      int rid = static_cast<int>(require_number(ev, "request", "baseline event"));
      const Request& r = problem.request(rid);
      if (kind == "pickup") {
        st.nodes.push_back(make_pickup_node(r));
      } else if (kind == "delivery") {
        st.nodes.push_back(make_delivery_node(r));
      } else {
        schema_error("baseline", "event kind must be pickup or delivery");
      }
    }
    st.nodes.push_back(make_shift_end_node(w));
    out.push_back(std::move(st));
  }
  return out;
}

std::vector<Subtour> load_baseline(const std::string& path,
                                   const Problem& problem) {
  return baseline_from_json(json::parse(read_file(path)), problem);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

std::string content_hash(const std::string& bytes) {
  unsigned long long h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", h);
  return buf;
}

}  // namespace vrptd
