#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vrptd/forecast_gen.hpp"
#include "vrptd/problem.hpp"
#include "vrptd/route.hpp"

namespace vrptd {

// JSON schemas (see README): graphs carry vertices with coordinates and arcs
// with per-vehicle-type periodic travel-time breakpoints; instances carry the
// request and worker tuples, times as seconds from midnight of day 1.
// Missing optional request/worker fields take the default constraint
// scenario: load 1, delivery window of 2400 s after the earliest pickup,
// 90 s service times, vehicle capacity 3.

struct ScenarioDefaults {
  double load = 1.0;
  double window_s = 2400.0;
  double service_s = 90.0;
  double capacity = 3.0;
};

RoadGraph graph_from_json(const nlohmann::json& j);
nlohmann::ordered_json graph_to_json(const RoadGraph& g);

Request request_from_json(const nlohmann::json& j, const ScenarioDefaults& d);
nlohmann::ordered_json request_to_json(const Request& r);

Worker worker_from_json(const nlohmann::json& j, const ScenarioDefaults& d,
                        const std::vector<std::string>& graph_types);
nlohmann::ordered_json worker_to_json(const Worker& w);

// Loads graph + instance files into a fully validated problem (vertices
// snapped, cache initialized, content hash recorded).
Problem load_instance(const std::string& graph_path,
                      const std::string& instance_path,
                      const ScenarioDefaults& defaults = {});
Problem load_instance_json(const nlohmann::json& graph_json,
                           const nlohmann::json& instance_json,
                           const ScenarioDefaults& defaults = {});

// Real request ids ordered by (release time, id).
std::vector<int> release_order(const Problem& problem);

std::vector<Request> forecasts_from_json(const nlohmann::json& j,
                                         const ScenarioDefaults& defaults = {});
std::vector<Request> load_forecasts(const std::string& path,
                                    const ScenarioDefaults& defaults = {});
nlohmann::ordered_json forecasts_to_json(const std::vector<Request>& forecasts);

std::vector<HistoryRequest> history_from_json(const nlohmann::json& j,
                                              const ScenarioDefaults& defaults = {});
std::vector<HistoryRequest> load_history(const std::string& path,
                                         const ScenarioDefaults& defaults = {});
nlohmann::ordered_json history_to_json(const std::vector<HistoryRequest>& h);

// Baseline file: fixed subtours as per-worker service sequences
// [{"worker": id, "sequence": [{"kind": "pickup"|"delivery", "request": id}]}].
std::vector<Subtour> baseline_from_json(const nlohmann::json& j,
                                        const Problem& problem);
std::vector<Subtour> load_baseline(const std::string& path,
                                   const Problem& problem);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// FNV-1a over raw bytes; identifies an instance across runs.
std::string content_hash(const std::string& bytes);

}  // namespace vrptd
