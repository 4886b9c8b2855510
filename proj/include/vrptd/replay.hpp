#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vrptd/insertion.hpp"
#include "vrptd/prophet.hpp"

namespace vrptd {

struct RunConfig {
  enum class Scheduler { Insertion, Prophet } scheduler = Scheduler::Insertion;
  SchedulerConfig sched;
  double prophet_threshold = 0.8;
  double prophet_window_s = 900.0;
  unsigned long long seed = 0;  // bookkeeping only; the replay is
                                // deterministic given instance and config

  std::string variant_name() const;
};

struct RunMetrics {
  std::string variant;
  std::string instance_hash;
  int served = 0;
  int rejected = 0;
  double total_travel_time_h = 0.0;
  double total_length_km = 0.0;
  double pathlen_avg_km = 0.0;
  double pathlen_var_km2 = 0.0;  // population variance
  std::vector<double> workloads_km;  // per worker, worker order
  // Wall-clock latencies; reported separately from the deterministic
  // metrics (see timing.json).
  double latency_mean_ms = 0.0;
  double latency_max_ms = 0.0;
};

struct ReplayResult {
  RunMetrics metrics;
  std::vector<nlohmann::ordered_json> events;  // one JSONL record each
  FleetState fleet;
  std::vector<RelocationSweep> sweeps;  // one per relocation invocation
  InsertionStats stats;
};

// Event-driven replay of the real request sequence through the configured
// scheduler. Forecasts must be virtual requests with distinct ids; they are
// registered into the problem's request map (prophet runs only).
ReplayResult replay(Problem& problem, const RunConfig& config,
                    const std::vector<Request>& forecasts = {});

// Fixed subtours evaluated as-is with distance-optimal legs; temporal
// violations are reported in the result events but tolerated.
ReplayResult evaluate_baseline(Problem& problem,
                               const std::vector<Subtour>& subtours);

RunMetrics compute_metrics(const Problem& problem, const FleetState& fleet,
                           const std::string& variant);

std::string events_to_jsonl(const std::vector<nlohmann::ordered_json>& events);
nlohmann::ordered_json routes_to_json(const Problem& problem,
                                      const FleetState& fleet);

std::string metrics_csv_header();
std::string metrics_csv_row(const RunMetrics& m);
RunMetrics metrics_from_csv_row(const std::string& header,
                                const std::string& row);

}  // namespace vrptd
