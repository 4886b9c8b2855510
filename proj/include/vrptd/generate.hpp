#pragma once

#include <nlohmann/json.hpp>

namespace vrptd {

struct GenerateSpec {
  unsigned long long seed = 1;
  int grid_width = 50;   // road graph is a jittered planar grid
  int grid_height = 50;
  int num_requests = 200;
  int num_workers = 10;
  int history_days = 0;  // > 0 also emits a tagged multi-day history
  double day_s = 86400.0;
  double request_window_start_s = 32400.0;  // requests released in this span
  double request_window_end_s = 68400.0;
  double shift_length_s = 28800.0;
  int hotspots = 5;
};

struct GeneratedInstance {
  nlohmann::ordered_json graph;
  nlohmann::ordered_json instance;
  nlohmann::ordered_json history;  // empty unless history_days > 0
};

// Deterministic synthetic city: planar grid road graph, sinusoidal FIFO
// travel-time profiles with morning/evening peaks, Poisson request arrivals
// over the day and staggered worker shifts. Byte-identical output per seed.
GeneratedInstance generate_instance(const GenerateSpec& spec);

}  // namespace vrptd
