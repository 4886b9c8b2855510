#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vrptd/pd.hpp"

namespace vrptd {

struct GridSpec {
  double cell_size_m = 500.0;  // D
  int windows_per_day = 24;
  int sample_days = 1;         // N
  double day_length_s = 86400.0;
  // Optional fixed extent; derived from the data when absent. Events outside
  // are clamped to the border cells with a diagnostic.
  std::optional<double> origin_x, origin_y;
  std::optional<int> cells_x, cells_y;
};

struct HistoryRequest {
  Request request;  // times are seconds within the tagged day
  int day = 0;
};

// Spatiotemporal placement of each historical request: pickup cell, delivery
// cell and the time window of its earliest pickup time. Coordinates exactly
// on a cell edge go to the lower-index cell.
struct Grid3D {
  GridSpec spec;
  double min_x = 0.0, min_y = 0.0;
  int nx = 0, ny = 0;
  struct Placed {
    int pickup_cx = 0, pickup_cy = 0;
    int delivery_cx = 0, delivery_cy = 0;
    int window = 0;
  };
  std::vector<HistoryRequest> history;
  std::vector<Placed> placed;  // parallel to history
  std::vector<std::string> diagnostics;
};

Grid3D build_grid(const std::vector<HistoryRequest>& history,
                  const GridSpec& spec);

enum class Aggregator { Average, Median };

struct MergeOptions {
  // Cross-day requests merge when their cells and window match, their
  // earliest pickup times differ by at most this threshold (default: half a
  // time window), their eligible vehicle-type sets are equal and their loads
  // differ by at most one unit.
  std::optional<double> similarity_threshold_s;
  Aggregator aggregator = Aggregator::Average;
  double load_tolerance = 1.0;
  int first_virtual_id = 1000000;
};

// Iterative pairwise merging to a fixpoint; probability = contributing
// days / N. Deterministic: pairs are visited in ascending (day, request id)
// order and output follows the same order.
std::vector<Request> merge_forecasts(const Grid3D& grid,
                                     const MergeOptions& opt = {});

}  // namespace vrptd
