#include "vrptd/forecast_gen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace vrptd {

namespace {

// floor with the lower-cell rule: a coordinate exactly on a cell edge
// belongs to the cell below it.
int edge_floor(double pos) {
  int idx = static_cast<int>(std::floor(pos));
  if (pos == static_cast<double>(idx) && idx > 0) return idx - 1;
  return idx;
}

int clamp_cell(int idx, int n, bool* clamped) {
  if (idx < 0) {
    *clamped = true;
    return 0;
  }
  if (idx >= n) {
    *clamped = true;
    return n - 1;
  }
  return idx;
}

}  // namespace

Grid3D build_grid(const std::vector<HistoryRequest>& history,
                  const GridSpec& spec) {
  if (spec.cell_size_m <= 0) throw std::invalid_argument("cell size must be positive");
  if (spec.windows_per_day < 24) {
    throw std::invalid_argument("at least 24 time windows per day required");
  }
  if (spec.sample_days < 1) throw std::invalid_argument("sample days must be >= 1");

  Grid3D grid;
  grid.spec = spec;
  grid.history = history;

  double min_x = kInf, min_y = kInf, max_x = -kInf, max_y = -kInf;
  for (const auto& h : history) {
    for (const Point& p : {h.request.pickup_point, h.request.delivery_point}) {
      min_x = std::min(min_x, p.x);
      min_y = std::min(min_y, p.y);
      max_x = std::max(max_x, p.x);
      max_y = std::max(max_y, p.y);
    }
  }
  if (history.empty()) {
    min_x = min_y = 0.0;
    max_x = max_y = 0.0;
  }
  grid.min_x = spec.origin_x.value_or(min_x);
  grid.min_y = spec.origin_y.value_or(min_y);
  auto cells_needed = [&](double lo, double hi) {
    return std::max(1, edge_floor((hi - lo) / spec.cell_size_m) + 1);
  };
  grid.nx = spec.cells_x.value_or(cells_needed(grid.min_x, max_x));
  grid.ny = spec.cells_y.value_or(cells_needed(grid.min_y, max_y));

  const double window_s = spec.day_length_s / spec.windows_per_day;
  for (const auto& h : history) {
    Grid3D::Placed placed;
    bool clamped = false;
    placed.pickup_cx = clamp_cell(
        edge_floor((h.request.pickup_point.x - grid.min_x) / spec.cell_size_m),
        grid.nx, &clamped);
    placed.pickup_cy = clamp_cell(
        edge_floor((h.request.pickup_point.y - grid.min_y) / spec.cell_size_m),
        grid.ny, &clamped);
    placed.delivery_cx = clamp_cell(
        edge_floor((h.request.delivery_point.x - grid.min_x) / spec.cell_size_m),
        grid.nx, &clamped);
    placed.delivery_cy = clamp_cell(
        edge_floor((h.request.delivery_point.y - grid.min_y) / spec.cell_size_m),
        grid.ny, &clamped);
    placed.window = std::max(
        0, std::min(spec.windows_per_day - 1,
                    edge_floor(h.request.earliest_pickup_s / window_s)));
    if (clamped) {
      std::ostringstream os;
      os << "request " << h.request.id << " (day " << h.day
         << ") outside grid bounds; clamped to border cell";
      grid.diagnostics.push_back(os.str());
    }
    grid.placed.push_back(placed);
  }
  return grid;
}

namespace {

struct Cluster {
  std::vector<int> sources;  // indices into grid.history, (day, id)-sorted
  Grid3D::Placed key;
  Request aggregate;
  std::set<int> days;
};

double aggregate_of(std::vector<double> values, Aggregator how) {
  if (values.empty()) return 0.0;
  if (how == Aggregator::Average) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
  }
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void recompute_aggregate(Cluster& c, const Grid3D& grid, Aggregator how) {
  auto collect = [&](auto&& get) {
    std::vector<double> out;
    out.reserve(c.sources.size());
    for (int s : c.sources) out.push_back(get(grid.history[s].request));
    return out;
  };
  Request base = grid.history[c.sources.front()].request;
  Request agg = base;
  agg.pickup_point.x = aggregate_of(collect([](const Request& r) { return r.pickup_point.x; }), how);
  agg.pickup_point.y = aggregate_of(collect([](const Request& r) { return r.pickup_point.y; }), how);
  agg.delivery_point.x = aggregate_of(collect([](const Request& r) { return r.delivery_point.x; }), how);
  agg.delivery_point.y = aggregate_of(collect([](const Request& r) { return r.delivery_point.y; }), how);
  agg.earliest_pickup_s = aggregate_of(collect([](const Request& r) { return r.earliest_pickup_s; }), how);
  agg.latest_delivery_s = aggregate_of(collect([](const Request& r) { return r.latest_delivery_s; }), how);
  agg.pickup_service_s = aggregate_of(collect([](const Request& r) { return r.pickup_service_s; }), how);
  agg.delivery_service_s = aggregate_of(collect([](const Request& r) { return r.delivery_service_s; }), how);
  agg.load = aggregate_of(collect([](const Request& r) { return r.load; }), how);
  c.aggregate = agg;
}

bool same_type_set(const Request& a, const Request& b) {
  std::set<std::string> sa(a.vehicle_types.begin(), a.vehicle_types.end());
  std::set<std::string> sb(b.vehicle_types.begin(), b.vehicle_types.end());
  return sa == sb;
}

}  // namespace

std::vector<Request> merge_forecasts(const Grid3D& grid,
                                     const MergeOptions& opt) {
  const double window_s =
      grid.spec.day_length_s / grid.spec.windows_per_day;
  const double threshold =
      opt.similarity_threshold_s.value_or(window_s / 2.0);

  // One cluster per request, ordered by (day, request id).
  std::vector<int> order(grid.history.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& ha = grid.history[a];
    const auto& hb = grid.history[b];
    if (ha.day != hb.day) return ha.day < hb.day;
    return ha.request.id < hb.request.id;
  });

  std::vector<Cluster> clusters;
  for (int idx : order) {
    Cluster c;
    c.sources = {idx};
    c.key = grid.placed[idx];
    c.aggregate = grid.history[idx].request;
    c.days = {grid.history[idx].day};
    clusters.push_back(std::move(c));
  }

  auto mergeable = [&](const Cluster& a, const Cluster& b) {
    for (int d : b.days) {
      if (a.days.count(d)) return false;  // only cross-day pairs merge
    }
    if (a.key.pickup_cx != b.key.pickup_cx || a.key.pickup_cy != b.key.pickup_cy)
      return false;
    if (a.key.delivery_cx != b.key.delivery_cx ||
        a.key.delivery_cy != b.key.delivery_cy)
      return false;
    if (a.key.window != b.key.window) return false;
    if (std::fabs(a.aggregate.earliest_pickup_s - b.aggregate.earliest_pickup_s) >
        threshold)
      return false;
    if (!same_type_set(a.aggregate, b.aggregate)) return false;
    if (std::fabs(a.aggregate.load - b.aggregate.load) > opt.load_tolerance)
      return false;
    return true;
  };

  bool merged_any = true;
  while (merged_any) {
    merged_any = false;
    for (std::size_t i = 0; i < clusters.size() && !merged_any; ++i) {
      for (std::size_t j = i + 1; j < clusters.size() && !merged_any; ++j) {
        if (!mergeable(clusters[i], clusters[j])) continue;
        auto& a = clusters[i];
        auto& b = clusters[j];
        a.sources.insert(a.sources.end(), b.sources.begin(), b.sources.end());
        std::sort(a.sources.begin(), a.sources.end(), [&](int x, int y) {
          const auto& hx = grid.history[x];
          const auto& hy = grid.history[y];
          if (hx.day != hy.day) return hx.day < hy.day;
          return hx.request.id < hy.request.id;
        });
        for (int d : b.days) a.days.insert(d);
        recompute_aggregate(a, grid, opt.aggregator);
        clusters.erase(clusters.begin() + j);
        merged_any = true;
      }
    }
  }

  std::vector<Request> out;
  int next_id = opt.first_virtual_id;
  for (const auto& c : clusters) {
    Request r = c.aggregate;
    r.id = next_id++;
    r.is_virtual = true;
    r.probability =
        static_cast<double>(c.days.size()) / grid.spec.sample_days;
    r.release_s = 0.0;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace vrptd
