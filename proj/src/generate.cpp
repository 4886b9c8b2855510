#include "vrptd/generate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "vrptd/instance_io.hpp"
#include "vrptd/pd.hpp"

namespace vrptd {

using nlohmann::ordered_json;

namespace {

// Hand-rolled draws keep the byte-identical-per-seed contract independent of
// the standard library's distribution implementations.
double uniform01(std::mt19937_64& rng) {
  return std::ldexp(static_cast<double>(rng()), -64);
}
double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}
int uniform_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng() % static_cast<unsigned long long>(hi - lo + 1));
}

constexpr double kSpacing = 100.0;  // meters between grid neighbors

struct City {
  int w, h;
  std::vector<double> jitter_x, jitter_y;

  int vertex(int col, int row) const { return row * w + col; }
  double x(int v) const { return (v % w) * kSpacing + jitter_x[v]; }
  double y(int v) const { return (v / w) * kSpacing + jitter_y[v]; }
};

// Piecewise-linear congestion profile with a morning and an evening peak.
// Slopes stay tiny relative to -1, so FIFO holds by construction.
ordered_json make_ttf(std::mt19937_64& rng, double free_flow_s, double day_s) {
  double morning = uniform(rng, 1.3, 1.8);
  double evening = uniform(rng, 1.2, 1.7);
  const double hours = day_s / 24.0;
  std::vector<std::pair<double, double>> profile = {
      {0.0, 1.0},          {6 * hours, 1.0},  {8 * hours, morning},
      {10 * hours, 1.0},   {16 * hours, 1.0}, {18 * hours, evening},
      {20 * hours, 1.0},
  };
  ordered_json bps = ordered_json::array();
  for (const auto& [t, mult] : profile) {
    bps.push_back(ordered_json::array({t, free_flow_s * mult}));
  }
  return ordered_json{{"period_s", day_s}, {"breakpoints", bps}};
}

}  // namespace

GeneratedInstance generate_instance(const GenerateSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  GeneratedInstance out;

  City city{spec.grid_width, spec.grid_height, {}, {}};
  const int n = spec.grid_width * spec.grid_height;
  city.jitter_x.resize(n);
  city.jitter_y.resize(n);
  for (int v = 0; v < n; ++v) {
    city.jitter_x[v] = uniform(rng, -15.0, 15.0);
    city.jitter_y[v] = uniform(rng, -15.0, 15.0);
  }

  out.graph["vertices"] = ordered_json::array();
  for (int v = 0; v < n; ++v) {
    out.graph["vertices"].push_back(
        ordered_json{{"id", v}, {"x", city.x(v)}, {"y", city.y(v)}});
  }
  out.graph["arcs"] = ordered_json::array();
  const double speed = 7.0;  // m/s, scooter pace
  auto add_arc = [&](int tail, int head) {
    double dx = city.x(head) - city.x(tail);
    double dy = city.y(head) - city.y(tail);
    double length = std::hypot(dx, dy) * uniform(rng, 1.0, 1.15);
    out.graph["arcs"].push_back(ordered_json{
        {"tail", tail},
        {"head", head},
        {"length_m", length},
        {"ttf", ordered_json{{"scooter",
                              make_ttf(rng, length / speed, spec.day_s)}}}});
  };
  for (int row = 0; row < spec.grid_height; ++row) {
    for (int col = 0; col < spec.grid_width; ++col) {
      int v = city.vertex(col, row);
      if (col + 1 < spec.grid_width) {
        add_arc(v, city.vertex(col + 1, row));
        add_arc(city.vertex(col + 1, row), v);
      }
      if (row + 1 < spec.grid_height) {
        add_arc(v, city.vertex(col, row + 1));
        add_arc(city.vertex(col, row + 1), v);
      }
    }
  }

  // Demand hotspots; pickups cluster around them, deliveries spread wider.
  std::vector<std::pair<double, double>> hotspots;
  for (int h = 0; h < spec.hotspots; ++h) {
    hotspots.push_back({uniform(rng, 0.2, 0.8) * spec.grid_width * kSpacing,
                        uniform(rng, 0.2, 0.8) * spec.grid_height * kSpacing});
  }
  const double max_x = (spec.grid_width - 1) * kSpacing;
  const double max_y = (spec.grid_height - 1) * kSpacing;
  auto near_hotspot = [&](double radius) {
    const auto& hs = hotspots[uniform_int(rng, 0, spec.hotspots - 1)];
    double x = std::clamp(hs.first + uniform(rng, -radius, radius), 0.0, max_x);
    double y = std::clamp(hs.second + uniform(rng, -radius, radius), 0.0, max_y);
    return Point{x, y};
  };

  auto gen_requests = [&](int first_id) {
    // Poisson arrivals conditioned on the count: sorted uniforms.
    std::vector<double> arrivals;
    for (int k = 0; k < spec.num_requests; ++k) {
      arrivals.push_back(std::floor(
          uniform(rng, spec.request_window_start_s, spec.request_window_end_s)));
    }
    std::sort(arrivals.begin(), arrivals.end());
    ordered_json requests = ordered_json::array();
    for (int k = 0; k < spec.num_requests; ++k) {
      Point pickup = near_hotspot(600.0);
      Point delivery = near_hotspot(2000.0);
      ordered_json r{{"id", first_id + k},
                     {"pickup_point", ordered_json{{"x", pickup.x}, {"y", pickup.y}}},
                     {"earliest_pickup_time", arrivals[k]},
                     {"delivery_point",
                      ordered_json{{"x", delivery.x}, {"y", delivery.y}}},
                     {"release_time", arrivals[k]}};
      requests.push_back(std::move(r));
    }
    return requests;
  };

  out.instance["requests"] = gen_requests(1);
  out.instance["workers"] = ordered_json::array();
  const double window =
      spec.request_window_end_s - spec.request_window_start_s;
  for (int k = 0; k < spec.num_workers; ++k) {
    // Staggered shifts covering the request window with margins.
    double start = spec.request_window_start_s - 3600.0 +
                   (spec.num_workers > 1
                        ? window * k / static_cast<double>(spec.num_workers)
                        : 0.0) / 2.0;
    start = std::floor(start);
    Point home = near_hotspot(2500.0);
    out.instance["workers"].push_back(ordered_json{
        {"id", k + 1},
        {"start_point", ordered_json{{"x", home.x}, {"y", home.y}}},
        {"shift_start_time", start},
        {"end_point", ordered_json{{"x", home.x}, {"y", home.y}}},
        {"shift_end_time", start + spec.shift_length_s},
        {"capacity", 3.0},
        {"vehicle_type", "scooter"}});
  }

  if (spec.history_days > 0) {
    // Day 0 repeats the instance's demand pattern; later days perturb it, so
    // the grid merge finds recurrent cross-day requests.
    ordered_json history = ordered_json::array();
    const auto& base = out.instance["requests"];
    int next_id = 1;
    for (int day = 0; day < spec.history_days; ++day) {
      for (const auto& r : base) {
        if (day > 0 && uniform01(rng) > 0.7) continue;  // demand varies
        ordered_json h = r;
        h["id"] = next_id++;
        h["day"] = day;
        if (day > 0) {
          double shift = std::floor(uniform(rng, -240.0, 240.0));
          h["earliest_pickup_time"] = r["earliest_pickup_time"].get<double>() + shift;
          h["release_time"] = h["earliest_pickup_time"];
          h["pickup_point"]["x"] = r["pickup_point"]["x"].get<double>() + uniform(rng, -40.0, 40.0);
          h["pickup_point"]["y"] = r["pickup_point"]["y"].get<double>() + uniform(rng, -40.0, 40.0);
        }
        history.push_back(std::move(h));
      }
    }
    out.history = ordered_json{{"requests", history}};
  }
  return out;
}

}  // namespace vrptd
