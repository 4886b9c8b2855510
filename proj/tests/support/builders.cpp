#include "support/builders.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace vrptd::testing {

double u01(std::mt19937_64& rng) {
  return std::ldexp(static_cast<double>(rng()), -64);
}
double u(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * u01(rng);
}
int ui(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<unsigned long long>(hi - lo + 1));
}

namespace {

TravelTimeFunction random_ttf(std::mt19937_64& rng, double base_s,
                              bool nonneg_slopes, bool constant_only) {
  const double period = 86400.0;
  if (constant_only || u01(rng) < 0.25) {
    return TravelTimeFunction::constant(period, base_s);
  }
  // Three breakpoints inside [0, 2/3 period); the wrap segment brings the
  // function back down to the first value.
  double t1 = u(rng, 10000.0, 25000.0);
  double t2 = u(rng, 30000.0, 55000.0);
  double v0 = base_s;
  double v1, v2;
  if (nonneg_slopes) {
    v1 = v0 * u(rng, 1.0, 1.6);
    v2 = v1 * u(rng, 1.0, 1.4);
  } else {
    v1 = v0 * u(rng, 0.7, 1.6);
    v2 = v1 * u(rng, 0.7, 1.5);
    // Keep every slope within FIFO bounds by construction.
    double min1 = std::max(1.0, v0 - 0.9 * t1);
    v1 = std::max(v1, min1);
    double min2 = std::max(1.0, v1 - 0.9 * (t2 - t1));
    v2 = std::max(v2, min2);
  }
  return TravelTimeFunction(period, {{0.0, v0}, {t1, v1}, {t2, v2}});
}

}  // namespace

RoadGraph random_graph(std::mt19937_64& rng, int n_vertices, int extra_arcs,
                       bool nonneg_slopes, bool constant_only) {
  RoadGraph g;
  std::vector<Point> pts;
  for (int v = 0; v < n_vertices; ++v) {
    Point p{u(rng, 0.0, 3200.0), u(rng, 0.0, 3200.0)};
    pts.push_back(p);
    g.add_vertex(v, p);
  }
  auto add = [&](int a, int b) {
    double dx = pts[a].x - pts[b].x, dy = pts[a].y - pts[b].y;
    double length = std::max(20.0, std::hypot(dx, dy) * u(rng, 1.0, 1.3));
    double base = length / u(rng, 5.0, 9.0);
    std::map<std::string, TravelTimeFunction> ttfs;
    ttfs.emplace("scooter", random_ttf(rng, base, nonneg_slopes, constant_only));
    g.add_arc(a, b, length, std::move(ttfs));
  };
  // A random spanning chain in both directions keeps everything reachable.
  std::vector<int> order(n_vertices);
  for (int v = 0; v < n_vertices; ++v) order[v] = v;
  for (int v = n_vertices - 1; v > 0; --v) {
    std::swap(order[v], order[ui(rng, 0, v)]);
  }
  for (int v = 0; v + 1 < n_vertices; ++v) {
    add(order[v], order[v + 1]);
    add(order[v + 1], order[v]);
  }
  for (int k = 0; k < extra_arcs; ++k) {
    int a = ui(rng, 0, n_vertices - 1);
    int b = ui(rng, 0, n_vertices - 1);
    if (a != b) add(a, b);
  }
  g.finalize();
  return g;
}

RoadGraph grid_graph(int w, int h, double length_m, double travel_s) {
  RoadGraph g;
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      g.add_vertex(row * w + col, {col * length_m, row * length_m});
    }
  }
  auto add = [&](int a, int b) {
    std::map<std::string, TravelTimeFunction> ttfs;
    ttfs.emplace("scooter", TravelTimeFunction::constant(86400.0, travel_s));
    g.add_arc(a, b, length_m, std::move(ttfs));
  };
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      int v = row * w + col;
      if (col + 1 < w) {
        add(v, v + 1);
        add(v + 1, v);
      }
      if (row + 1 < h) {
        add(v, v + w);
        add(v + w, v);
      }
    }
  }
  g.finalize();
  return g;
}

Worker make_worker(const Problem& p, int id, VertexId home, double ws, double we,
                   double capacity) {
  Worker w;
  w.id = id;
  w.start_point = p.graph.location_of(home);
  w.end_point = w.start_point;
  w.shift_start_s = ws;
  w.shift_end_s = we;
  w.capacity = capacity;
  w.vehicle_type = "scooter";
  w.start_vertex = home;
  w.end_vertex = home;
  return w;
}

Request make_request(const Problem& p, int id, VertexId pickup, VertexId delivery,
                     double ep, double window_s, double service_s, double load) {
  Request r;
  r.id = id;
  r.pickup_point = p.graph.location_of(pickup);
  r.delivery_point = p.graph.location_of(delivery);
  r.earliest_pickup_s = ep;
  r.latest_delivery_s = ep + window_s;
  r.pickup_service_s = service_s;
  r.delivery_service_s = service_s;
  r.load = load;
  r.release_s = ep;
  r.pickup_vertex = pickup;
  r.delivery_vertex = delivery;
  return r;
}

Problem problem_on_graph(RoadGraph graph) {
  Problem p;
  p.graph = std::move(graph);
  p.init_cache();
  return p;
}

Problem random_problem(std::mt19937_64& rng, int n_vertices, int n_workers,
                       int n_requests, bool nonneg_slopes, bool constant_only) {
  Problem p = problem_on_graph(
      random_graph(rng, n_vertices, n_vertices * 2, nonneg_slopes, constant_only));
  const int nv = static_cast<int>(p.graph.num_vertices());
  for (int k = 0; k < n_workers; ++k) {
    double ws = 28800.0 + 1800.0 * k;
    p.workers.push_back(
        make_worker(p, k + 1, ui(rng, 0, nv - 1), ws, ws + 21600.0));
  }
  for (int k = 0; k < n_requests; ++k) {
    double ep = std::floor(u(rng, 30000.0, 45000.0));
    double window = std::floor(u(rng, 600.0, 1600.0));
    Request r = make_request(p, k + 1, ui(rng, 0, nv - 1), ui(rng, 0, nv - 1), ep,
                             window);
    p.requests.emplace(r.id, r);
  }
  return p;
}

std::vector<Request> requests_in_release_order(const Problem& p) {
  std::vector<Request> out;
  for (const auto& [id, r] : p.requests) {
    if (!r.is_virtual) out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const Request& a, const Request& b) {
    if (a.release_s != b.release_s) return a.release_s < b.release_s;
    return a.id < b.id;
  });
  return out;
}

}  // namespace vrptd::testing
