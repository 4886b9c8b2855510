#include "vrptd/road_graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace vrptd {

void RoadGraph::add_vertex(VertexId id, Point location) {
  if (finalized_) throw std::logic_error("graph already finalized");
  vertices_.push_back({id, location});
}

void RoadGraph::add_arc(VertexId tail, VertexId head, double length_m,
                        std::map<std::string, TravelTimeFunction> ttf_by_type) {
  if (finalized_) throw std::logic_error("graph already finalized");
  raw_arcs_.push_back({tail, head, length_m, std::move(ttf_by_type)});
}

void RoadGraph::finalize() {
  if (finalized_) return;
  std::sort(vertices_.begin(), vertices_.end(),
            [](const Vertex& a, const Vertex& b) { return a.id < b.id; });
  index_.clear();
  for (int i = 0; i < static_cast<int>(vertices_.size()); ++i) {
    if (!index_.emplace(vertices_[i].id, i).second) {
      std::ostringstream os;
      os << "duplicate vertex id " << vertices_[i].id;
      throw std::invalid_argument(os.str());
    }
  }

  // Declared vehicle types = sorted union over all arcs.
  std::set<std::string> type_set;
  for (const auto& a : raw_arcs_) {
    for (const auto& [name, f] : a.ttf_by_type) type_set.insert(name);
  }
  types_.assign(type_set.begin(), type_set.end());

  arcs_.clear();
  arcs_.reserve(raw_arcs_.size());
  for (const auto& ra : raw_arcs_) {
    std::ostringstream arc_name;
    arc_name << "arc " << ra.tail << "->" << ra.head;
    auto t_it = index_.find(ra.tail);
    auto h_it = index_.find(ra.head);
    if (t_it == index_.end() || h_it == index_.end()) {
      throw std::invalid_argument(arc_name.str() + ": endpoint not a declared vertex");
    }
    if (!(ra.length_m > 0.0)) {
      throw std::invalid_argument(arc_name.str() + ": length must be positive");
    }
    Arc a;
    a.tail = t_it->second;
    a.head = h_it->second;
    a.length_m = ra.length_m;
    a.ttf.reserve(types_.size());
    for (const auto& type : types_) {
      auto f_it = ra.ttf_by_type.find(type);
      if (f_it == ra.ttf_by_type.end()) {
        throw std::invalid_argument(arc_name.str() +
                                    ": missing travel-time function for vehicle type '" +
                                    type + "'");
      }
      f_it->second.validate(arc_name.str() + " ttf '" + type + "'");
      a.ttf.push_back(f_it->second);
    }
    arcs_.push_back(std::move(a));
  }
  raw_arcs_.clear();

  out_start_.assign(vertices_.size() + 1, 0);
  for (const auto& a : arcs_) out_start_[a.tail + 1]++;
  for (std::size_t v = 1; v < out_start_.size(); ++v) out_start_[v] += out_start_[v - 1];
  out_list_.assign(arcs_.size(), 0);
  std::vector<int> fill(vertices_.size(), 0);
  for (int k = 0; k < static_cast<int>(arcs_.size()); ++k) {
    int t = arcs_[k].tail;
    out_list_[out_start_[t] + fill[t]++] = k;
  }
  finalized_ = true;
}

int RoadGraph::vehicle_type_index(const std::string& name) const {
  auto it = std::find(types_.begin(), types_.end(), name);
  if (it == types_.end()) {
    throw std::invalid_argument("unknown vehicle type '" + name + "'");
  }
  return static_cast<int>(it - types_.begin());
}

int RoadGraph::index_of(VertexId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    std::ostringstream os;
    os << "unknown vertex id " << id;
    throw std::invalid_argument(os.str());
  }
  return it->second;
}

std::span<const int> RoadGraph::out_arcs(int vertex_index) const {
  return {out_list_.data() + out_start_[vertex_index],
          static_cast<std::size_t>(out_start_[vertex_index + 1] -
                                   out_start_[vertex_index])};
}

RoadGraph::TdSearch RoadGraph::earliest_arrival(
    int vtype, VertexId origin, double departure_s,
    std::optional<VertexId> stop_at) const {
  if (vtype < 0 || vtype >= static_cast<int>(types_.size())) {
    throw std::invalid_argument("vehicle type index out of range");
  }
  const int n = static_cast<int>(vertices_.size());
  TdSearch r;
  r.arrival.assign(n, kInf);
  r.pred_vertex.assign(n, -1);
  r.pred_arc.assign(n, -1);
  const int s = index_of(origin);
  const int target = stop_at ? index_of(*stop_at) : -1;
  r.arrival[s] = departure_s;

  // Label-setting search; (arrival, vertex index) keys make pops
  // deterministic, smaller index first among equal arrivals.
  using Key = std::pair<double, int>;
  std::priority_queue<Key, std::vector<Key>, std::greater<Key>> pq;
  pq.push({departure_s, s});
  std::vector<char> settled(n, 0);
  while (!pq.empty()) {
    auto [t, u] = pq.top();
    pq.pop();
    if (settled[u]) continue;
    settled[u] = 1;
    if (u == target) break;
    for (int k : out_arcs(u)) {
      const Arc& a = arcs_[k];
      double tt = a.ttf[vtype].arrival(t);
      if (tt < r.arrival[a.head]) {
        r.arrival[a.head] = tt;
        r.pred_vertex[a.head] = u;
        r.pred_arc[a.head] = k;
        pq.push({tt, a.head});
      }
    }
  }
  return r;
}

RoadGraph::DistSearch RoadGraph::shortest_distance(
    VertexId origin, std::optional<VertexId> stop_at) const {
  const int n = static_cast<int>(vertices_.size());
  DistSearch r;
  r.dist.assign(n, kInf);
  r.pred_vertex.assign(n, -1);
  r.pred_arc.assign(n, -1);
  const int s = index_of(origin);
  const int target = stop_at ? index_of(*stop_at) : -1;
  r.dist[s] = 0.0;
  using Key = std::pair<double, int>;
  std::priority_queue<Key, std::vector<Key>, std::greater<Key>> pq;
  pq.push({0.0, s});
  std::vector<char> settled(n, 0);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (settled[u]) continue;
    settled[u] = 1;
    if (u == target) break;
    for (int k : out_arcs(u)) {
      const Arc& a = arcs_[k];
      double dd = d + a.length_m;
      if (dd < r.dist[a.head]) {
        r.dist[a.head] = dd;
        r.pred_vertex[a.head] = u;
        r.pred_arc[a.head] = k;
        pq.push({dd, a.head});
      }
    }
  }
  return r;
}

std::vector<VertexId> RoadGraph::path_to(const std::vector<int>& pred_vertex,
                                         const std::vector<int>& pred_arc,
                                         VertexId origin, VertexId target) const {
  (void)pred_arc;
  const int s = index_of(origin);
  const int t = index_of(target);
  std::vector<VertexId> path;
  if (s == t) {
    path.push_back(origin);
    return path;
  }
  int cur = t;
  while (cur != -1 && cur != s) {
    path.push_back(vertices_[cur].id);
    cur = pred_vertex[cur];
  }
  if (cur != s) return {};  // unreachable
  path.push_back(origin);
  std::reverse(path.begin(), path.end());
  return path;
}

RoadGraph::Composed RoadGraph::compose_arrival(std::span<const VertexId> path,
                                               int vtype,
                                               double departure_s) const {
  if (vtype < 0 || vtype >= static_cast<int>(types_.size())) {
    throw std::invalid_argument("vehicle type index out of range");
  }
  Composed c;
  c.arrival_s = departure_s;
  c.length_m = 0.0;
  if (path.size() <= 1) return c;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const int u = index_of(path[k]);
    const int v = index_of(path[k + 1]);
    double best_arrival = kInf;
    double best_length = kInf;
    bool found = false;
    for (int ai : out_arcs(u)) {
      const Arc& a = arcs_[ai];
      if (a.head != v) continue;
      double t = a.ttf[vtype].arrival(c.arrival_s);
      if (!found || t < best_arrival ||
          (t == best_arrival && a.length_m < best_length)) {
        best_arrival = t;
        best_length = a.length_m;
        found = true;
      }
    }
    if (!found) {
      std::ostringstream os;
      os << "invalid path: no arc " << path[k] << "->" << path[k + 1];
      throw std::invalid_argument(os.str());
    }
    c.arrival_s = best_arrival;
    c.length_m += best_length;
  }
  return c;
}

VertexId RoadGraph::snap_to_graph(Point location) const {
  if (vertices_.empty()) {
    throw std::invalid_argument("cannot snap: graph has no vertices");
  }
  double best = kInf;
  VertexId best_id = vertices_.front().id;
  for (const auto& v : vertices_) {
    double dx = v.location.x - location.x;
    double dy = v.location.y - location.y;
    double d2 = dx * dx + dy * dy;
    if (d2 < best) {  // vertices_ is id-sorted, so first hit wins ties
      best = d2;
      best_id = v.id;
    }
  }
  return best_id;
}

}  // namespace vrptd
