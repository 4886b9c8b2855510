#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vrptd/ttf.hpp"

namespace vrptd {

using VertexId = std::int64_t;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Directed road graph with static arc lengths and one periodic travel-time
// function per arc and vehicle type. Immutable after finalize(); all queries
// are const and safe to run concurrently.
class RoadGraph {
public:
  struct Arc {
    int tail = -1;  // internal vertex index
    int head = -1;
    double length_m = 0.0;
    std::vector<TravelTimeFunction> ttf;  // indexed by vehicle-type index
  };

  void add_vertex(VertexId id, Point location);
  void add_arc(VertexId tail, VertexId head, double length_m,
               std::map<std::string, TravelTimeFunction> ttf_by_type);

  // Validates invariants (declared endpoints, positive lengths, FIFO travel
  // times, full vehicle-type coverage per arc), sorts vertices by id and
  // builds the adjacency index. Throws std::invalid_argument with a
  // diagnostic naming the offending arc/segment.
  void finalize();

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_arcs() const { return arcs_.size(); }
  const std::vector<std::string>& vehicle_types() const { return types_; }
  int vehicle_type_index(const std::string& name) const;  // throws if unknown

  bool has_vertex(VertexId id) const { return index_.count(id) > 0; }
  int index_of(VertexId id) const;  // throws if unknown
  VertexId id_of(int index) const { return vertices_[index].id; }
  Point location_of(VertexId id) const { return vertices_[index_of(id)].location; }
  const Arc& arc(int arc_index) const { return arcs_[arc_index]; }
  std::span<const int> out_arcs(int vertex_index) const;

  // One-to-all earliest arrivals under the time-dependent metric (exact for
  // FIFO functions). Unreachable vertices keep arrival = +inf. When `stop_at`
  // is set the search stops once that vertex is settled.
  struct TdSearch {
    std::vector<double> arrival;   // by internal index
    std::vector<int> pred_vertex;  // internal index, -1 at origin/unreached
    std::vector<int> pred_arc;     // arc index, -1 likewise
  };
  TdSearch earliest_arrival(int vtype, VertexId origin, double departure_s,
                            std::optional<VertexId> stop_at = {}) const;

  // One-to-all shortest path lengths under the static length metric.
  struct DistSearch {
    std::vector<double> dist;
    std::vector<int> pred_vertex;
    std::vector<int> pred_arc;
  };
  DistSearch shortest_distance(VertexId origin,
                               std::optional<VertexId> stop_at = {}) const;

  // Reconstructs the vertex sequence origin..target from a search result.
  // Empty when the target is unreachable.
  std::vector<VertexId> path_to(const std::vector<int>& pred_vertex,
                                const std::vector<int>& pred_arc,
                                VertexId origin, VertexId target) const;

  // Folds the arrival/length recurrence along an explicit vertex path. When
  // parallel arcs connect a consecutive pair, the one with the earliest
  // arrival wins (ties: shorter, then lower arc index). An empty or
  // single-vertex path yields (departure, 0). Throws on a disconnected pair.
  struct Composed {
    double arrival_s = 0.0;
    double length_m = 0.0;
  };
  Composed compose_arrival(std::span<const VertexId> path, int vtype,
                           double departure_s) const;

  // Nearest vertex by Euclidean distance; ties broken by smaller vertex id.
  VertexId snap_to_graph(Point location) const;

private:
  struct Vertex {
    VertexId id;
    Point location;
  };

  std::vector<Vertex> vertices_;
  std::vector<Arc> arcs_;
  std::vector<std::string> types_;
  std::unordered_map<VertexId, int> index_;
  // CSR-style adjacency: out_start_[v]..out_start_[v+1] indexes out_list_.
  std::vector<int> out_start_;
  std::vector<int> out_list_;
  bool finalized_ = false;

  struct RawArc {
    VertexId tail, head;
    double length_m;
    std::map<std::string, TravelTimeFunction> ttf_by_type;
  };
  std::vector<RawArc> raw_arcs_;
};

}  // namespace vrptd
