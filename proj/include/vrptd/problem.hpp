#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "vrptd/pd.hpp"
#include "vrptd/road_graph.hpp"

namespace vrptd {

enum class LegTag { Distance, Time };

// One realized connection between consecutive service nodes.
struct RouteLeg {
  LegTag tag = LegTag::Distance;
  std::vector<VertexId> path;  // vertex ids including both endpoints
  double length_m = 0.0;
  double travel_s = 0.0;       // arrival(head) - departure(tail)
};

// Shared query layer over the road graph. Distance legs use departure-time
// independent paths (one Dijkstra per origin, cached for the whole run);
// time legs depend on the departure and are cached per epoch, since exact
// repeats only occur while a scheduler evaluates candidates against an
// unchanged fleet snapshot.
class LegCache {
public:
  explicit LegCache(const RoadGraph& graph) : graph_(&graph) {}

  RouteLeg leg(LegTag tag, VertexId from, VertexId to, int vtype,
               double departure_s) const;
  RouteLeg distance_leg(VertexId from, VertexId to, int vtype,
                        double departure_s) const;
  RouteLeg time_leg(VertexId from, VertexId to, int vtype,
                    double departure_s) const;

  // Drops the departure-dependent cache (called between scheduling events to
  // bound memory).
  void begin_epoch() const;

  struct Stats {
    long td_searches = 0;
    long dist_searches = 0;
    long td_hits = 0;
  };
  Stats stats() const;

private:
  const RoadGraph* graph_;

  struct TdKey {
    VertexId from, to;
    int vtype;
    double departure;
    bool operator==(const TdKey&) const = default;
  };
  struct TdKeyHash {
    std::size_t operator()(const TdKey& k) const;
  };

  mutable std::mutex mutex_;
  mutable std::unordered_map<VertexId, std::shared_ptr<const RoadGraph::DistSearch>>
      dist_cache_;
  mutable std::unordered_map<TdKey, std::shared_ptr<const RouteLeg>, TdKeyHash>
      td_cache_;
  mutable Stats stats_;
};

// Immutable scheduling context: the road graph plus the request/worker
// registry. Virtual (forecast) requests are registered here as well; the
// prophet scheduler edits their attributes in place when it deactivates
// constraints. Routes and fleet state reference requests by id.
struct Problem {
  RoadGraph graph;
  std::vector<Worker> workers;                 // input order
  std::unordered_map<int, Request> requests;   // by id, real and virtual
  std::unique_ptr<LegCache> legs;
  std::string instance_hash;                   // identifies the loaded files

  Problem() = default;
  Problem(Problem&&) = default;
  Problem& operator=(Problem&&) = default;

  void init_cache() { legs = std::make_unique<LegCache>(graph); }

  const Request& request(int id) const;
  Request& request(int id);
  const Worker& worker_by_id(int id) const;
  int worker_index(int id) const;
  int vtype_of(const Worker& w) const { return graph.vehicle_type_index(w.vehicle_type); }
};

}  // namespace vrptd
