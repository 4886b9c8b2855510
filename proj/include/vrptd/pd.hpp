#pragma once

#include <string>
#include <vector>

#include "vrptd/road_graph.hpp"

namespace vrptd {

struct Request {
  int id = -1;
  Point pickup_point;
  double earliest_pickup_s = 0.0;   // ep
  double pickup_service_s = 0.0;    // ps
  Point delivery_point;
  double latest_delivery_s = 0.0;   // ld (inclusive deadline)
  double delivery_service_s = 0.0;  // ds
  double load = 0.0;                // q
  std::vector<std::string> vehicle_types;  // eligible types; empty = any
  double release_s = 0.0;           // rt
  bool is_virtual = false;
  double probability = 1.0;         // meaningful for virtual requests only

  // Snapped road vertices, cached at ingestion.
  VertexId pickup_vertex = -1;
  VertexId delivery_vertex = -1;

  bool eligible(const std::string& vehicle_type) const {
    if (vehicle_types.empty()) return true;
    for (const auto& t : vehicle_types)
      if (t == vehicle_type) return true;
    return false;
  }
};

struct Worker {
  int id = -1;
  Point start_point;
  double shift_start_s = 0.0;  // ws
  Point end_point;
  double shift_end_s = 0.0;    // we
  double capacity = 0.0;       // Q
  std::string vehicle_type;

  VertexId start_vertex = -1;
  VertexId end_vertex = -1;
};

enum class NodeKind { ShiftStart, ShiftEnd, Pickup, Delivery };

// One service event. Nodes are distinct per (kind, owner) even when they
// share geography; `owner` is a request id for pickup/delivery nodes and a
// worker id for shift nodes.
struct PDNode {
  NodeKind kind = NodeKind::ShiftStart;
  int owner = -1;
  Point location;
  VertexId vertex = -1;

  bool is_service() const {
    return kind == NodeKind::Pickup || kind == NodeKind::Delivery;
  }
};

PDNode make_shift_start_node(const Worker& w);
PDNode make_shift_end_node(const Worker& w);
PDNode make_pickup_node(const Request& r);
PDNode make_delivery_node(const Request& r);

// Event graph over all shift and service nodes. Node order is deterministic:
// shift starts (worker input order), pickups (request input order),
// deliveries, shift ends. Arcs: every start to every pickup, a complete
// digraph over the service nodes minus each request's delivery->pickup arc,
// and every delivery to every end.
struct PDGraph {
  std::vector<PDNode> nodes;
  std::vector<std::pair<int, int>> arcs;  // node-index pairs

  int start_node(int worker_id) const;
  int end_node(int worker_id) const;
  int pickup_node(int request_id) const;
  int delivery_node(int request_id) const;
};

PDGraph build_pd_graph(const std::vector<Request>& requests,
                       const std::vector<Worker>& workers);

}  // namespace vrptd
