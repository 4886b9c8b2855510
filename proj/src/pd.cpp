#include "vrptd/pd.hpp"

#include <stdexcept>

namespace vrptd {

PDNode make_shift_start_node(const Worker& w) {
  return {NodeKind::ShiftStart, w.id, w.start_point, w.start_vertex};
}

PDNode make_shift_end_node(const Worker& w) {
  return {NodeKind::ShiftEnd, w.id, w.end_point, w.end_vertex};
}

PDNode make_pickup_node(const Request& r) {
  return {NodeKind::Pickup, r.id, r.pickup_point, r.pickup_vertex};
}

PDNode make_delivery_node(const Request& r) {
  return {NodeKind::Delivery, r.id, r.delivery_point, r.delivery_vertex};
}

namespace {
int find_node(const PDGraph& g, NodeKind kind, int owner) {
  for (int i = 0; i < static_cast<int>(g.nodes.size()); ++i) {
    if (g.nodes[i].kind == kind && g.nodes[i].owner == owner) return i;
  }
  throw std::invalid_argument("pd node not found");
}
}  // namespace

int PDGraph::start_node(int worker_id) const {
  return find_node(*this, NodeKind::ShiftStart, worker_id);
}
int PDGraph::end_node(int worker_id) const {
  return find_node(*this, NodeKind::ShiftEnd, worker_id);
}
int PDGraph::pickup_node(int request_id) const {
  return find_node(*this, NodeKind::Pickup, request_id);
}
int PDGraph::delivery_node(int request_id) const {
  return find_node(*this, NodeKind::Delivery, request_id);
}

PDGraph build_pd_graph(const std::vector<Request>& requests,
                       const std::vector<Worker>& workers) {
  PDGraph g;
  const int nw = static_cast<int>(workers.size());
  const int nr = static_cast<int>(requests.size());
  g.nodes.reserve(2 * nw + 2 * nr);
  for (const auto& w : workers) g.nodes.push_back(make_shift_start_node(w));
  for (const auto& r : requests) g.nodes.push_back(make_pickup_node(r));
  for (const auto& r : requests) g.nodes.push_back(make_delivery_node(r));
  for (const auto& w : workers) g.nodes.push_back(make_shift_end_node(w));

  const int first_pickup = nw;
  const int first_delivery = nw + nr;
  const int first_end = nw + 2 * nr;

  // Start -> every pickup.
  for (int s = 0; s < nw; ++s) {
    for (int p = first_pickup; p < first_delivery; ++p) g.arcs.push_back({s, p});
  }
  // Complete digraph over service nodes, minus each request's
  // delivery -> pickup arc.
  for (int u = first_pickup; u < first_end; ++u) {
    for (int v = first_pickup; v < first_end; ++v) {
      if (u == v) continue;
      if (g.nodes[u].kind == NodeKind::Delivery &&
          g.nodes[v].kind == NodeKind::Pickup &&
          g.nodes[u].owner == g.nodes[v].owner) {
        continue;
      }
      g.arcs.push_back({u, v});
    }
  }
  // Every delivery -> every end.
  for (int d = first_delivery; d < first_end; ++d) {
    for (int e = first_end; e < first_end + nw; ++e) g.arcs.push_back({d, e});
  }
  return g;
}

}  // namespace vrptd
