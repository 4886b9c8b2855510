#include "vrptd/problem.hpp"

#include <functional>
#include <sstream>
#include <stdexcept>

namespace vrptd {

std::size_t LegCache::TdKeyHash::operator()(const TdKey& k) const {
  std::size_t h = std::hash<long long>()(k.from);
  h = h * 1000003u ^ std::hash<long long>()(k.to);
  h = h * 1000003u ^ std::hash<int>()(k.vtype);
  h = h * 1000003u ^ std::hash<double>()(k.departure);
  return h;
}

RouteLeg LegCache::leg(LegTag tag, VertexId from, VertexId to, int vtype,
                       double departure_s) const {
  return tag == LegTag::Distance ? distance_leg(from, to, vtype, departure_s)
                                 : time_leg(from, to, vtype, departure_s);
}

RouteLeg LegCache::distance_leg(VertexId from, VertexId to, int vtype,
                                double departure_s) const {
  RouteLeg out;
  out.tag = LegTag::Distance;
  if (from == to) {
    out.path = {from};
    return out;
  }
  std::shared_ptr<const RoadGraph::DistSearch> search;
  {
    std::lock_guard lock(mutex_);
    auto it = dist_cache_.find(from);
    if (it != dist_cache_.end()) search = it->second;
  }
  if (!search) {
    auto computed = std::make_shared<RoadGraph::DistSearch>(
        graph_->shortest_distance(from));
    std::lock_guard lock(mutex_);
    stats_.dist_searches++;
    search = dist_cache_.emplace(from, std::move(computed)).first->second;
  }
  const int t = graph_->index_of(to);
  if (search->dist[t] == kInf) {
    std::ostringstream os;
    os << "disconnected instance: no road path " << from << "->" << to;
    throw std::runtime_error(os.str());
  }
  out.path = graph_->path_to(search->pred_vertex, search->pred_arc, from, to);
  out.length_m = search->dist[t];
  auto composed = graph_->compose_arrival(out.path, vtype, departure_s);
  out.travel_s = composed.arrival_s - departure_s;
  return out;
}

RouteLeg LegCache::time_leg(VertexId from, VertexId to, int vtype,
                            double departure_s) const {
  RouteLeg out;
  out.tag = LegTag::Time;
  if (from == to) {
    out.path = {from};
    return out;
  }
  TdKey key{from, to, vtype, departure_s};
  {
    std::lock_guard lock(mutex_);
    auto it = td_cache_.find(key);
    if (it != td_cache_.end()) {
      stats_.td_hits++;
      return *it->second;
    }
  }
  auto search = graph_->earliest_arrival(vtype, from, departure_s, to);
  const int t = graph_->index_of(to);
  if (search.arrival[t] == kInf) {
    std::ostringstream os;
    os << "disconnected instance: no road path " << from << "->" << to;
    throw std::runtime_error(os.str());
  }
  out.path = graph_->path_to(search.pred_vertex, search.pred_arc, from, to);
  out.travel_s = search.arrival[t] - departure_s;
  out.length_m = 0.0;
  for (std::size_t k = 0; k + 1 < out.path.size(); ++k) {
    // Recover lengths from the predecessor arcs.
    int v = graph_->index_of(out.path[k + 1]);
    out.length_m += graph_->arc(search.pred_arc[v]).length_m;
  }
  auto shared = std::make_shared<const RouteLeg>(out);
  std::lock_guard lock(mutex_);
  stats_.td_searches++;
  td_cache_.emplace(key, std::move(shared));
  return out;
}

void LegCache::begin_epoch() const {
  std::lock_guard lock(mutex_);
  td_cache_.clear();
}

LegCache::Stats LegCache::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

const Request& Problem::request(int id) const {
  auto it = requests.find(id);
  if (it == requests.end()) {
    std::ostringstream os;
    os << "unknown request id " << id;
    throw std::invalid_argument(os.str());
  }
  return it->second;
}

Request& Problem::request(int id) {
  return const_cast<Request&>(static_cast<const Problem*>(this)->request(id));
}

const Worker& Problem::worker_by_id(int id) const {
  for (const auto& w : workers)
    if (w.id == id) return w;
  std::ostringstream os;
  os << "unknown worker id " << id;
  throw std::invalid_argument(os.str());
}

int Problem::worker_index(int id) const {
  for (int i = 0; i < static_cast<int>(workers.size()); ++i)
    if (workers[i].id == id) return i;
  std::ostringstream os;
  os << "unknown worker id " << id;
  throw std::invalid_argument(os.str());
}

}  // namespace vrptd
