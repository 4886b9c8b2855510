#include "vrptd/route.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace vrptd {

namespace {
constexpr double kTimeTol = 1e-6;
}

Subtour empty_subtour(const Worker& w) {
  Subtour s;
  s.worker_id = w.id;
  s.nodes = {make_shift_start_node(w), make_shift_end_node(w)};
  return s;
}

void validate_subtour(const Problem& problem, const Subtour& s) {
  auto fail = [&](const std::string& what) {
    std::ostringstream os;
    os << "subtour of worker " << s.worker_id << ": " << what;
    throw std::invalid_argument(os.str());
  };
  if (s.size() < 2) fail("needs at least shift-start and shift-end");
  const auto& first = s.nodes.front();
  const auto& last = s.nodes.back();
  if (first.kind != NodeKind::ShiftStart || first.owner != s.worker_id) {
    fail("must begin at the owner's shift start");
  }
  if (last.kind != NodeKind::ShiftEnd || last.owner != s.worker_id) {
    fail("must end at the owner's shift end");
  }
  std::set<int> picked, delivered;
  for (int k = 1; k + 1 < s.size(); ++k) {
    const auto& n = s.nodes[k];
    if (!n.is_service()) fail("interior nodes must be service events");
    if (n.kind == NodeKind::Pickup) {
      if (!picked.insert(n.owner).second) fail("duplicate pickup");
    } else {
      if (!delivered.insert(n.owner).second) fail("duplicate delivery");
      if (!picked.count(n.owner)) fail("delivery precedes pickup");
    }
  }
  for (int r : picked) {
    if (!delivered.count(r) && !problem.request(r).is_virtual) {
      fail("real request picked up but never delivered");
    }
  }
}

NodeLabels fold_label(const Problem& problem, const PDNode& node, double a,
                      double prev_load) {
  NodeLabels l;
  l.arrival = a;
  switch (node.kind) {
    case NodeKind::Pickup: {
      const Request& r = problem.request(node.owner);
      l.waiting = std::max(r.earliest_pickup_s - a, 0.0);
      l.departure = std::max(a, r.earliest_pickup_s) + r.pickup_service_s;
      l.load = prev_load + r.load;
      break;
    }
    case NodeKind::Delivery: {
      const Request& r = problem.request(node.owner);
      l.waiting = 0.0;
      l.departure = a + r.delivery_service_s;
      l.load = prev_load - r.load;
      break;
    }
    default:
      l.waiting = 0.0;
      l.departure = a;
      l.load = prev_load;
      break;
  }
  return l;
}

namespace {

void refresh_totals_and_flag(const Problem& problem, Route& route) {
  route.cost_length_m = 0.0;
  route.cost_time_s = 0.0;
  for (const auto& leg : route.legs) {
    route.cost_length_m += leg.length_m;
    route.cost_time_s += leg.travel_s;
  }
  route.feasible = check_feasible(problem, route).empty();
}

}  // namespace

Route realize_route(const Problem& problem, Subtour subtour, LegTag metric) {
  std::vector<LegTag> tags(std::max(subtour.size() - 1, 0), metric);
  return realize_route(problem, std::move(subtour), std::move(tags));
}

Route realize_route(const Problem& problem, Subtour subtour,
                    std::vector<LegTag> leg_tags) {
  validate_subtour(problem, subtour);
  if (static_cast<int>(leg_tags.size()) != subtour.size() - 1) {
    throw std::invalid_argument("leg tag count must be node count - 1");
  }
  Route route;
  route.subtour = std::move(subtour);
  route.labels.resize(route.size());
  route.legs.resize(route.size() - 1);
  for (int k = 0; k < route.size() - 1; ++k) route.legs[k].tag = leg_tags[k];
  relabel_suffix(problem, route, 0);
  return route;
}

void relabel_suffix(const Problem& problem, Route& route, int anchor) {
  const int n = route.size();
  if (anchor < 0 || anchor >= n) {
    throw std::out_of_range("relabel anchor out of range");
  }
  const Worker& w = problem.worker_by_id(route.subtour.worker_id);
  const int vtype = problem.vtype_of(w);
  if (anchor == 0) {
    NodeLabels l0;
    l0.arrival = w.shift_start_s;
    l0.departure = w.shift_start_s;  // departure from shift start is ws
    l0.waiting = 0.0;
    l0.load = 0.0;
    route.labels[0] = l0;
  }
  for (int k = anchor; k + 1 < n; ++k) {
    const PDNode& from = route.subtour.nodes[k];
    const PDNode& to = route.subtour.nodes[k + 1];
    RouteLeg leg = problem.legs->leg(route.legs[k].tag, from.vertex, to.vertex,
                                     vtype, route.labels[k].departure);
    route.legs[k] = std::move(leg);
    double arrival = route.labels[k].departure + route.legs[k].travel_s;
    route.labels[k + 1] =
        fold_label(problem, to, arrival, route.labels[k].load);
  }
  refresh_totals_and_flag(problem, route);
}

std::string Violation::describe(const Route& route) const {
  std::ostringstream os;
  switch (kind) {
    case Kind::DeliveryDeadline:
      os << "delivery deadline missed by " << amount << " s";
      break;
    case Kind::ShiftEnd:
      os << "shift end missed by " << amount << " s";
      break;
    case Kind::Capacity:
      os << "capacity exceeded by " << amount;
      break;
    case Kind::Precedence:
      os << "precedence broken";
      break;
  }
  os << " at node " << node_index << " (worker " << route.subtour.worker_id
     << ")";
  return os.str();
}

std::vector<Violation> check_feasible(const Problem& problem,
                                      const Route& route) {
  std::vector<Violation> out;
  const Worker& w = problem.worker_by_id(route.subtour.worker_id);
  std::set<int> picked;
  for (int k = 0; k < route.size(); ++k) {
    const PDNode& node = route.subtour.nodes[k];
    const NodeLabels& l = route.labels[k];
    switch (node.kind) {
      case NodeKind::Pickup:
        picked.insert(node.owner);
        break;
      case NodeKind::Delivery: {
        if (!picked.count(node.owner)) {
          out.push_back({Violation::Kind::Precedence, k, 0.0});
        }
        const Request& r = problem.request(node.owner);
        if (l.arrival > r.latest_delivery_s + kTimeTol) {
          out.push_back({Violation::Kind::DeliveryDeadline, k,
                         l.arrival - r.latest_delivery_s});
        }
        break;
      }
      case NodeKind::ShiftEnd:
        if (l.arrival > w.shift_end_s + kTimeTol) {
          out.push_back(
              {Violation::Kind::ShiftEnd, k, l.arrival - w.shift_end_s});
        }
        break;
      default:
        break;
    }
    if (l.load > w.capacity + kTimeTol || l.load < -kTimeTol) {
      double amount = l.load > w.capacity ? l.load - w.capacity : -l.load;
      out.push_back({Violation::Kind::Capacity, k, amount});
    }
  }
  return out;
}

double route_cost(const Route& route, LegTag metric) {
  return metric == LegTag::Distance ? route.cost_length_m : route.cost_time_s;
}

double route_objective(const Route& route, LegTag metric, int norm) {
  double c = route_cost(route, metric);
  return norm == 2 ? c * c : c;
}

}  // namespace vrptd
