#include "vrptd/milp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace vrptd {

namespace {
constexpr double kTol = 1e-6;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double node_service_time(const Problem& problem, const PDNode& node) {
  if (node.kind == NodeKind::Pickup)
    return problem.request(node.owner).pickup_service_s;
  if (node.kind == NodeKind::Delivery)
    return problem.request(node.owner).delivery_service_s;
  return 0.0;
}

double node_window_start(const Problem& problem, const PDNode& node) {
  if (node.is_service()) return problem.request(node.owner).earliest_pickup_s;
  const Worker& w = problem.worker_by_id(node.owner);
  return w.shift_start_s;
}

double node_window_end(const Problem& problem, const PDNode& node) {
  if (node.is_service()) return problem.request(node.owner).latest_delivery_s;
  const Worker& w = problem.worker_by_id(node.owner);
  return w.shift_end_s;
}

// Load delta applied when entering the head node.
double arc_load_delta(const Problem& problem, const PDNode& head) {
  if (head.kind == NodeKind::Pickup) return problem.request(head.owner).load;
  if (head.kind == NodeKind::Delivery) return -problem.request(head.owner).load;
  return 0.0;
}

}  // namespace

std::vector<int> ScalarizedPDGraph::arcs_between(int from, int to) const {
  std::vector<int> out;
  for (int k = 0; k < static_cast<int>(arcs.size()); ++k) {
    if (arcs[k].from == from && arcs[k].to == to) out.push_back(k);
  }
  return out;
}

ScalarizedPDGraph scalarize(const PDGraph& pd, const Problem& problem,
                            LegTag objective) {
  ScalarizedPDGraph sc;
  sc.pd = pd;
  sc.pareto = objective == LegTag::Distance;

  if (problem.workers.empty()) return sc;
  const std::string& vt_name = problem.workers.front().vehicle_type;
  for (const auto& w : problem.workers) {
    if (w.vehicle_type != vt_name) {
      throw std::invalid_argument(
          "scalarization assumes a single vehicle type across workers");
    }
  }
  const int vtype = problem.graph.vehicle_type_index(vt_name);
  const RoadGraph& g = problem.graph;

  // Worker/request ordering is recovered from the PD node layout: starts,
  // pickups, deliveries, ends.
  std::vector<int> start_nodes, pickup_nodes;
  for (int n = 0; n < static_cast<int>(pd.nodes.size()); ++n) {
    if (pd.nodes[n].kind == NodeKind::ShiftStart) start_nodes.push_back(n);
    if (pd.nodes[n].kind == NodeKind::Pickup) pickup_nodes.push_back(n);
  }

  struct OriginSearch {
    RoadGraph::TdSearch td;
    RoadGraph::DistSearch dist;
    double departure = 0.0;
    bool valid = false;
  };

  // Phase 1: from each shift start at the worker's shift-start time.
  std::unordered_map<int, OriginSearch> by_node;  // keyed by PD node index
  for (int n : start_nodes) {
    const Worker& w = problem.worker_by_id(pd.nodes[n].owner);
    OriginSearch s;
    s.departure = w.shift_start_s;
    s.td = g.earliest_arrival(vtype, pd.nodes[n].vertex, s.departure);
    s.dist = g.shortest_distance(pd.nodes[n].vertex);
    s.valid = true;
    by_node.emplace(n, std::move(s));
  }

  // Phase 2: from each pickup at max(earliest pickup, earliest arrival from
  // any worker).
  for (int n : pickup_nodes) {
    const Request& r = problem.request(pd.nodes[n].owner);
    double earliest_reach = kInf;
    for (int s : start_nodes) {
      const auto& search = by_node.at(s);
      earliest_reach = std::min(
          earliest_reach, search.td.arrival[g.index_of(pd.nodes[n].vertex)]);
    }
    OriginSearch s;
    if (earliest_reach == kInf) {
      std::ostringstream os;
      os << "pickup of request " << r.id
         << " unreachable from every shift start; departing at its earliest "
            "pickup time";
      sc.diagnostics.push_back(os.str());
      s.departure = r.earliest_pickup_s;
    } else {
      s.departure = std::max(r.earliest_pickup_s, earliest_reach);
    }
    s.td = g.earliest_arrival(vtype, pd.nodes[n].vertex, s.departure);
    s.dist = g.shortest_distance(pd.nodes[n].vertex);
    s.valid = true;
    by_node.emplace(n, std::move(s));
  }

  // Phase 3: from each delivery at its earliest arrival from the matching
  // pickup (as computed in phase 2).
  for (int n : pickup_nodes) {
    const Request& r = problem.request(pd.nodes[n].owner);
    const int d = sc.pd.delivery_node(r.id);
    const auto& from_pickup = by_node.at(n);
    double arr =
        from_pickup.td.arrival[g.index_of(pd.nodes[d].vertex)];
    OriginSearch s;
    if (arr == kInf) {
      std::ostringstream os;
      os << "delivery of request " << r.id
         << " unreachable from its pickup; dropping its outgoing connections";
      sc.diagnostics.push_back(os.str());
      s.valid = false;
    } else {
      s.departure = arr;
      s.td = g.earliest_arrival(vtype, pd.nodes[d].vertex, s.departure);
      s.dist = g.shortest_distance(pd.nodes[d].vertex);
      s.valid = true;
    }
    by_node.emplace(d, std::move(s));
  }

  for (int k = 0; k < static_cast<int>(pd.arcs.size()); ++k) {
    const auto [u, v] = pd.arcs[k];
    const PDNode& from = pd.nodes[u];
    const PDNode& to = pd.nodes[v];
    const auto& search = by_node.at(u);
    if (!search.valid) continue;  // diagnostic already recorded

    int only_worker = -1;
    if (from.kind == NodeKind::ShiftStart) only_worker = problem.worker_index(from.owner);
    if (to.kind == NodeKind::ShiftEnd) only_worker = problem.worker_index(to.owner);

    const int target = g.index_of(to.vertex);
    const double svc = node_service_time(problem, to);
    if (search.td.arrival[target] == kInf) {
      std::ostringstream os;
      os << "pd arc " << u << "->" << v << " dropped: unreachable";
      sc.diagnostics.push_back(os.str());
      continue;
    }
    const double tau_time = search.td.arrival[target] - search.departure + svc;

    if (!sc.pareto) {
      ScalarArc a;
      a.from = u;
      a.to = v;
      a.variant = ScalarArc::Variant::Single;
      a.pd_arc = k;
      a.tau_s = tau_time;
      a.service_s = svc;
      // Static minimum length; the time-optimal path is not the route the
      // travel-time objective would drive on.
      a.lambda_m = search.dist.dist[target];
      a.only_worker = only_worker;
      sc.arcs.push_back(a);
      continue;
    }

    // Distance objective: attach the two Pareto-optimal connections.
    auto dist_path =
        g.path_to(search.dist.pred_vertex, search.dist.pred_arc, from.vertex, to.vertex);
    auto composed = g.compose_arrival(dist_path, vtype, search.departure);
    ScalarArc dist_leg;
    dist_leg.from = u;
    dist_leg.to = v;
    dist_leg.variant = ScalarArc::Variant::DistanceLeg;
    dist_leg.pd_arc = k;
    dist_leg.tau_s = composed.arrival_s - search.departure + svc;
    dist_leg.service_s = svc;
    dist_leg.lambda_m = search.dist.dist[target];
    dist_leg.only_worker = only_worker;
    sc.arcs.push_back(dist_leg);

    auto time_path =
        g.path_to(search.td.pred_vertex, search.td.pred_arc, from.vertex, to.vertex);
    double time_len = 0.0;
    for (std::size_t p = 0; p + 1 < time_path.size(); ++p) {
      int head = g.index_of(time_path[p + 1]);
      time_len += g.arc(search.td.pred_arc[head]).length_m;
    }
    ScalarArc time_leg;
    time_leg.from = u;
    time_leg.to = v;
    time_leg.variant = ScalarArc::Variant::TimeLeg;
    time_leg.pd_arc = k;
    time_leg.tau_s = tau_time;
    time_leg.service_s = svc;
    time_leg.lambda_m = time_len;
    time_leg.only_worker = only_worker;
    sc.arcs.push_back(time_leg);
  }
  return sc;
}

namespace {

double arc_cost(const ScalarArc& a, LegTag objective) {
  return objective == LegTag::Distance ? a.lambda_m : a.tau_s - a.service_s;
}

struct ModelLayout {
  std::vector<int> worker_ids;    // pd start order
  std::vector<int> request_ids;   // pd pickup order
  std::vector<std::vector<int>> arc_workers;  // worker indices per scalar arc
};

ModelLayout layout_of(const ScalarizedPDGraph& sc, const Problem& problem) {
  ModelLayout l;
  for (const auto& n : sc.pd.nodes) {
    if (n.kind == NodeKind::ShiftStart) l.worker_ids.push_back(n.owner);
    if (n.kind == NodeKind::Pickup) l.request_ids.push_back(n.owner);
  }
  l.arc_workers.resize(sc.arcs.size());
  for (int k = 0; k < static_cast<int>(sc.arcs.size()); ++k) {
    if (sc.arcs[k].only_worker >= 0) {
      l.arc_workers[k] = {sc.arcs[k].only_worker};
    } else {
      for (int w = 0; w < static_cast<int>(problem.workers.size()); ++w) {
        l.arc_workers[k].push_back(w);
      }
    }
  }
  return l;
}

std::string xe_name(int arc, int worker_id) {
  return "x_e" + std::to_string(arc) + "_w" + std::to_string(worker_id);
}
std::string xr_name(int request_id, int worker_id) {
  return "x_r" + std::to_string(request_id) + "_w" + std::to_string(worker_id);
}
std::string a_name(int node) { return "a_" + std::to_string(node); }
std::string q_name(int node) { return "q_" + std::to_string(node); }

}  // namespace

double default_sigma(const ScalarizedPDGraph& sc, const Problem& problem,
                     LegTag objective) {
  double max_c = 0.0;
  for (const auto& a : sc.arcs) max_c = std::max(max_c, arc_cost(a, objective));
  int n_requests = 0;
  for (const auto& n : sc.pd.nodes)
    if (n.kind == NodeKind::Pickup) ++n_requests;
  (void)problem;
  // Ten times an upper bound on any single route's total cost.
  return 10.0 * max_c * (2.0 * n_requests + 1.0);
}

MilpModel build_milp(const ScalarizedPDGraph& sc, const Problem& problem,
                     LegTag objective, const MilpOptions& opt) {
  MilpModel m;
  ModelLayout layout = layout_of(sc, problem);
  const auto& nodes = sc.pd.nodes;
  const double sigma = opt.sigma_override
                           ? *opt.sigma_override
                           : default_sigma(sc, problem, objective);
  double t_max = 0.0, q_max = 0.0;
  for (const auto& w : problem.workers) {
    t_max = std::max(t_max, w.shift_end_s - w.shift_start_s);
    q_max = std::max(q_max, w.capacity);
  }

  // Variables: arc binaries, assignment binaries, arrival times, loads.
  for (int k = 0; k < static_cast<int>(sc.arcs.size()); ++k) {
    for (int w : layout.arc_workers[k]) {
      m.vars.push_back({xe_name(k, problem.workers[w].id), 0.0, 1.0, true});
    }
  }
  for (int rid : layout.request_ids) {
    for (const auto& w : problem.workers) {
      m.vars.push_back({xr_name(rid, w.id), 0.0, 1.0, true});
    }
  }
  for (int n = 0; n < static_cast<int>(nodes.size()); ++n) {
    m.vars.push_back({a_name(n), node_window_start(problem, nodes[n]),
                      node_window_end(problem, nodes[n]), false});
  }
  for (int n = 0; n < static_cast<int>(nodes.size()); ++n) {
    bool service = nodes[n].is_service();
    m.vars.push_back({q_name(n), 0.0, service ? q_max : 0.0, false});
  }

  // Objective: arc costs minus request profits.
  for (int k = 0; k < static_cast<int>(sc.arcs.size()); ++k) {
    double c = arc_cost(sc.arcs[k], objective);
    for (int w : layout.arc_workers[k]) {
      m.objective.push_back({xe_name(k, problem.workers[w].id), c});
    }
  }
  for (int rid : layout.request_ids) {
    for (const auto& w : problem.workers) {
      m.objective.push_back({xr_name(rid, w.id), -sigma});
    }
  }

  auto row = [&](std::string name, std::vector<MilpModel::Term> terms,
                 char sense, double rhs) {
    m.rows.push_back({std::move(name), std::move(terms), sense, rhs});
  };

  // (1) each shift start opens at most one subtour.
  for (int n = 0; n < static_cast<int>(nodes.size()); ++n) {
    if (nodes[n].kind != NodeKind::ShiftStart) continue;
    int w = problem.worker_index(nodes[n].owner);
    std::vector<MilpModel::Term> terms;
    for (int k = 0; k < static_cast<int>(sc.arcs.size()); ++k) {
      if (sc.arcs[k].from == n) {
        terms.push_back({xe_name(k, problem.workers[w].id), 1.0});
      }
    }
    if (!terms.empty()) {
      row("start_out_n" + std::to_string(n), std::move(terms), 'L', 1.0);
    }
  }

  // (2)-(5) arc usage around each request's nodes matches its assignment.
  auto degree_rows = [&](int node, bool outgoing, const std::string& label) {
    int rid = nodes[node].owner;
    for (int w = 0; w < static_cast<int>(problem.workers.size()); ++w) {
      int wid = problem.workers[w].id;
      std::vector<MilpModel::Term> terms;
      for (int k = 0; k < static_cast<int>(sc.arcs.size()); ++k) {
        if ((outgoing ? sc.arcs[k].from : sc.arcs[k].to) != node) continue;
        const auto& aw = layout.arc_workers[k];
        if (std::find(aw.begin(), aw.end(), w) == aw.end()) continue;
        terms.push_back({xe_name(k, wid), 1.0});
      }
      terms.push_back({xr_name(rid, wid), -1.0});
      row(label + "_r" + std::to_string(rid) + "_w" + std::to_string(wid),
          std::move(terms), 'E', 0.0);
    }
  };
  for (int rid : layout.request_ids) {
    int p = sc.pd.pickup_node(rid);
    int d = sc.pd.delivery_node(rid);
    degree_rows(p, true, "pick_out");
    degree_rows(p, false, "pick_in");
    degree_rows(d, true, "del_out");
    degree_rows(d, false, "del_in");
  }

  // (6) each request served by at most one worker.
  for (int rid : layout.request_ids) {
    std::vector<MilpModel::Term> terms;
    for (const auto& w : problem.workers) terms.push_back({xr_name(rid, w.id), 1.0});
    row("serve_r" + std::to_string(rid), std::move(terms), 'L', 1.0);
  }

  // (8) pickup precedes delivery.
  for (int rid : layout.request_ids) {
    row("prec_r" + std::to_string(rid),
        {{a_name(sc.pd.pickup_node(rid)), 1.0},
         {a_name(sc.pd.delivery_node(rid)), -1.0}},
        'L', 0.0);
  }

  // (9)/(10) big-M propagation of arrival times and loads along used arcs,
  // emitted as the two-inequality expansion of the absolute-value rows.
  for (int k = 0; k < static_cast<int>(sc.arcs.size()); ++k) {
    const ScalarArc& a = sc.arcs[k];
    std::vector<MilpModel::Term> t9{{a_name(a.to), 1.0}, {a_name(a.from), -1.0}};
    for (int w : layout.arc_workers[k]) {
      t9.push_back({xe_name(k, problem.workers[w].id), -(t_max + a.tau_s)});
    }
    row("time_lo_e" + std::to_string(k), t9, 'G', -t_max);
    row("time_hi_e" + std::to_string(k), std::move(t9), 'L', t_max);

    double dq = arc_load_delta(problem, nodes[a.to]);
    std::vector<MilpModel::Term> t10{{q_name(a.to), 1.0}, {q_name(a.from), -1.0}};
    for (int w : layout.arc_workers[k]) {
      t10.push_back({xe_name(k, problem.workers[w].id), -(q_max + dq)});
    }
    row("load_lo_e" + std::to_string(k), t10, 'G', -q_max);
    row("load_hi_e" + std::to_string(k), std::move(t10), 'L', q_max);
  }

  // (11) the load right after a pickup respects the assigned vehicle's
  // capacity.
  for (int rid : layout.request_ids) {
    int p = sc.pd.pickup_node(rid);
    std::vector<MilpModel::Term> terms{{q_name(p), 1.0}};
    for (const auto& w : problem.workers) {
      terms.push_back({xr_name(rid, w.id), -w.capacity});
    }
    row("cap_n" + std::to_string(p), std::move(terms), 'L', 0.0);
  }

  // Pareto pairs: at most one variant of a connection may be selected.
  if (sc.pareto) {
    std::unordered_map<int, std::vector<int>> by_pd_arc;
    for (int k = 0; k < static_cast<int>(sc.arcs.size()); ++k) {
      by_pd_arc[sc.arcs[k].pd_arc].push_back(k);
    }
    std::vector<int> pd_arcs;
    pd_arcs.reserve(by_pd_arc.size());
    for (const auto& [pd_arc, v] : by_pd_arc) pd_arcs.push_back(pd_arc);
    std::sort(pd_arcs.begin(), pd_arcs.end());
    for (int pd_arc : pd_arcs) {
      const auto& variants = by_pd_arc[pd_arc];
      if (variants.size() < 2) continue;
      std::vector<MilpModel::Term> terms;
      for (int k : variants) {
        for (int w : layout.arc_workers[k]) {
          terms.push_back({xe_name(k, problem.workers[w].id), 1.0});
        }
      }
      row("joint_a" + std::to_string(pd_arc), std::move(terms), 'L', 1.0);
    }
  }
  return m;
}

std::string emit_model(const MilpModel& model) {
  std::ostringstream os;
  auto emit_terms = [&](const std::vector<MilpModel::Term>& terms) {
    for (std::size_t k = 0; k < terms.size(); ++k) {
      double c = terms[k].coef;
      if (k == 0) {
        if (c < 0) os << "- ";
      } else {
        os << (c < 0 ? " - " : " + ");
      }
      os << fmt(std::fabs(c)) << " " << terms[k].var;
    }
  };
  os << "Minimize\n obj: ";
  emit_terms(model.objective);
  os << "\nSubject To\n";
  for (const auto& row : model.rows) {
    os << " " << row.name << ": ";
    emit_terms(row.terms);
    os << (row.sense == 'L' ? " <= " : row.sense == 'G' ? " >= " : " = ")
       << fmt(row.rhs) << "\n";
  }
  os << "Bounds\n";
  for (const auto& v : model.vars) {
    if (v.is_binary) continue;
    if (v.lb == v.ub) {
      os << " " << v.name << " = " << fmt(v.lb) << "\n";
    } else {
      os << " " << fmt(v.lb) << " <= " << v.name << " <= " << fmt(v.ub) << "\n";
    }
  }
  os << "Binaries\n";
  for (const auto& v : model.vars) {
    if (v.is_binary) os << " " << v.name << "\n";
  }
  os << "End\n";
  return os.str();
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

// Parses "x + 2 y - 3.5 z" style token runs into terms.
std::vector<MilpModel::Term> parse_terms(const std::vector<std::string>& toks,
                                         std::size_t begin, std::size_t end) {
  std::vector<MilpModel::Term> terms;
  double sign = 1.0;
  std::optional<double> coef;
  for (std::size_t k = begin; k < end; ++k) {
    const std::string& t = toks[k];
    if (t == "+") {
      sign = 1.0;
      continue;
    }
    if (t == "-") {
      sign = -1.0;
      continue;
    }
    char* parse_end = nullptr;
    double value = std::strtod(t.c_str(), &parse_end);
    if (parse_end && *parse_end == '\0') {
      coef = value;
      continue;
    }
    terms.push_back({t, sign * coef.value_or(1.0)});
    sign = 1.0;
    coef.reset();
  }
  return terms;
}

}  // namespace

MilpModel parse_model(const std::string& text) {
  MilpModel m;
  enum class Section { None, Objective, Rows, Bounds, Binaries };
  Section section = Section::None;
  std::vector<MilpModel::Var> continuous;
  std::vector<MilpModel::Var> binaries;

  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    std::string head = toks[0];
    if (head == "Minimize") {
      section = Section::Objective;
      continue;
    }
    if (head == "Subject") {
      section = Section::Rows;
      continue;
    }
    if (head == "Bounds") {
      section = Section::Bounds;
      continue;
    }
    if (head == "Binaries" || head == "Binary") {
      section = Section::Binaries;
      continue;
    }
    if (head == "End") break;

    switch (section) {
      case Section::Objective: {
        std::size_t begin = 0;
        if (!toks.empty() && toks[0].back() == ':') begin = 1;
        auto terms = parse_terms(toks, begin, toks.size());
        m.objective.insert(m.objective.end(), terms.begin(), terms.end());
        break;
      }
      case Section::Rows: {
        if (toks[0].back() != ':') {
          throw std::invalid_argument("constraint row without a name: " + line);
        }
        MilpModel::Row row;
        row.name = toks[0].substr(0, toks[0].size() - 1);
        std::size_t op = toks.size();
        for (std::size_t k = 1; k < toks.size(); ++k) {
          if (toks[k] == "<=" || toks[k] == ">=" || toks[k] == "=") {
            op = k;
            break;
          }
        }
        if (op == toks.size() || op + 1 >= toks.size()) {
          throw std::invalid_argument("constraint row without a relation: " + line);
        }
        row.terms = parse_terms(toks, 1, op);
        row.sense = toks[op] == "<=" ? 'L' : toks[op] == ">=" ? 'G' : 'E';
        row.rhs = std::strtod(toks[op + 1].c_str(), nullptr);
        m.rows.push_back(std::move(row));
        break;
      }
      case Section::Bounds: {
        if (toks.size() == 3 && toks[1] == "=") {
          double v = std::strtod(toks[2].c_str(), nullptr);
          continuous.push_back({toks[0], v, v, false});
        } else if (toks.size() == 5 && toks[1] == "<=" && toks[3] == "<=") {
          continuous.push_back({toks[2], std::strtod(toks[0].c_str(), nullptr),
                                std::strtod(toks[4].c_str(), nullptr), false});
        } else {
          throw std::invalid_argument("unsupported bounds line: " + line);
        }
        break;
      }
      case Section::Binaries: {
        for (const auto& name : toks) binaries.push_back({name, 0.0, 1.0, true});
        break;
      }
      default:
        throw std::invalid_argument("unexpected content before sections: " + line);
    }
  }
  m.vars = std::move(binaries);
  m.vars.insert(m.vars.end(), continuous.begin(), continuous.end());
  return m;
}

std::vector<std::string> evaluate_model(
    const MilpModel& model,
    const std::unordered_map<std::string, double>& values, double tol) {
  std::vector<std::string> violations;
  auto value_of = [&](const std::string& name) {
    auto it = values.find(name);
    return it == values.end() ? 0.0 : it->second;
  };
  for (const auto& v : model.vars) {
    double x = value_of(v.name);
    if (x < v.lb - tol || x > v.ub + tol) {
      violations.push_back("bound violated: " + v.name + " = " + fmt(x));
    }
    if (v.is_binary && std::fabs(x) > tol && std::fabs(x - 1.0) > tol) {
      violations.push_back("binary violated: " + v.name + " = " + fmt(x));
    }
  }
  for (const auto& row : model.rows) {
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += t.coef * value_of(t.var);
    bool ok = row.sense == 'L'   ? lhs <= row.rhs + tol
              : row.sense == 'G' ? lhs >= row.rhs - tol
                                 : std::fabs(lhs - row.rhs) <= tol;
    if (!ok) {
      violations.push_back("row violated: " + row.name + " lhs=" + fmt(lhs) +
                           " rhs=" + fmt(row.rhs));
    }
  }
  return violations;
}

namespace {

struct ArcIndex {
  std::unordered_map<long long, std::vector<int>> by_pair;
  int n_nodes = 0;

  explicit ArcIndex(const ScalarizedPDGraph& sc) {
    n_nodes = static_cast<int>(sc.pd.nodes.size());
    for (int k = 0; k < static_cast<int>(sc.arcs.size()); ++k) {
      by_pair[key(sc.arcs[k].from, sc.arcs[k].to)].push_back(k);
    }
  }
  long long key(int u, int v) const {
    return static_cast<long long>(u) * n_nodes + v;
  }
  const std::vector<int>* lookup(int u, int v) const {
    auto it = by_pair.find(key(u, v));
    return it == by_pair.end() ? nullptr : &it->second;
  }
};

struct SubsetBest {
  bool computed = false;
  bool feasible = false;
  double cost = kInf;
  std::vector<int> nodes;
  std::vector<int> arcs;
};

struct TinySearch {
  const ScalarizedPDGraph& sc;
  const Problem& problem;
  const ArcIndex& index;
  LegTag objective;
  int worker_index;
  int start_node, end_node;
  std::vector<int> pickup_of, delivery_of;  // per request position
  std::vector<double> load_of;

  SubsetBest* current = nullptr;
  std::vector<int> nodes_stack, arcs_stack;

  void dfs(unsigned undone_pick, unsigned undone_del, int at, double time,
           double load, double cost) {
    if (current->feasible && cost >= current->cost - 1e-12) return;
    const Worker& w = problem.workers[worker_index];
    if (undone_pick == 0 && undone_del == 0) {
      // Close the subtour at the shift end.
      const auto* arcs = index.lookup(at, end_node);
      if (!arcs) return;
      for (int k : *arcs) {
        const ScalarArc& a = sc.arcs[k];
        if (a.only_worker >= 0 && a.only_worker != worker_index) continue;
        double t_end = time + a.tau_s;
        if (t_end > w.shift_end_s + kTol) continue;
        double total = cost + arc_cost(a, objective);
        if (!current->feasible || total < current->cost - 1e-12) {
          current->feasible = true;
          current->cost = total;
          current->nodes = nodes_stack;
          current->arcs = arcs_stack;
          current->arcs.push_back(k);
        }
      }
      return;
    }
    const int n_req = static_cast<int>(pickup_of.size());
    for (int r = 0; r < n_req; ++r) {
      int next;
      bool is_pickup;
      if (undone_pick & (1u << r)) {
        next = pickup_of[r];
        is_pickup = true;
      } else if (undone_del & (1u << r)) {
        next = delivery_of[r];
        is_pickup = false;
      } else {
        continue;
      }
      double new_load = load + (is_pickup ? load_of[r] : -load_of[r]);
      if (new_load > w.capacity + kTol || new_load < -kTol) continue;
      const auto* arcs = index.lookup(at, next);
      if (!arcs) continue;
      const double st = node_window_start(problem, sc.pd.nodes[next]);
      const double et = node_window_end(problem, sc.pd.nodes[next]);
      for (int k : *arcs) {
        const ScalarArc& a = sc.arcs[k];
        if (a.only_worker >= 0 && a.only_worker != worker_index) continue;
        double t_next = std::max(st, time + a.tau_s);
        if (t_next > et + kTol) continue;
        nodes_stack.push_back(next);
        arcs_stack.push_back(k);
        dfs(is_pickup ? (undone_pick & ~(1u << r)) : undone_pick,
            is_pickup ? (undone_del | (1u << r)) : (undone_del & ~(1u << r)),
            next, t_next, new_load, cost + arc_cost(a, objective));
        nodes_stack.pop_back();
        arcs_stack.pop_back();
      }
    }
  }
};

}  // namespace

TinySolution solve_exact_tiny(const ScalarizedPDGraph& sc,
                              const Problem& problem, LegTag objective,
                              const MilpOptions& opt) {
  ModelLayout layout = layout_of(sc, problem);
  const int n_req = static_cast<int>(layout.request_ids.size());
  const int n_workers = static_cast<int>(problem.workers.size());
  if (n_req > 6 || n_workers > 3) {
    throw std::invalid_argument(
        "exact enumeration is limited to 6 requests and 3 workers");
  }
  const double sigma = opt.sigma_override
                           ? *opt.sigma_override
                           : default_sigma(sc, problem, objective);
  ArcIndex index(sc);

  // Best cost per (worker, request subset), by exhaustive ordering search.
  std::vector<std::vector<SubsetBest>> memo(
      n_workers, std::vector<SubsetBest>(1u << n_req));
  auto subset_best = [&](int w, unsigned subset) -> const SubsetBest& {
    SubsetBest& best = memo[w][subset];
    if (best.computed) return best;
    best.computed = true;
    if (subset == 0) {
      best.feasible = true;
      best.cost = 0.0;  // an idle worker selects no arcs
      return best;
    }
    TinySearch search{sc,
                      problem,
                      index,
                      objective,
                      w,
                      sc.pd.start_node(problem.workers[w].id),
                      sc.pd.end_node(problem.workers[w].id),
                      {},
                      {},
                      {},
                      nullptr,
                      {},
                      {}};
    for (int r = 0; r < n_req; ++r) {
      search.pickup_of.push_back(sc.pd.pickup_node(layout.request_ids[r]));
      search.delivery_of.push_back(sc.pd.delivery_node(layout.request_ids[r]));
      search.load_of.push_back(problem.request(layout.request_ids[r]).load);
    }
    search.current = &best;
    search.dfs(subset, 0u, search.start_node,
               problem.workers[w].shift_start_s, 0.0, 0.0);
    return best;
  };

  TinySolution best;
  best.feasible = false;
  std::vector<int> assign(n_req, -1);
  // Odometer over request-to-worker assignments (-1 = unserved).
  while (true) {
    std::vector<unsigned> subset(n_workers, 0u);
    int served = 0;
    for (int r = 0; r < n_req; ++r) {
      if (assign[r] >= 0) {
        subset[assign[r]] |= 1u << r;
        ++served;
      }
    }
    double total = -sigma * served;
    bool ok = true;
    for (int w = 0; w < n_workers && ok; ++w) {
      const SubsetBest& sb = subset_best(w, subset[w]);
      if (!sb.feasible) {
        ok = false;
      } else {
        total += sb.cost;
      }
    }
    if (ok && (!best.feasible || total < best.objective - 1e-9)) {
      best.feasible = true;
      best.objective = total;
      best.nodes_per_worker.assign(n_workers, {});
      best.arcs_per_worker.assign(n_workers, {});
      best.served_requests.clear();
      for (int w = 0; w < n_workers; ++w) {
        const SubsetBest& sb = subset_best(w, subset[w]);
        best.nodes_per_worker[w] = sb.nodes;
        best.arcs_per_worker[w] = sb.arcs;
      }
      for (int r = 0; r < n_req; ++r) {
        if (assign[r] >= 0) best.served_requests.push_back(layout.request_ids[r]);
      }
    }
    // Advance the odometer.
    int pos = 0;
    while (pos < n_req) {
      if (assign[pos] + 1 < n_workers) {
        assign[pos]++;
        break;
      }
      assign[pos] = -1;
      ++pos;
    }
    if (pos == n_req) break;
  }
  return best;
}

std::unordered_map<std::string, double> solution_to_values(
    const ScalarizedPDGraph& sc, const Problem& problem,
    const TinySolution& sol) {
  std::unordered_map<std::string, double> values;
  const auto& nodes = sc.pd.nodes;
  for (int n = 0; n < static_cast<int>(nodes.size()); ++n) {
    values[a_name(n)] = node_window_start(problem, nodes[n]);
    values[q_name(n)] = 0.0;
  }
  for (int w = 0; w < static_cast<int>(sol.arcs_per_worker.size()); ++w) {
    const int wid = problem.workers[w].id;
    double time = problem.workers[w].shift_start_s;
    double load = 0.0;
    int at = sc.pd.start_node(wid);
    values[a_name(at)] = time;
    for (int k : sol.arcs_per_worker[w]) {
      const ScalarArc& a = sc.arcs[k];
      values[xe_name(k, wid)] = 1.0;
      const PDNode& head = nodes[a.to];
      time = std::max(node_window_start(problem, head), time + a.tau_s);
      load += arc_load_delta(problem, head);
      values[a_name(a.to)] = time;
      values[q_name(a.to)] = load;
      if (head.kind == NodeKind::Pickup) {
        values[xr_name(head.owner, wid)] = 1.0;
      }
      at = a.to;
    }
  }
  return values;
}

double fleet_scalar_objective(const ScalarizedPDGraph& sc,
                              const Problem& problem, const FleetState& fleet,
                              LegTag objective, const MilpOptions& opt) {
  const double sigma = opt.sigma_override
                           ? *opt.sigma_override
                           : default_sigma(sc, problem, objective);
  ArcIndex index(sc);
  auto node_index = [&](const PDNode& n) {
    switch (n.kind) {
      case NodeKind::ShiftStart:
        return sc.pd.start_node(n.owner);
      case NodeKind::ShiftEnd:
        return sc.pd.end_node(n.owner);
      case NodeKind::Pickup:
        return sc.pd.pickup_node(n.owner);
      default:
        return sc.pd.delivery_node(n.owner);
    }
  };
  double total = 0.0;
  for (std::size_t w = 0; w < fleet.routes.size(); ++w) {
    const Route& route = fleet.routes[w];
    if (route.size() <= 2) continue;  // idle workers select no arcs
    for (int k = 0; k + 1 < route.size(); ++k) {
      int u = node_index(route.subtour.nodes[k]);
      int v = node_index(route.subtour.nodes[k + 1]);
      const auto* arcs = index.lookup(u, v);
      if (!arcs) throw std::invalid_argument("subtour uses a dropped pd arc");
      int chosen = -1;
      for (int a : *arcs) {
        if (!sc.pareto) {
          chosen = a;
          break;
        }
        auto want = route.legs[k].tag == LegTag::Distance
                        ? ScalarArc::Variant::DistanceLeg
                        : ScalarArc::Variant::TimeLeg;
        if (sc.arcs[a].variant == want) {
          chosen = a;
          break;
        }
      }
      if (chosen < 0) throw std::invalid_argument("missing pd arc variant");
      total += arc_cost(sc.arcs[chosen], objective);
    }
    for (int k = 1; k + 1 < route.size(); ++k) {
      if (route.subtour.nodes[k].kind == NodeKind::Pickup) total -= sigma;
    }
  }
  return total;
}

Subtour subtour_from_nodes(const Problem& problem, const PDGraph& pd,
                           int worker_id, const std::vector<int>& node_ids) {
  Subtour st;
  st.worker_id = worker_id;
  const Worker& w = problem.worker_by_id(worker_id);
  st.nodes.push_back(make_shift_start_node(w));
  for (int n : node_ids) {
    if (n < 0 || n >= static_cast<int>(pd.nodes.size())) {
      throw std::invalid_argument("pd node id out of range");
    }
    if (!pd.nodes[n].is_service()) {
      throw std::invalid_argument("subtour node ids must be service nodes");
    }
    st.nodes.push_back(pd.nodes[n]);
  }
  st.nodes.push_back(make_shift_end_node(w));
  return st;
}

SolutionCheckReport check_and_repair(const Problem& problem,
                                     const ScalarizedPDGraph& sc,
                                     const std::vector<Subtour>& subtours,
                                     LegTag objective) {
  SolutionCheckReport report;
  report.accepted = true;
  ArcIndex index(sc);
  int cut_seq = 0;

  for (const auto& subtour : subtours) {
    WorkerCheck check;
    check.subtour = subtour;
    Route route = realize_route(problem, subtour, objective);
    check.status = WorkerCheck::Status::Feasible;

    while (true) {
      auto violations = check_feasible(problem, route);
      // Capacity and precedence cannot be repaired by re-routing.
      bool hard = false;
      for (const auto& v : violations) {
        if (v.kind == Violation::Kind::Capacity ||
            v.kind == Violation::Kind::Precedence) {
          hard = true;
        }
      }
      if (violations.empty()) break;
      int vx = violations.front().node_index;
      int swap_at = -1;
      if (!hard) {
        for (int k = vx - 1; k >= 0; --k) {
          if (route.legs[k].tag == LegTag::Distance) {
            swap_at = k;
            break;
          }
        }
      }
      if (swap_at < 0) {
        check.status = WorkerCheck::Status::Rejected;
        check.remaining = violations;
        break;
      }
      route.legs[swap_at].tag = LegTag::Time;
      relabel_suffix(problem, route, swap_at);
      check.swaps++;
      check.status = WorkerCheck::Status::Repaired;
    }

    if (check.status == WorkerCheck::Status::Rejected) {
      report.accepted = false;
      // No-good cut over the subtour's arcs (all variants), for this worker.
      const int wid = subtour.worker_id;
      std::ostringstream cut;
      cut << "cut_w" << wid << "_" << cut_seq++ << ":";
      int n_pairs = 0;
      bool first = true;
      auto node_index = [&](const PDNode& n) {
        switch (n.kind) {
          case NodeKind::ShiftStart:
            return sc.pd.start_node(n.owner);
          case NodeKind::ShiftEnd:
            return sc.pd.end_node(n.owner);
          case NodeKind::Pickup:
            return sc.pd.pickup_node(n.owner);
          default:
            return sc.pd.delivery_node(n.owner);
        }
      };
      for (int k = 0; k + 1 < subtour.size(); ++k) {
        int u = node_index(subtour.nodes[k]);
        int v = node_index(subtour.nodes[k + 1]);
        const auto* arcs = index.lookup(u, v);
        ++n_pairs;
        if (!arcs) continue;
        for (int a : *arcs) {
          cut << (first ? " " : " + ") << "1 " << xe_name(a, wid);
          first = false;
        }
      }
      cut << " <= " << fmt(n_pairs - 1);
      report.cuts.push_back(cut.str());
    }
    check.route = std::move(route);
    report.workers.push_back(std::move(check));
  }
  return report;
}

}  // namespace vrptd
