#include <doctest.h>

#include "support/builders.hpp"
#include "vrptd/milp.hpp"

using namespace vrptd;
using namespace vrptd::testing;

namespace {

Problem corridor(int len = 10) {
  Problem p = problem_on_graph(grid_graph(len, 1));
  p.workers.push_back(make_worker(p, 1, 0, 28800.0, 57600.0));
  return p;
}

std::vector<Request> problem_requests(const Problem& p) {
  return requests_in_release_order(p);
}

}  // namespace

TEST_CASE("scalarize with constant travel times reduces to static shortest paths") {
  Problem p = corridor();
  Request r = make_request(p, 1, 3, 6, 40000.0, 2400.0, 90.0);
  p.requests.emplace(1, r);
  PDGraph pd = build_pd_graph({r}, p.workers);
  ScalarizedPDGraph sc = scalarize(pd, p, LegTag::Time);
  REQUIRE(sc.arcs.size() == 3);
  // s->p: 3 hops of 60 s plus the pickup service.
  CHECK(sc.arcs[0].tau_s == doctest::Approx(180.0 + 90.0));
  CHECK(sc.arcs[0].lambda_m == doctest::Approx(300.0));
  CHECK(sc.arcs[0].only_worker == 0);
  // p->d: 3 hops plus delivery service, independent of the departure.
  CHECK(sc.arcs[1].tau_s == doctest::Approx(180.0 + 90.0));
  // d->e: 6 hops home, no service at the shift end.
  CHECK(sc.arcs[2].tau_s == doctest::Approx(360.0));
  CHECK(sc.arcs[2].service_s == doctest::Approx(0.0));
}

TEST_CASE("phase-1 scalar equals the composed travel time on the optimal path") {
  std::mt19937_64 rng(333);
  Problem p = problem_on_graph(random_graph(rng, 10, 14));
  p.workers.push_back(make_worker(p, 1, 0, 30000.0, 60000.0));
  Request r = make_request(p, 1, 5, 8, 35000.0, 2400.0, 75.0);
  p.requests.emplace(1, r);
  PDGraph pd = build_pd_graph({r}, p.workers);
  ScalarizedPDGraph sc = scalarize(pd, p, LegTag::Time);
  const ScalarArc& start_arc = sc.arcs[0];
  REQUIRE(sc.pd.nodes[start_arc.from].kind == NodeKind::ShiftStart);
  auto search = p.graph.earliest_arrival(0, 0, 30000.0, r.pickup_vertex);
  auto path = p.graph.path_to(search.pred_vertex, search.pred_arc, 0,
                              r.pickup_vertex);
  auto composed = p.graph.compose_arrival(path, 0, 30000.0);
  CHECK(start_arc.tau_s ==
        doctest::Approx(composed.arrival_s - 30000.0 + 75.0));
}

TEST_CASE("phase-2 departs at the pickup ready time, not the arrival") {
  // Two parallel roads to the delivery: one is fast early and congests
  // later, the other is steady. The request is ready long after the worker
  // could arrive, so the scalar must reflect the later departure.
  RoadGraph g;
  g.add_vertex(0, {0, 0});     // worker home & pickup
  g.add_vertex(1, {500, 0});   // via the once-fast road
  g.add_vertex(2, {500, 400}); // via the steady road
  g.add_vertex(3, {1000, 0});  // delivery
  auto add = [&](int a, int b, double len, TravelTimeFunction f) {
    std::map<std::string, TravelTimeFunction> ttfs;
    ttfs.emplace("scooter", std::move(f));
    g.add_arc(a, b, len, std::move(ttfs));
  };
  // Fast before t=30000 (100 s per arc), congested after (500 s per arc).
  TravelTimeFunction congesting(86400.0, {{0.0, 100.0},
                                          {30000.0, 100.0},
                                          {36000.0, 500.0}});
  add(0, 1, 500.0, congesting);
  add(1, 3, 500.0, congesting);
  add(0, 2, 640.0, TravelTimeFunction::constant(86400.0, 300.0));
  add(2, 3, 640.0, TravelTimeFunction::constant(86400.0, 300.0));
  // Return arcs so the shift can close.
  add(3, 0, 1000.0, TravelTimeFunction::constant(86400.0, 400.0));
  g.finalize();
  Problem p = problem_on_graph(std::move(g));
  p.workers.push_back(make_worker(p, 1, 0, 28800.0, 86000.0));
  Request r = make_request(p, 1, 0, 3, 40000.0, 4000.0, 0.0);
  p.requests.emplace(1, r);
  PDGraph pd = build_pd_graph({r}, p.workers);
  ScalarizedPDGraph sc = scalarize(pd, p, LegTag::Time);
  // At the ready time 40000 the congesting road costs 1000 s, the steady one
  // 600 s; an early departure would have preferred the 200 s road.
  const ScalarArc& pd_arc = sc.arcs[1];
  REQUIRE(sc.pd.nodes[pd_arc.from].kind == NodeKind::Pickup);
  CHECK(pd_arc.tau_s == doctest::Approx(600.0));
}

TEST_CASE("one-worker one-request model has the derived shape") {
  Problem p = corridor();
  Request r = make_request(p, 1, 3, 6, 40000.0, 2400.0, 90.0);
  p.requests.emplace(1, r);
  PDGraph pd = build_pd_graph({r}, p.workers);
  ScalarizedPDGraph sc = scalarize(pd, p, LegTag::Time);
  MilpModel m = build_milp(sc, p, LegTag::Time);

  // 3 arc binaries + 1 assignment binary + 4 arrivals + 4 loads.
  CHECK(m.vars.size() == 12);
  int binaries = 0;
  for (const auto& v : m.vars) binaries += v.is_binary ? 1 : 0;
  CHECK(binaries == 4);
  // Rows: start(1) + degree(4) + serve(1) + precedence(1) + time big-M(6)
  // + load big-M(6) + capacity(1).
  CHECK(m.rows.size() == 20);

  // The emitted document names every constraint family.
  std::string text = emit_model(m);
  for (const char* needle :
       {"start_out_n0", "pick_out_r1_w1", "pick_in_r1_w1", "del_out_r1_w1",
        "del_in_r1_w1", "serve_r1", "prec_r1", "time_lo_e0", "time_hi_e0",
        "load_lo_e2", "load_hi_e2", "cap_n1", "x_e0_w1", "x_r1_w1", "a_3",
        "q_2", "Binaries", "Bounds"}) {
    CHECK(text.find(needle) != std::string::npos);
  }
}

TEST_CASE("pareto mode doubles the arc variables and adds joint rows") {
  Problem p = corridor();
  Request r = make_request(p, 1, 3, 6, 40000.0, 2400.0, 90.0);
  p.requests.emplace(1, r);
  PDGraph pd = build_pd_graph({r}, p.workers);
  ScalarizedPDGraph sc = scalarize(pd, p, LegTag::Distance);
  REQUIRE(sc.pareto);
  CHECK(sc.arcs.size() == 6);
  for (const auto& a : sc.arcs) {
    // Pareto dominance within each pair.
    if (a.variant == ScalarArc::Variant::DistanceLeg) {
      for (const auto& b : sc.arcs) {
        if (b.pd_arc == a.pd_arc && b.variant == ScalarArc::Variant::TimeLeg) {
          CHECK(a.lambda_m <= b.lambda_m + 1e-9);
          CHECK(b.tau_s <= a.tau_s + 1e-9);
        }
      }
    }
  }
  MilpModel m = build_milp(sc, p, LegTag::Distance);
  int joint = 0;
  for (const auto& row : m.rows) {
    if (row.name.rfind("joint_", 0) == 0) ++joint;
  }
  CHECK(joint == 3);
}

TEST_CASE("model emission round-trips exactly") {
  Problem p = corridor();
  Request r1 = make_request(p, 1, 3, 6, 40000.0, 2400.0, 90.0);
  Request r2 = make_request(p, 2, 2, 8, 41000.0, 2400.0, 90.0);
  p.requests.emplace(1, r1);
  p.requests.emplace(2, r2);
  p.workers.push_back(make_worker(p, 2, 9, 28800.0, 57600.0));
  PDGraph pd = build_pd_graph({r1, r2}, p.workers);
  for (LegTag objective : {LegTag::Time, LegTag::Distance}) {
    ScalarizedPDGraph sc = scalarize(pd, p, objective);
    MilpModel m = build_milp(sc, p, objective);
    std::string text = emit_model(m);
    MilpModel parsed = parse_model(text);
    CHECK(parsed == m);
    CHECK(emit_model(parsed) == text);
  }
}

TEST_CASE("empty instance model is trivial") {
  Problem p = corridor();
  PDGraph pd = build_pd_graph({}, p.workers);
  ScalarizedPDGraph sc = scalarize(pd, p, LegTag::Time);
  MilpModel m = build_milp(sc, p, LegTag::Time);
  CHECK(m.objective.empty());
  int binaries = 0;
  for (const auto& v : m.vars) binaries += v.is_binary ? 1 : 0;
  CHECK(binaries == 0);
  TinySolution sol = solve_exact_tiny(sc, p, LegTag::Time);
  CHECK(sol.feasible);
  CHECK(sol.objective == doctest::Approx(0.0));
}

TEST_CASE("exact tiny oracle") {
  Problem p = corridor();
  Request r = make_request(p, 1, 3, 6, 40000.0, 2400.0, 90.0);
  p.requests.emplace(1, r);
  PDGraph pd = build_pd_graph({r}, p.workers);
  ScalarizedPDGraph sc = scalarize(pd, p, LegTag::Time);

  SUBCASE("serves the single profitable request") {
    TinySolution sol = solve_exact_tiny(sc, p, LegTag::Time);
    REQUIRE(sol.feasible);
    CHECK(sol.served_requests == std::vector<int>{1});
    double c = 0.0;
    for (int k : sol.arcs_per_worker[0]) {
      c += sc.arcs[k].tau_s - sc.arcs[k].service_s;
    }
    double sigma = default_sigma(sc, p, LegTag::Time);
    CHECK(sol.objective == doctest::Approx(c - sigma));
  }
  SUBCASE("zero profit: serving nothing is optimal") {
    MilpOptions opt;
    opt.sigma_override = 0.0;
    TinySolution sol = solve_exact_tiny(sc, p, LegTag::Time, opt);
    REQUIRE(sol.feasible);
    CHECK(sol.served_requests.empty());
    CHECK(sol.objective == doctest::Approx(0.0));
  }
  SUBCASE("an impossible deadline stays unserved") {
    Request hopeless = make_request(p, 2, 3, 6, 40000.0, 2400.0, 90.0);
    hopeless.latest_delivery_s = 40001.0;
    hopeless.earliest_pickup_s = 40000.0;
    p.requests[2] = hopeless;
    PDGraph pd2 = build_pd_graph({p.request(1), hopeless}, p.workers);
    ScalarizedPDGraph sc2 = scalarize(pd2, p, LegTag::Time);
    TinySolution sol = solve_exact_tiny(sc2, p, LegTag::Time);
    REQUIRE(sol.feasible);
    CHECK(sol.served_requests == std::vector<int>{1});
  }
  SUBCASE("size limit is enforced") {
    std::vector<Request> many;
    for (int k = 0; k < 7; ++k) {
      Request q = make_request(p, 10 + k, 1, 2, 40000.0);
      p.requests.emplace(q.id, q);
      many.push_back(q);
    }
    PDGraph pd2 = build_pd_graph(many, p.workers);
    ScalarizedPDGraph sc2 = scalarize(pd2, p, LegTag::Time);
    CHECK_THROWS_WITH_AS(solve_exact_tiny(sc2, p, LegTag::Time),
                         doctest::Contains("limited to 6 requests"),
                         std::invalid_argument);
  }
}

TEST_CASE("substituting the oracle optimum satisfies the emitted model") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 6; ++trial) {
    Problem p = corridor(12);
    p.workers.push_back(make_worker(p, 2, 11, 28800.0, 57600.0));
    std::vector<Request> rs;
    for (int k = 0; k < 3; ++k) {
      Request r = make_request(p, k + 1, ui(rng, 1, 10), ui(rng, 1, 10),
                               std::floor(u(rng, 36000.0, 42000.0)), 3000.0,
                               90.0);
      rs.push_back(r);
      p.requests.emplace(r.id, r);
    }
    PDGraph pd = build_pd_graph(rs, p.workers);
    for (LegTag objective : {LegTag::Time, LegTag::Distance}) {
      ScalarizedPDGraph sc = scalarize(pd, p, objective);
      MilpModel m = build_milp(sc, p, objective);
      TinySolution sol = solve_exact_tiny(sc, p, objective);
      REQUIRE(sol.feasible);
      auto values = solution_to_values(sc, p, sol);
      auto violations = evaluate_model(m, values);
      CHECK(violations.empty());
      if (!violations.empty()) {
        for (const auto& v : violations) MESSAGE(v);
      }
    }
  }
}

TEST_CASE("oracle dominates the online heuristic under the scalar metric") {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 5; ++trial) {
    Problem p = corridor(12);
    p.workers.push_back(make_worker(p, 2, 11, 28800.0, 57600.0));
    std::vector<Request> rs;
    for (int k = 0; k < 3; ++k) {
      Request r = make_request(p, k + 1, ui(rng, 1, 10), ui(rng, 1, 10),
                               std::floor(u(rng, 36000.0, 42000.0)), 3000.0,
                               90.0);
      rs.push_back(r);
      p.requests.emplace(r.id, r);
    }
    PDGraph pd = build_pd_graph(rs, p.workers);
    ScalarizedPDGraph sc = scalarize(pd, p, LegTag::Time);
    TinySolution oracle = solve_exact_tiny(sc, p, LegTag::Time);
    REQUIRE(oracle.feasible);

    SchedulerConfig config;
    config.metric = LegTag::Time;
    FleetState fleet = init_fleet(p, config.metric);
    for (const Request& r : requests_in_release_order(p)) {
      fleet.clock = r.release_s;
      AssignDecision d = assign_request(p, fleet, r, config);
      if (d.assigned) commit_assignment(fleet, r, d);
    }
    double heuristic = fleet_scalar_objective(sc, p, fleet, LegTag::Time);
    CHECK(oracle.objective <= heuristic + 1e-6);
  }
}

TEST_CASE("check_and_repair") {
  SUBCASE("constant metric: zero repairs") {
    Problem p = corridor();
    Request r = make_request(p, 1, 3, 6, 40000.0, 2400.0, 90.0);
    p.requests.emplace(1, r);
    PDGraph pd = build_pd_graph({r}, p.workers);
    ScalarizedPDGraph sc = scalarize(pd, p, LegTag::Time);
    TinySolution sol = solve_exact_tiny(sc, p, LegTag::Time);
    std::vector<Subtour> subtours;
    for (std::size_t w = 0; w < p.workers.size(); ++w) {
      subtours.push_back(subtour_from_nodes(p, pd, p.workers[w].id,
                                            sol.nodes_per_worker[w]));
    }
    SolutionCheckReport report = check_and_repair(p, sc, subtours, LegTag::Time);
    CHECK(report.accepted);
    for (const auto& wc : report.workers) {
      CHECK(wc.status == WorkerCheck::Status::Feasible);
      CHECK(wc.swaps == 0);
    }
  }

  SUBCASE("a deadline violation repairs with exactly one swap") {
    // Same two-road layout as the insertion contingency toy.
    RoadGraph g;
    g.add_vertex(0, {0, 0});
    g.add_vertex(1, {500, 0});
    g.add_vertex(2, {400, 300});
    g.add_vertex(3, {1000, 0});
    auto both = [&](int a, int b, double len, double tau) {
      std::map<std::string, TravelTimeFunction> f1;
      f1.emplace("scooter", TravelTimeFunction::constant(86400.0, tau));
      g.add_arc(a, b, len, std::move(f1));
      std::map<std::string, TravelTimeFunction> f2;
      f2.emplace("scooter", TravelTimeFunction::constant(86400.0, tau));
      g.add_arc(b, a, len, std::move(f2));
    };
    both(0, 1, 500.0, 1350.0);
    both(1, 3, 500.0, 1350.0);
    both(0, 2, 800.0, 810.0);
    both(2, 3, 800.0, 810.0);
    g.finalize();
    Problem p = problem_on_graph(std::move(g));
    p.workers.push_back(make_worker(p, 1, 0, 28800.0, 200000.0));
    Request r = make_request(p, 1, 0, 3, 28800.0, 1800.0, 0.0);
    p.requests.emplace(1, r);
    PDGraph pd = build_pd_graph({r}, p.workers);
    ScalarizedPDGraph sc = scalarize(pd, p, LegTag::Distance);
    Subtour st = subtour_from_nodes(p, pd, 1,
                                    {pd.pickup_node(1), pd.delivery_node(1)});
    SolutionCheckReport report = check_and_repair(p, sc, {st}, LegTag::Distance);
    REQUIRE(report.workers.size() == 1);
    const WorkerCheck& wc = report.workers[0];
    CHECK(wc.status == WorkerCheck::Status::Repaired);
    CHECK(wc.swaps == 1);
    CHECK(wc.route.feasible);
    // The repaired leg now runs for time at a longer distance, and the
    // arrival at the delivery moved earlier.
    CHECK(wc.route.legs[1].tag == LegTag::Time);
    CHECK(wc.route.legs[1].length_m == doctest::Approx(1600.0));
    CHECK(wc.route.labels[2].arrival == doctest::Approx(28800.0 + 1620.0));
    CHECK(report.accepted);
    CHECK(report.cuts.empty());
  }

  SUBCASE("no swappable leg: rejected with one cut") {
    Problem p = corridor();
    Request r = make_request(p, 1, 3, 6, 40000.0, 2400.0, 90.0);
    r.latest_delivery_s = 40010.0;  // impossible even via time legs
    p.requests.emplace(1, r);
    PDGraph pd = build_pd_graph({r}, p.workers);
    ScalarizedPDGraph sc = scalarize(pd, p, LegTag::Time);
    Subtour st = subtour_from_nodes(p, pd, 1,
                                    {pd.pickup_node(1), pd.delivery_node(1)});
    SolutionCheckReport report = check_and_repair(p, sc, {st}, LegTag::Time);
    REQUIRE(report.workers.size() == 1);
    CHECK(report.workers[0].status == WorkerCheck::Status::Rejected);
    CHECK_FALSE(report.accepted);
    REQUIRE(report.cuts.size() == 1);
    CHECK(report.cuts[0].find("cut_w1_0:") != std::string::npos);
    CHECK(report.cuts[0].find("<= 2") != std::string::npos);
  }
}
