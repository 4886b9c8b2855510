#include <doctest.h>

#include <random>

#include "support/builders.hpp"
#include "vrptd/pd.hpp"
#include "vrptd/route.hpp"

using namespace vrptd;
using namespace vrptd::testing;

namespace {

// 1x5 corridor, constant 60 s / 100 m arcs. Vertex v sits at x = 100 v.
Problem corridor_problem() {
  Problem p = problem_on_graph(grid_graph(5, 1));
  p.workers.push_back(make_worker(p, 1, 0, 28800.0, 57600.0));
  return p;
}

}  // namespace

TEST_CASE("pd graph arc rule") {
  Problem p = corridor_problem();
  Request r1 = make_request(p, 1, 1, 3, 30000.0);

  SUBCASE("one worker, one request: exactly s->p, p->d, d->e") {
    PDGraph g = build_pd_graph({r1}, p.workers);
    CHECK(g.nodes.size() == 4);
    REQUIRE(g.arcs.size() == 3);
    CHECK(g.arcs[0] == std::pair<int, int>{g.start_node(1), g.pickup_node(1)});
    CHECK(g.arcs[1] == std::pair<int, int>{g.pickup_node(1), g.delivery_node(1)});
    CHECK(g.arcs[2] == std::pair<int, int>{g.delivery_node(1), g.end_node(1)});
  }
  SUBCASE("no requests: no arcs at all") {
    PDGraph g = build_pd_graph({}, p.workers);
    CHECK(g.nodes.size() == 2);
    CHECK(g.arcs.empty());
  }
  SUBCASE("two requests, one worker: 14 arcs") {
    Request r2 = make_request(p, 2, 2, 4, 31000.0);
    PDGraph g = build_pd_graph({r1, r2}, p.workers);
    // 2 start->pickup + (4*3 complete - 2 delivery->own-pickup) + 2
    // delivery->end.
    CHECK(g.arcs.size() == 14);
    for (const auto& [u, v] : g.arcs) {
      bool self_del_to_pick = g.nodes[u].kind == NodeKind::Delivery &&
                              g.nodes[v].kind == NodeKind::Pickup &&
                              g.nodes[u].owner == g.nodes[v].owner;
      CHECK_FALSE(self_del_to_pick);
    }
  }
}

TEST_CASE("empty subtour realization") {
  Problem p = corridor_problem();
  Route route = realize_route(p, empty_subtour(p.workers[0]), LegTag::Distance);
  CHECK(route.size() == 2);
  // Home at vertex 0 both ends: zero-cost leg, load identically zero.
  CHECK(route.cost_length_m == doctest::Approx(0.0));
  CHECK(route.cost_time_s == doctest::Approx(0.0));
  CHECK(route.labels[0].departure == doctest::Approx(28800.0));
  CHECK(route.labels[1].load == doctest::Approx(0.0));
  CHECK(route.feasible);
}

TEST_CASE("waiting at an early arrival") {
  Problem p = corridor_problem();
  // Pickup next door; the worker arrives at 28860, far before ep = 30000.
  Request r = make_request(p, 1, 1, 3, 30000.0);
  p.requests.emplace(1, r);
  Subtour st = empty_subtour(p.workers[0]);
  st.nodes.insert(st.nodes.begin() + 1, make_pickup_node(r));
  st.nodes.insert(st.nodes.begin() + 2, make_delivery_node(r));
  Route route = realize_route(p, st, LegTag::Distance);
  CHECK(route.labels[1].arrival == doctest::Approx(28860.0));
  CHECK(route.labels[1].waiting == doctest::Approx(30000.0 - 28860.0));
  CHECK(route.labels[1].departure == doctest::Approx(30000.0 + 90.0));
  CHECK(route.labels[1].load == doctest::Approx(1.0));
  CHECK(route.labels[2].load == doctest::Approx(0.0));
  CHECK(route.feasible);
}

TEST_CASE("hand-computed labels for a two-request subtour") {
  Problem p = corridor_problem();
  Request r1 = make_request(p, 1, 1, 3, 28800.0, 2400.0, 60.0);
  Request r2 = make_request(p, 2, 2, 4, 28800.0, 3000.0, 30.0);
  p.requests.emplace(1, r1);
  p.requests.emplace(2, r2);
  Subtour st = empty_subtour(p.workers[0]);
  st.nodes = {st.nodes[0], make_pickup_node(r1), make_pickup_node(r2),
              make_delivery_node(r1), make_delivery_node(r2), st.nodes[1]};
  Route route = realize_route(p, st, LegTag::Distance);
  // Fold by hand: depart 28800 at v0; 60 s per hop.
  // p1 at vertex 1: arrive 28860, depart 28920 (60 s service).
  CHECK(route.labels[1].arrival == doctest::Approx(28860.0));
  CHECK(route.labels[1].departure == doctest::Approx(28920.0));
  // p2 at vertex 2: arrive 28980, depart 29010 (30 s service).
  CHECK(route.labels[2].arrival == doctest::Approx(28980.0));
  CHECK(route.labels[2].departure == doctest::Approx(29010.0));
  // d1 at vertex 3: arrive 29070, depart 29130 (60 s service).
  CHECK(route.labels[3].arrival == doctest::Approx(29070.0));
  CHECK(route.labels[3].departure == doctest::Approx(29130.0));
  // d2 at vertex 4: arrive 29190, depart 29220.
  CHECK(route.labels[4].arrival == doctest::Approx(29190.0));
  CHECK(route.labels[4].departure == doctest::Approx(29220.0));
  // back home: 4 hops, arrive 29460.
  CHECK(route.labels[5].arrival == doctest::Approx(29460.0));
  CHECK(route.cost_length_m == doctest::Approx(100.0 * (1 + 1 + 1 + 1 + 4)));
  // Loads telescope 0 -> 1 -> 2 -> 1 -> 0 -> 0.
  CHECK(route.labels[2].load == doctest::Approx(2.0));
  CHECK(route.labels[4].load == doctest::Approx(0.0));
  CHECK(route.feasible);
}

TEST_CASE("relabel_suffix equals a full realization") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 25; ++trial) {
    Problem p = random_problem(rng, 8, 1, 3);
    std::vector<Request> reqs = requests_in_release_order(p);
    Subtour st = empty_subtour(p.workers[0]);
    // Nested insertion p1 p2 d2 d1 p3 d3.
    st.nodes = {st.nodes[0],
                make_pickup_node(reqs[0]),
                make_pickup_node(reqs[1]),
                make_delivery_node(reqs[1]),
                make_delivery_node(reqs[0]),
                make_pickup_node(reqs[2]),
                make_delivery_node(reqs[2]),
                st.nodes[1]};
    Route full = realize_route(p, st, LegTag::Time);
    SUBCASE("") {}
    for (int anchor = 0; anchor < full.size(); ++anchor) {
      Route copy = full;
      relabel_suffix(p, copy, anchor);
      for (int k = 0; k < full.size(); ++k) {
        CHECK(copy.labels[k].arrival ==
              doctest::Approx(full.labels[k].arrival).epsilon(1e-12));
        CHECK(copy.labels[k].load ==
              doctest::Approx(full.labels[k].load).epsilon(1e-12));
      }
      CHECK(copy.cost_length_m == doctest::Approx(full.cost_length_m));
      CHECK(copy.cost_time_s == doctest::Approx(full.cost_time_s));
    }
  }
}

TEST_CASE("check_feasible reports each violation kind") {
  Problem p = corridor_problem();

  SUBCASE("inclusive deadline boundary") {
    // Tune the window so arrival == ld exactly: pickup at 1, delivery at 3,
    // ep = 28800 (no waiting: worker arrives 28860 > ep? no -- arrives 28860,
    // ep 28800, so service starts on arrival), ps = 60 -> depart 28920,
    // arrive delivery at 29040.
    Request r = make_request(p, 1, 1, 3, 28800.0, 29040.0 - 28800.0, 60.0);
    p.requests.emplace(1, r);
    Subtour st = empty_subtour(p.workers[0]);
    st.nodes = {st.nodes[0], make_pickup_node(r), make_delivery_node(r),
                st.nodes[1]};
    Route route = realize_route(p, st, LegTag::Distance);
    CHECK(route.labels[2].arrival == doctest::Approx(r.latest_delivery_s));
    CHECK(check_feasible(p, route).empty());
  }

  SUBCASE("capacity violation at the fourth overlapping pickup") {
    std::vector<Request> rs;
    for (int k = 0; k < 4; ++k) {
      Request r = make_request(p, k + 1, 1 + (k % 3), 4, 28800.0, 20000.0, 10.0);
      rs.push_back(r);
      p.requests.emplace(r.id, r);
    }
    Subtour st = empty_subtour(p.workers[0]);
    st.nodes = {st.nodes[0]};
    for (const auto& r : rs) st.nodes.push_back(make_pickup_node(r));
    for (const auto& r : rs) st.nodes.push_back(make_delivery_node(r));
    st.nodes.push_back(make_shift_end_node(p.workers[0]));
    Route route = realize_route(p, st, LegTag::Distance);
    auto violations = check_feasible(p, route);
    REQUIRE_FALSE(violations.empty());
    CHECK(violations.front().kind == Violation::Kind::Capacity);
    CHECK(violations.front().node_index == 4);  // the fourth pickup
    CHECK_FALSE(route.feasible);
  }

  SUBCASE("missed shift end") {
    Request r = make_request(p, 1, 1, 3, 57500.0, 2400.0, 60.0);
    p.requests.emplace(1, r);
    Subtour st = empty_subtour(p.workers[0]);
    st.nodes = {st.nodes[0], make_pickup_node(r), make_delivery_node(r),
                st.nodes[1]};
    Route route = realize_route(p, st, LegTag::Distance);
    auto violations = check_feasible(p, route);
    REQUIRE_FALSE(violations.empty());
    CHECK(violations.back().kind == Violation::Kind::ShiftEnd);
  }
}

TEST_CASE("route totals identity") {
  std::mt19937_64 rng(211);
  for (int trial = 0; trial < 20; ++trial) {
    Problem p = random_problem(rng, 9, 1, 3);
    auto reqs = requests_in_release_order(p);
    Subtour st = empty_subtour(p.workers[0]);
    st.nodes = {st.nodes[0]};
    for (const auto& r : reqs) st.nodes.push_back(make_pickup_node(r));
    for (const auto& r : reqs) st.nodes.push_back(make_delivery_node(r));
    st.nodes.push_back(make_shift_end_node(p.workers[0]));
    Route route = realize_route(p, st, LegTag::Time);
    // Cost_tau telescopes: a(last) - d(first) minus service and waiting
    // spent at intermediate nodes.
    double spent = 0.0;
    for (int k = 1; k + 1 < route.size(); ++k) {
      spent += route.labels[k].departure - route.labels[k].arrival;
    }
    double telescoped = route.labels[route.size() - 1].arrival -
                        route.labels[0].departure - spent;
    CHECK(route.cost_time_s == doctest::Approx(telescoped).epsilon(1e-9));
  }
}

TEST_CASE("deleting a request never delays the remaining nodes") {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 25; ++trial) {
    Problem p = random_problem(rng, 8, 1, 3);
    auto reqs = requests_in_release_order(p);
    Subtour st = empty_subtour(p.workers[0]);
    st.nodes = {st.nodes[0],
                make_pickup_node(reqs[0]),
                make_pickup_node(reqs[1]),
                make_delivery_node(reqs[0]),
                make_pickup_node(reqs[2]),
                make_delivery_node(reqs[1]),
                make_delivery_node(reqs[2]),
                st.nodes[1]};
    Route route = realize_route(p, st, LegTag::Time);

    Subtour cut = st;
    cut.nodes.erase(cut.nodes.begin() + 5);  // d(r2)
    cut.nodes.erase(cut.nodes.begin() + 2);  // p(r2)
    Route shorter = realize_route(p, cut, LegTag::Time);
    std::size_t at = 0;
    for (int k = 0; k < route.size(); ++k) {
      const PDNode& node = route.subtour.nodes[k];
      if (node.is_service() && node.owner == reqs[1].id) continue;
      CHECK(shorter.labels[at].arrival <= route.labels[k].arrival + 1e-9);
      ++at;
    }
  }
}

TEST_CASE("subtour validation rejects malformed sequences") {
  Problem p = corridor_problem();
  Request r = make_request(p, 1, 1, 3, 30000.0);
  p.requests.emplace(1, r);
  Subtour st = empty_subtour(p.workers[0]);

  SUBCASE("delivery before pickup") {
    st.nodes.insert(st.nodes.begin() + 1, make_delivery_node(r));
    CHECK_THROWS_AS(validate_subtour(p, st), std::invalid_argument);
  }
  SUBCASE("real pickup without delivery") {
    st.nodes.insert(st.nodes.begin() + 1, make_pickup_node(r));
    CHECK_THROWS_AS(validate_subtour(p, st), std::invalid_argument);
  }
  SUBCASE("virtual pickup may stand alone") {
    Request v = r;
    v.id = 2;
    v.is_virtual = true;
    p.requests.emplace(2, v);
    st.nodes.insert(st.nodes.begin() + 1, make_pickup_node(v));
    CHECK_NOTHROW(validate_subtour(p, st));
  }
}
