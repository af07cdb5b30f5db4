#include <cmath>

#include "doctest.h"
#include "tripprice/supply.hpp"

using namespace tripprice;

namespace {
Scenario nd() { return builtin_scenario("nd-multimodal"); }
}  // namespace

TEST_CASE("bpr travel times") {
  Scenario s = nd();
  int b1 = s.link_index("B", "1");
  int car = s.mode_index("car");
  CHECK(travel_time(s, b1, car, 0.0) == doctest::Approx(0.025));
  CHECK(travel_time(s, b1, car, 3600.0) == doctest::Approx(0.02875));
  int a2 = s.link_index("A", "2");
  CHECK(travel_time(s, a2, car, 2400.0) == doctest::Approx(0.06));
  // uncongested modes ride at free-flow speed regardless of car flow
  int metro = s.mode_index("metro");
  CHECK(travel_time(s, a2, metro, 2400.0) == doctest::Approx(1.0 / 5.0));
  CHECK_THROWS_AS(travel_time(s, b1, car, -1.0), InputError);
}

TEST_CASE("travel time is nondecreasing and convex on congested links") {
  Scenario s = nd();
  int car = s.mode_index("car");
  for (const char* ref : {"B-1", "A-2", "B-2"}) {
    int a = resolve_link_ref(s, ref);
    double cap = *s.links[a].capacity_veh_h;
    double prev = travel_time(s, a, car, 0.0);
    double prev_diff = 0.0;
    for (int i = 1; i <= 40; ++i) {
      double f = cap * 1.5 * i / 40.0;
      double t = travel_time(s, a, car, f);
      double diff = t - prev;
      CHECK(diff >= -1e-15);
      CHECK(diff >= prev_diff - 1e-12);  // convexity: increments grow
      prev = t;
      prev_diff = diff;
    }
  }
}

TEST_CASE("ice consumption curve") {
  CHECK(sec_ice(50.0) == doctest::Approx(0.0826));
  CHECK(sec_ice(120.0) == doctest::Approx(0.066976));
  // analytic vertex and positivity on (0, 200]
  double v_star = sec_ice_vertex_kmh();
  CHECK(v_star == doctest::Approx(100.8523).epsilon(1e-4));
  CHECK(sec_ice(v_star) < sec_ice(v_star - 1.0));
  CHECK(sec_ice(v_star) < sec_ice(v_star + 1.0));
  for (int i = 1; i <= 200; ++i) CHECK(sec_ice(i) > 0.0);

  Scenario s = nd();
  CHECK(specific_energy(s, s.mode_index("ebike"), 0, 12.0) == doctest::Approx(0.10));
  CHECK(specific_energy(s, s.mode_index("metro"), 0, 70.0) == doctest::Approx(0.08));
  CHECK_THROWS_AS(specific_energy(s, s.mode_index("car"), 0, 0.0), InputError);
}

TEST_CASE("monetary link costs") {
  Scenario s = nd();
  int car = s.mode_index("car");
  int b1 = s.link_index("B", "1");
  CHECK(monetary_cost(s, b1, 0, car, 0.0) == doctest::Approx(1.60 * sec_ice(120.0) * 3.0));
  CHECK(monetary_cost(s, b1, 0, car, 0.0) == doctest::Approx(0.3215).epsilon(1e-3));
  // metro energy never reaches the user
  int line = s.link_index("10", "11");
  CHECK(monetary_cost(s, line, 0, s.mode_index("metro"), 500.0) == 0.0);
  int a2 = s.link_index("A", "2");
  CHECK(monetary_cost(s, a2, 0, s.mode_index("ebike"), 0.0) == doctest::Approx(0.025));
}

TEST_CASE("generalized link cost combines time, waiting and money") {
  Scenario s = nd();
  int car = s.mode_index("car");
  int b1 = s.link_index("B", "1");
  double mc = 1.60 * sec_ice(120.0) * 3.0;
  CHECK(generalized_link_cost(s, b1, 0, car, 0.0) == doctest::Approx(1.0 * (5.0 * 0.025) + mc));
  CHECK(generalized_link_cost(s, b1, 1, car, 0.0) == doctest::Approx(10.0 * 0.025 + mc));

  // the metro boarding link carries the waiting term beta_tt * VOWT * WT
  int line = s.link_index("10", "11");
  auto bd = link_cost_breakdown(s, line, 0, s.mode_index("metro"), 0.0);
  CHECK(bd.wt_h == doctest::Approx(0.067));
  double wait_term = 1.5 * (10.0 * 0.067);
  CHECK(wait_term == doctest::Approx(1.005));
  CHECK(bd.gc_eur == doctest::Approx(1.5 * (5.0 * (4.0 / 70.0)) + wait_term));
  // c^q recomposes from its parts
  CHECK(bd.gc_eur ==
        doctest::Approx(1.5 * (5.0 * bd.tt_h + 10.0 * bd.wt_h) + bd.mc_eur).epsilon(1e-12));
}

TEST_CASE("generalized cost strictly increases with flow at urban speeds") {
  Scenario s = nd();
  int car = s.mode_index("car");
  for (const char* ref : {"A-2", "B-2", "3-4"}) {  // 50 and 30 km/h links
    int a = resolve_link_ref(s, ref);
    double cap = *s.links[a].capacity_veh_h;
    double prev = generalized_link_cost(s, a, 0, car, 0.0);
    for (int i = 1; i <= 40; ++i) {
      double c = generalized_link_cost(s, a, 0, car, cap * 1.5 * i / 40.0);
      CHECK(c > prev);
      prev = c;
    }
  }
  // the 120 km/h freeway sits in the non-monotone consumption region
  CHECK(has_nonmonotone_cost_region(s));
}

TEST_CASE("path costs: additive, fares, prices") {
  Scenario s = nd();
  std::vector<double> zero_flow(s.links.size(), 0.0);

  SUBCASE("zero flows and zero prices give free-flow costs") {
    Scenario t = builtin_scenario("two-link");
    std::vector<double> zf(t.links.size(), 0.0);
    auto pc = path_costs(t, 0, zf, {});
    CHECK(pc.total[0] == doctest::Approx(10.0));
    CHECK(pc.total[1] == doctest::Approx(15.0));
  }
  SUBCASE("metro path carries its flat fare non-additively") {
    auto pc = path_costs(s, 0, zero_flow, {});
    int k28 = s.path_index_by_id(28);
    CHECK(pc.non_additive[k28] == doctest::Approx(2.0));
    CHECK(pc.total[k28] == doctest::Approx(pc.additive[k28] + 2.0));
  }
  SUBCASE("highway fare accrues per tolled km") {
    auto pc = path_costs(s, 0, zero_flow, {});
    int k6 = s.path_index_by_id(6);  // 8 tolled km of B,1 and 1,5
    CHECK(pc.non_additive[k6] == doctest::Approx(0.08 * 8.0));
  }
  SUBCASE("price additivity is exact") {
    std::vector<double> pi(s.paths.size(), 0.0);
    int k1 = s.path_index_by_id(1);
    pi[k1] = 7.5;
    auto with = path_costs(s, 0, zero_flow, pi);
    auto without = path_costs(s, 0, zero_flow, {});
    for (std::size_t k = 0; k < s.paths.size(); ++k)
      CHECK(with.total[k] - without.total[k] == pi[k]);
  }
}
