#include "tripprice/supply.hpp"

#include <cmath>
#include <limits>

namespace tripprice {

namespace {

double mode_speed(const Scenario& s, int link, int mode) {
  const auto& l = s.links[link];
  auto it = l.speed_kmh.find(s.modes[mode].id);
  if (it == l.speed_kmh.end())
    throw InputError("link " + l.id() + " does not allow mode " + s.modes[mode].id);
  return it->second;
}

double wait_time(const Scenario& s, int link, int mode) {
  const auto& l = s.links[link];
  auto it = l.wait_h.find(s.modes[mode].id);
  return it == l.wait_h.end() ? 0.0 : it->second;
}

}  // namespace

double travel_time(const Scenario& s, int link, int mode, double flow_veh_h) {
  if (flow_veh_h < 0) throw InputError("negative flow on link " + s.links[link].id());
  if (flow_veh_h < std::numeric_limits<double>::epsilon()) flow_veh_h = 0.0;
  const auto& l = s.links[link];
  double t0 = l.length_km / mode_speed(s, link, mode);
  if (!s.modes[mode].congests || !l.capacity_veh_h || l.bpr_alpha == 0.0) return t0;
  return t0 * (1.0 + l.bpr_alpha * std::pow(flow_veh_h / *l.capacity_veh_h, l.bpr_beta));
}

double sec_ice(double v_kmh) {
  return 0.136 + 7.04e-6 * v_kmh * v_kmh - 1.42e-3 * v_kmh;
}

double sec_ice_vertex_kmh() { return 1.42e-3 / (2.0 * 7.04e-6); }

double specific_energy(const Scenario& s, int mode, int /*user_class*/, double v_kmh) {
  const auto& m = s.modes[mode];
  switch (m.consumption) {
    case ConsumptionKind::ice:
      if (v_kmh <= 0) throw InputError("nonpositive speed for ICE consumption");
      return sec_ice(v_kmh);
    case ConsumptionKind::constant:
      return m.consumption_rate;
    case ConsumptionKind::none:
      return 0.0;
  }
  return 0.0;
}

LinkCostBreakdown link_cost_breakdown(const Scenario& s, int link, int user_class, int mode,
                                      double flow_veh_h) {
  const auto& l = s.links[link];
  const auto& m = s.modes[mode];
  const auto& q = s.classes[user_class];
  LinkCostBreakdown b;
  b.tt_h = travel_time(s, link, mode, flow_veh_h);
  b.wt_h = wait_time(s, link, mode);
  // average speed after congestion, v = l / TT
  double v = l.length_km / b.tt_h;
  b.sec = specific_energy(s, mode, user_class, v);
  b.mc_eur = m.user_pays_energy ? q.zeta(m.id) * b.sec * l.length_km : 0.0;
  b.gc_eur = m.beta_tt * (q.vot_eur_h * b.tt_h + q.vowt_eur_h * b.wt_h) + b.mc_eur;
  return b;
}

double monetary_cost(const Scenario& s, int link, int user_class, int mode, double flow_veh_h) {
  return link_cost_breakdown(s, link, user_class, mode, flow_veh_h).mc_eur;
}

double generalized_link_cost(const Scenario& s, int link, int user_class, int mode,
                             double flow_veh_h) {
  return link_cost_breakdown(s, link, user_class, mode, flow_veh_h).gc_eur;
}

LinkCostTable compute_link_costs(const Scenario& s, std::span<const double> congesting_flow) {
  if (congesting_flow.size() != s.links.size())
    throw InputError("link flow dimension mismatch");
  LinkCostTable t;
  const std::size_t M = s.modes.size(), A = s.links.size(), Q = s.classes.size();
  t.tt.assign(M, std::vector<double>(A, std::numeric_limits<double>::quiet_NaN()));
  t.gc.assign(Q * M, std::vector<double>(A, std::numeric_limits<double>::quiet_NaN()));

  for (std::size_t a = 0; a < A; ++a) {
    const auto& l = s.links[a];
    for (std::size_t m = 0; m < M; ++m) {
      if (!l.allows(s.modes[m].id)) continue;
      double tt = travel_time(s, static_cast<int>(a), static_cast<int>(m), congesting_flow[a]);
      t.tt[m][a] = tt;
      double wt = wait_time(s, static_cast<int>(a), static_cast<int>(m));
      double v = l.length_km / tt;
      double sec = specific_energy(s, static_cast<int>(m), 0, v);
      for (std::size_t q = 0; q < Q; ++q) {
        const auto& cls = s.classes[q];
        double mc =
            s.modes[m].user_pays_energy ? cls.zeta(s.modes[m].id) * sec * l.length_km : 0.0;
        t.gc[q * M + m][a] =
            s.modes[m].beta_tt * (cls.vot_eur_h * tt + cls.vowt_eur_h * wt) + mc;
      }
    }
  }
  return t;
}

PathCosts path_costs(const Scenario& s, int user_class, std::span<const double> congesting_flow,
                     std::span<const double> prices) {
  if (!prices.empty() && prices.size() != s.paths.size())
    throw InputError("price vector dimension mismatch");
  LinkCostTable t = compute_link_costs(s, congesting_flow);
  PathCosts pc;
  pc.additive.assign(s.paths.size(), 0.0);
  pc.non_additive.assign(s.paths.size(), 0.0);
  pc.total.assign(s.paths.size(), 0.0);
  for (std::size_t k = 0; k < s.paths.size(); ++k) {
    const auto& cost = t.cost(s, user_class, s.paths[k].mode);
    for (int a : s.paths[k].links) pc.additive[k] += cost[a];
    pc.non_additive[k] = s.params.fare_car_km * s.path_tolled_km[k] + s.path_flat_fare[k];
    pc.total[k] = pc.additive[k] + pc.non_additive[k] + (prices.empty() ? 0.0 : prices[k]);
  }
  return pc;
}

bool has_nonmonotone_cost_region(const Scenario& s) {
  for (std::size_t a = 0; a < s.links.size(); ++a) {
    const auto& l = s.links[a];
    if (!l.capacity_veh_h || l.bpr_alpha == 0.0) continue;
    for (std::size_t m = 0; m < s.modes.size(); ++m) {
      if (!s.modes[m].congests || !l.allows(s.modes[m].id)) continue;
      double prev = generalized_link_cost(s, static_cast<int>(a), 0, static_cast<int>(m), 0.0);
      for (int i = 1; i <= 60; ++i) {
        double f = *l.capacity_veh_h * 1.5 * i / 60.0;
        double c = generalized_link_cost(s, static_cast<int>(a), 0, static_cast<int>(m), f);
        if (c < prev - 1e-12) return true;
        prev = c;
      }
    }
  }
  return false;
}

}  // namespace tripprice
