#pragma once

#include <span>
#include <vector>

#include "tripprice/netmodel.hpp"

namespace tripprice {

struct LinkCostBreakdown {
  double tt_h = 0.0;      // travel time
  double wt_h = 0.0;      // waiting time
  double sec = 0.0;       // specific energy (l/veh-km or kWh/pax-km)
  double mc_eur = 0.0;    // monetary cost per traveller/vehicle
  double gc_eur = 0.0;    // generalized cost c^q
};

/// BPR travel time for `mode` on link `a` under congesting flow `flow`.
/// Uncongested links (or modes outside the BPR regime) return l/v.
double travel_time(const Scenario& s, int link, int mode, double flow_veh_h);

/// ICE specific consumption curve, l/veh-km, v in km/h.
double sec_ice(double v_kmh);
/// Speed at which sec_ice attains its minimum.
double sec_ice_vertex_kmh();

/// Specific energy for (mode, class) at average speed v.
double specific_energy(const Scenario& s, int mode, int user_class, double v_kmh);

/// Monetary cost per traveller (per vehicle for car-like modes) of
/// traversing `link` at the given congesting flow.
double monetary_cost(const Scenario& s, int link, int user_class, int mode, double flow_veh_h);

LinkCostBreakdown link_cost_breakdown(const Scenario& s, int link, int user_class, int mode,
                                      double flow_veh_h);

/// Generalized link cost: beta_tt * (VOT*TT + VOWT*WT) + MC.
double generalized_link_cost(const Scenario& s, int link, int user_class, int mode,
                             double flow_veh_h);

/// All link costs for one flow pattern, evaluated once per SUE iteration.
struct LinkCostTable {
  // [mode][link]: travel time (NaN where the mode is not allowed)
  std::vector<std::vector<double>> tt;
  // [class*modes+mode][link]: generalized cost c^{q,m}
  std::vector<std::vector<double>> gc;

  const std::vector<double>& cost(const Scenario& s, int user_class, int mode) const {
    return gc[static_cast<std::size_t>(user_class) * s.modes.size() + mode];
  }
};

LinkCostTable compute_link_costs(const Scenario& s, std::span<const double> congesting_flow);

struct PathCosts {
  std::vector<double> additive;      // Delta^T c^q over the path's mode
  std::vector<double> non_additive;  // fares
  std::vector<double> total;         // additive + non_additive + price
};

/// Per-path total cost g = g_ad + g_nad + pi for one user class.
/// `prices` is indexed over all paths (use zeros for the no-pricing case).
PathCosts path_costs(const Scenario& s, int user_class, std::span<const double> congesting_flow,
                     std::span<const double> prices);

/// True if some congested car link's generalized cost is locally decreasing
/// in flow (possible when free-flow speed exceeds the SEC minimum).
bool has_nonmonotone_cost_region(const Scenario& s);

}  // namespace tripprice
