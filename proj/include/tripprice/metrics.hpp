#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tripprice/equilibrium.hpp"

namespace tripprice {

struct RevenueBlock {
  double tolls_eur = 0.0;       // sum over positively priced paths of h_k * pi_k
  double incentives_eur = 0.0;  // sum over negatively priced paths of h_k * |pi_k|
  double net_eur = 0.0;
  double highway_eur = 0.0;     // fare_car_km * pax-km on tolled-highway links
  double metro_fares_eur = 0.0; // flat fares collected per passenger
  double per_pax_eur = 0.0;     // net / total passenger demand
};

struct MetricsReport {
  // traffic
  double tts_veh_h = 0.0;
  double tts_pax_h = 0.0;
  double avg_min_per_pax = 0.0;
  double tec_kwh = 0.0;
  double tgc_eur = 0.0;
  std::map<std::string, double> traffic_pax_km;  // by mode id
  double traffic_pax_km_total = 0.0;
  double avg_flow_capacity = 0.0;  // unweighted over car links with capacity
  double alt_mode_split = 0.0;     // pax share of non-congesting modes

  // acceptance and equity
  double ua_eur = 0.0;
  double pc_eur = 0.0;  // -UA
  double mapd_q = 0.0, mapd_w = 0.0, mapd = 0.0;
  bool mapd_defined = true;  // false if a unit satisfaction hit zero
  std::vector<std::vector<double>> unit_satisfaction;  // [class][od]

  // revenues
  RevenueBlock revenue;

  // solver diagnostics carried along for reporting
  bool converged = true;
  int iterations = 0;
  double residual = 0.0;
  double total_demand_pax = 0.0;
};

/// TTS/TEC/TGC/traffic/flow-capacity block.
void traffic_metrics(const Scenario& s, const EquilibriumResult& r, MetricsReport* out);
/// UA/PC and the MAPD equity measures.
void acceptance_equity(const Scenario& s, const EquilibriumResult& r, MetricsReport* out);
/// Pricing, highway and fare revenues.
RevenueBlock revenues(const Scenario& s, const EquilibriumResult& r,
                      std::span<const double> prices);

/// Full report; prices may be empty for the no-pricing case.
MetricsReport make_report(const Scenario& s, const EquilibriumResult& r,
                          std::span<const double> prices);

/// Relative deltas of the five objective components against a baseline,
/// using Delta x = (x - x0) / |x0|. A degenerate baseline value of zero
/// yields a zero delta when the priced value is also zero (single-class /
/// single-OD scenarios) and an undefined component otherwise.
struct ObjectiveDeltas {
  double d_tts = 0.0, d_tec = 0.0, d_pc = 0.0, d_mapd_q = 0.0, d_mapd_w = 0.0;
  bool tts_ok = true, tec_ok = true, pc_ok = true, mapd_q_ok = true, mapd_w_ok = true;
  bool defined = true;  // all five components usable
  double average() const { return (d_tts + d_tec + d_pc + d_mapd_q + d_mapd_w) / 5.0; }
};

ObjectiveDeltas objective_deltas(const MetricsReport& baseline, const MetricsReport& priced);

/// Flat (name, value, optional delta) rows used by the CSV writers; the row
/// set mirrors the performance tables.
struct MetricRow {
  std::string key;
  double value = 0.0;
  std::optional<double> delta;  // vs baseline, when one is given
};

std::vector<MetricRow> flatten(const MetricsReport& r, const MetricsReport* baseline = nullptr);

/// Per-class, per-link Pareto-improving check: c^q(priced) <= c^q(baseline)
/// link-wise (prices excluded from link costs).
struct ParetoCheck {
  std::vector<std::vector<bool>> ok;  // [class][link]
  bool all_ok = true;
};

ParetoCheck pareto_check(const Scenario& s, const EquilibriumResult& priced,
                         const EquilibriumResult& baseline);

}  // namespace tripprice
