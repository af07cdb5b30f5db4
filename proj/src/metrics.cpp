#include "tripprice/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tripprice {

namespace {

double rel_delta(double value, double baseline) {
  return (value - baseline) / std::fabs(baseline);
}

}  // namespace

void traffic_metrics(const Scenario& s, const EquilibriumResult& r, MetricsReport* out) {
  const std::size_t Q = s.classes.size(), M = s.modes.size(), A = s.links.size();
  LinkCostTable costs = compute_link_costs(s, r.link_flow_congesting);

  out->tts_veh_h = out->tts_pax_h = out->tgc_eur = out->tec_kwh = 0.0;
  out->traffic_pax_km.clear();
  for (const auto& m : s.modes) out->traffic_pax_km[m.id] = 0.0;

  for (std::size_t q = 0; q < Q; ++q) {
    for (std::size_t m = 0; m < M; ++m) {
      const auto& f = r.link_flow_qm[q * M + m];
      double eta = s.classes[q].eta(s.modes[m].id);
      for (std::size_t a = 0; a < A; ++a) {
        if (f[a] <= 0.0) continue;
        double tt = costs.tt[m][a];
        out->tts_veh_h += f[a] * tt;
        out->tts_pax_h += f[a] * eta * tt;
        out->tgc_eur += f[a] * costs.cost(s, static_cast<int>(q), static_cast<int>(m))[a];
        out->traffic_pax_km[s.modes[m].id] += f[a] * eta * s.links[a].length_km;
        // energy: ICE in liters (converted), constant-rate modes per pax-km
        switch (s.modes[m].consumption) {
          case ConsumptionKind::ice: {
            double v = s.links[a].length_km / tt;
            out->tec_kwh += f[a] * sec_ice(v) * s.links[a].length_km * s.params.kwh_per_liter;
            break;
          }
          case ConsumptionKind::constant:
            // in-vehicle energy only: metro access/egress walking consumes none
            if (s.modes[m].id != "metro" || s.links[a].category == LinkCategory::metro)
              out->tec_kwh += f[a] * eta * s.modes[m].consumption_rate * s.links[a].length_km;
            break;
          case ConsumptionKind::none:
            break;
        }
      }
    }
  }

  out->traffic_pax_km_total = 0.0;
  double alt_pax_km = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    out->traffic_pax_km_total += out->traffic_pax_km[s.modes[m].id];
    if (!s.modes[m].congests) alt_pax_km += out->traffic_pax_km[s.modes[m].id];
  }

  // alternative-mode share of passengers
  double alt_pax = 0.0, tot_pax = 0.0;
  auto pax = r.pax_path_flow(s);
  for (std::size_t k = 0; k < s.paths.size(); ++k) {
    tot_pax += pax[k];
    if (!s.modes[s.paths[k].mode].congests) alt_pax += pax[k];
  }
  out->alt_mode_split = tot_pax > 0 ? alt_pax / tot_pax : 0.0;

  // unweighted mean f/cap over congestible car links
  double sum = 0.0;
  int n = 0;
  for (std::size_t a = 0; a < A; ++a) {
    if (!s.links[a].capacity_veh_h) continue;
    bool car_link = false;
    for (std::size_t m = 0; m < M; ++m)
      if (s.modes[m].congests && s.links[a].allows(s.modes[m].id)) car_link = true;
    if (!car_link) continue;
    sum += r.link_flow_congesting[a] / *s.links[a].capacity_veh_h;
    ++n;
  }
  out->avg_flow_capacity = n ? sum / n : 0.0;

  out->total_demand_pax = s.total_demand();
  out->avg_min_per_pax =
      out->total_demand_pax > 0 ? out->tts_pax_h * 60.0 / out->total_demand_pax : 0.0;
}

void acceptance_equity(const Scenario& s, const EquilibriumResult& r, MetricsReport* out) {
  const std::size_t Q = s.classes.size(), W = s.ods.size();
  out->ua_eur = 0.0;
  out->unit_satisfaction.assign(Q, std::vector<double>(W, 0.0));

  // normalization: mean path length (km) over all alternatives of the OD
  std::vector<double> mean_len(W, 0.0);
  for (std::size_t w = 0; w < W; ++w) {
    const auto& kw = s.paths_by_od[w];
    for (int k : kw) mean_len[w] += s.path_length_km[k];
    mean_len[w] /= static_cast<double>(kw.size());
  }

  out->mapd_defined = true;
  for (std::size_t q = 0; q < Q; ++q)
    for (std::size_t w = 0; w < W; ++w) {
      out->ua_eur += r.satisfaction[q][w];
      double su = r.satisfaction[q][w] / mean_len[w];
      out->unit_satisfaction[q][w] = su;
      if (su == 0.0) out->mapd_defined = false;
    }
  out->pc_eur = -out->ua_eur;

  if (!out->mapd_defined) {
    out->mapd_q = out->mapd_w = out->mapd = std::numeric_limits<double>::quiet_NaN();
    return;
  }

  // spatial: class-mean unit satisfaction per OD
  std::vector<double> s_w(W, 0.0);
  for (std::size_t w = 0; w < W; ++w) {
    for (std::size_t q = 0; q < Q; ++q) s_w[w] += out->unit_satisfaction[q][w];
    s_w[w] /= static_cast<double>(Q);
  }
  double mean_w = 0.0;
  for (double v : s_w) mean_w += v;
  mean_w /= static_cast<double>(W);
  out->mapd_w = 0.0;
  for (double v : s_w) out->mapd_w += std::fabs((v - mean_w) / v);
  out->mapd_w /= static_cast<double>(W);

  // social: OD-mean unit satisfaction per class
  std::vector<double> s_q(Q, 0.0);
  for (std::size_t q = 0; q < Q; ++q) {
    for (std::size_t w = 0; w < W; ++w) s_q[q] += out->unit_satisfaction[q][w];
    s_q[q] /= static_cast<double>(W);
  }
  double mean_q = 0.0;
  for (double v : s_q) mean_q += v;
  mean_q /= static_cast<double>(Q);
  out->mapd_q = 0.0;
  for (double v : s_q) out->mapd_q += std::fabs((v - mean_q) / v);
  out->mapd_q /= static_cast<double>(Q);

  // combined: per-OD deviation across classes
  out->mapd = 0.0;
  for (std::size_t w = 0; w < W; ++w) {
    double mean = 0.0;
    for (std::size_t q = 0; q < Q; ++q) mean += out->unit_satisfaction[q][w];
    mean /= static_cast<double>(Q);
    for (std::size_t q = 0; q < Q; ++q)
      out->mapd += std::fabs((out->unit_satisfaction[q][w] - mean) / out->unit_satisfaction[q][w]);
  }
  out->mapd /= static_cast<double>(Q * W);
}

RevenueBlock revenues(const Scenario& s, const EquilibriumResult& r,
                      std::span<const double> prices) {
  RevenueBlock rb;
  auto h = r.class_path_flow_total();
  if (!prices.empty()) {
    if (prices.size() != s.paths.size()) throw InputError("price vector dimension mismatch");
    for (std::size_t k = 0; k < s.paths.size(); ++k) {
      if (prices[k] > 0)
        rb.tolls_eur += h[k] * prices[k];
      else if (prices[k] < 0)
        rb.incentives_eur += h[k] * -prices[k];
    }
  }
  rb.net_eur = rb.tolls_eur - rb.incentives_eur;

  // highway fares accrue per passenger-km on tolled links; flat fares per pax
  auto pax = r.pax_path_flow(s);
  for (std::size_t k = 0; k < s.paths.size(); ++k) {
    rb.highway_eur += s.params.fare_car_km * s.path_tolled_km[k] * pax[k];
    rb.metro_fares_eur += s.path_flat_fare[k] * pax[k];
  }
  double d = s.total_demand();
  rb.per_pax_eur = d > 0 ? rb.net_eur / d : 0.0;
  return rb;
}

MetricsReport make_report(const Scenario& s, const EquilibriumResult& r,
                          std::span<const double> prices) {
  MetricsReport out;
  traffic_metrics(s, r, &out);
  acceptance_equity(s, r, &out);
  out.revenue = revenues(s, r, prices);
  out.converged = r.converged;
  out.iterations = r.iterations;
  out.residual = r.residual;
  return out;
}

ObjectiveDeltas objective_deltas(const MetricsReport& baseline, const MetricsReport& priced) {
  auto component = [](double value, double base, double* delta, bool* ok) {
    if (std::fabs(base) > 1e-12) {
      *delta = rel_delta(value, base);
      *ok = true;
    } else if (std::fabs(value - base) <= 1e-12) {
      *delta = 0.0;
      *ok = true;
    } else {
      *delta = 0.0;
      *ok = false;
    }
  };
  ObjectiveDeltas d;
  component(priced.tts_pax_h, baseline.tts_pax_h, &d.d_tts, &d.tts_ok);
  component(priced.tec_kwh, baseline.tec_kwh, &d.d_tec, &d.tec_ok);
  component(priced.pc_eur, baseline.pc_eur, &d.d_pc, &d.pc_ok);
  bool mapd_usable = baseline.mapd_defined && priced.mapd_defined;
  component(priced.mapd_q, baseline.mapd_q, &d.d_mapd_q, &d.mapd_q_ok);
  component(priced.mapd_w, baseline.mapd_w, &d.d_mapd_w, &d.mapd_w_ok);
  d.mapd_q_ok = d.mapd_q_ok && mapd_usable;
  d.mapd_w_ok = d.mapd_w_ok && mapd_usable;
  d.defined = d.tts_ok && d.tec_ok && d.pc_ok && d.mapd_q_ok && d.mapd_w_ok;
  return d;
}

std::vector<MetricRow> flatten(const MetricsReport& r, const MetricsReport* baseline) {
  std::vector<MetricRow> rows;
  auto push = [&](const std::string& key, double v, double b, bool delta_ok = true) {
    MetricRow row{key, v, std::nullopt};
    if (baseline && delta_ok && std::fabs(b) > 1e-12) row.delta = rel_delta(v, b);
    rows.push_back(std::move(row));
  };
  const MetricsReport& b = baseline ? *baseline : r;
  push("tts_pax_h", r.tts_pax_h, b.tts_pax_h);
  push("tts_veh_h", r.tts_veh_h, b.tts_veh_h);
  push("avg_travel_time_min_pax", r.avg_min_per_pax, b.avg_min_per_pax);
  push("tec_kwh", r.tec_kwh, b.tec_kwh);
  push("tgc_eur", r.tgc_eur, b.tgc_eur);
  push("ua_eur", r.ua_eur, b.ua_eur);
  push("pc_eur", r.pc_eur, b.pc_eur);
  push("mapd_q", r.mapd_q, b.mapd_q);
  push("mapd_w", r.mapd_w, b.mapd_w);
  push("mapd", r.mapd, b.mapd);
  push("traffic_kpax_km", r.traffic_pax_km_total / 1000.0, b.traffic_pax_km_total / 1000.0);
  for (const auto& [mode, v] : r.traffic_pax_km) {
    auto it = b.traffic_pax_km.find(mode);
    push("traffic_kpax_km." + mode, v / 1000.0,
         it == b.traffic_pax_km.end() ? 0.0 : it->second / 1000.0);
  }
  push("avg_flow_capacity", r.avg_flow_capacity, b.avg_flow_capacity);
  push("alt_mode_split", r.alt_mode_split, b.alt_mode_split);
  push("revenue_tolls_eur", r.revenue.tolls_eur, b.revenue.tolls_eur);
  push("revenue_incentives_eur", r.revenue.incentives_eur, b.revenue.incentives_eur);
  push("revenue_net_eur", r.revenue.net_eur, b.revenue.net_eur);
  push("revenue_highway_eur", r.revenue.highway_eur, b.revenue.highway_eur);
  push("revenue_metro_eur", r.revenue.metro_fares_eur, b.revenue.metro_fares_eur);
  push("revenue_per_pax_eur", r.revenue.per_pax_eur, b.revenue.per_pax_eur);
  return rows;
}

ParetoCheck pareto_check(const Scenario& s, const EquilibriumResult& priced,
                         const EquilibriumResult& baseline) {
  if (priced.link_flow_congesting.size() != s.links.size() ||
      baseline.link_flow_congesting.size() != s.links.size())
    throw InputError("pareto check: results do not match the scenario");
  LinkCostTable cp = compute_link_costs(s, priced.link_flow_congesting);
  LinkCostTable cb = compute_link_costs(s, baseline.link_flow_congesting);
  ParetoCheck out;
  out.ok.assign(s.classes.size(), std::vector<bool>(s.links.size(), true));
  for (std::size_t q = 0; q < s.classes.size(); ++q)
    for (std::size_t a = 0; a < s.links.size(); ++a) {
      bool ok = true;
      for (std::size_t m = 0; m < s.modes.size(); ++m) {
        if (!s.links[a].allows(s.modes[m].id)) continue;
        double vp = cp.cost(s, static_cast<int>(q), static_cast<int>(m))[a];
        double vb = cb.cost(s, static_cast<int>(q), static_cast<int>(m))[a];
        if (vp > vb + 1e-12) ok = false;
      }
      out.ok[q][a] = ok;
      if (!ok) out.all_ok = false;
    }
  return out;
}

}  // namespace tripprice
