#include "tripprice/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace tripprice {

std::string to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::none: return "none";
    case SchemeKind::trip: return "trip";
    case SchemeKind::road: return "road";
  }
  return "?";
}

SchemeKind scheme_from_string(const std::string& s) {
  if (s == "none") return SchemeKind::none;
  if (s == "trip") return SchemeKind::trip;
  if (s == "road") return SchemeKind::road;
  throw InputError("unknown scheme '" + s + "' (use trip or road)");
}

PriceVector PriceVector::zero(const Scenario& s) {
  PriceVector pv;
  pv.kind = SchemeKind::none;
  pv.pi.assign(s.paths.size(), 0.0);
  return pv;
}

namespace {
constexpr double kBoundTol = 1e-9;
}

PriceVector make_trip_prices(const Scenario& s, std::span<const double> unit_prices,
                             std::span<const int> priceable_paths, double lb, double ub) {
  if (unit_prices.size() != priceable_paths.size())
    throw InputError("trip prices: unit price per priceable path required");
  PriceVector pv;
  pv.kind = SchemeKind::trip;
  pv.lb = lb;
  pv.ub = ub;
  pv.pi.assign(s.paths.size(), 0.0);
  pv.unit.assign(s.paths.size(), 0.0);
  for (std::size_t i = 0; i < priceable_paths.size(); ++i) {
    int k = priceable_paths[i];
    double u = unit_prices[i];
    if (u < lb - kBoundTol || u > ub + kBoundTol)
      throw InputError("trip price " + format_number(u) + " of path " +
                       std::to_string(s.paths[k].id) + " violates bounds");
    pv.unit[k] = u;
    pv.pi[k] = s.path_length_km[k] * u;
  }
  return pv;
}

PriceVector road_to_path_prices(const Scenario& s, std::span<const double> link_unit_prices,
                                std::span<const int> priceable_links, double lb, double ub,
                                bool charge_all_modes) {
  if (link_unit_prices.size() != priceable_links.size())
    throw InputError("road prices: unit price per priceable link required");
  PriceVector pv;
  pv.kind = SchemeKind::road;
  pv.lb = lb;
  pv.ub = ub;
  pv.pi.assign(s.paths.size(), 0.0);
  pv.unit.assign(s.links.size(), 0.0);
  for (std::size_t i = 0; i < priceable_links.size(); ++i) {
    double u = link_unit_prices[i];
    if (u < lb - kBoundTol || u > ub + kBoundTol)
      throw InputError("road price " + format_number(u) + " of link " +
                       link_ref(s, priceable_links[i]) + " violates bounds");
    pv.unit[priceable_links[i]] = u;
  }
  // pi = Delta^T (l .* gamma')
  for (std::size_t k = 0; k < s.paths.size(); ++k) {
    if (!charge_all_modes && !s.modes[s.paths[k].mode].congests) continue;
    for (int a : s.paths[k].links) pv.pi[k] += s.links[a].length_km * pv.unit[a];
  }
  return pv;
}

ConstraintSlack revenue_feasibility(const Scenario& s, const EquilibriumResult& r,
                                    const PriceVector& prices, double b) {
  RevenueBlock rb = revenues(s, r, prices.pi);
  return {b - rb.net_eur, rb.tolls_eur - rb.incentives_eur};
}

void Weights::validate() const {
  for (double v : {eff, env, acc, equ_q, equ_w})
    if (v < 0) throw InputError("objective weights must be nonnegative");
  double sum = eff + env + acc + equ_q + equ_w;
  if (std::fabs(sum - 1.0) > 1e-9)
    throw InputError("objective weights sum to " + format_number(sum) + ", not 1");
}

Weights Weights::single(const std::string& objective) {
  Weights w;
  if (objective == "eff") w.eff = 1;
  else if (objective == "env") w.env = 1;
  else if (objective == "acpt") w.acc = 1;
  else if (objective == "sequ") w.equ_q = 1;
  else if (objective == "wequ") w.equ_w = 1;
  else throw InputError("unknown objective '" + objective + "'");
  return w;
}

Weights Weights::equal() { return {0.2, 0.2, 0.2, 0.2, 0.2}; }

Weights Weights::from_objective(const std::string& objective) {
  return objective == "all" ? equal() : single(objective);
}

PriceVector DesignProblem::prices_from_units(std::span<const double> units) const {
  if (scheme == SchemeKind::trip)
    return make_trip_prices(*scenario, units, priceable, lb, ub);
  if (scheme == SchemeKind::road)
    return road_to_path_prices(*scenario, units, priceable, lb, ub, first_best);
  PriceVector pv = PriceVector::zero(*scenario);
  return pv;
}

std::vector<int> priceable_elements(const Scenario& s, SchemeKind scheme, bool first_best) {
  std::vector<int> out;
  if (scheme == SchemeKind::trip) {
    for (std::size_t k = 0; k < s.paths.size(); ++k)
      if (first_best || s.modes[s.paths[k].mode].congests) out.push_back(static_cast<int>(k));
  } else if (scheme == SchemeKind::road) {
    for (std::size_t a = 0; a < s.links.size(); ++a) {
      bool car_link = false;
      for (const auto& m : s.modes)
        if (m.congests && s.links[a].allows(m.id)) car_link = true;
      if (first_best || car_link) out.push_back(static_cast<int>(a));
    }
  }
  return out;
}

DesignProblem make_design_problem(const Scenario& s, SchemeKind scheme, const Weights& w,
                                  double lb, double ub, const RevenueConstraints& rc,
                                  const SolverConfig& solver, bool first_best) {
  w.validate();
  if (ub <= lb) throw InputError("price upper bound must exceed the lower bound");
  if (rc.b < 0) throw InputError("revenue cap must be nonnegative");
  DesignProblem p;
  p.scenario = &s;
  p.scheme = scheme;
  p.first_best = first_best;
  p.priceable = priceable_elements(s, scheme, first_best);
  p.weights = w;
  p.lb = lb;
  p.ub = ub;
  p.constraints = rc;
  p.solver = solver;
  p.baseline_result = solve_sue(s, {}, solver);
  p.baseline = make_report(s, p.baseline_result, {});
  return p;
}

ObjectiveEval objective(const DesignProblem& p, const PriceVector& prices) {
  ObjectiveEval ev;
  EquilibriumResult r = solve_sue(*p.scenario, prices.pi, p.solver);
  ev.converged = r.converged;
  if (!r.converged) {
    ev.value = std::numeric_limits<double>::infinity();
    ev.feasible = false;
    return ev;
  }
  ev.report = make_report(*p.scenario, r, prices.pi);
  ev.components = objective_deltas(p.baseline, ev.report);
  const Weights& w = p.weights;
  // only weighted components must be well defined
  const auto& c = ev.components;
  if ((w.eff > 0 && !c.tts_ok) || (w.env > 0 && !c.tec_ok) || (w.acc > 0 && !c.pc_ok) ||
      (w.equ_q > 0 && !c.mapd_q_ok) || (w.equ_w > 0 && !c.mapd_w_ok)) {
    ev.value = std::numeric_limits<double>::infinity();
    ev.feasible = false;
    return ev;
  }
  ev.value = w.eff * c.d_tts + w.env * c.d_tec + w.acc * c.d_pc + w.equ_q * c.d_mapd_q +
             w.equ_w * c.d_mapd_w;
  ev.slack = revenue_feasibility(*p.scenario, r, prices, p.constraints.b);
  ev.feasible = true;
  if (p.constraints.enforce_cap && ev.slack.cap < 0) ev.feasible = false;
  if (p.constraints.enforce_dominance && ev.slack.dominance < 0) ev.feasible = false;
  return ev;
}

}  // namespace tripprice
