#include "tripprice/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace tripprice {

SolverConfig SolverConfig::reference_msa() {
  SolverConfig c;
  c.damping = Damping::msa;
  return c;
}

SolverConfig::Damping SolverConfig::damping_from_string(const std::string& s, double* lambda) {
  if (s == "msa") return Damping::msa;
  if (s.rfind("fixed:", 0) == 0) {
    double l = std::atof(s.c_str() + 6);
    if (l <= 0 || l > 1) throw InputError("damping step must be in (0,1]: " + s);
    if (lambda) *lambda = l;
    return Damping::fixed;
  }
  throw InputError("unknown damping rule '" + s + "' (use msa or fixed:<lambda>)");
}

std::string SolverConfig::damping_string() const {
  if (damping == Damping::msa) return "msa";
  return "fixed:" + format_number(lambda);
}

std::vector<double> EquilibriumResult::class_path_flow_total() const {
  std::vector<double> h(path_flow.empty() ? 0 : path_flow[0].size(), 0.0);
  for (const auto& hq : path_flow)
    for (std::size_t k = 0; k < hq.size(); ++k) h[k] += hq[k];
  return h;
}

std::vector<double> EquilibriumResult::pax_path_flow(const Scenario& s) const {
  std::vector<double> pax(s.paths.size(), 0.0);
  for (std::size_t q = 0; q < path_flow.size(); ++q)
    for (std::size_t k = 0; k < s.paths.size(); ++k)
      pax[k] += path_flow[q][k] * s.classes[q].eta(s.modes[s.paths[k].mode].id);
  return pax;
}

namespace {

struct Loading {
  std::vector<std::vector<double>> link_flow_qm;  // [q*M+m][a]
  std::vector<std::vector<double>> path_flow;     // [q][k]
  std::vector<std::vector<double>> p_joint, p_conditional, p_mode;
  std::vector<std::vector<double>> satisfaction;
  double conservation_error = 0.0;
};

/// One demand loading at fixed congesting link flows.
Loading load_network(const Scenario& s, std::span<const double> prices,
                     std::span<const double> congesting_flow) {
  const std::size_t Q = s.classes.size(), M = s.modes.size(), A = s.links.size(),
                    K = s.paths.size(), W = s.ods.size();
  Loading out;
  out.link_flow_qm.assign(Q * M, std::vector<double>(A, 0.0));
  out.path_flow.assign(Q, std::vector<double>(K, 0.0));
  out.p_joint.assign(Q, std::vector<double>(K, 0.0));
  out.p_conditional.assign(Q, std::vector<double>(K, 0.0));
  out.p_mode.assign(Q, std::vector<double>(W * M, 0.0));
  out.satisfaction.assign(Q, std::vector<double>(W, 0.0));

  LinkCostTable costs = compute_link_costs(s, congesting_flow);

  for (std::size_t q = 0; q < Q; ++q) {
    // total path cost g = g_ad + g_nad + pi per class
    std::vector<double> g(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      const auto& c = costs.cost(s, static_cast<int>(q), s.paths[k].mode);
      for (int a : s.paths[k].links) g[k] += c[a];
      g[k] += s.params.fare_car_km * s.path_tolled_km[k] + s.path_flat_fare[k];
      if (!prices.empty()) g[k] += prices[k];
    }
    for (std::size_t w = 0; w < W; ++w) {
      OdChoice oc = od_choice(s, static_cast<int>(q), static_cast<int>(w), g, costs);
      double assigned_pax = 0.0;
      const double d_w = s.ods[w].demand_pax_h;
      for (std::size_t mi = 0; mi < oc.modes.size(); ++mi) {
        int m = oc.modes[mi];
        out.p_mode[q][w * M + m] = oc.mode_probability[mi];
        const auto& pc = oc.per_mode[mi];
        auto h = class_path_flows(s, static_cast<int>(q), pc, oc.mode_probability[mi], d_w);
        for (std::size_t i = 0; i < pc.paths.size(); ++i) {
          int k = pc.paths[i];
          out.p_conditional[q][k] = pc.probability[i];
          out.p_joint[q][k] = pc.probability[i] * oc.mode_probability[mi];
          out.path_flow[q][k] = h[i];
          assigned_pax += h[i] * s.classes[q].eta(s.modes[m].id);
          for (int a : s.paths[k].links) out.link_flow_qm[q * M + m][a] += h[i];
        }
      }
      out.satisfaction[q][w] = oc.satisfaction;
      double expected = s.classes[q].share * d_w;
      double err = expected > 0 ? std::fabs(assigned_pax - expected) / expected
                                : std::fabs(assigned_pax);
      out.conservation_error = std::max(out.conservation_error, err);
    }
  }
  return out;
}

}  // namespace

EquilibriumResult solve_sue(const Scenario& s, std::span<const double> prices,
                            const SolverConfig& cfg,
                            const std::vector<std::vector<double>>* initial_flows) {
  if (!prices.empty() && prices.size() != s.paths.size())
    throw InputError("price vector has " + std::to_string(prices.size()) + " entries for " +
                     std::to_string(s.paths.size()) + " paths");
  const std::size_t Q = s.classes.size(), M = s.modes.size(), A = s.links.size();

  EquilibriumResult res;
  res.nonmonotone_cost_region = has_nonmonotone_cost_region(s);

  auto congesting = [&](const std::vector<std::vector<double>>& qm) {
    std::vector<double> f(A, 0.0);
    for (std::size_t q = 0; q < Q; ++q)
      for (std::size_t m = 0; m < M; ++m) {
        if (!s.modes[m].congests) continue;
        const auto& row = qm[q * M + m];
        for (std::size_t a = 0; a < A; ++a) f[a] += row[a];
      }
    return f;
  };
  auto totals = [&](const std::vector<std::vector<double>>& qm) {
    std::vector<double> f(A, 0.0);
    for (const auto& row : qm)
      for (std::size_t a = 0; a < A; ++a) f[a] += row[a];
    return f;
  };

  // free-flow initialization: probabilities at zero-flow costs
  std::vector<double> zero(A, 0.0);
  Loading y = load_network(s, prices, zero);
  std::vector<std::vector<double>> f = y.link_flow_qm;
  res.max_conservation_error = y.conservation_error;
  if (initial_flows) {
    if (initial_flows->size() != Q * M) throw InputError("initial flow tensor dimension mismatch");
    f = *initial_flows;
  }

  int n = 0;
  double gap = std::numeric_limits<double>::infinity();
  auto step = [&](double lam) {
    y = load_network(s, prices, congesting(f));
    res.max_conservation_error = std::max(res.max_conservation_error, y.conservation_error);
    auto ft = totals(f);
    auto yt = totals(y.link_flow_qm);
    gap = 0.0;
    for (std::size_t a = 0; a < A; ++a)
      gap = std::max(gap, std::fabs(ft[a] - yt[a]) / (1.0 + ft[a]));
    if (lam > 0)
      for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t a = 0; a < A; ++a) f[i][a] += lam * (y.link_flow_qm[i][a] - f[i][a]);
  };
  while (true) {
    y = load_network(s, prices, congesting(f));
    res.max_conservation_error = std::max(res.max_conservation_error, y.conservation_error);
    auto ft = totals(f);
    auto yt = totals(y.link_flow_qm);
    gap = 0.0;
    for (std::size_t a = 0; a < A; ++a)
      gap = std::max(gap, std::fabs(ft[a] - yt[a]) / (1.0 + ft[a]));
    ++n;
    if (cfg.record_history) res.residual_history.push_back(gap);
    if (gap < cfg.tol || n >= cfg.max_iter) break;
    double lam = cfg.damping == SolverConfig::Damping::msa ? 1.0 / (n + 1) : cfg.lambda;
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t a = 0; a < A; ++a) f[i][a] += lam * (y.link_flow_qm[i][a] - f[i][a]);
  }
  res.converged = gap < cfg.tol;
  res.iterations = n;

  // consistency polish: contract the residual to machine level so the
  // returned flows, probabilities and satisfactions agree with each other
  double polish_lambda = cfg.damping == SolverConfig::Damping::fixed ? cfg.lambda : 0.25;
  for (int extra = 0; extra < 200 && gap > 1e-13; ++extra) step(polish_lambda);

  // return the loading at the final iterate: flows and probabilities are
  // mutually consistent (f = Delta h exactly)
  res.link_flow_qm = std::move(y.link_flow_qm);
  res.link_flow_total = totals(res.link_flow_qm);
  res.link_flow_congesting = congesting(res.link_flow_qm);
  res.path_flow = std::move(y.path_flow);
  res.p_joint = std::move(y.p_joint);
  res.p_conditional = std::move(y.p_conditional);
  res.p_mode = std::move(y.p_mode);
  res.satisfaction = std::move(y.satisfaction);
  res.residual = gap;
  return res;
}

double residual(const Scenario& s, std::span<const double> prices,
                const std::vector<std::vector<double>>& link_flow_qm) {
  const std::size_t Q = s.classes.size(), M = s.modes.size(), A = s.links.size();
  if (link_flow_qm.size() != Q * M) throw InputError("flow tensor dimension mismatch");
  std::vector<double> cong(A, 0.0), total(A, 0.0);
  for (std::size_t q = 0; q < Q; ++q)
    for (std::size_t m = 0; m < M; ++m) {
      const auto& row = link_flow_qm[q * M + m];
      for (std::size_t a = 0; a < A; ++a) {
        total[a] += row[a];
        if (s.modes[m].congests) cong[a] += row[a];
      }
    }
  Loading y = load_network(s, prices, cong);
  double gap = 0.0;
  for (std::size_t a = 0; a < A; ++a) {
    double ya = 0.0;
    for (std::size_t i = 0; i < y.link_flow_qm.size(); ++i) ya += y.link_flow_qm[i][a];
    gap = std::max(gap, std::fabs(total[a] - ya) / (1.0 + total[a]));
  }
  return gap;
}

double residual(const Scenario& s, std::span<const double> prices, const EquilibriumResult& at) {
  return residual(s, prices, at.link_flow_qm);
}

CalibrationResult calibrate_demand(const Scenario& s, std::span<const double> targets,
                                   const SolverConfig& cfg) {
  if (targets.size() != s.ods.size()) throw InputError("one target per OD required");
  int car = -1;
  for (std::size_t m = 0; m < s.modes.size(); ++m)
    if (s.modes[m].congests) car = static_cast<int>(m);
  if (car < 0) throw InputError("no car-like mode to calibrate against");
  for (std::size_t w = 0; w < s.ods.size(); ++w) {
    if (targets[w] <= 0) throw InputError("calibration target must be positive");
    if (s.paths_by_od_mode[w][car].empty())
      throw InputError("OD " + s.ods[w].id + " has no car paths");
  }

  Scenario work = s;
  std::vector<double> prices;  // zero pricing

  auto car_pax = [&](const EquilibriumResult& r, std::size_t w) {
    double pax = 0.0;
    for (std::size_t q = 0; q < work.classes.size(); ++q)
      for (int k : work.paths_by_od_mode[w][car])
        pax += r.path_flow[q][k] * work.classes[q].eta(work.modes[car].id);
    return pax;
  };

  CalibrationResult out;
  out.demand.resize(s.ods.size());
  out.car_flow.assign(s.ods.size(), 0.0);
  for (std::size_t w = 0; w < s.ods.size(); ++w) out.demand[w] = s.ods[w].demand_pax_h;

  for (int sweep = 1; sweep <= 50; ++sweep) {
    out.sweeps = sweep;
    for (std::size_t w = 0; w < s.ods.size(); ++w) {
      double lo = targets[w], hi = 20.0 * targets[w];
      // car share never exceeds 1, so car_pax(lo) <= target always holds;
      // a too-low car share shows as car_pax(hi) < target
      work.ods[w].demand_pax_h = hi;
      EquilibriumResult r = solve_sue(work, prices, cfg);
      if (car_pax(r, w) < targets[w])
        throw SolveError("calibration bracket failure on OD " + s.ods[w].id +
                         ": car share too low to reach the target");
      for (int it = 0; it < 40; ++it) {
        double mid = 0.5 * (lo + hi);
        work.ods[w].demand_pax_h = mid;
        r = solve_sue(work, prices, cfg);
        if (car_pax(r, w) < targets[w])
          lo = mid;
        else
          hi = mid;
        if ((hi - lo) / targets[w] < 1e-4) break;
      }
      work.ods[w].demand_pax_h = 0.5 * (lo + hi);
      out.demand[w] = work.ods[w].demand_pax_h;
    }
    EquilibriumResult r = solve_sue(work, prices, cfg);
    bool ok = true;
    for (std::size_t w = 0; w < s.ods.size(); ++w) {
      out.car_flow[w] = car_pax(r, w);
      if (std::fabs(out.car_flow[w] - targets[w]) / targets[w] > 0.005) ok = false;
    }
    if (ok) {
      out.converged = true;
      return out;
    }
  }
  throw SolveError("demand calibration did not converge within 50 sweeps");
}

}  // namespace tripprice
