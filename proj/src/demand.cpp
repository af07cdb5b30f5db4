#include "tripprice/demand.hpp"

#include <algorithm>
#include <cmath>

namespace tripprice {

double nesting_exponent(double theta_path, double theta_mode) {
  return 1.0 / std::sqrt(theta_path * theta_mode);
}

double commonality_factor(const Scenario& s, int path, std::span<const double> link_cost) {
  const double alpha = s.params.alpha_sf;
  if (!s.modes[s.paths[path].mode].overlap_correction) return 1.0;
  double own = 0.0;
  for (int a : s.paths[path].links) own += link_cost[a];
  if (own <= 0) throw InputError("nonpositive path cost in commonality factor");
  double sf = 0.0;
  for (const auto& [j, shared] : s.path_overlaps[path]) {
    double other = 0.0;
    for (int a : s.paths[j].links) other += link_cost[a];
    if (other <= 0) throw InputError("nonpositive path cost in commonality factor");
    double shared_cost = 0.0;
    for (int a : shared) shared_cost += link_cost[a];
    sf += std::pow(shared_cost / std::sqrt(own * other), alpha);
  }
  return sf;
}

PathChoice path_utilities_and_probs(const Scenario& s, int user_class, int mode, int od,
                                    std::span<const double> total_path_cost,
                                    std::span<const double> link_cost) {
  PathChoice pc;
  pc.paths = s.paths_by_od_mode[od][mode];
  if (pc.paths.empty())
    throw InputError("mode " + s.modes[mode].id + " has no paths on OD " + s.ods[od].id);
  (void)user_class;
  const double theta = s.params.theta_path;
  pc.utility.reserve(pc.paths.size());
  for (int k : pc.paths) {
    double sf = commonality_factor(s, k, link_cost);
    pc.utility.push_back(-total_path_cost[k] - s.params.beta_sf * std::log(sf));
  }
  pc.v_shift = *std::max_element(pc.utility.begin(), pc.utility.end());
  double sum = 0.0;
  pc.probability.resize(pc.utility.size());
  for (std::size_t i = 0; i < pc.utility.size(); ++i) {
    pc.probability[i] = std::exp((pc.utility[i] - pc.v_shift) / theta);
    sum += pc.probability[i];
  }
  for (auto& p : pc.probability) {
    p /= sum;
    if (p < 1e-300) p = 0.0;
  }
  pc.log_inclusive = std::log(sum);  // of the shifted exponentials
  return pc;
}

double mode_logsum(const Scenario& s, const PathChoice& pc) {
  // V_m = sqrt(theta_mode/theta_path) * ln sum_k exp(V_k/theta_path)
  double scale = std::sqrt(s.params.theta_mode / s.params.theta_path);
  return scale * (pc.v_shift / s.params.theta_path + pc.log_inclusive);
}

std::vector<double> mode_probs(std::span<const double> mode_utilities, double theta_mode) {
  if (mode_utilities.empty()) throw InputError("no available mode");
  double vmax = *std::max_element(mode_utilities.begin(), mode_utilities.end());
  std::vector<double> p(mode_utilities.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp((mode_utilities[i] - vmax) / theta_mode);
    sum += p[i];
  }
  for (auto& v : p) {
    v /= sum;
    if (v < 1e-300) v = 0.0;
  }
  return p;
}

std::vector<double> class_path_flows(const Scenario& s, int user_class, const PathChoice& pc,
                                     double mode_probability, double demand_pax_h) {
  const auto& q = s.classes[user_class];
  std::vector<double> h(pc.paths.size());
  for (std::size_t i = 0; i < pc.paths.size(); ++i) {
    const auto& mode_id = s.modes[s.paths[pc.paths[i]].mode].id;
    h[i] = pc.probability[i] * mode_probability * (q.share / q.eta(mode_id)) * demand_pax_h;
  }
  return h;
}

OdChoice od_choice(const Scenario& s, int user_class, int od,
                   std::span<const double> total_path_cost, const LinkCostTable& costs) {
  OdChoice oc;
  for (std::size_t m = 0; m < s.modes.size(); ++m)
    if (!s.paths_by_od_mode[od][m].empty()) oc.modes.push_back(static_cast<int>(m));
  if (oc.modes.empty()) throw InputError("OD " + s.ods[od].id + " has no alternatives");

  const double theta_k = s.params.theta_path;
  const double mu = nesting_exponent(theta_k, s.params.theta_mode);

  // ln S_m = V_k-shift/theta + ln(sum shifted); keep a common shift for the
  // satisfaction so the potential is overflow-safe
  std::vector<double> ln_s(oc.modes.size());
  for (std::size_t i = 0; i < oc.modes.size(); ++i) {
    oc.per_mode.push_back(path_utilities_and_probs(s, user_class, oc.modes[i], od,
                                                   total_path_cost,
                                                   costs.cost(s, user_class, oc.modes[i])));
    ln_s[i] = oc.per_mode[i].v_shift / theta_k + oc.per_mode[i].log_inclusive;
  }
  double ln_s_max = *std::max_element(ln_s.begin(), ln_s.end());
  double z = 0.0;
  for (double v : ln_s) z += std::exp(mu * (v - ln_s_max));
  oc.mode_probability.resize(oc.modes.size());
  for (std::size_t i = 0; i < oc.modes.size(); ++i) {
    oc.mode_probability[i] = std::exp(mu * (ln_s[i] - ln_s_max)) / z;
    if (oc.mode_probability[i] < 1e-300) oc.mode_probability[i] = 0.0;
  }
  // s_w^q = (theta_path/mu) ln sum_m S_m^mu: the potential of the hierarchy
  // (d s / d V_k equals the joint choice probability)
  oc.satisfaction = (theta_k / mu) * (mu * ln_s_max + std::log(z));
  return oc;
}

double od_satisfaction(const Scenario& s, int user_class, int od,
                       std::span<const double> total_path_cost, const LinkCostTable& costs) {
  return od_choice(s, user_class, od, total_path_cost, costs).satisfaction;
}

}  // namespace tripprice
