#pragma once

#include <span>
#include <vector>

#include "tripprice/supply.hpp"

namespace tripprice {

/// Exponent mu of the inclusive value in the mode-choice softmax,
/// p_m proportional to S_m^mu with S_m = sum_k exp(V_k / theta_path).
double nesting_exponent(double theta_path, double theta_mode);

/// c-logit commonality factor of path `k` against its od/mode block.
/// `link_cost` is the class's generalized link-cost vector.
double commonality_factor(const Scenario& s, int path, std::span<const double> link_cost);

/// Path-choice level for one (class, od, mode) block.
struct PathChoice {
  std::vector<int> paths;          // scenario path indices of the block
  std::vector<double> utility;     // V_k = -g_k - beta_sf * ln(SF_k)
  std::vector<double> probability; // conditional p(k|m)
  double log_inclusive = 0.0;      // ln( sum_k exp(V_k/theta_path) ), max-shifted internally
  double v_shift = 0.0;            // the shift used (max utility of the block)
};

PathChoice path_utilities_and_probs(const Scenario& s, int user_class, int mode, int od,
                                    std::span<const double> total_path_cost,
                                    std::span<const double> link_cost);

/// Mode utility: V_m = sqrt(theta_mode/theta_path) * ln sum_k exp(V_k/theta_path).
double mode_logsum(const Scenario& s, const PathChoice& pc);

/// Softmax over available modes at scale theta_mode.
std::vector<double> mode_probs(std::span<const double> mode_utilities, double theta_mode);

/// Vehicle path flows h_k = p(k|m) * p(m) * (psi/eta) * d_w.
std::vector<double> class_path_flows(const Scenario& s, int user_class, const PathChoice& pc,
                                     double mode_probability, double demand_pax_h);

/// Everything the demand model produces for one (class, od).
struct OdChoice {
  std::vector<int> modes;                 // available mode indices
  std::vector<PathChoice> per_mode;       // aligned with `modes`
  std::vector<double> mode_probability;   // aligned with `modes`
  double satisfaction = 0.0;              // s_w^q, eur-utility
};

/// Satisfaction s_w^q = (theta_path/mu) * ln sum_m S_m^mu: the potential of
/// the hierarchical choice model (its gradient in path utilities is the
/// joint probability).
OdChoice od_choice(const Scenario& s, int user_class, int od,
                   std::span<const double> total_path_cost, const LinkCostTable& costs);

double od_satisfaction(const Scenario& s, int user_class, int od,
                       std::span<const double> total_path_cost, const LinkCostTable& costs);

}  // namespace tripprice
