#pragma once

#include <span>
#include <string>
#include <vector>

#include "tripprice/demand.hpp"

namespace tripprice {

struct SolverConfig {
  double tol = 1e-6;      // relative fixed-point gap
  int max_iter = 5000;
  enum class Damping { msa, fixed } damping = Damping::fixed;
  double lambda = 0.25;   // step for fixed damping
  bool record_history = false;

  static SolverConfig reference_msa();  // the 1/n averaging scheme
  /// Parse "msa" or "fixed:<lambda>".
  static Damping damping_from_string(const std::string& s, double* lambda);
  std::string damping_string() const;
};

struct EquilibriumResult {
  // veh/h link flows: [class*modes+mode][link], plus aggregates
  std::vector<std::vector<double>> link_flow_qm;
  std::vector<double> link_flow_total;       // sum over classes and modes
  std::vector<double> link_flow_congesting;  // modes with congests=true only
  // veh/h path flows per class: [class][path]
  std::vector<std::vector<double>> path_flow;
  // probabilities: [class][path] joint and conditional; [class][od*modes+mode]
  std::vector<std::vector<double>> p_joint, p_conditional, p_mode;
  // satisfactions: [class][od]
  std::vector<std::vector<double>> satisfaction;

  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> residual_history;   // when requested
  double max_conservation_error = 0.0;    // worst per-iterate demand gap
  bool nonmonotone_cost_region = false;   // supply diagnostic

  std::vector<double> class_path_flow_total() const;  // sum over classes
  std::vector<double> pax_path_flow(const Scenario& s) const;  // pax/h per path
};

/// Solve the multimodal multiclass fixed-point SUE for the given path
/// prices (zeros = no pricing) by damped averaging of link-flow loadings.
/// `initial_flows` overrides the free-flow-loading start (one [class*modes
/// +mode] x [link] tensor).
EquilibriumResult solve_sue(const Scenario& s, std::span<const double> prices,
                            const SolverConfig& cfg = {},
                            const std::vector<std::vector<double>>* initial_flows = nullptr);

/// One loading pass from the given per-(class,mode) link flows; returns the
/// relative gap (0 iff `flows` is a fixed point).
double residual(const Scenario& s, std::span<const double> prices,
                const std::vector<std::vector<double>>& link_flow_qm);
double residual(const Scenario& s, std::span<const double> prices, const EquilibriumResult& at);

struct CalibrationResult {
  std::vector<double> demand;        // calibrated d_w, pax/h
  std::vector<double> car_flow;      // achieved car pax flow per od
  int sweeps = 0;
  bool converged = false;
};

/// Find per-OD demand so that zero-price SUE car passenger flow matches
/// `targets` (0.5% relative), bisecting d_w in [target, 20*target] per OD
/// and sweeping ODs jointly (cap 50 sweeps).
CalibrationResult calibrate_demand(const Scenario& s, std::span<const double> targets,
                                   const SolverConfig& cfg = {});

}  // namespace tripprice
