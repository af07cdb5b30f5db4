#pragma once

#include <span>
#include <string>
#include <vector>

#include "tripprice/metrics.hpp"

namespace tripprice {

enum class SchemeKind { none, trip, road };

std::string to_string(SchemeKind k);
SchemeKind scheme_from_string(const std::string& s);

/// Per-path monetary prices together with the unit prices that generated
/// them. For trip pricing `unit` is per path (eur/km of path length); for
/// road pricing it is per link.
struct PriceVector {
  SchemeKind kind = SchemeKind::none;
  std::vector<double> pi;    // per path, eur
  std::vector<double> unit;  // eur/km; per path (trip) or per link (road)
  double lb = 0.0, ub = 0.0;

  static PriceVector zero(const Scenario& s);
};

/// pi = (path length) .* unit, masked-out paths forced to zero.
/// Throws InputError on a bound violation.
PriceVector make_trip_prices(const Scenario& s, std::span<const double> unit_prices,
                             std::span<const int> priceable_paths, double lb, double ub);

/// pi = Delta^T (l .* gamma'), masked-out links forced to zero.
/// With `charge_all_modes` false (second-best "car elements only"), paths of
/// non-congesting modes pay nothing even where they share priced links:
/// bike lanes and sidewalks are separate elements of the same link.
PriceVector road_to_path_prices(const Scenario& s, std::span<const double> link_unit_prices,
                                std::span<const int> priceable_links, double lb, double ub,
                                bool charge_all_modes = true);

struct RevenueConstraints {
  bool enforce_cap = false;        // Eq. net revenue <= b
  bool enforce_dominance = false;  // tolls >= incentives
  double b = 0.0;
};

/// slack >= 0 means feasible.
struct ConstraintSlack {
  double cap = 0.0;        // b - net revenue
  double dominance = 0.0;  // tolls - incentives
  bool feasible(double tol = 0.0) const { return cap >= -tol && dominance >= -tol; }
};

ConstraintSlack revenue_feasibility(const Scenario& s, const EquilibriumResult& r,
                                    const PriceVector& prices, double b);

struct Weights {
  double eff = 0.0, env = 0.0, acc = 0.0, equ_q = 0.0, equ_w = 0.0;

  void validate() const;  // nonnegative, sum to 1
  static Weights single(const std::string& objective);  // eff|env|acpt|sequ|wequ
  static Weights equal();                               // all five at 1/5
  static Weights from_objective(const std::string& objective);  // includes "all"
};

struct DesignProblem {
  const Scenario* scenario = nullptr;
  SchemeKind scheme = SchemeKind::trip;
  bool first_best = true;      // second-best charges car elements only
  std::vector<int> priceable;  // path indices (trip) or link indices (road)
  Weights weights;
  double lb = 0.0, ub = 5.0;
  RevenueConstraints constraints;
  SolverConfig solver;
  MetricsReport baseline;
  EquilibriumResult baseline_result;

  std::size_t dimension() const { return priceable.size(); }
  /// Build the PriceVector for a unit-price decision vector.
  PriceVector prices_from_units(std::span<const double> units) const;
};

/// All car-mode paths (trip) or all links allowing a congesting mode (road):
/// the second-best "car network elements" mask. First-best = everything.
std::vector<int> priceable_elements(const Scenario& s, SchemeKind scheme, bool first_best);

/// Assembles the problem and computes its zero-price baseline.
DesignProblem make_design_problem(const Scenario& s, SchemeKind scheme, const Weights& w,
                                  double lb, double ub, const RevenueConstraints& rc,
                                  const SolverConfig& solver, bool first_best);

struct ObjectiveEval {
  double value = 0.0;  // scalarized objective (no penalty)
  ObjectiveDeltas components;
  ConstraintSlack slack;
  bool feasible = true;
  bool converged = true;
  MetricsReport report;
};

/// Solves the SUE under `prices` and scalarizes the five deltas against the
/// problem baseline. Non-convergence yields value = +inf.
ObjectiveEval objective(const DesignProblem& p, const PriceVector& prices);

}  // namespace tripprice
