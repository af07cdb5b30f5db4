#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tripprice/pricing.hpp"

namespace tripprice {

struct OptimizerConfig {
  int population = 60;
  int generations = 250;
  double crossover_rate = 0.9;
  double mutation_rate = 0.15;
  double mutation_sigma_frac = 0.05;  // of box width
  int tournament = 3;
  int elites = 2;
  int restarts = 3;
  int polish_budget = 500;  // simplex-search evaluations
  std::uint64_t seed = 1;
  double penalty_coef = 1e3;  // doubled per restart while infeasible
  int workers = 0;            // 0 = worker_count()

  void validate() const;  // population >= 10, ...
};

struct TracePoint {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
  double feasible_fraction = 0.0;
};

/// Generic bound-constrained GA core. `fn` returns the (penalized) value to
/// minimize; evaluation order never affects results (counter-based RNG,
/// fixed reduction order).
struct GaResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<TracePoint> trace;
  std::size_t evaluations = 0;
};

GaResult ga_minimize(const std::function<double(std::span<const double>)>& fn,
                     std::span<const double> lb, std::span<const double> ub,
                     const OptimizerConfig& cfg,
                     const std::vector<std::vector<double>>& seed_points = {});

/// Bounded Nelder-Mead polish (values clamped to the box).
std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(std::span<const double>)>& fn, std::span<const double> x0,
    std::span<const double> lb, std::span<const double> ub, int budget);

struct DesignOutcome {
  PriceVector prices;
  ObjectiveEval eval;
  std::vector<double> units;  // decision vector of the returned solution
  std::vector<TracePoint> trace;
  std::uint64_t seed = 0;
  bool feasible = false;
  std::size_t evaluations = 0;
};

/// GA + simplex polish over the problem's unit-price box, penalized by the
/// revenue constraints; returns the best feasible solution found.
/// `warm_starts` are unit-price vectors injected into the initial population.
DesignOutcome design(const DesignProblem& p, const OptimizerConfig& cfg,
                     const std::vector<std::vector<double>>& warm_starts = {});

struct MultiStartOutcome {
  double agreement = 0.0;  // fraction of runs within 1% of the best
  DesignOutcome best;
  std::vector<double> objectives;
};

MultiStartOutcome multi_start_agreement(const DesignProblem& p, const OptimizerConfig& cfg,
                                        int n_starts);

}  // namespace tripprice
