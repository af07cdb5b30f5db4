#pragma once

#include <array>
#include <filesystem>
#include <string>

namespace tripprice::classical {

/// Separable path cost g(h) = a + b*h^p, increasing and convex on [0, d]
/// for a >= 0, b > 0, p >= 1.
struct CostFn {
  double a = 0.0, b = 0.0, p = 1.0;
  double operator()(double h) const;
  double derivative(double h) const;
};

struct TwoPathInstance {
  CostFn g1, g2;
  double demand = 0.0;

  void validate() const;  // throws InputError on a broken invariant
};

/// The fully specified desk instance: g1 = 10 + 0.01 h, g2 = 15 + 0.005 h,
/// d = 1000.
TwoPathInstance linear_instance();

TwoPathInstance load_instance_file(const std::filesystem::path& file);

struct Flows {
  double h1 = 0.0, h2 = 0.0;
};

/// Deterministic (Wardrop) user equilibrium; equal costs on used paths,
/// corner solutions handled through the variational condition.
Flows solve_due(const TwoPathInstance& inst);
/// With fixed tolls added to each path cost.
Flows solve_due(const TwoPathInstance& inst, double toll1, double toll2);

/// System optimum: equal marginal costs g + g'h on used paths.
Flows solve_so(const TwoPathInstance& inst);

double total_cost(const TwoPathInstance& inst, const Flows& f);

/// Marginal-social-cost tolls gamma_i = g_i'(h_i^SO) * h_i^SO.
std::array<double, 2> msc_tolls(const TwoPathInstance& inst);

/// The toll pair on the valid line (gamma1 - gamma2 = g2(h2^SO) - g1(h1^SO))
/// whose equilibrium revenue h^SO . gamma equals `revenue_target`.
/// Requires an interior SO.
std::array<double, 2> alternative_valid_tolls(const TwoPathInstance& inst, double revenue_target);

/// Logit SUE on the two-path instance with tolls (dispersion theta),
/// for the stochastic-gap demonstration.
Flows logit_sue(const TwoPathInstance& inst, double toll1, double toll2, double theta);

}  // namespace tripprice::classical
