#include "tripprice/classical.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "tripprice/common.hpp"

namespace tripprice::classical {

double CostFn::operator()(double h) const { return a + b * std::pow(h, p); }

double CostFn::derivative(double h) const {
  if (p == 1.0) return b;
  return b * p * std::pow(h, p - 1.0);
}

void TwoPathInstance::validate() const {
  if (demand <= 0) throw InputError("two-path instance: demand must be positive");
  for (const CostFn* g : {&g1, &g2}) {
    if (g->b <= 0) throw InputError("two-path instance: cost slope must be positive");
    if (g->p < 1) throw InputError("two-path instance: cost exponent must be >= 1");
    if (g->a < 0) throw InputError("two-path instance: cost intercept must be nonnegative");
  }
}

TwoPathInstance linear_instance() { return {{10.0, 0.01, 1.0}, {15.0, 0.005, 1.0}, 1000.0}; }

TwoPathInstance load_instance_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open instance file " + file.string());
  TwoPathInstance inst;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    auto where = file.string() + ":" + std::to_string(lineno);
    if (key == "demand") {
      if (!(ss >> inst.demand)) throw InputError(where + ": demand needs a value");
    } else if (key == "path1" || key == "path2") {
      CostFn& g = key == "path1" ? inst.g1 : inst.g2;
      if (!(ss >> g.a >> g.b >> g.p))
        throw InputError(where + ": expected '" + key + " a b p' (cost a + b*h^p)");
    } else {
      throw InputError(where + ": unknown key '" + key + "'");
    }
  }
  inst.validate();
  return inst;
}

namespace {

// Bisection for f(x) = 0 on [lo, hi] with f increasing; assumes a sign
// change inside.
double bisect(const std::function<double(double)>& f, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 0; ++i) {
    double mid = 0.5 * (lo + hi);
    if (f(mid) < 0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Flows solve_due(const TwoPathInstance& inst, double toll1, double toll2) {
  inst.validate();
  const double d = inst.demand;
  auto diff = [&](double h1) {
    return (inst.g1(h1) + toll1) - (inst.g2(d - h1) + toll2);
  };
  // diff is increasing in h1; corners when no interior equal-cost split
  if (diff(0.0) >= 0.0) return {0.0, d};
  if (diff(d) <= 0.0) return {d, 0.0};
  double h1 = bisect(diff, 0.0, d);
  return {h1, d - h1};
}

Flows solve_due(const TwoPathInstance& inst) { return solve_due(inst, 0.0, 0.0); }

Flows solve_so(const TwoPathInstance& inst) {
  inst.validate();
  const double d = inst.demand;
  auto marginal_diff = [&](double h1) {
    double m1 = inst.g1(h1) + inst.g1.derivative(h1) * h1;
    double m2 = inst.g2(d - h1) + inst.g2.derivative(d - h1) * (d - h1);
    return m1 - m2;
  };
  if (marginal_diff(0.0) >= 0.0) return {0.0, d};
  if (marginal_diff(d) <= 0.0) return {d, 0.0};
  double h1 = bisect(marginal_diff, 0.0, d);
  return {h1, d - h1};
}

double total_cost(const TwoPathInstance& inst, const Flows& f) {
  return inst.g1(f.h1) * f.h1 + inst.g2(f.h2) * f.h2;
}

std::array<double, 2> msc_tolls(const TwoPathInstance& inst) {
  Flows so = solve_so(inst);
  return {inst.g1.derivative(so.h1) * so.h1, inst.g2.derivative(so.h2) * so.h2};
}

std::array<double, 2> alternative_valid_tolls(const TwoPathInstance& inst,
                                              double revenue_target) {
  Flows so = solve_so(inst);
  if (so.h1 <= 0.0 || so.h2 <= 0.0)
    throw SolveError("alternative tolls require an interior system optimum");
  // any pair with t1 - t2 = g2(h2) - g1(h1) keeps the tolled UE at SO;
  // pick the point on that line meeting the revenue target
  double dg = inst.g2(so.h2) - inst.g1(so.h1);
  double t2 = (revenue_target - dg * so.h1) / inst.demand;
  return {t2 + dg, t2};
}

Flows logit_sue(const TwoPathInstance& inst, double toll1, double toll2, double theta) {
  inst.validate();
  if (theta <= 0) throw InputError("logit dispersion must be positive");
  const double d = inst.demand;
  // h1 = d / (1 + exp((c1-c2)/theta)); RHS decreasing in h1 -> bisection
  auto gap = [&](double h1) {
    double c1 = inst.g1(h1) + toll1;
    double c2 = inst.g2(d - h1) + toll2;
    return h1 - d / (1.0 + std::exp((c1 - c2) / theta));
  };
  double h1 = bisect(gap, 0.0, d);
  return {h1, d - h1};
}

}  // namespace tripprice::classical
