#include "tripprice/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace tripprice {

void OptimizerConfig::validate() const {
  if (population < 10) throw InputError("population must be at least 10");
  if (generations < 1 || restarts < 1) throw InputError("generations and restarts must be >= 1");
  if (crossover_rate < 0 || crossover_rate > 1 || mutation_rate < 0 || mutation_rate > 1)
    throw InputError("rates must lie in [0,1]");
}

namespace {

struct GaEval {
  double value = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

using EvalFn = std::function<GaEval(std::span<const double>)>;

struct Individual {
  std::vector<double> x;
  GaEval eval;
};

bool better(const Individual& a, const Individual& b) {
  if (a.eval.value != b.eval.value) return a.eval.value < b.eval.value;
  return a.x < b.x;  // deterministic tie break
}

GaResult ga_core(const EvalFn& fn, std::span<const double> lb, std::span<const double> ub,
                 const OptimizerConfig& cfg, const std::vector<std::vector<double>>& seed_points,
                 std::uint64_t stream) {
  cfg.validate();
  const std::size_t n = lb.size();
  const int P = cfg.population;
  CounterRng rng(cfg.seed + 0x9e3779b97f4a7c15ULL * stream);
  const int workers = cfg.workers > 0 ? cfg.workers : worker_count();

  auto clamp = [&](std::vector<double>& x) {
    for (std::size_t g = 0; g < n; ++g) x[g] = std::clamp(x[g], lb[g], ub[g]);
  };

  std::vector<Individual> pop(P);
  for (int i = 0; i < P; ++i) {
    pop[i].x.resize(n);
    if (i < static_cast<int>(seed_points.size())) {
      pop[i].x = seed_points[i];
      if (pop[i].x.size() != n) throw InputError("seed point dimension mismatch");
      clamp(pop[i].x);
    } else {
      for (std::size_t g = 0; g < n; ++g)
        pop[i].x[g] = lb[g] + rng.uniform(1, i, g) * (ub[g] - lb[g]);
    }
  }

  GaResult res;
  auto evaluate = [&](std::vector<Individual>& xs) {
    parallel_for(xs.size(), workers, [&](std::size_t i) { xs[i].eval = fn(xs[i].x); });
    res.evaluations += xs.size();
  };
  evaluate(pop);

  auto record = [&](int gen) {
    double best = std::numeric_limits<double>::infinity(), sum = 0.0;
    int feas = 0, finite = 0;
    for (const auto& ind : pop) {
      best = std::min(best, ind.eval.value);
      if (std::isfinite(ind.eval.value)) {
        sum += ind.eval.value;
        ++finite;
      }
      if (ind.eval.feasible) ++feas;
    }
    res.trace.push_back({gen, best, finite ? sum / finite : best,
                         static_cast<double>(feas) / static_cast<double>(pop.size())});
  };
  record(0);

  std::vector<double> sigma(n);
  for (std::size_t g = 0; g < n; ++g) sigma[g] = cfg.mutation_sigma_frac * (ub[g] - lb[g]);

  for (int gen = 1; gen <= cfg.generations; ++gen) {
    std::sort(pop.begin(), pop.end(), better);
    std::vector<Individual> next;
    next.reserve(P);
    for (int e = 0; e < cfg.elites && e < P; ++e) next.push_back(pop[e]);

    auto tournament = [&](std::uint64_t c) {
      int best_i = -1;
      for (int t = 0; t < cfg.tournament; ++t) {
        int i = static_cast<int>(rng.uniform(2, gen, c * 8 + t) * P);
        i = std::min(i, P - 1);
        if (best_i < 0 || better(pop[i], pop[best_i])) best_i = i;
      }
      return best_i;
    };

    std::uint64_t c = 0;
    while (static_cast<int>(next.size()) < P) {
      const auto& pa = pop[tournament(++c)].x;
      const auto& pb = pop[tournament(++c)].x;
      Individual child;
      child.x.resize(n);
      bool cross = rng.uniform(3, gen, c) < cfg.crossover_rate;
      for (std::size_t g = 0; g < n; ++g) {
        if (cross) {
          // BLX-0.5 blend
          double lo = std::min(pa[g], pb[g]), hi = std::max(pa[g], pb[g]);
          double ext = 0.5 * (hi - lo);
          child.x[g] = lo - ext + rng.uniform(4, gen, c * n + g) * (hi - lo + 2 * ext);
        } else {
          child.x[g] = pa[g];
        }
        if (rng.uniform(5, gen, c * n + g) < cfg.mutation_rate)
          child.x[g] += sigma[g] * rng.normal(6, gen, c * n + g);
      }
      clamp(child.x);
      next.push_back(std::move(child));
    }
    // elites keep their evaluations; newcomers are evaluated in parallel
    std::vector<Individual> fresh(next.begin() + std::min(cfg.elites, P), next.end());
    parallel_for(fresh.size(), workers, [&](std::size_t i) { fresh[i].eval = fn(fresh[i].x); });
    res.evaluations += fresh.size();
    for (std::size_t i = 0; i < fresh.size(); ++i) next[std::min(cfg.elites, P) + i] = fresh[i];
    pop = std::move(next);
    record(gen);
  }

  std::sort(pop.begin(), pop.end(), better);
  res.x = pop[0].x;
  res.value = pop[0].eval.value;
  return res;
}

}  // namespace

GaResult ga_minimize(const std::function<double(std::span<const double>)>& fn,
                     std::span<const double> lb, std::span<const double> ub,
                     const OptimizerConfig& cfg,
                     const std::vector<std::vector<double>>& seed_points) {
  EvalFn wrapped = [&](std::span<const double> x) -> GaEval {
    return {fn(x), true};
  };
  return ga_core(wrapped, lb, ub, cfg, seed_points, 0);
}

std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(std::span<const double>)>& fn, std::span<const double> x0,
    std::span<const double> lb, std::span<const double> ub, int budget) {
  const std::size_t n = x0.size();
  int evals = 0;
  auto clamp_eval = [&](std::vector<double>& x) {
    for (std::size_t g = 0; g < n; ++g) x[g] = std::clamp(x[g], lb[g], ub[g]);
    ++evals;
    return fn(x);
  };

  std::vector<std::vector<double>> sx(n + 1, std::vector<double>(x0.begin(), x0.end()));
  std::vector<double> sv(n + 1);
  sv[0] = clamp_eval(sx[0]);
  for (std::size_t i = 0; i < n; ++i) {
    double step = 0.05 * (ub[i] - lb[i]);
    sx[i + 1][i] += (sx[i + 1][i] + step <= ub[i]) ? step : -step;
    sv[i + 1] = clamp_eval(sx[i + 1]);
  }

  auto order = [&] {
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (sv[a] != sv[b]) return sv[a] < sv[b];
      return sx[a] < sx[b];
    });
    std::vector<std::vector<double>> nx(n + 1);
    std::vector<double> nv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      nx[i] = sx[idx[i]];
      nv[i] = sv[idx[i]];
    }
    sx = std::move(nx);
    sv = std::move(nv);
  };

  while (evals < budget) {
    order();
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t g = 0; g < n; ++g) centroid[g] += sx[i][g] / static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> x(n);
      for (std::size_t g = 0; g < n; ++g) x[g] = centroid[g] + coef * (sx[n][g] - centroid[g]);
      return x;
    };
    auto xr = blend(-1.0);
    double vr = clamp_eval(xr);
    if (vr < sv[0]) {
      auto xe = blend(-2.0);
      double ve = clamp_eval(xe);
      if (ve < vr) {
        sx[n] = xe;
        sv[n] = ve;
      } else {
        sx[n] = xr;
        sv[n] = vr;
      }
    } else if (vr < sv[n - 1]) {
      sx[n] = xr;
      sv[n] = vr;
    } else {
      auto xc = blend(0.5);
      double vc = clamp_eval(xc);
      if (vc < sv[n]) {
        sx[n] = xc;
        sv[n] = vc;
      } else {
        for (std::size_t i = 1; i <= n && evals < budget; ++i) {
          for (std::size_t g = 0; g < n; ++g) sx[i][g] = sx[0][g] + 0.5 * (sx[i][g] - sx[0][g]);
          sv[i] = clamp_eval(sx[i]);
        }
      }
    }
    // converged simplex
    double spread = 0.0;
    for (std::size_t i = 1; i <= n; ++i) spread = std::max(spread, std::fabs(sv[i] - sv[0]));
    if (spread < 1e-12) break;
  }
  order();
  return {sx[0], sv[0]};
}

namespace {

struct CacheEntry {
  double value = 0.0;
  bool feasible = false;
  bool converged = false;
  double vio_cap = 0.0, vio_dom = 0.0;  // constraint violations, eur
};

struct DesignEvaluator {
  const DesignProblem* p;
  bool constrained;
  std::map<std::vector<long long>, CacheEntry> cache;
  std::mutex mu;

  std::vector<long long> key(std::span<const double> u) const {
    std::vector<long long> k(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) k[i] = std::llround(u[i] * 1e6);
    return k;
  }

  CacheEntry evaluate(std::span<const double> units) {
    auto k = key(units);
    {
      std::lock_guard<std::mutex> lock(mu);
      auto it = cache.find(k);
      if (it != cache.end()) return it->second;
    }
    CacheEntry e;
    PriceVector pv = p->prices_from_units(units);
    ObjectiveEval ev = objective(*p, pv);
    e.value = ev.value;
    e.converged = ev.converged;
    if (std::isfinite(ev.value)) {
      if (constrained) {
        if (p->constraints.enforce_cap) e.vio_cap = std::max(0.0, -ev.slack.cap);
        if (p->constraints.enforce_dominance) e.vio_dom = std::max(0.0, -ev.slack.dominance);
      }
      e.feasible = e.vio_cap == 0.0 && e.vio_dom == 0.0;
    }
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(std::move(k), e);
    return e;
  }
};

}  // namespace

DesignOutcome design(const DesignProblem& p, const OptimizerConfig& cfg,
                     const std::vector<std::vector<double>>& warm_starts) {
  cfg.validate();
  const std::size_t n = p.dimension();
  if (n == 0) throw InputError("design problem has no priceable elements");
  std::vector<double> lb(n, p.lb), ub(n, p.ub);

  DesignEvaluator de;
  de.p = &p;
  de.constrained = p.constraints.enforce_cap || p.constraints.enforce_dominance;

  // best feasible incumbent, deterministic tie-breaking on the vector
  std::vector<double> best_x;
  double best_v = std::numeric_limits<double>::infinity();
  bool have_feasible = false;
  std::mutex best_mu;
  auto consider = [&](std::span<const double> x, const CacheEntry& e) {
    if (!e.feasible) return;
    std::lock_guard<std::mutex> lock(best_mu);
    std::vector<double> xv(x.begin(), x.end());
    if (!have_feasible || e.value < best_v || (e.value == best_v && xv < best_x)) {
      best_x = std::move(xv);
      best_v = e.value;
      have_feasible = true;
    }
  };

  DesignOutcome out;
  out.seed = cfg.seed;
  double penalty = cfg.penalty_coef;

  for (int restart = 0; restart < cfg.restarts; ++restart) {
    auto penalized = [&](std::span<const double> x) -> GaEval {
      CacheEntry e = de.evaluate(x);
      consider(x, e);
      if (!std::isfinite(e.value)) return {e.value, false};
      // violations in keur so the quadratic term stays commensurate
      double v = e.value + penalty * (std::pow(e.vio_cap / 1000.0, 2.0) +
                                      std::pow(e.vio_dom / 1000.0, 2.0));
      return {v, e.feasible};
    };

    std::vector<std::vector<double>> seeds = warm_starts;
    seeds.emplace_back(n, 0.0);  // zero prices: always feasible
    if (p.lb > 0.0 || p.ub < 0.0) seeds.back().assign(n, std::clamp(0.0, p.lb, p.ub));
    if (have_feasible) seeds.push_back(best_x);

    OptimizerConfig run = cfg;
    run.seed = cfg.seed + static_cast<std::uint64_t>(restart);
    GaResult ga = ga_core(penalized, lb, ub, run, seeds, static_cast<std::uint64_t>(restart));
    out.evaluations += ga.evaluations;
    int offset = restart * (cfg.generations + 1);
    for (auto tp : ga.trace) {
      tp.generation += offset;
      out.trace.push_back(tp);
    }
    if (!have_feasible) penalty *= 2.0;
  }

  // simplex polish around the incumbent
  if (cfg.polish_budget > 0 && have_feasible) {
    auto polish_fn = [&](std::span<const double> x) {
      CacheEntry e = de.evaluate(x);
      consider(x, e);
      if (!std::isfinite(e.value)) return e.value;
      return e.value + penalty * (std::pow(e.vio_cap / 1000.0, 2.0) +
                                  std::pow(e.vio_dom / 1000.0, 2.0));
    };
    nelder_mead(polish_fn, best_x, lb, ub, cfg.polish_budget);
  }

  out.feasible = have_feasible;
  if (!have_feasible) {
    // best effort: return the least-violating point seen
    double least = std::numeric_limits<double>::infinity();
    for (const auto& [k, e] : de.cache) {
      if (!e.converged) continue;
      double vio = e.vio_cap + e.vio_dom;
      if (vio < least) {
        least = vio;
        best_x.assign(k.size(), 0.0);
        for (std::size_t i = 0; i < k.size(); ++i) best_x[i] = static_cast<double>(k[i]) * 1e-6;
      }
    }
    if (best_x.empty()) best_x.assign(n, 0.0);
  }

  out.units = best_x;
  out.prices = p.prices_from_units(best_x);
  out.eval = objective(p, out.prices);
  return out;
}

MultiStartOutcome multi_start_agreement(const DesignProblem& p, const OptimizerConfig& cfg,
                                        int n_starts) {
  if (n_starts < 2) throw InputError("multi-start needs at least two starts");
  MultiStartOutcome out;
  bool have = false;
  for (int i = 0; i < n_starts; ++i) {
    OptimizerConfig c = cfg;
    c.seed = cfg.seed + static_cast<std::uint64_t>(i) * 1000003ULL;
    DesignOutcome d = design(p, c);
    out.objectives.push_back(d.eval.value);
    if (!have || d.eval.value < out.best.eval.value) {
      out.best = std::move(d);
      have = true;
    }
  }
  double best = out.best.eval.value;
  int close = 0;
  for (double v : out.objectives)
    if (std::fabs(v - best) <= 0.01 * std::max(1e-12, std::fabs(best))) ++close;
  out.agreement = static_cast<double>(close) / static_cast<double>(n_starts);
  return out;
}

}  // namespace tripprice
