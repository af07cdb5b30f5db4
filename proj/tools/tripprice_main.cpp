#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tripprice/classical.hpp"
#include "tripprice/runrecord.hpp"

namespace fs = std::filesystem;
using namespace tripprice;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;    // usage / input error
constexpr int kExitNumeric = 3;  // numerical failure

struct GlobalOpts {
  std::string out = ".";
  std::uint64_t seed = 1;
  SolverConfig solver;
  std::string damping = "fixed:0.25";

  SolverConfig make_solver() const {
    SolverConfig c = solver;
    c.damping = SolverConfig::damping_from_string(damping, &c.lambda);
    return c;
  }
  fs::path out_path(const std::string& name) const {
    fs::create_directories(out);
    return fs::path(out) / name;
  }
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  out << text;
}

std::string path_table_csv(const Scenario& s, const EquilibriumResult& r,
                           const PriceVector& pv) {
  // one row per path with pax flow, travel time, unit price
  LinkCostTable costs = compute_link_costs(s, r.link_flow_congesting);
  auto pax = r.pax_path_flow(s);
  std::string out = "od,path,mode,flow_pax_h,tt_min,price_eur_km\n";
  std::vector<int> order(s.paths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return s.paths[a].id < s.paths[b].id; });
  char buf[160];
  for (int k : order) {
    const auto& p = s.paths[k];
    double tt_min = 0.0;
    for (int a : p.links) tt_min += costs.tt[p.mode][a] * 60.0;
    double unit = pv.pi.empty() ? 0.0 : pv.pi[k] / s.path_length_km[k];
    std::snprintf(buf, sizeof buf, "%s,%d,%s,%.0f,%.0f,%.1f\n", s.ods[p.od].id.c_str(), p.id,
                  s.modes[p.mode].id.c_str(), pax[k], tt_min, unit);
    out += buf;
  }
  return out;
}

PriceVector load_prices_file(const Scenario& s, const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open prices file " + file.string());
  std::string line, kind;
  double lb = 0, ub = 0;
  std::vector<std::pair<std::string, double>> entries;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string a, b;
    if (!(ss >> a >> b)) continue;
    if (a == "kind") kind = b;
    else if (a == "lb") lb = std::atof(b.c_str());
    else if (a == "ub") ub = std::atof(b.c_str());
    else entries.emplace_back(a, std::atof(b.c_str()));
  }
  if (kind == "trip") {
    std::vector<int> mask;
    std::vector<double> units;
    for (const auto& [elem, u] : entries) {
      int k = s.path_index_by_id(std::atoi(elem.c_str()));
      if (k < 0) throw InputError(file.string() + ": unknown path id " + elem);
      mask.push_back(k);
      units.push_back(u);
    }
    return make_trip_prices(s, units, mask, lb, ub);
  }
  if (kind == "road") {
    std::vector<int> mask;
    std::vector<double> units;
    for (const auto& [elem, u] : entries) {
      mask.push_back(resolve_link_ref(s, elem));
      units.push_back(u);
    }
    return road_to_path_prices(s, units, mask, lb, ub);
  }
  throw InputError(file.string() + ": prices file needs 'kind trip' or 'kind road'");
}

std::string prices_file_text(const Scenario& s, const PriceVector& pv) {
  std::string out = "# tripprice prices\nkind " + to_string(pv.kind) + "\n";
  out += "lb " + format_number(pv.lb) + "\nub " + format_number(pv.ub) + "\n";
  if (pv.kind == SchemeKind::road) {
    for (std::size_t a = 0; a < s.links.size(); ++a)
      out += link_ref(s, static_cast<int>(a)) + " " + format_number(pv.unit[a]) + "\n";
  } else if (pv.kind == SchemeKind::trip) {
    for (std::size_t k = 0; k < s.paths.size(); ++k)
      out += std::to_string(s.paths[k].id) + " " + format_number(pv.unit[k]) + "\n";
  }
  return out;
}

RunRecord base_record(const std::string& command, const Scenario& s, const SolverConfig& solver,
                      std::uint64_t seed) {
  RunRecord r;
  r.command = command;
  r.scenario_name = s.name;
  r.scenario_text = canonical_text(s);
  r.solver = solver;
  r.seed = seed;
  r.timestamp = iso_timestamp_now();
  return r;
}

int cmd_assign(const GlobalOpts& g, const std::string& builtin, const std::string& file,
               const std::string& prices_file) {
  Scenario s = resolve_scenario(builtin, file);
  SolverConfig solver = g.make_solver();
  PriceVector pv = prices_file.empty() ? PriceVector::zero(s)
                                       : load_prices_file(s, prices_file);
  EquilibriumResult r = solve_sue(s, pv.pi, solver);
  RunRecord rec = base_record("assign", s, solver, g.seed);
  rec.scheme = pv.kind;
  rec.prices = pv;
  rec.converged = r.converged;
  rec.iterations = r.iterations;
  rec.residual = r.residual;
  rec.metrics = make_report(s, r, pv.pi);
  save_record(rec, g.out_path("record.json"));
  write_text(g.out_path("paths.csv"), path_table_csv(s, r, pv));
  std::printf("assign %s: %s after %d iterations (residual %.3g)\n", s.name.c_str(),
              r.converged ? "converged" : "NOT CONVERGED", r.iterations, r.residual);
  std::printf("  avg travel time %.1f min/pax, traffic %.1f kpax-km\n",
              rec.metrics.avg_min_per_pax, rec.metrics.traffic_pax_km_total / 1000.0);
  return r.converged ? kExitOk : kExitNumeric;
}

int cmd_calibrate(const GlobalOpts& g, const std::string& builtin, const std::string& file,
                  double target) {
  Scenario s = resolve_scenario(builtin, file);
  SolverConfig solver = g.make_solver();
  std::vector<double> targets(s.ods.size(), target);
  CalibrationResult cal = calibrate_demand(s, targets, solver);
  Scenario out = s;
  for (std::size_t w = 0; w < out.ods.size(); ++w) out.ods[w].demand_pax_h = cal.demand[w];
  out.name = s.name + "-calibrated";
  save_scenario_file(out, g.out_path("calibrated-scenario.txt"));

  EquilibriumResult r = solve_sue(out, {}, solver);
  RunRecord rec = base_record("calibrate", out, solver, g.seed);
  rec.converged = r.converged;
  rec.iterations = r.iterations;
  rec.residual = r.residual;
  rec.metrics = make_report(out, r, {});
  save_record(rec, g.out_path("record.json"));
  std::printf("calibrate %s: %d sweeps\n", s.name.c_str(), cal.sweeps);
  for (std::size_t w = 0; w < s.ods.size(); ++w)
    std::printf("  %s: demand %.1f pax/h (car flow %.1f, target %.0f)\n", s.ods[w].id.c_str(),
                cal.demand[w], cal.car_flow[w], targets[w]);
  std::printf("  alternative-mode split %.1f%%\n", 100.0 * rec.metrics.alt_mode_split);
  return kExitOk;
}

int cmd_design(const GlobalOpts& g, const std::string& builtin, const std::string& file,
               const std::string& scheme_str, const std::string& objective_str,
               bool revenue_neutral, double b, bool first_best, OptimizerConfig opt,
               const std::string& warm_record) {
  Scenario s = resolve_scenario(builtin, file);
  SolverConfig solver = g.make_solver();
  SchemeKind scheme = scheme_from_string(scheme_str);
  Weights w = Weights::from_objective(objective_str);
  double lb = revenue_neutral ? -5.0 : 0.0, ub = 5.0;
  RevenueConstraints rc;
  if (revenue_neutral) {
    rc.enforce_cap = true;
    rc.enforce_dominance = true;
    rc.b = b;
  }
  DesignProblem p = make_design_problem(s, scheme, w, lb, ub, rc, solver, first_best);
  opt.seed = g.seed;

  std::vector<std::vector<double>> warm;
  if (!warm_record.empty()) {
    RunRecord wr = load_record(warm_record);
    if (wr.scenario_text != canonical_text(s))
      throw InputError("warm-start record is for a different scenario");
    if (wr.prices.kind == scheme) {
      std::vector<double> u;
      for (int e : p.priceable) u.push_back(wr.prices.unit[e]);
      warm.push_back(std::move(u));
    } else if (wr.prices.kind == SchemeKind::road && scheme == SchemeKind::trip) {
      // a road solution is a feasible trip point: unit = pi / length
      std::vector<double> u;
      for (int k : p.priceable) u.push_back(wr.prices.pi[k] / s.path_length_km[k]);
      warm.push_back(std::move(u));
    } else {
      throw InputError("warm start must be a road record (for trip design) or same scheme");
    }
  }

  DesignOutcome d = design(p, opt, warm);

  RunRecord rec = base_record("design", s, solver, opt.seed);
  rec.scheme = scheme;
  rec.weights = w;
  rec.prices = d.prices;
  rec.converged = d.eval.report.converged;
  rec.iterations = d.eval.report.iterations;
  rec.residual = d.eval.report.residual;
  rec.objective_value = d.eval.value;
  rec.metrics = d.eval.report;
  save_record(rec, g.out_path("record.json"));
  write_text(g.out_path("prices.csv"), prices_file_text(s, d.prices));
  std::string trace = "generation,best,mean,feasible_fraction\n";
  for (const auto& tp : d.trace)
    trace += std::to_string(tp.generation) + "," + format_number(tp.best) + "," +
             format_number(tp.mean) + "," + format_number(tp.feasible_fraction) + "\n";
  write_text(g.out_path("trace.csv"), trace);

  std::printf("design %s %s/%s: objective %.4f after %zu evaluations (seed %llu)\n",
              s.name.c_str(), scheme_str.c_str(), objective_str.c_str(), d.eval.value,
              d.evaluations, static_cast<unsigned long long>(opt.seed));
  const auto& c = d.eval.components;
  std::printf("  dTTS %+.1f%%  dTEC %+.1f%%  dPC %+.1f%%  dMAPD_Q %+.1f%%  dMAPD_W %+.1f%%\n",
              100 * c.d_tts, 100 * c.d_tec, 100 * c.d_pc, 100 * c.d_mapd_q, 100 * c.d_mapd_w);
  if (revenue_neutral)
    std::printf("  net revenue %.1f eur (cap %.0f), tolls %.1f, incentives %.1f\n",
                d.eval.report.revenue.net_eur, b, d.eval.report.revenue.tolls_eur,
                d.eval.report.revenue.incentives_eur);
  if (!d.feasible) {
    std::fprintf(stderr, "no feasible solution found within budget\n");
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_evaluate(const GlobalOpts& g, const std::string& baseline_file,
                 const std::string& priced_file) {
  RunRecord rb = load_record(baseline_file);
  RunRecord rp = load_record(priced_file);
  if (rb.scenario_text != rp.scenario_text)
    throw InputError("records come from different scenarios");
  Scenario s = rb.scenario();
  EquilibriumResult eb = solve_sue(s, rb.prices.pi.empty() ? std::vector<double>{} : rb.prices.pi,
                                   rb.solver);
  EquilibriumResult ep = solve_sue(s, rp.prices.pi.empty() ? std::vector<double>{} : rp.prices.pi,
                                   rp.solver);
  MetricsReport mb = make_report(s, eb, rb.prices.pi);
  MetricsReport mp = make_report(s, ep, rp.prices.pi);
  write_text(g.out_path("evaluate.csv"), metrics_csv(mp, &mb));
  ObjectiveDeltas d = objective_deltas(mb, mp);
  std::printf("evaluate %s: dTTS %+.1f%% dTEC %+.1f%% dPC %+.1f%% dMAPD_Q %+.1f%% dMAPD_W %+.1f%%\n",
              s.name.c_str(), 100 * d.d_tts, 100 * d.d_tec, 100 * d.d_pc, 100 * d.d_mapd_q,
              100 * d.d_mapd_w);
  ParetoCheck pc = pareto_check(s, ep, eb);
  std::printf("  pareto-improving: %s\n", pc.all_ok ? "yes" : "no");
  return (eb.converged && ep.converged) ? kExitOk : kExitNumeric;
}

int cmd_compare(const GlobalOpts& g, const std::string& reference,
                const std::vector<std::string>& records) {
  RunRecord ref = load_record(reference);
  std::vector<RunRecord> runs;
  for (const auto& f : records) {
    runs.push_back(load_record(f));
    if (runs.back().scenario_text != ref.scenario_text)
      throw InputError("record " + f + " is from a different scenario than the reference");
  }
  auto ref_rows = flatten(ref.metrics);
  std::string csv = "metric,reference";
  for (const auto& r : runs) csv += "," + r.command + ":" + to_string(r.scheme);
  csv += "\n";
  for (std::size_t i = 0; i < ref_rows.size(); ++i) {
    csv += ref_rows[i].key + "," + format_number(ref_rows[i].value);
    for (const auto& r : runs) {
      auto rows = flatten(r.metrics, &ref.metrics);
      csv += "," + format_number(rows[i].value);
      if (rows[i].delta) {
        char buf[32];
        std::snprintf(buf, sizeof buf, " (%+.0f%%)", 100.0 * *rows[i].delta);
        csv += buf;
      }
    }
    csv += "\n";
  }
  write_text(g.out_path("compare.csv"), csv);
  std::printf("compare: %zu runs against %s -> %s\n", runs.size(), ref.scenario_name.c_str(),
              g.out_path("compare.csv").string().c_str());
  return kExitOk;
}

int cmd_classical(const std::string& instance_file, double revenue_target, double theta) {
  classical::TwoPathInstance inst = instance_file.empty()
                                        ? classical::linear_instance()
                                        : classical::load_instance_file(instance_file);
  auto ue = classical::solve_due(inst);
  auto so = classical::solve_so(inst);
  auto msc = classical::msc_tolls(inst);
  std::printf("two-path instance: g1 = %s + %s h^%s, g2 = %s + %s h^%s, d = %s\n",
              format_number(inst.g1.a).c_str(), format_number(inst.g1.b).c_str(),
              format_number(inst.g1.p).c_str(), format_number(inst.g2.a).c_str(),
              format_number(inst.g2.b).c_str(), format_number(inst.g2.p).c_str(),
              format_number(inst.demand).c_str());
  std::printf("UE flows  h = (%.4f, %.4f), costs (%.4f, %.4f)\n", ue.h1, ue.h2, inst.g1(ue.h1),
              inst.g2(ue.h2));
  std::printf("SO flows  h = (%.4f, %.4f), total cost %.4f (UE %.4f)\n", so.h1, so.h2,
              classical::total_cost(inst, so), classical::total_cost(inst, ue));
  std::printf("MSC tolls gamma = (%.4f, %.4f)\n", msc[0], msc[1]);
  auto tolled = classical::solve_due(inst, msc[0], msc[1]);
  std::printf("UE with MSC tolls -> (%.4f, %.4f)\n", tolled.h1, tolled.h2);
  try {
    auto alt = classical::alternative_valid_tolls(inst, revenue_target);
    auto alt_ue = classical::solve_due(inst, alt[0], alt[1]);
    std::printf("valid tolls at revenue %s: (%.4f, %.4f), tolled UE (%.4f, %.4f)\n",
                format_number(revenue_target).c_str(), alt[0], alt[1], alt_ue.h1, alt_ue.h2);
  } catch (const SolveError& e) {
    std::printf("alternative tolls: %s\n", e.what());
  }
  auto sue = classical::logit_sue(inst, msc[0], msc[1], theta);
  std::printf("logit SUE with MSC tolls (theta %.3g): (%.4f, %.4f)\n", theta, sue.h1, sue.h2);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tripprice: design and evaluate congestion pricing schemes (trip and road "
               "pricing) on multimodal networks under stochastic user equilibrium"};
  app.require_subcommand(1);
  GlobalOpts g;
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--tol", g.solver.tol, "SUE convergence tolerance");
  app.add_option("--max-iter", g.solver.max_iter, "SUE iteration cap");
  app.add_option("--damping", g.damping, "averaging rule: msa or fixed:<lambda>");

  std::string builtin, scenario_file, prices_file, scheme = "trip", objective = "eff";
  std::string warm_record, baseline_file, priced_file, reference_file, instance_file;
  std::vector<std::string> record_files;
  bool revenue_neutral = false, first_best = false;
  double b = 1000.0, target = 2000.0, revenue_target = 0.0, theta = 1.0;
  OptimizerConfig opt;

  auto add_scenario_opts = [&](CLI::App* c) {
    c->add_option("--builtin", builtin, "builtin scenario: two-link | nd-car-only | nd-multimodal");
    c->add_option("--scenario", scenario_file, "scenario file");
  };

  CLI::App* assign = app.add_subcommand("assign", "solve the SUE for given prices");
  add_scenario_opts(assign);
  assign->add_option("--prices", prices_file, "prices file (see design output)");

  CLI::App* design_cmd = app.add_subcommand("design", "optimize a pricing scheme");
  add_scenario_opts(design_cmd);
  design_cmd->add_option("--scheme", scheme, "trip | road");
  design_cmd->add_option("--objective", objective, "eff | env | acpt | sequ | wequ | all");
  design_cmd->add_flag("--revenue-neutral", revenue_neutral, "bounded net revenue, incentives allowed");
  design_cmd->add_option("--b", b, "net revenue cap for revenue-neutral designs (eur)");
  design_cmd->add_flag("--first-best", first_best, "price all elements, not only car ones");
  design_cmd->add_option("--pop", opt.population, "GA population");
  design_cmd->add_option("--gens", opt.generations, "GA generations");
  design_cmd->add_option("--restarts", opt.restarts, "GA restarts");
  design_cmd->add_option("--polish", opt.polish_budget, "simplex polish evaluations");
  design_cmd->add_option("--warm-start", warm_record, "record whose prices seed the population");

  CLI::App* evaluate = app.add_subcommand("evaluate", "recompute metrics of a priced run vs a baseline");
  evaluate->add_option("--baseline", baseline_file, "baseline record")->required();
  evaluate->add_option("--priced", priced_file, "priced record")->required();

  CLI::App* compare = app.add_subcommand("compare", "tabulate runs against a reference");
  compare->add_option("--reference", reference_file, "reference record")->required();
  compare->add_option("records", record_files, "records to compare")->required();

  CLI::App* calibrate = app.add_subcommand("calibrate", "calibrate demand to target car flows");
  add_scenario_opts(calibrate);
  calibrate->add_option("--target", target, "car pax/h target per OD");

  CLI::App* classical_cmd = app.add_subcommand("classical", "two-path UE/SO/MSC analysis");
  classical_cmd->add_option("--instance", instance_file, "instance file (default: linear desk instance)");
  classical_cmd->add_option("--revenue-target", revenue_target, "revenue for the alternative toll pair");
  classical_cmd->add_option("--theta", theta, "logit dispersion for the SUE demonstration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*assign) return cmd_assign(g, builtin, scenario_file, prices_file);
    if (*design_cmd)
      return cmd_design(g, builtin, scenario_file, scheme, objective, revenue_neutral, b,
                        first_best, opt, warm_record);
    if (*evaluate) return cmd_evaluate(g, baseline_file, priced_file);
    if (*compare) return cmd_compare(g, reference_file, record_files);
    if (*calibrate) return cmd_calibrate(g, builtin, scenario_file, target);
    if (*classical_cmd) return cmd_classical(instance_file, revenue_target, theta);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const SolveError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  }
  return kExitInput;
}
