#include "tripprice/runrecord.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tripprice {

using nlohmann::json;

namespace {

json weights_json(const Weights& w) {
  return json{{"eff", w.eff}, {"env", w.env}, {"acc", w.acc}, {"equ_q", w.equ_q},
              {"equ_w", w.equ_w}};
}

Weights weights_from(const json& j) {
  Weights w;
  w.eff = j.value("eff", 0.0);
  w.env = j.value("env", 0.0);
  w.acc = j.value("acc", 0.0);
  w.equ_q = j.value("equ_q", 0.0);
  w.equ_w = j.value("equ_w", 0.0);
  return w;
}

json metrics_json(const MetricsReport& m) {
  json j;
  for (const auto& row : flatten(m)) j[row.key] = row.value;
  j["mapd_defined"] = m.mapd_defined;
  j["converged"] = m.converged;
  j["iterations"] = m.iterations;
  j["residual"] = m.residual;
  j["total_demand_pax"] = m.total_demand_pax;
  j["unit_satisfaction"] = m.unit_satisfaction;
  return j;
}

MetricsReport metrics_from(const json& j) {
  MetricsReport m;
  m.tts_pax_h = j.value("tts_pax_h", 0.0);
  m.tts_veh_h = j.value("tts_veh_h", 0.0);
  m.avg_min_per_pax = j.value("avg_travel_time_min_pax", 0.0);
  m.tec_kwh = j.value("tec_kwh", 0.0);
  m.tgc_eur = j.value("tgc_eur", 0.0);
  m.ua_eur = j.value("ua_eur", 0.0);
  m.pc_eur = j.value("pc_eur", 0.0);
  m.mapd_q = j.value("mapd_q", 0.0);
  m.mapd_w = j.value("mapd_w", 0.0);
  m.mapd = j.value("mapd", 0.0);
  m.mapd_defined = j.value("mapd_defined", true);
  m.traffic_pax_km_total = j.value("traffic_kpax_km", 0.0) * 1000.0;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string prefix = "traffic_kpax_km.";
    if (it.key().rfind(prefix, 0) == 0)
      m.traffic_pax_km[it.key().substr(prefix.size())] = it.value().get<double>() * 1000.0;
  }
  m.avg_flow_capacity = j.value("avg_flow_capacity", 0.0);
  m.alt_mode_split = j.value("alt_mode_split", 0.0);
  m.revenue.tolls_eur = j.value("revenue_tolls_eur", 0.0);
  m.revenue.incentives_eur = j.value("revenue_incentives_eur", 0.0);
  m.revenue.net_eur = j.value("revenue_net_eur", 0.0);
  m.revenue.highway_eur = j.value("revenue_highway_eur", 0.0);
  m.revenue.metro_fares_eur = j.value("revenue_metro_eur", 0.0);
  m.revenue.per_pax_eur = j.value("revenue_per_pax_eur", 0.0);
  m.converged = j.value("converged", true);
  m.iterations = j.value("iterations", 0);
  m.residual = j.value("residual", 0.0);
  m.total_demand_pax = j.value("total_demand_pax", 0.0);
  if (j.contains("unit_satisfaction"))
    m.unit_satisfaction = j["unit_satisfaction"].get<std::vector<std::vector<double>>>();
  return m;
}

}  // namespace

Scenario RunRecord::scenario() const { return load_scenario(scenario_text, scenario_name); }

std::string to_json(const RunRecord& r) {
  json j;
  j["tool"] = "tripprice";
  j["version"] = r.tool_version;
  j["command"] = r.command;
  j["timestamp"] = r.timestamp;
  j["seed"] = r.seed;
  j["scenario"] = {{"name", r.scenario_name}, {"text", r.scenario_text}};
  j["scheme"] = to_string(r.scheme);
  j["weights"] = weights_json(r.weights);
  j["prices"] = {{"kind", to_string(r.prices.kind)},
                 {"pi", r.prices.pi},
                 {"unit", r.prices.unit},
                 {"lb", r.prices.lb},
                 {"ub", r.prices.ub}};
  j["solver"] = {{"tol", r.solver.tol},
                 {"max_iter", r.solver.max_iter},
                 {"damping", r.solver.damping_string()}};
  j["equilibrium"] = {{"converged", r.converged},
                      {"iterations", r.iterations},
                      {"residual", r.residual}};
  j["objective"] = r.objective_value;
  j["metrics"] = metrics_json(r.metrics);
  return j.dump(2) + "\n";
}

RunRecord record_from_json(const std::string& text) {
  json j = json::parse(text);
  RunRecord r;
  r.tool_version = j.value("version", "");
  r.command = j.value("command", "");
  r.timestamp = j.value("timestamp", "");
  r.seed = j.value("seed", 0ULL);
  r.scenario_name = j["scenario"].value("name", "");
  r.scenario_text = j["scenario"].value("text", "");
  r.scheme = scheme_from_string(j.value("scheme", "none"));
  r.weights = weights_from(j.value("weights", json::object()));
  const auto& jp = j["prices"];
  r.prices.kind = scheme_from_string(jp.value("kind", "none"));
  r.prices.pi = jp.value("pi", std::vector<double>{});
  r.prices.unit = jp.value("unit", std::vector<double>{});
  r.prices.lb = jp.value("lb", 0.0);
  r.prices.ub = jp.value("ub", 0.0);
  const auto& js = j["solver"];
  r.solver.tol = js.value("tol", 1e-6);
  r.solver.max_iter = js.value("max_iter", 5000);
  r.solver.damping = SolverConfig::damping_from_string(js.value("damping", "fixed:0.25"),
                                                       &r.solver.lambda);
  r.converged = j["equilibrium"].value("converged", true);
  r.iterations = j["equilibrium"].value("iterations", 0);
  r.residual = j["equilibrium"].value("residual", 0.0);
  r.objective_value = j.value("objective", 0.0);
  r.metrics = metrics_from(j.value("metrics", json::object()));
  return r;
}

void save_record(const RunRecord& r, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("cannot write record " + file.string());
  out << to_json(r);
}

RunRecord load_record(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open record " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return record_from_json(ss.str());
  } catch (const json::exception& e) {
    throw InputError(file.string() + ": " + e.what());
  }
}

std::string iso_timestamp_now() {
  std::time_t t;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"))
    t = static_cast<std::time_t>(std::atoll(env));
  else
    t = std::time(nullptr);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string metrics_csv(const MetricsReport& r, const MetricsReport* baseline) {
  std::string out = "metric,value,delta_vs_baseline\n";
  for (const auto& row : flatten(r, baseline)) {
    out += row.key + "," + format_number(row.value) + ",";
    if (row.delta) out += format_number(*row.delta);
    out += "\n";
  }
  return out;
}

}  // namespace tripprice
