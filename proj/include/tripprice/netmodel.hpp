#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tripprice/common.hpp"

namespace tripprice {

enum class LinkCategory { highway, urban_secondary, urban_local, walk, metro, bike };

std::string to_string(LinkCategory c);
LinkCategory link_category_from_string(const std::string& s);

struct LinkSpec {
  std::string from, to;
  double length_km = 0.0;
  std::optional<double> capacity_veh_h;  // absent on uncongested links
  double bpr_alpha = 0.0;
  double bpr_beta = 4.0;
  LinkCategory category = LinkCategory::urban_secondary;
  bool tolled_highway = false;
  std::map<std::string, double> speed_kmh;  // mode id -> free-flow speed
  std::map<std::string, double> wait_h;     // mode id -> constant waiting time

  std::string id() const { return from + "-" + to; }
  bool allows(const std::string& mode) const { return speed_kmh.count(mode) > 0; }
};

enum class ConsumptionKind { ice, constant, none };

struct ModeSpec {
  std::string id;
  double beta_tt = 1.0;  // reciprocal substitution coefficient of travel time
  ConsumptionKind consumption = ConsumptionKind::none;
  double consumption_rate = 0.0;  // kWh/pax-km when consumption == constant
  bool user_pays_energy = true;   // false for metro: energy cost invisible to users
  double flat_fare_eur = 0.0;     // per-passenger fare on every path of this mode
  bool congests = false;          // flows enter (and suffer) the BPR function
  bool overlap_correction = false;  // c-logit commonality factor applies
};

struct UserClass {
  std::string id;
  double vot_eur_h = 0.0;
  double vowt_eur_h = 0.0;
  double share = 0.0;                          // psi^q, OD-uniform
  std::map<std::string, double> energy_price;  // mode -> eur/l or eur/kWh
  std::map<std::string, double> occupancy;     // mode -> pax/veh

  double zeta(const std::string& mode) const;
  double eta(const std::string& mode) const;
};

struct OdPair {
  std::string id, origin, destination;
  double demand_pax_h = 0.0;
};

struct PathSpec {
  int id = 0;  // external id, unique
  int od = -1;
  int mode = -1;
  std::vector<std::string> nodes;
  std::vector<int> links;  // derived incidence column
};

struct ChoiceParams {
  double theta_path = 1.0;  // theta^K
  double theta_mode = 1.0;  // theta^M
  double beta_sf = 0.0;
  double alpha_sf = 1.0;
  double fare_car_km = 0.0;    // per-km fare on tolled-highway links
  double kwh_per_liter = 8.9;  // fuel-to-energy conversion
};

/// Immutable after finalize(); safe to share across concurrent evaluators.
struct Scenario {
  std::string name;
  std::vector<ModeSpec> modes;
  std::vector<LinkSpec> links;
  std::vector<UserClass> classes;
  std::vector<OdPair> ods;
  std::vector<PathSpec> paths;
  ChoiceParams params;

  // ---- derived, filled by finalize() ----
  std::vector<std::vector<int>> paths_by_od;                    // od -> path idx
  std::vector<std::vector<std::vector<int>>> paths_by_od_mode;  // od -> mode -> path idx
  std::vector<double> path_length_km;
  std::vector<double> path_tolled_km;
  std::vector<double> path_flat_fare;
  // Per path, the list of (other path in same od/mode block, shared link ids).
  std::vector<std::vector<std::pair<int, std::vector<int>>>> path_overlaps;

  int mode_index(const std::string& id) const;
  int od_index(const std::string& id) const;
  int link_index(const std::string& from, const std::string& to) const;
  int path_index_by_id(int path_id) const;
  double total_demand() const;

  /// Validates all invariants and builds the derived tables. Throws
  /// InputError naming the offending element.
  void finalize();
};

/// Parse a scenario from its text form. `origin` is used in error messages.
Scenario load_scenario(const std::string& text, const std::string& origin = "<string>");
Scenario load_scenario_file(const std::filesystem::path& file);

/// Canonical serialization: load(canonical_text(s)) reproduces the exact
/// same canonical text (byte-stable round trip).
std::string canonical_text(const Scenario& s);
void save_scenario_file(const Scenario& s, const std::filesystem::path& file);

/// Built-in scenarios: "two-link", "nd-car-only", "nd-multimodal".
Scenario builtin_scenario(const std::string& name);

/// Resolve either a builtin name or a scenario file path.
Scenario resolve_scenario(const std::string& builtin, const std::string& file);

/// Link-path incidence. Columns follow scenario path order; per-(mode,OD)
/// blocks are exposed through Scenario::paths_by_od_mode.
struct Incidence {
  std::size_t n_links = 0, n_paths = 0;
  std::vector<std::vector<int>> path_links;  // column -> link ids

  bool at(std::size_t link, std::size_t path) const;
  /// f = Delta * h
  std::vector<double> link_flows(std::span<const double> path_flows) const;
};

Incidence incidence(const Scenario& s);

double path_length(const Scenario& s, int path_id);  // km, by external path id

/// Stable textual link reference: "from-to", or "from-to@k" for the k-th
/// parallel copy (k >= 2).
std::string link_ref(const Scenario& s, int link);
int resolve_link_ref(const Scenario& s, const std::string& ref);

}  // namespace tripprice
