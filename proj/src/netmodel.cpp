#include "tripprice/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace tripprice {

std::string to_string(LinkCategory c) {
  switch (c) {
    case LinkCategory::highway: return "highway";
    case LinkCategory::urban_secondary: return "urban-secondary";
    case LinkCategory::urban_local: return "urban-local";
    case LinkCategory::walk: return "walk";
    case LinkCategory::metro: return "metro";
    case LinkCategory::bike: return "bike";
  }
  return "?";
}

LinkCategory link_category_from_string(const std::string& s) {
  for (auto c : {LinkCategory::highway, LinkCategory::urban_secondary, LinkCategory::urban_local,
                 LinkCategory::walk, LinkCategory::metro, LinkCategory::bike})
    if (to_string(c) == s) return c;
  throw InputError("unknown link category '" + s + "'");
}

double UserClass::zeta(const std::string& mode) const {
  auto it = energy_price.find(mode);
  return it == energy_price.end() ? 0.0 : it->second;
}

double UserClass::eta(const std::string& mode) const {
  auto it = occupancy.find(mode);
  if (it == occupancy.end())
    throw InputError("class " + id + " has no occupancy for mode " + mode);
  return it->second;
}

int Scenario::mode_index(const std::string& id) const {
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (modes[i].id == id) return static_cast<int>(i);
  return -1;
}

int Scenario::od_index(const std::string& id) const {
  for (std::size_t i = 0; i < ods.size(); ++i)
    if (ods[i].id == id) return static_cast<int>(i);
  return -1;
}

int Scenario::link_index(const std::string& from, const std::string& to) const {
  for (std::size_t i = 0; i < links.size(); ++i)
    if (links[i].from == from && links[i].to == to) return static_cast<int>(i);
  return -1;
}

int Scenario::path_index_by_id(int path_id) const {
  for (std::size_t i = 0; i < paths.size(); ++i)
    if (paths[i].id == path_id) return static_cast<int>(i);
  return -1;
}

double Scenario::total_demand() const {
  double d = 0.0;
  for (const auto& od : ods) d += od.demand_pax_h;
  return d;
}

void Scenario::finalize() {
  if (modes.empty()) throw InputError(name + ": no modes");
  if (classes.empty()) throw InputError(name + ": no user classes");
  if (params.theta_path <= 0 || params.theta_mode <= 0)
    throw InputError(name + ": dispersion parameters must be positive");

  std::set<std::string> mode_ids;
  for (const auto& m : modes)
    if (!mode_ids.insert(m.id).second) throw InputError("duplicate mode id " + m.id);

  for (const auto& l : links) {
    if (l.length_km <= 0) throw InputError("link " + l.id() + ": length must be positive");
    if (l.capacity_veh_h && *l.capacity_veh_h <= 0)
      throw InputError("link " + l.id() + ": capacity must be positive");
    if (!l.capacity_veh_h && l.bpr_alpha != 0.0)
      throw InputError("link " + l.id() + ": uncongested link must have alpha_bpr = 0");
    if (l.speed_kmh.empty()) throw InputError("link " + l.id() + ": no mode speeds");
    for (const auto& [m, v] : l.speed_kmh) {
      if (mode_ids.count(m) == 0) throw InputError("link " + l.id() + ": unknown mode " + m);
      if (v <= 0) throw InputError("link " + l.id() + ": speed for " + m + " must be positive");
    }
    for (const auto& [m, w] : l.wait_h) {
      if (mode_ids.count(m) == 0) throw InputError("link " + l.id() + ": unknown mode " + m);
      if (w < 0) throw InputError("link " + l.id() + ": negative waiting time");
    }
  }

  double share_sum = 0.0;
  std::set<std::string> class_ids;
  for (const auto& q : classes) {
    if (!class_ids.insert(q.id).second) throw InputError("duplicate class id " + q.id);
    if (q.vot_eur_h <= 0 || q.vowt_eur_h <= 0)
      throw InputError("class " + q.id + ": VOT and VOWT must be positive");
    share_sum += q.share;
    for (const auto& [m, e] : q.occupancy) {
      if (mode_ids.count(m) == 0) throw InputError("class " + q.id + ": unknown mode " + m);
      if (e <= 0) throw InputError("class " + q.id + ": occupancy must be positive");
    }
  }
  if (std::fabs(share_sum - 1.0) > 1e-12)
    throw InputError(name + ": class shares sum to " + format_number(share_sum) + ", not 1");

  std::set<std::string> od_ids;
  for (const auto& od : ods) {
    if (!od_ids.insert(od.id).second) throw InputError("duplicate OD " + od.id);
    if (od.demand_pax_h < 0) throw InputError("OD " + od.id + ": negative demand");
  }

  // resolve paths: either from the node sequence (unique links required) or
  // from a pre-set link sequence (parallel-link disambiguation)
  std::set<int> path_ids;
  for (auto& p : paths) {
    std::string pname = "path " + std::to_string(p.id);
    if (!path_ids.insert(p.id).second) throw InputError("duplicate " + pname);
    if (p.od < 0 || p.od >= static_cast<int>(ods.size()))
      throw InputError(pname + ": dangling OD reference");
    if (p.mode < 0 || p.mode >= static_cast<int>(modes.size()))
      throw InputError(pname + ": dangling mode reference");
    const std::string& mode_id = modes[p.mode].id;
    if (p.links.empty()) {
      if (p.nodes.size() < 2) throw InputError(pname + ": needs at least two nodes");
      for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) {
        int found = -1;
        for (std::size_t a = 0; a < links.size(); ++a) {
          if (links[a].from != p.nodes[i] || links[a].to != p.nodes[i + 1]) continue;
          if (found >= 0)
            throw InputError(pname + ": parallel links " + p.nodes[i] + "-" + p.nodes[i + 1] +
                             " are ambiguous, use the via: link syntax");
          found = static_cast<int>(a);
        }
        if (found < 0)
          throw InputError(pname + ": no link " + p.nodes[i] + "-" + p.nodes[i + 1]);
        p.links.push_back(found);
      }
    } else {
      for (int a : p.links)
        if (a < 0 || a >= static_cast<int>(links.size()))
          throw InputError(pname + ": dangling link reference");
      for (std::size_t i = 0; i + 1 < p.links.size(); ++i)
        if (links[p.links[i]].to != links[p.links[i + 1]].from)
          throw InputError(pname + ": links do not chain at " + links[p.links[i]].id());
      p.nodes.clear();
      p.nodes.push_back(links[p.links.front()].from);
      for (int a : p.links) p.nodes.push_back(links[a].to);
    }
    for (int a : p.links)
      if (!links[a].allows(mode_id))
        throw InputError(pname + ": link " + links[a].id() + " does not allow mode " + mode_id);
    std::set<std::string> seen;
    for (const auto& n : p.nodes)
      if (!seen.insert(n).second) throw InputError(pname + ": not loop-free (node " + n + ")");
    if (p.nodes.front() != ods[p.od].origin || p.nodes.back() != ods[p.od].destination)
      throw InputError(pname + ": endpoints do not match OD " + ods[p.od].id);
  }

  // per-OD / per-mode grouping, in path-id order
  std::vector<int> order(paths.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return paths[a].id < paths[b].id; });

  paths_by_od.assign(ods.size(), {});
  paths_by_od_mode.assign(ods.size(), std::vector<std::vector<int>>(modes.size()));
  for (int k : order) {
    paths_by_od[paths[k].od].push_back(k);
    paths_by_od_mode[paths[k].od][paths[k].mode].push_back(k);
  }
  for (const auto& od : ods)
    if (paths_by_od[od_index(od.id)].empty())
      throw InputError("OD " + od.id + " has no paths");

  path_length_km.assign(paths.size(), 0.0);
  path_tolled_km.assign(paths.size(), 0.0);
  path_flat_fare.assign(paths.size(), 0.0);
  for (std::size_t k = 0; k < paths.size(); ++k) {
    for (int a : paths[k].links) {
      path_length_km[k] += links[a].length_km;
      if (links[a].tolled_highway) path_tolled_km[k] += links[a].length_km;
    }
    path_flat_fare[k] = modes[paths[k].mode].flat_fare_eur;
  }

  // shared-link lists inside each od/mode block (for the commonality factor)
  path_overlaps.assign(paths.size(), {});
  for (std::size_t w = 0; w < ods.size(); ++w) {
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const auto& block = paths_by_od_mode[w][m];
      for (int k : block) {
        std::set<int> mine(paths[k].links.begin(), paths[k].links.end());
        for (int j : block) {
          std::vector<int> shared;
          for (int a : paths[j].links)
            if (mine.count(a)) shared.push_back(a);
          path_overlaps[k].emplace_back(j, std::move(shared));
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// text format
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_num(const std::string& s, const std::string& where) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw InputError(where + ": cannot parse number '" + s + "'");
  return v;
}

std::map<std::string, double> parse_map(const std::string& s, const std::string& where) {
  std::map<std::string, double> out;
  if (s == "-") return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError(where + ": expected key=value in '" + s + "'");
    out[item.substr(0, eq)] = parse_num(item.substr(eq + 1), where);
  }
  return out;
}

std::string map_to_string(const std::map<std::string, double>& m) {
  if (m.empty()) return "-";
  std::string out;
  for (const auto& [k, v] : m) {
    if (!out.empty()) out += ",";
    out += k + "=" + format_number(v);
  }
  return out;
}

std::vector<std::string> split_dash(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, '-')) out.push_back(item);
  return out;
}

}  // namespace

Scenario load_scenario(const std::string& text, const std::string& origin) {
  Scenario s;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  auto where = [&] { return origin + ":" + std::to_string(lineno); };

  // paths are parsed last so all ids resolve
  struct PendingPath { int id; std::string od, mode, nodes; int line; };
  std::vector<PendingPath> pending;

  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks[0].front() == '[') {
      if (toks[0].back() != ']') throw InputError(where() + ": malformed section header");
      section = toks[0].substr(1, toks[0].size() - 2);
      continue;
    }
    if (section.empty()) {
      if (toks[0] == "name" && toks.size() == 2) { s.name = toks[1]; continue; }
      throw InputError(where() + ": content before any section");
    }
    if (section == "parameters") {
      if (toks.size() != 2) throw InputError(where() + ": expected 'key value'");
      double v = parse_num(toks[1], where());
      if (toks[0] == "theta_path") s.params.theta_path = v;
      else if (toks[0] == "theta_mode") s.params.theta_mode = v;
      else if (toks[0] == "beta_sf") s.params.beta_sf = v;
      else if (toks[0] == "alpha_sf") s.params.alpha_sf = v;
      else if (toks[0] == "fare_car_km") s.params.fare_car_km = v;
      else if (toks[0] == "kwh_per_liter") s.params.kwh_per_liter = v;
      else throw InputError(where() + ": unknown parameter '" + toks[0] + "'");
    } else if (section == "modes") {
      if (toks.size() != 8)
        throw InputError(where() + ": mode row needs 8 fields "
                                   "(id beta_tt consumption rate user_pays flat_fare congests overlap)");
      ModeSpec m;
      m.id = toks[0];
      m.beta_tt = parse_num(toks[1], where());
      if (toks[2] == "ice") m.consumption = ConsumptionKind::ice;
      else if (toks[2] == "const") m.consumption = ConsumptionKind::constant;
      else if (toks[2] == "none") m.consumption = ConsumptionKind::none;
      else throw InputError(where() + ": unknown consumption kind '" + toks[2] + "'");
      m.consumption_rate = parse_num(toks[3], where());
      m.user_pays_energy = toks[4] == "yes";
      m.flat_fare_eur = parse_num(toks[5], where());
      m.congests = toks[6] == "yes";
      m.overlap_correction = toks[7] == "yes";
      s.modes.push_back(std::move(m));
    } else if (section == "links") {
      if (toks.size() != 10)
        throw InputError(where() + ": link row needs 10 fields "
                                   "(from to length capacity alpha beta category tolled speeds waits)");
      LinkSpec l;
      l.from = toks[0];
      l.to = toks[1];
      l.length_km = parse_num(toks[2], where());
      if (toks[3] != "-") l.capacity_veh_h = parse_num(toks[3], where());
      l.bpr_alpha = parse_num(toks[4], where());
      l.bpr_beta = parse_num(toks[5], where());
      l.category = link_category_from_string(toks[6]);
      l.tolled_highway = toks[7] == "yes";
      l.speed_kmh = parse_map(toks[8], where());
      l.wait_h = parse_map(toks[9], where());
      s.links.push_back(std::move(l));
    } else if (section == "classes") {
      if (toks.size() != 6)
        throw InputError(where() + ": class row needs 6 fields (id vot vowt share zeta eta)");
      UserClass q;
      q.id = toks[0];
      q.vot_eur_h = parse_num(toks[1], where());
      q.vowt_eur_h = parse_num(toks[2], where());
      q.share = parse_num(toks[3], where());
      q.energy_price = parse_map(toks[4], where());
      q.occupancy = parse_map(toks[5], where());
      s.classes.push_back(std::move(q));
    } else if (section == "demand") {
      if (toks.size() != 4)
        throw InputError(where() + ": demand row needs 4 fields (od origin destination pax_h)");
      s.ods.push_back({toks[0], toks[1], toks[2], parse_num(toks[3], where())});
    } else if (section == "paths") {
      if (toks.size() != 4)
        throw InputError(where() + ": path row needs 4 fields (id od mode nodes)");
      pending.push_back({static_cast<int>(parse_num(toks[0], where())), toks[1], toks[2],
                         toks[3], lineno});
    } else {
      throw InputError(where() + ": unknown section [" + section + "]");
    }
  }

  for (const auto& pp : pending) {
    PathSpec p;
    p.id = pp.id;
    std::string pwhere = origin + ":" + std::to_string(pp.line) + ": path " + std::to_string(pp.id);
    p.od = s.od_index(pp.od);
    if (p.od < 0) throw InputError(pwhere + " references unknown OD " + pp.od);
    p.mode = s.mode_index(pp.mode);
    if (p.mode < 0) throw InputError(pwhere + " references unknown mode " + pp.mode);
    if (pp.nodes.rfind("via:", 0) == 0) {
      // explicit link sequence, comma separated "from-to" / "from-to@k" refs
      std::stringstream ss(pp.nodes.substr(4));
      std::string ref;
      while (std::getline(ss, ref, ',')) {
        try {
          p.links.push_back(resolve_link_ref(s, ref));
        } catch (const InputError& e) {
          throw InputError(pwhere + ": " + e.what());
        }
      }
    } else {
      p.nodes = split_dash(pp.nodes);
    }
    s.paths.push_back(std::move(p));
  }

  s.finalize();
  return s;
}

Scenario load_scenario_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot open scenario file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str(), file.string());
}

std::string canonical_text(const Scenario& s) {
  std::ostringstream out;
  out << "name " << s.name << "\n\n[parameters]\n";
  out << "theta_path " << format_number(s.params.theta_path) << "\n";
  out << "theta_mode " << format_number(s.params.theta_mode) << "\n";
  out << "beta_sf " << format_number(s.params.beta_sf) << "\n";
  out << "alpha_sf " << format_number(s.params.alpha_sf) << "\n";
  out << "fare_car_km " << format_number(s.params.fare_car_km) << "\n";
  out << "kwh_per_liter " << format_number(s.params.kwh_per_liter) << "\n";

  out << "\n[modes]\n# id beta_tt consumption rate user_pays flat_fare congests overlap\n";
  for (const auto& m : s.modes) {
    const char* kind = m.consumption == ConsumptionKind::ice ? "ice"
                       : m.consumption == ConsumptionKind::constant ? "const" : "none";
    out << m.id << " " << format_number(m.beta_tt) << " " << kind << " "
        << format_number(m.consumption_rate) << " " << (m.user_pays_energy ? "yes" : "no") << " "
        << format_number(m.flat_fare_eur) << " " << (m.congests ? "yes" : "no") << " "
        << (m.overlap_correction ? "yes" : "no") << "\n";
  }

  out << "\n[links]\n# from to length capacity alpha beta category tolled speeds waits\n";
  for (const auto& l : s.links) {
    out << l.from << " " << l.to << " " << format_number(l.length_km) << " "
        << (l.capacity_veh_h ? format_number(*l.capacity_veh_h) : "-") << " "
        << format_number(l.bpr_alpha) << " " << format_number(l.bpr_beta) << " "
        << to_string(l.category) << " " << (l.tolled_highway ? "yes" : "no") << " "
        << map_to_string(l.speed_kmh) << " " << map_to_string(l.wait_h) << "\n";
  }

  out << "\n[classes]\n# id vot vowt share zeta eta\n";
  for (const auto& q : s.classes) {
    out << q.id << " " << format_number(q.vot_eur_h) << " " << format_number(q.vowt_eur_h) << " "
        << format_number(q.share) << " " << map_to_string(q.energy_price) << " "
        << map_to_string(q.occupancy) << "\n";
  }

  out << "\n[demand]\n# od origin destination pax_h\n";
  for (const auto& od : s.ods)
    out << od.id << " " << od.origin << " " << od.destination << " "
        << format_number(od.demand_pax_h) << "\n";

  out << "\n[paths]\n# id od mode nodes\n";
  std::vector<const PathSpec*> ordered;
  for (const auto& p : s.paths) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(),
            [](const PathSpec* a, const PathSpec* b) { return a->id < b->id; });
  for (const PathSpec* p : ordered) {
    out << p->id << " " << s.ods[p->od].id << " " << s.modes[p->mode].id << " ";
    bool ambiguous = false;
    for (int a : p->links) {
      int copies = 0;
      for (const auto& l : s.links)
        if (l.from == s.links[a].from && l.to == s.links[a].to) ++copies;
      if (copies > 1) ambiguous = true;
    }
    if (ambiguous) {
      out << "via:";
      for (std::size_t i = 0; i < p->links.size(); ++i)
        out << (i ? "," : "") << link_ref(s, p->links[i]);
    } else {
      for (std::size_t i = 0; i < p->nodes.size(); ++i) out << (i ? "-" : "") << p->nodes[i];
    }
    out << "\n";
  }
  return out.str();
}

std::string link_ref(const Scenario& s, int link) {
  const auto& l = s.links.at(link);
  int copy = 0;
  for (int a = 0; a <= link; ++a)
    if (s.links[a].from == l.from && s.links[a].to == l.to) ++copy;
  std::string ref = l.id();
  if (copy > 1) ref += "@" + std::to_string(copy);
  return ref;
}

int resolve_link_ref(const Scenario& s, const std::string& ref) {
  std::string base = ref;
  int want = 1;
  if (auto pos = ref.find('@'); pos != std::string::npos) {
    base = ref.substr(0, pos);
    want = std::atoi(ref.c_str() + pos + 1);
    if (want < 1) throw InputError("bad link reference '" + ref + "'");
  }
  auto dash = base.find('-');
  if (dash == std::string::npos) throw InputError("bad link reference '" + ref + "'");
  std::string from = base.substr(0, dash), to = base.substr(dash + 1);
  int copy = 0;
  for (std::size_t a = 0; a < s.links.size(); ++a) {
    if (s.links[a].from == from && s.links[a].to == to && ++copy == want)
      return static_cast<int>(a);
  }
  throw InputError("unknown link reference '" + ref + "'");
}

void save_scenario_file(const Scenario& s, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("cannot write scenario file " + file.string());
  out << canonical_text(s);
}

// ---------------------------------------------------------------------------
// builtins
// ---------------------------------------------------------------------------

namespace {

struct NdLinkRow {
  const char *from, *to;
  double len;
  double cap;  // 0 = uncongested
  double alpha;
  LinkCategory cat;
  bool tolled;
  double v_car, v_ebike, v_metro;  // 0 = mode not allowed
};

// Multimodal Nguyen-Dupuis link table.
const NdLinkRow kNdLinks[] = {
    {"B", "1", 3, 3600, 0.15, LinkCategory::highway, true, 120, 0, 0},
    {"1", "5", 5, 3600, 0.15, LinkCategory::highway, true, 120, 0, 0},
    {"A", "6", 3, 3600, 0.15, LinkCategory::highway, true, 120, 0, 0},
    {"6", "9", 3, 3600, 0.15, LinkCategory::highway, true, 120, 0, 0},
    {"9", "C", 1, 3600, 0.15, LinkCategory::highway, true, 120, 0, 0},
    {"A", "2", 1, 2400, 2.0, LinkCategory::urban_secondary, false, 50, 15, 5},
    {"2", "3", 1, 2400, 2.0, LinkCategory::urban_secondary, false, 50, 15, 5},
    {"3", "4", 1, 2400, 2.0, LinkCategory::urban_secondary, false, 50, 15, 5},
    {"4", "5", 1, 2400, 2.0, LinkCategory::urban_secondary, false, 50, 15, 5},
    {"5", "D", 1, 2400, 2.0, LinkCategory::urban_secondary, false, 50, 15, 5},
    {"4", "8", 1, 2400, 2.0, LinkCategory::urban_secondary, false, 50, 15, 5},
    {"8", "C", 1, 2400, 2.0, LinkCategory::urban_secondary, false, 50, 15, 5},
    {"B", "2", 1, 1600, 2.0, LinkCategory::urban_local, false, 30, 0, 5},
    {"1", "3", 1, 1600, 2.0, LinkCategory::urban_local, false, 30, 0, 5},
    {"2", "6", 1, 1600, 2.0, LinkCategory::urban_local, false, 30, 0, 5},
    {"3", "7", 1, 1600, 2.0, LinkCategory::urban_local, false, 30, 0, 5},
    {"6", "7", 1, 1600, 2.0, LinkCategory::urban_local, false, 30, 0, 5},
    {"7", "8", 1, 1600, 2.0, LinkCategory::urban_local, false, 30, 0, 5},
    {"8", "D", 1, 1600, 2.0, LinkCategory::urban_local, false, 30, 0, 5},
    {"2", "10", 0.3, 0, 0, LinkCategory::walk, false, 0, 0, 5},
    {"10", "11", 4, 0, 0, LinkCategory::metro, false, 0, 0, 70},
    {"11", "D", 0.3, 0, 0, LinkCategory::walk, false, 0, 0, 5},
};

struct NdPathRow {
  int id;
  const char* od;
  const char* mode;
  const char* nodes;
};

const NdPathRow kNdPaths[] = {
    {1, "AD", "car", "A-2-3-4-5-D"},    {2, "AD", "car", "A-2-3-4-8-D"},
    {3, "AD", "car", "A-2-3-7-8-D"},    {4, "AD", "car", "A-2-6-7-8-D"},
    {5, "AD", "car", "A-6-7-8-D"},      {6, "BD", "car", "B-1-5-D"},
    {7, "BD", "car", "B-1-3-4-5-D"},    {8, "BD", "car", "B-1-3-4-8-D"},
    {9, "BD", "car", "B-1-3-7-8-D"},    {10, "BD", "car", "B-2-3-4-5-D"},
    {11, "BD", "car", "B-2-3-4-8-D"},   {12, "BD", "car", "B-2-3-7-8-D"},
    {13, "BD", "car", "B-2-6-7-8-D"},   {14, "AC", "car", "A-6-9-C"},
    {15, "AC", "car", "A-6-7-8-C"},     {16, "AC", "car", "A-2-3-4-8-C"},
    {17, "AC", "car", "A-2-3-7-8-C"},   {18, "AC", "car", "A-2-6-7-8-C"},
    {19, "AC", "car", "A-2-6-9-C"},     {20, "BC", "car", "B-1-3-4-8-C"},
    {21, "BC", "car", "B-1-3-7-8-C"},   {22, "BC", "car", "B-2-3-4-8-C"},
    {23, "BC", "car", "B-2-3-7-8-C"},   {24, "BC", "car", "B-2-6-7-8-C"},
    {25, "BC", "car", "B-2-6-9-C"},     {26, "AD", "ebike", "A-2-3-4-5-D"},
    {27, "AC", "ebike", "A-2-3-4-8-C"}, {28, "AD", "metro", "A-2-10-11-D"},
    {29, "BD", "metro", "B-2-10-11-D"},
};

Scenario nguyen_dupuis(bool multimodal) {
  Scenario s;
  s.name = multimodal ? "nd-multimodal" : "nd-car-only";
  s.params = {5.0, 1.0, 1.0, 1.0, 0.08, 8.9};

  ModeSpec car{"car", 1.0, ConsumptionKind::ice, 0.0, true, 0.0, true, true};
  s.modes.push_back(car);
  if (multimodal) {
    s.modes.push_back({"ebike", 3.0, ConsumptionKind::constant, 0.10, true, 0.0, false, false});
    s.modes.push_back({"metro", 1.5, ConsumptionKind::constant, 0.08, false, 2.0, false, false});
  }

  for (const auto& r : kNdLinks) {
    LinkSpec l;
    l.from = r.from;
    l.to = r.to;
    l.length_km = r.len;
    if (r.cap > 0) l.capacity_veh_h = r.cap;
    l.bpr_alpha = r.alpha;
    l.bpr_beta = 4.0;
    l.category = r.cat;
    l.tolled_highway = r.tolled;
    if (r.v_car > 0) l.speed_kmh["car"] = r.v_car;
    if (multimodal) {
      if (r.v_ebike > 0) l.speed_kmh["ebike"] = r.v_ebike;
      if (r.v_metro > 0) l.speed_kmh["metro"] = r.v_metro;
      if (l.category == LinkCategory::metro) l.wait_h["metro"] = 0.067;  // boarding wait
    }
    if (l.speed_kmh.empty()) continue;  // metro-only links drop out of the car network
    s.links.push_back(std::move(l));
  }

  UserClass q1{"1", 5.0, 10.0, 0.7, {{"car", 1.60}}, {{"car", 1.2}}};
  UserClass q2{"2", 10.0, 20.0, 0.3, {{"car", 1.60}}, {{"car", 1.2}}};
  if (multimodal) {
    for (UserClass* q : {&q1, &q2}) {
      q->energy_price["ebike"] = 0.25;
      q->energy_price["metro"] = 0.0;
      q->occupancy["ebike"] = 1.0;
      q->occupancy["metro"] = 1.0;
    }
  }
  s.classes = {q1, q2};

  s.ods = {{"AD", "A", "D", 2000.0},
           {"BD", "B", "D", 2000.0},
           {"AC", "A", "C", 2000.0},
           {"BC", "B", "C", 2000.0}};

  for (const auto& r : kNdPaths) {
    if (!multimodal && std::strcmp(r.mode, "car") != 0) continue;
    PathSpec p;
    p.id = r.id;
    p.od = s.od_index(r.od);
    p.mode = s.mode_index(r.mode);
    p.nodes = split_dash(r.nodes);
    s.paths.push_back(std::move(p));
  }

  s.finalize();
  return s;
}

// Two parallel links with generalized costs 10 + 0.01 f and 15 + 0.005 f
// (VOT 1 eur/h, beta_bpr 1), the desk instance of the classical module.
Scenario two_link() {
  Scenario s;
  s.name = "two-link";
  s.params = {1.0, 1.0, 1.0, 1.0, 0.0, 8.9};
  s.modes.push_back({"car", 1.0, ConsumptionKind::none, 0.0, true, 0.0, true, true});

  LinkSpec l1;
  l1.from = "O";
  l1.to = "D";
  l1.length_km = 10;
  l1.capacity_veh_h = 1000;
  l1.bpr_alpha = 1.0;
  l1.bpr_beta = 1.0;
  l1.category = LinkCategory::urban_secondary;
  l1.speed_kmh["car"] = 1.0;
  LinkSpec l2 = l1;  // parallel alternative
  l2.length_km = 15;
  l2.capacity_veh_h = 3000;
  s.links = {l1, l2};

  s.classes.push_back({"1", 1.0, 1.0, 1.0, {{"car", 0.0}}, {{"car", 1.0}}});
  s.ods = {{"OD", "O", "D", 1000.0}};

  PathSpec p1;
  p1.id = 1;
  p1.od = 0;
  p1.mode = 0;
  p1.links = {0};
  PathSpec p2 = p1;
  p2.id = 2;
  p2.links = {1};
  s.paths = {p1, p2};

  s.finalize();
  return s;
}

}  // namespace

Scenario builtin_scenario(const std::string& name) {
  if (name == "two-link") return two_link();
  if (name == "nd-car-only") return nguyen_dupuis(false);
  if (name == "nd-multimodal") return nguyen_dupuis(true);
  throw InputError("unknown builtin scenario '" + name + "'");
}

Scenario resolve_scenario(const std::string& builtin, const std::string& file) {
  if (!builtin.empty() && !file.empty())
    throw InputError("give either a builtin name or a scenario file, not both");
  if (!builtin.empty()) return builtin_scenario(builtin);
  if (!file.empty()) return load_scenario_file(file);
  throw InputError("no scenario given (use --builtin or --scenario)");
}

bool Incidence::at(std::size_t link, std::size_t path) const {
  const auto& col = path_links[path];
  return std::find(col.begin(), col.end(), static_cast<int>(link)) != col.end();
}

std::vector<double> Incidence::link_flows(std::span<const double> path_flows) const {
  if (path_flows.size() != n_paths) throw InputError("incidence: path flow dimension mismatch");
  std::vector<double> f(n_links, 0.0);
  for (std::size_t k = 0; k < n_paths; ++k)
    for (int a : path_links[k]) f[a] += path_flows[k];
  return f;
}

Incidence incidence(const Scenario& s) {
  Incidence d;
  d.n_links = s.links.size();
  d.n_paths = s.paths.size();
  d.path_links.reserve(s.paths.size());
  for (const auto& p : s.paths) d.path_links.push_back(p.links);
  return d;
}

double path_length(const Scenario& s, int path_id) {
  int k = s.path_index_by_id(path_id);
  if (k < 0) throw InputError("unknown path id " + std::to_string(path_id));
  return s.path_length_km[k];
}

}  // namespace tripprice
