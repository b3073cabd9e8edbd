#include "qplas/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace qplas {

using nlohmann::json;

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out = "invalid scene (" + std::to_string(errors.size()) + " error" +
                    (errors.size() == 1 ? "" : "s") + ")";
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

std::string type_name(const json& v) { return v.type_name(); }

// Walks one scene document and records every problem instead of stopping.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void error(const std::string& where, const std::string& what) { errors_.push_back(where + ": " + what); }

  bool object(const json& v, const std::string& where) {
    if (v.is_object()) return true;
    error(where, "expected object, got " + type_name(v));
    return false;
  }

  void only(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; });
      if (!known) error(where, "unknown field '" + it.key() + "'");
    }
  }

  void number(const json& obj, const char* key, const std::string& where, double& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) return error(at(where, key), "expected number, got " + type_name(v));
    out = v.get<double>();
    if (!std::isfinite(out)) error(at(where, key), "must be finite");
  }

  template <class Int>
  void integer(const json& obj, const char* key, const std::string& where, Int& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) return error(at(where, key), "expected integer, got " + type_name(v));
    if constexpr (std::is_unsigned_v<Int>) {
      if (v.get<long long>() < 0) return error(at(where, key), "must be non-negative");
    }
    out = v.get<Int>();
  }

  void string(const json& obj, const char* key, const std::string& where, std::string& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_string()) return error(at(where, key), "expected string, got " + type_name(v));
    out = v.get<std::string>();
  }

  bool triple_value(const json& v, const std::string& where, Triple& out) {
    if (!v.is_array() || v.size() != 3) {
      error(where, "expected array of 3 numbers");
      return false;
    }
    Triple t{};
    for (int i = 0; i < 3; ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        error(where, "expected array of 3 finite numbers");
        return false;
      }
      t[i] = v[i].get<double>();
    }
    out = t;
    return true;
  }

  void triple(const json& obj, const char* key, const std::string& where, Triple& out) {
    if (obj.contains(key)) triple_value(obj.at(key), at(where, key), out);
  }

  static std::string at(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
  }

 private:
  std::vector<std::string>& errors_;
};

bool nonzero(const Triple& t) { return t[0] != 0.0 || t[1] != 0.0 || t[2] != 0.0; }

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void read_materials(Reader& r, const json& root, SceneConfig& cfg) {
  if (!root.contains("materials")) return;
  const json& arr = root.at("materials");
  if (!arr.is_array()) return r.error("materials", "expected array");
  std::set<int> seen;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "materials[" + std::to_string(i) + "]";
    const json& m = arr[i];
    if (!r.object(m, where)) continue;
    r.only(m, where, {"region_id", "poles"});
    PermittivityModel model;
    if (!m.contains("region_id")) r.error(where, "missing field 'region_id'");
    r.integer(m, "region_id", where, model.region_id);
    if (model.region_id <= 0) r.error(where + ".region_id", "must be a positive integer");
    if (!seen.insert(model.region_id).second)
      r.error(where + ".region_id", "duplicate region_id " + std::to_string(model.region_id));
    if (m.contains("poles")) {
      const json& poles = m.at("poles");
      if (!poles.is_array()) {
        r.error(where + ".poles", "expected array");
      } else {
        for (std::size_t p = 0; p < poles.size(); ++p) {
          const std::string pw = where + ".poles[" + std::to_string(p) + "]";
          if (!r.object(poles[p], pw)) continue;
          r.only(poles[p], pw, {"omega0", "omegap", "gamma"});
          LorentzPole pole;
          r.number(poles[p], "omega0", pw, pole.omega0);
          r.number(poles[p], "omegap", pw, pole.omegap);
          r.number(poles[p], "gamma", pw, pole.gamma);
          if (pole.omega0 < 0.0) r.error(pw + ".omega0", "must be >= 0");
          if (pole.omegap < 0.0) r.error(pw + ".omegap", "must be >= 0");
          if (!(pole.gamma > 0.0)) r.error(pw + ".gamma", "must be > 0 (passive medium)");
          model.poles.push_back(pole);
        }
      }
    }
    cfg.materials.push_back(model);
  }
  std::sort(cfg.materials.begin(), cfg.materials.end(),
            [](const auto& a, const auto& b) { return a.region_id < b.region_id; });
}

void read_shapes(Reader& r, const json& root, SceneConfig& cfg) {
  if (!root.contains("shapes")) return;
  const json& arr = root.at("shapes");
  if (!arr.is_array()) return r.error("shapes", "expected array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "shapes[" + std::to_string(i) + "]";
    const json& s = arr[i];
    if (!r.object(s, where)) continue;
    SceneConfig::ShapeEntry e;
    r.string(s, "type", where, e.type);
    if (e.type == "sphere") {
      r.only(s, where, {"type", "center", "radius", "region_id"});
      r.triple(s, "center", where, e.center);
      r.number(s, "radius", where, e.radius);
      if (!(e.radius > 0.0)) r.error(where + ".radius", "must be > 0");
      r.integer(s, "region_id", where, e.region_id);
    } else if (e.type == "box") {
      r.only(s, where, {"type", "min", "max", "region_id"});
      r.triple(s, "min", where, e.min);
      r.triple(s, "max", where, e.max);
      for (int k = 0; k < 3; ++k)
        if (!(e.max[k] > e.min[k])) {
          r.error(where, "box max must exceed min on every axis");
          break;
        }
      r.integer(s, "region_id", where, e.region_id);
    } else if (e.type == "mask") {
      r.only(s, where, {"type", "file"});
      r.string(s, "file", where, e.file);
      if (e.file.empty()) r.error(where + ".file", "missing mask file");
      e.region_id = 0;
    } else {
      r.error(where + ".type", "unknown shape type '" + e.type + "' (sphere|box|mask)");
      continue;
    }
    cfg.shapes.push_back(e);
  }
}

}  // namespace

SceneError::SceneError(std::vector<std::string> errors)
    : ConfigError(join_errors(errors)), errors_(std::move(errors)) {}

SceneConfig parse_scene(const std::string& text, const std::filesystem::path& base_dir,
                        const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SceneError({origin + ": parse error at " + line_column(text, e.byte) + ": " + e.what()});
  }

  std::vector<std::string> errors;
  Reader r(errors);
  SceneConfig cfg;
  cfg.base_dir = base_dir;
  if (!r.object(root, "scene")) throw SceneError(errors);
  r.only(root, "", {"schema_version", "units", "materials", "shapes", "grid", "solver", "quadrature",
                    "kk", "greens", "modes", "purcell", "validate"});

  r.integer(root, "schema_version", "", cfg.schema_version);
  if (cfg.schema_version != kSchemaVersion)
    r.error("schema_version", "unsupported version " + std::to_string(cfg.schema_version) +
                                  " (supported: " + std::to_string(kSchemaVersion) + ")");

  if (root.contains("units") && r.object(root["units"], "units")) {
    const json& u = root["units"];
    r.only(u, "units", {"mode", "L0"});
    std::string mode = "natural";
    r.string(u, "mode", "units", mode);
    try {
      cfg.units.mode = parse_unit_mode(mode);
    } catch (const std::invalid_argument& e) {
      r.error("units.mode", e.what());
    }
    r.number(u, "L0", "units", cfg.units.L0);
    if (!(cfg.units.L0 > 0.0)) r.error("units.L0", "must be > 0");
  }

  read_materials(r, root, cfg);
  read_shapes(r, root, cfg);

  if (root.contains("grid") && r.object(root["grid"], "grid")) {
    const json& g = root["grid"];
    r.only(g, "grid", {"voxel_edge", "anchor"});
    r.number(g, "voxel_edge", "grid", cfg.grid.voxel_edge);
    if (g.contains("anchor")) {
      Triple a{};
      if (r.triple_value(g["anchor"], "grid.anchor", a)) cfg.grid.anchor = a;
    }
  }
  if (!(cfg.grid.voxel_edge > 0.0)) r.error("grid.voxel_edge", "must be > 0");

  if (root.contains("solver") && r.object(root["solver"], "solver")) {
    const json& s = root["solver"];
    r.only(s, "solver", {"method", "tol", "dense_limit", "max_iterations", "restart"});
    r.string(s, "method", "solver", cfg.solver.method);
    r.number(s, "tol", "solver", cfg.solver.tol);
    r.integer(s, "dense_limit", "solver", cfg.solver.dense_limit);
    r.integer(s, "max_iterations", "solver", cfg.solver.max_iterations);
    r.integer(s, "restart", "solver", cfg.solver.restart);
  }
  try {
    parse_solver_method(cfg.solver.method);
  } catch (const ConfigError& e) {
    r.error("solver.method", e.what());
  }
  if (!(cfg.solver.tol > 0.0)) r.error("solver.tol", "must be > 0");
  if (cfg.solver.max_iterations < 1) r.error("solver.max_iterations", "must be >= 1");
  if (cfg.solver.restart < 2) r.error("solver.restart", "must be >= 2");

  if (root.contains("quadrature") && r.object(root["quadrature"], "quadrature")) {
    const json& q = root["quadrature"];
    r.only(q, "quadrature", {"n_theta", "n_phi"});
    r.integer(q, "n_theta", "quadrature", cfg.quadrature.n_theta);
    r.integer(q, "n_phi", "quadrature", cfg.quadrature.n_phi);
  }
  if (cfg.quadrature.n_theta < 2 || cfg.quadrature.n_phi < 2)
    r.error("quadrature", "n_theta and n_phi must be >= 2");

  if (root.contains("kk") && r.object(root["kk"], "kk")) {
    const json& k = root["kk"];
    r.only(k, "kk", {"panels", "order"});
    r.integer(k, "panels", "kk", cfg.kk.panels);
    r.integer(k, "order", "kk", cfg.kk.order);
  }
  if (cfg.kk.panels < 1 || cfg.kk.order < 1) r.error("kk", "panels and order must be >= 1");

  if (root.contains("greens") && r.object(root["greens"], "greens")) {
    const json& g = root["greens"];
    r.only(g, "greens", {"omega", "src", "eval"});
    r.number(g, "omega", "greens", cfg.greens.omega);
    r.triple(g, "src", "greens", cfg.greens.src);
    r.triple(g, "eval", "greens", cfg.greens.eval);
  }
  if (!(cfg.greens.omega > 0.0)) r.error("greens.omega", "must be > 0");

  if (root.contains("modes") && r.object(root["modes"], "modes")) {
    const json& m = root["modes"];
    r.only(m, "modes", {"omega", "kdir", "sigma", "zeta", "eval"});
    r.number(m, "omega", "modes", cfg.modes.omega);
    r.triple(m, "kdir", "modes", cfg.modes.kdir);
    r.string(m, "sigma", "modes", cfg.modes.sigma);
    r.string(m, "zeta", "modes", cfg.modes.zeta);
    if (m.contains("eval")) {
      if (!m["eval"].is_array()) {
        r.error("modes.eval", "expected array of points");
      } else {
        cfg.modes.eval.clear();
        for (std::size_t i = 0; i < m["eval"].size(); ++i) {
          Triple p{};
          if (r.triple_value(m["eval"][i], "modes.eval[" + std::to_string(i) + "]", p))
            cfg.modes.eval.push_back(p);
        }
      }
    }
  }
  if (!(cfg.modes.omega > 0.0)) r.error("modes.omega", "must be > 0");
  if (!nonzero(cfg.modes.kdir)) r.error("modes.kdir", "must be nonzero");
  if (cfg.modes.sigma != "+" && cfg.modes.sigma != "-") r.error("modes.sigma", "must be '+' or '-'");
  if (cfg.modes.zeta != "c" && cfg.modes.zeta != "s") r.error("modes.zeta", "must be 'c' or 's'");

  if (root.contains("purcell") && r.object(root["purcell"], "purcell")) {
    const json& p = root["purcell"];
    r.only(p, "purcell", {"emitter", "dipole", "omega_start", "omega_stop", "count"});
    r.triple(p, "emitter", "purcell", cfg.purcell.emitter);
    r.triple(p, "dipole", "purcell", cfg.purcell.dipole);
    r.number(p, "omega_start", "purcell", cfg.purcell.omega_start);
    r.number(p, "omega_stop", "purcell", cfg.purcell.omega_stop);
    r.integer(p, "count", "purcell", cfg.purcell.count);
  }
  if (!(cfg.purcell.omega_start > 0.0)) r.error("purcell.omega_start", "must be > 0");
  if (cfg.purcell.omega_stop < cfg.purcell.omega_start)
    r.error("purcell.omega_stop", "must be >= omega_start");
  if (cfg.purcell.count < 1) r.error("purcell.count", "must be >= 1");
  if (!nonzero(cfg.purcell.dipole)) r.error("purcell.dipole", "must be nonzero");

  if (root.contains("validate") && r.object(root["validate"], "validate")) {
    const json& v = root["validate"];
    r.only(v, "validate", {"omega", "x", "y", "emitter", "dipole", "kk_frequencies"});
    r.number(v, "omega", "validate", cfg.validate.omega);
    r.triple(v, "x", "validate", cfg.validate.x);
    r.triple(v, "y", "validate", cfg.validate.y);
    r.triple(v, "emitter", "validate", cfg.validate.emitter);
    r.triple(v, "dipole", "validate", cfg.validate.dipole);
    if (v.contains("kk_frequencies")) {
      const json& f = v["kk_frequencies"];
      if (!f.is_array()) {
        r.error("validate.kk_frequencies", "expected array of numbers");
      } else {
        cfg.validate.kk_frequencies.clear();
        for (const auto& x : f) {
          if (!x.is_number()) {
            r.error("validate.kk_frequencies", "expected array of numbers");
            break;
          }
          cfg.validate.kk_frequencies.push_back(x.get<double>());
        }
      }
    }
  }
  if (!(cfg.validate.omega > 0.0)) r.error("validate.omega", "must be > 0");
  if (!nonzero(cfg.validate.dipole)) r.error("validate.dipole", "must be nonzero");
  if (cfg.validate.x == cfg.validate.y) r.error("validate", "x and y must differ");
  if (cfg.validate.kk_frequencies.empty()) r.error("validate.kk_frequencies", "must not be empty");
  for (double f : cfg.validate.kk_frequencies)
    if (!(f > 0.0)) {
      r.error("validate.kk_frequencies", "frequencies must be > 0");
      break;
    }

  // Cross references: every region id used by a shape or mask needs a material.
  std::set<int> known;
  for (const auto& m : cfg.materials) known.insert(m.region_id);
  std::size_t mask_count = 0;
  for (std::size_t i = 0; i < cfg.shapes.size(); ++i) {
    const auto& s = cfg.shapes[i];
    const std::string where = "shapes[" + std::to_string(i) + "]";
    if (s.type == "mask") {
      ++mask_count;
      if (s.file.empty()) continue;
      try {
        const Mask mask = read_mask(cfg.base_dir / s.file);
        std::set<int> ids(mask.ids.begin(), mask.ids.end());
        ids.erase(0);
        for (int id : ids)
          if (!known.count(id)) r.error(where, "unknown material id " + std::to_string(id) + " in mask");
      } catch (const std::exception& e) {
        r.error(where + ".file", e.what());
      }
    } else if (!known.count(s.region_id)) {
      r.error(where + ".region_id", "unknown material id " + std::to_string(s.region_id));
    }
  }
  if (mask_count > 0 && cfg.shapes.size() > 1) r.error("shapes", "a mask must be the only shape");

  if (!errors.empty()) throw SceneError(errors);
  return cfg;
}

SceneConfig load_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SceneError({path.string() + ": cannot open scene file"});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scene(buf.str(), path.parent_path(), path.string());
}

namespace {

json triple_json(const Triple& t) { return json::array({t[0], t[1], t[2]}); }

}  // namespace

json to_json(const SceneConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["units"] = {{"mode", std::string(to_string(c.units.mode))}, {"L0", c.units.L0}};
  json mats = json::array();
  for (const auto& m : c.materials) {
    json poles = json::array();
    for (const auto& p : m.poles)
      poles.push_back({{"omega0", p.omega0}, {"omegap", p.omegap}, {"gamma", p.gamma}});
    mats.push_back({{"region_id", m.region_id}, {"poles", poles}});
  }
  j["materials"] = mats;
  json shapes = json::array();
  for (const auto& s : c.shapes) {
    if (s.type == "sphere")
      shapes.push_back({{"type", "sphere"}, {"center", triple_json(s.center)}, {"radius", s.radius},
                        {"region_id", s.region_id}});
    else if (s.type == "box")
      shapes.push_back({{"type", "box"}, {"min", triple_json(s.min)}, {"max", triple_json(s.max)},
                        {"region_id", s.region_id}});
    else
      shapes.push_back({{"type", "mask"}, {"file", s.file}});
  }
  j["shapes"] = shapes;
  j["grid"] = {{"voxel_edge", c.grid.voxel_edge}};
  if (c.grid.anchor) j["grid"]["anchor"] = triple_json(*c.grid.anchor);
  j["solver"] = {{"method", c.solver.method},
                 {"tol", c.solver.tol},
                 {"dense_limit", c.solver.dense_limit},
                 {"max_iterations", c.solver.max_iterations},
                 {"restart", c.solver.restart}};
  j["quadrature"] = {{"n_theta", c.quadrature.n_theta}, {"n_phi", c.quadrature.n_phi}};
  j["kk"] = {{"panels", c.kk.panels}, {"order", c.kk.order}};
  j["greens"] = {{"omega", c.greens.omega}, {"src", triple_json(c.greens.src)},
                 {"eval", triple_json(c.greens.eval)}};
  json eval = json::array();
  for (const auto& p : c.modes.eval) eval.push_back(triple_json(p));
  j["modes"] = {{"omega", c.modes.omega}, {"kdir", triple_json(c.modes.kdir)},
                {"sigma", c.modes.sigma}, {"zeta", c.modes.zeta}, {"eval", eval}};
  j["purcell"] = {{"emitter", triple_json(c.purcell.emitter)},
                  {"dipole", triple_json(c.purcell.dipole)},
                  {"omega_start", c.purcell.omega_start},
                  {"omega_stop", c.purcell.omega_stop},
                  {"count", c.purcell.count}};
  j["validate"] = {{"omega", c.validate.omega},
                   {"x", triple_json(c.validate.x)},
                   {"y", triple_json(c.validate.y)},
                   {"emitter", triple_json(c.validate.emitter)},
                   {"dipole", triple_json(c.validate.dipole)},
                   {"kk_frequencies", c.validate.kk_frequencies}};
  return j;
}

std::string serialize(const SceneConfig& config) { return to_json(config).dump(2) + "\n"; }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const SceneConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json(config).dump())));
  return buf;
}

Vec3 to_internal_point(const UnitSystem& units, const Triple& p) {
  return {units.to_internal(p[0], Quantity::Length), units.to_internal(p[1], Quantity::Length),
          units.to_internal(p[2], Quantity::Length)};
}

Vec3 to_internal_dipole(const UnitSystem& units, const Triple& d) {
  return {units.to_internal(d[0], Quantity::Dipole), units.to_internal(d[1], Quantity::Dipole),
          units.to_internal(d[2], Quantity::Dipole)};
}

double to_internal_frequency(const UnitSystem& units, double omega) {
  return units.to_internal(omega, Quantity::Frequency);
}

ResolvedScene resolve(const SceneConfig& c) {
  ResolvedScene out;
  out.units = UnitSystem(c.units.mode, c.units.L0);
  const auto& u = out.units;
  auto freq = [&](double w) { return u.to_internal(w, Quantity::Frequency); };
  auto len = [&](double l) { return u.to_internal(l, Quantity::Length); };

  for (const auto& m : c.materials) {
    PermittivityModel model = m;
    for (auto& p : model.poles) {
      p.omega0 = freq(p.omega0);
      p.omegap = freq(p.omegap);
      p.gamma = freq(p.gamma);
    }
    model.validate();
    out.materials[model.region_id] = model;
  }

  const double edge = len(c.grid.voxel_edge);
  std::vector<ShapeRegion> shapes;
  for (const auto& s : c.shapes) {
    if (s.type == "sphere") {
      shapes.push_back({Sphere{to_internal_point(u, s.center), len(s.radius)}, s.region_id});
    } else if (s.type == "box") {
      shapes.push_back({Box{to_internal_point(u, s.min), to_internal_point(u, s.max)}, s.region_id});
    } else {
      Mask mask = read_mask(c.base_dir / s.file);
      mask.voxel_edge = len(mask.voxel_edge);
      mask.origin = mask.origin * u.to_internal(1.0, Quantity::Length);
      shapes.push_back({mask, 0});
    }
  }
  if (shapes.empty()) {
    out.grid.voxel_edge = edge;
  } else {
    std::optional<Vec3> anchor;
    if (c.grid.anchor) anchor = to_internal_point(u, *c.grid.anchor);
    try {
      out.grid = build_grid(shapes, edge, anchor);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("grid: ") + e.what());
    }
  }

  out.solver.method = parse_solver_method(c.solver.method);
  out.solver.tol = c.solver.tol;
  out.solver.dense_limit = c.solver.dense_limit;
  out.solver.max_iterations = c.solver.max_iterations;
  out.solver.restart = c.solver.restart;
  out.kk.panels = c.kk.panels;
  out.kk.order = c.kk.order;
  out.n_theta = c.quadrature.n_theta;
  out.n_phi = c.quadrature.n_phi;
  return out;
}

}  // namespace qplas
