#include "qplas/run.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "qplas/ldos.hpp"
#include "qplas/modes.hpp"
#include "qplas/version.hpp"

namespace qplas {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

json dyadic_json(const Dyadic& g, double scale) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < 3; ++i) {
    re.push_back(json::array({g(i, 0).real() * scale, g(i, 1).real() * scale, g(i, 2).real() * scale}));
    im.push_back(json::array({g(i, 0).imag() * scale, g(i, 1).imag() * scale, g(i, 2).imag() * scale}));
  }
  return {{"re", re}, {"im", im}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

Check make_check(std::string name, double value, double threshold) {
  const bool pass = std::isfinite(value) && value <= threshold;
  return {std::move(name), value, threshold, pass};
}

double rel(double num, double den) { return den > 0.0 ? num / den : num; }

// Deepest voxel along the grid: the one closest to the grid centroid.
std::size_t central_voxel(const VoxelGrid& grid) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : grid.centers) c += p;
  c /= static_cast<double>(grid.size());
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if ((grid.centers[i] - c).squaredNorm() < (grid.centers[best] - c).squaredNorm()) best = i;
  return best;
}

struct Context {
  SceneConfig config;
  ResolvedScene scene;
  RunFlags flags;
  std::string hash;
  json results = json::object();
  json outputs = json::array();
  json timings = json::object();
  std::vector<Check> checks;
  RunReport report;

  std::filesystem::path output(const std::string& name, const std::string& description,
                               json columns = nullptr) {
    const auto path = flags.out_dir / name;
    json entry = {{"file", name}, {"description", description}};
    if (!columns.is_null()) entry["columns"] = std::move(columns);
    outputs.push_back(entry);
    report.outputs.push_back(path);
    return path;
  }
  SphereQuadrature quadrature() const { return make_shell_quadrature(scene.n_theta, scene.n_phi); }
  double freq(double w) const { return to_internal_frequency(scene.units, w); }
  Vec3 point(const Triple& p) const { return to_internal_point(scene.units, p); }
};

std::string csv_header(const Context& ctx, const std::string& what) {
  return "# qplas " + std::string(kVersion) + " " + what + " config_hash=" + ctx.hash + "\n";
}

void run_greens(Context& ctx) {
  const auto& g = ctx.config.greens;
  const double w = ctx.freq(g.omega);
  const Vec3 x = ctx.point(g.eval), y = ctx.point(g.src);
  const MediumSolver medium(ctx.scene.grid, ctx.scene.materials, w, ctx.scene.solver);
  const Dyadic green = medium.green(x, y);
  const double scale = ctx.scene.units.from_internal(1.0, Quantity::Green);
  json out = {{"config_hash", ctx.hash},
              {"omega", g.omega},
              {"src", g.src},
              {"eval", g.eval},
              {"units", ctx.scene.units.mode() == UnitMode::SI ? "1/m" : "1/L0"},
              {"G", dyadic_json(green, scale)},
              {"G0", dyadic_json(g0_closed(x, y, w), scale)}};
  write_text(ctx.output("greens.json", "medium Green tensor G(eval, src) and free G0, 3x3 re/im"),
             out.dump(2) + "\n");
  ctx.results["greens"] = out;
}

void run_modes(Context& ctx) {
  const auto& m = ctx.config.modes;
  const double w = ctx.freq(m.omega);
  Vec3 kdir(m.kdir[0], m.kdir[1], m.kdir[2]);
  const PlaneWaveMode mode{w * kdir.normalized(), m.sigma == "+" ? Polarization::Plus : Polarization::Minus,
                           m.zeta == "c" ? Parity::Cos : Parity::Sin};
  std::vector<Vec3> points;
  for (const auto& p : m.eval) points.push_back(ctx.point(p));
  const MediumSolver medium(ctx.scene.grid, ctx.scene.materials, w, ctx.scene.solver);
  const auto e = e_coefficient(medium, mode, points, Route::Fredholm);

  std::ostringstream csv;
  csv << csv_header(ctx, "modes");
  csv << "x,y,z,ex_re,ex_im,ey_re,ey_im,ez_re,ez_im\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (int k = 0; k < 3; ++k) csv << format_number(m.eval[i][k]) << ",";
    for (int k = 0; k < 3; ++k) {
      csv << format_number(e[i](k).real()) << "," << format_number(e[i](k).imag());
      csv << (k < 2 ? "," : "\n");
    }
  }
  write_text(ctx.output("modes.csv", "field coefficient e_k at each evaluation point (internal units)",
                        {"x", "y", "z", "ex_re", "ex_im", "ey_re", "ey_im", "ez_re", "ez_im"}),
             csv.str());
  ctx.results["modes"] = {{"points", points.size()}, {"prefactor", std::sqrt(1.0 / (2.0 * w))}};
}

void run_purcell(Context& ctx) {
  const auto& p = ctx.config.purcell;
  std::vector<double> user_omegas;
  for (int i = 0; i < p.count; ++i)
    user_omegas.push_back(p.count == 1 ? p.omega_start
                                       : p.omega_start + (p.omega_stop - p.omega_start) * i / (p.count - 1));
  std::vector<double> omegas;
  for (double w : user_omegas) omegas.push_back(ctx.freq(w));
  EmitterSpec em{ctx.point(p.emitter), omegas.front(), to_internal_dipole(ctx.scene.units, p.dipole)};
  const auto rows = purcell_sweep(ctx.scene.grid, ctx.scene.materials, em, omegas, ctx.quadrature(),
                                  ctx.scene.solver, ctx.flags.threads);

  const auto& u = ctx.scene.units;
  const std::string csv_name = ctx.flags.out_csv ? ctx.flags.out_csv->filename().string() : "purcell.csv";
  std::ostringstream csv;
  csv << csv_header(ctx, "purcell");
  csv << "omega,purcell,gamma_e,gamma_m,identity_residual,status\n";
  std::size_t failures = 0;
  json table = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double ge = u.from_internal(r.gamma_e, Quantity::Rate);
    const double gm = u.from_internal(r.gamma_m, Quantity::Rate);
    csv << format_number(user_omegas[i]) << "," << format_number(r.purcell) << "," << format_number(ge)
        << "," << format_number(gm) << "," << format_number(r.identity_residual) << ","
        << (r.ok() ? "ok" : "error") << "\n";
    json row = {{"omega", user_omegas[i]}, {"purcell", r.purcell}, {"gamma_e", ge},
                {"gamma_m", gm}, {"identity_residual", r.identity_residual}};
    if (!r.ok()) {
      ++failures;
      row["error"] = r.error;
    }
    table.push_back(row);
  }
  write_text(ctx.output(csv_name, "Purcell sweep, one row per frequency (rates in 1/s for SI scenes)",
                        {"omega", "purcell", "gamma_e", "gamma_m", "identity_residual", "status"}),
             csv.str());

  std::ostringstream gp;
  gp << "# qplas purcell plot, config_hash=" << ctx.hash << "\n"
     << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set xlabel 'omega'\n"
     << "set ylabel 'Purcell factor'\n"
     << "set grid\n"
     << "set terminal pngcairo size 800,500\n"
     << "set output 'purcell.png'\n"
     << "plot '" << csv_name << "' using 1:2 with linespoints title 'P(omega)'\n";
  write_text(ctx.output("purcell.gp", "gnuplot script for the sweep"), gp.str());
  ctx.results["purcell"] = table;
  if (failures > 0) ctx.report.exit_code = kExitSolverFailure;
}

json ldos_json(const LdosIdentity& li) {
  return {{"relative_absorption", li.relative_absorption()},
          {"relative_m", li.relative_m()},
          {"forms_difference", li.forms_difference()},
          {"im_green_norm", li.norm()}};
}

void run_ldos_check(Context& ctx) {
  const auto& v = ctx.config.validate;
  const double w = ctx.freq(v.omega);
  const MediumSolver medium(ctx.scene.grid, ctx.scene.materials, w, ctx.scene.solver);
  const auto quad = ctx.quadrature();
  const Vec3 ra = ctx.point(v.emitter);
  const auto at_emitter = ldos_identity(medium, ra, ra, quad);
  const auto at_pair = ldos_identity(medium, ctx.point(v.x), ctx.point(v.y), quad);
  ctx.checks.push_back(make_check("ldos_identity_absorption(emitter)", at_emitter.relative_absorption(), 1e-2));
  ctx.checks.push_back(make_check("ldos_identity_m(emitter)", at_emitter.relative_m(), 1e-2));
  ctx.checks.push_back(make_check("ldos_forms_agreement(emitter)", at_emitter.forms_difference(), 1e-8));
  ctx.checks.push_back(make_check("ldos_identity_absorption(x,y)", at_pair.relative_absorption(), 1e-2));
  ctx.checks.push_back(make_check("ldos_forms_agreement(x,y)", at_pair.forms_difference(), 1e-8));
  json out = {{"config_hash", ctx.hash}, {"emitter", ldos_json(at_emitter)}, {"pair", ldos_json(at_pair)}};
  write_text(ctx.output("ldos.json", "LDOS identity residuals at (emitter, emitter) and (x, y)"),
             out.dump(2) + "\n");
  ctx.results["ldos"] = out;
}

void run_validate(Context& ctx) {
  const auto& v = ctx.config.validate;
  const auto& s = ctx.scene;
  const double w = ctx.freq(v.omega);
  const auto quad = ctx.quadrature();
  const Vec3 x = ctx.point(v.x), y = ctx.point(v.y), ra = ctx.point(v.emitter);
  const Vec3 d = to_internal_dipole(s.units, v.dipole);
  auto timed = [&](const char* name, auto&& fn) {
    const auto t0 = Clock::now();
    fn();
    ctx.timings[name] = seconds_since(t0);
  };

  timed("kk", [&] {
    for (const auto& [id, model] : s.materials)
      for (double f : v.kk_frequencies) {
        const double lam = ctx.freq(f);
        const double res = kk_residual(model, lam, s.kk);
        ctx.checks.push_back(make_check("kk_residual(region=" + std::to_string(id) + ",omega=" +
                                            format_number(f) + ")",
                                        rel(res, std::abs(eval_eps(model, lam) - 1.0)), 1e-6));
      }
  });

  timed("free_space", [&] {
    const RealDyadic ref = (w / (6.0 * kPi)) * RealDyadic::Identity();
    ctx.checks.push_back(make_check("free_space_spectral(x,x)",
                                    (im_g0_spectral(x, x, w, quad) - ref).norm() / ref.norm(), 1e-3));
    const RealDyadic closed = g0_closed(x, y, w).imag();
    ctx.checks.push_back(make_check("free_space_spectral(x,y)",
                                    (im_g0_spectral(x, y, w, quad) - closed).norm() / ref.norm(), 1e-3));
  });

  const MediumSolver medium(s.grid, s.materials, w, s.solver);
  timed("dyson", [&] {
    const auto dr = dyson_residual(medium, x, y);
    ctx.checks.push_back(make_check("dyson_residual(x,y)", dr.relative(), 1e-8));
    const Dyadic gxy = medium.green(x, y), gyx = medium.green(y, x);
    ctx.checks.push_back(make_check("reciprocity(x,y)", (gxy - gyx.transpose()).norm() / gxy.norm(), 1e-8));
  });

  timed("routes", [&] {
    const std::vector<Vec3> pts{x, y};
    const PlaneWaveMode mode{w * Vec3(0.3, -0.4, 1.0).normalized(), Polarization::Plus, Parity::Cos};
    const auto ef = e_coefficient(medium, mode, pts, Route::Fredholm);
    const auto eg = e_coefficient(medium, mode, pts, Route::Green);
    double err = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) err = std::max(err, rel((ef[i] - eg[i]).norm(), ef[i].norm()));
    ctx.checks.push_back(make_check("route_equivalence_e", err, 1e-8));
    double merr = 0.0;
    if (!s.grid.empty()) {
      const MedModeIndex mu{central_voxel(s.grid), w, 2};
      const auto mf = m_coefficient(medium, mu, pts, Route::Fredholm);
      const auto mg = m_coefficient(medium, mu, pts, Route::Green);
      for (std::size_t i = 0; i < pts.size(); ++i)
        merr = std::max(merr, rel((mf[i] - mg[i]).norm(), mf[i].norm()));
    }
    ctx.checks.push_back(make_check("route_equivalence_m", merr, 1e-8));
  });

  timed("ldos", [&] {
    const auto li = ldos_identity(medium, ra, ra, quad);
    ctx.checks.push_back(make_check("ldos_identity_absorption(emitter)", li.relative_absorption(), 1e-2));
    ctx.checks.push_back(make_check("ldos_identity_m(emitter)", li.relative_m(), 1e-2));
    ctx.checks.push_back(make_check("ldos_forms_agreement(emitter)", li.forms_difference(), 1e-8));

    const auto rates = gamma_decomposed(medium, EmitterSpec{ra, w, d}, quad);
    const double bound = 2.0 * li.contracted(d) + 1e-12;
    ctx.checks.push_back(make_check("compensation(emitter)", rates.compensation_error(), bound));

    const Eigen::SelfAdjointEigenSolver<RealDyadic> eig(medium.im_green_at(ra));
    const double min_eig = eig.eigenvalues().minCoeff();
    const double scale = eig.eigenvalues().cwiseAbs().maxCoeff();
    ctx.checks.push_back(make_check("passivity(emitter)", std::max(0.0, -min_eig) / scale, 1e-10));
    ctx.results["rates"] = {{"gamma_e", rates.gamma_e},
                            {"gamma_m", rates.gamma_m},
                            {"gamma_m_direct", rates.gamma_m_direct},
                            {"gamma_via_imG", rates.gamma_via_imG},
                            {"gamma0", rates.gamma0},
                            {"purcell", rates.gamma_via_imG / rates.gamma0},
                            {"units", "internal"}};
  });

  timed("vacuum", [&] {
    VoxelGrid empty;
    empty.voxel_edge = s.grid.voxel_edge > 0.0 ? s.grid.voxel_edge : 1.0;
    const MediumSolver vac(empty, s.materials, w, s.solver);
    const EmitterSpec em{ra, w, d};
    ctx.checks.push_back(make_check("vacuum_purcell", std::abs(purcell(vac, em) - 1.0), 1e-10));
    const auto rates = gamma_decomposed(vac, em, quad);
    ctx.checks.push_back(
        make_check("vacuum_gamma_e", std::abs(rates.gamma_e - rates.gamma0) / rates.gamma0, 1e-3));
  });
}

}  // namespace

SceneConfig apply_overrides(SceneConfig c, const std::string& sub, const RunFlags& f) {
  if (f.tol) c.solver.tol = *f.tol;
  if (f.quad) {
    c.quadrature.n_theta = f.quad->first;
    c.quadrature.n_phi = f.quad->second;
  }
  if (sub == "greens") {
    if (f.omega) c.greens.omega = *f.omega;
    if (f.src) c.greens.src = *f.src;
    if (f.eval) c.greens.eval = *f.eval;
  } else if (sub == "modes") {
    if (f.omega) c.modes.omega = *f.omega;
    if (f.kdir) c.modes.kdir = *f.kdir;
    if (f.sigma) c.modes.sigma = *f.sigma;
    if (f.zeta) c.modes.zeta = *f.zeta;
    if (f.eval_csv) c.modes.eval = read_points_csv(*f.eval_csv);
    else if (f.eval) c.modes.eval = {*f.eval};
  } else if (sub == "purcell") {
    if (f.emitter) c.purcell.emitter = *f.emitter;
    if (f.dipole) c.purcell.dipole = *f.dipole;
    if (f.omega_range) std::tie(c.purcell.omega_start, c.purcell.omega_stop, c.purcell.count) = *f.omega_range;
  } else if (sub == "ldos-check" || sub == "validate") {
    if (f.omega) c.validate.omega = *f.omega;
    if (f.emitter) c.validate.emitter = *f.emitter;
    if (f.dipole) c.validate.dipole = *f.dipole;
    if (f.x) c.validate.x = *f.x;
    if (f.y) c.validate.y = *f.y;
  }
  // Re-run the schema checks on the overridden values.
  return parse_scene(to_json(c).dump(), c.base_dir, "<scene with overrides>");
}

RunReport run(const SceneConfig& config, const std::string& subcommand, const RunFlags& flags) {
  static const std::vector<std::string> known{"greens", "modes", "purcell", "ldos-check", "validate"};
  Context ctx;
  ctx.flags = flags;
  json& rep = ctx.report.report;
  rep["tool"] = "qplas";
  rep["version"] = kVersion;
  rep["subcommand"] = subcommand;
  const auto t_start = Clock::now();

  auto finish = [&]() -> RunReport {
    json checks = json::array();
    bool all_pass = true;
    for (const auto& c : ctx.checks) {
      checks.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
      all_pass = all_pass && c.pass;
    }
    if (ctx.report.exit_code == kExitPass && !all_pass) ctx.report.exit_code = kExitValidationFailure;
    rep["checks"] = checks;
    rep["results"] = ctx.results;
    rep["outputs"] = ctx.outputs;
    rep["exit_code"] = ctx.report.exit_code;
    if (flags.timings) {
      ctx.timings["total"] = seconds_since(t_start);
      rep["timings"] = ctx.timings;
    }
    ctx.report.checks = ctx.checks;
    try {
      std::filesystem::create_directories(flags.out_dir);
      write_text(flags.out_dir / "report.json", rep.dump(2) + "\n");
      ctx.report.outputs.push_back(flags.out_dir / "report.json");
    } catch (const std::exception& e) {
      rep["error"] = e.what();
    }
    return ctx.report;
  };

  try {
    if (std::find(known.begin(), known.end(), subcommand) == known.end())
      throw ConfigError("unknown subcommand '" + subcommand + "'");
    ctx.config = apply_overrides(config, subcommand, flags);
    ctx.hash = config_hash(ctx.config);
    rep["config_hash"] = ctx.hash;
    rep["config"] = to_json(ctx.config);
    ctx.scene = resolve(ctx.config);
    rep["grid"] = {{"voxels", ctx.scene.grid.size()}, {"voxel_edge", ctx.config.grid.voxel_edge}};
    std::filesystem::create_directories(flags.out_dir);

    if (subcommand == "greens") run_greens(ctx);
    else if (subcommand == "modes") run_modes(ctx);
    else if (subcommand == "purcell") run_purcell(ctx);
    else if (subcommand == "ldos-check") run_ldos_check(ctx);
    else run_validate(ctx);
  } catch (const SolverError& e) {
    ctx.report.exit_code = kExitSolverFailure;
    rep["error"] = {{"kind", "solver"}, {"message", e.what()}, {"achieved_residual", e.achieved_residual()}};
  } catch (const SceneError& e) {
    ctx.report.exit_code = kExitConfigError;
    rep["error"] = {{"kind", "config"}, {"message", e.what()}, {"errors", e.errors()}};
  } catch (const ConfigError& e) {
    ctx.report.exit_code = kExitConfigError;
    rep["error"] = {{"kind", "config"}, {"message", e.what()}};
  } catch (const std::invalid_argument& e) {
    ctx.report.exit_code = kExitConfigError;
    rep["error"] = {{"kind", "config"}, {"message", e.what()}};
  } catch (const std::exception& e) {
    ctx.report.exit_code = kExitSolverFailure;
    rep["error"] = {{"kind", "runtime"}, {"message", e.what()}};
  }
  return finish();
}

std::vector<Triple> read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open points file '" + path.string() + "'");
  std::vector<Triple> out;
  std::string line;
  int lineno = 0;
  bool first_data = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_triple(line));
    } catch (const ConfigError&) {
      if (first_data) {
        first_data = false;
        continue;  // header row
      }
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected x,y,z");
    }
    first_data = false;
  }
  if (out.empty()) throw ConfigError("points file '" + path.string() + "' has no points");
  return out;
}

Triple parse_triple(const std::string& text) {
  Triple t{};
  std::stringstream ss(text);
  std::string item;
  int n = 0;
  while (std::getline(ss, item, ',')) {
    if (n == 3) throw ConfigError("expected 3 comma-separated numbers, got more: '" + text + "'");
    const auto first = item.find_first_not_of(" \t\r");
    const auto last = item.find_last_not_of(" \t\r");
    if (first == std::string::npos) throw ConfigError("empty component in '" + text + "'");
    const std::string tok = item.substr(first, last - first + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v))
      throw ConfigError("not a number: '" + tok + "'");
    t[n++] = v;
  }
  if (n != 3) throw ConfigError("expected 3 comma-separated numbers: '" + text + "'");
  return t;
}

std::tuple<double, double, int> parse_range(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (b == std::string::npos) throw ConfigError("expected a:b:n, got '" + text + "'");
  try {
    std::size_t used = 0;
    const double lo = std::stod(text.substr(0, a));
    const double hi = std::stod(text.substr(a + 1, b - a - 1));
    const std::string ns = text.substr(b + 1);
    const int n = std::stoi(ns, &used);
    if (used != ns.size() || n < 1 || !(lo > 0.0) || hi < lo) throw std::invalid_argument("range");
    return {lo, hi, n};
  } catch (const std::exception&) {
    throw ConfigError("invalid range '" + text + "' (need 0 < a <= b, n >= 1)");
  }
}

std::pair<int, int> parse_quad(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument("quad");
    std::size_t u1 = 0, u2 = 0;
    const std::string a = text.substr(0, x), b = text.substr(x + 1);
    const int nt = std::stoi(a, &u1), np = std::stoi(b, &u2);
    if (u1 != a.size() || u2 != b.size() || nt < 2 || np < 2) throw std::invalid_argument("quad");
    return {nt, np};
  } catch (const std::exception&) {
    throw ConfigError("invalid quadrature '" + text + "' (expected NTxNP with both >= 2, e.g. 8x16)");
  }
}

std::string format_check(const Check& c) {
  return std::string(c.pass ? "PASS " : "FAIL ") + c.name + " " + format_number(c.value) + " <= " +
         format_number(c.threshold);
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace qplas
