#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qplas/run.hpp"
#include "qplas/version.hpp"

namespace {

struct Options {
  std::string scene;
  std::string out_dir = ".";
  unsigned threads = 1;
  double tol = 0.0;
  std::string quad;
  bool timings = false;
  double omega = 0.0;
  std::string src, eval, kdir, sigma, zeta, emitter, dipole, x, y, omega_range, out;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--scene", o.scene, "scene file (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out-dir", o.out_dir, "directory for outputs and report.json");
  sub->add_option("--threads", o.threads, "worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 256u));
  sub->add_option("--tol", o.tol, "solver relative residual target")->check(CLI::PositiveNumber);
  sub->add_option("--quad", o.quad, "shell quadrature NTxNP, e.g. 8x16");
  sub->add_flag("--timings", o.timings, "record wall-clock timings in report.json");
}

qplas::RunFlags to_flags(const Options& o, const CLI::App& sub) {
  qplas::RunFlags f;
  f.out_dir = o.out_dir;
  f.threads = o.threads;
  f.timings = o.timings;
  auto given = [&](const char* name) {
    const auto* opt = sub.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--tol")) f.tol = o.tol;
  if (given("--quad")) f.quad = qplas::parse_quad(o.quad);
  if (given("--omega")) f.omega = o.omega;
  if (given("--src")) f.src = qplas::parse_triple(o.src);
  if (given("--kdir")) f.kdir = qplas::parse_triple(o.kdir);
  if (given("--sigma")) f.sigma = o.sigma;
  if (given("--zeta")) f.zeta = o.zeta;
  if (given("--emitter")) f.emitter = qplas::parse_triple(o.emitter);
  if (given("--dipole")) f.dipole = qplas::parse_triple(o.dipole);
  if (given("--x")) f.x = qplas::parse_triple(o.x);
  if (given("--y")) f.y = qplas::parse_triple(o.y);
  if (given("--omega-range")) f.omega_range = qplas::parse_range(o.omega_range);
  if (given("--out")) f.out_csv = o.out;
  if (given("--eval")) {
    // greens takes one point; modes takes a CSV file of points.
    if (sub.get_name() == "modes") f.eval_csv = o.eval;
    else f.eval = qplas::parse_triple(o.eval);
  }
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Field-medium Green tensor, mode coefficients and Purcell factors for dispersive bodies"};
  app.set_version_flag("--version", std::string(qplas::kVersion));
  app.require_subcommand(1);
  Options o;

  auto* greens = app.add_subcommand("greens", "medium Green tensor G(eval, src) as JSON");
  add_common(greens, o);
  greens->add_option("--omega", o.omega, "angular frequency")->check(CLI::PositiveNumber);
  greens->add_option("--src", o.src, "source point x,y,z");
  greens->add_option("--eval", o.eval, "evaluation point x,y,z");

  auto* modes = app.add_subcommand("modes", "field coefficient e_k at points, CSV");
  add_common(modes, o);
  modes->add_option("--omega", o.omega, "shell frequency c|k|")->check(CLI::PositiveNumber);
  modes->add_option("--kdir", o.kdir, "propagation direction x,y,z");
  modes->add_option("--sigma", o.sigma, "polarization + or -")->check(CLI::IsMember({"+", "-"}));
  modes->add_option("--zeta", o.zeta, "parity c (cos) or s (sin)")->check(CLI::IsMember({"c", "s"}));
  modes->add_option("--eval", o.eval, "CSV file of x,y,z points")->check(CLI::ExistingFile);

  auto* purcell = app.add_subcommand("purcell", "Purcell factor sweep, CSV plus gnuplot script");
  add_common(purcell, o);
  purcell->add_option("--emitter", o.emitter, "emitter position x,y,z");
  purcell->add_option("--dipole", o.dipole, "dipole direction and size dx,dy,dz");
  purcell->add_option("--omega-range", o.omega_range, "a:b:n, n frequencies from a to b");
  purcell->add_option("--out", o.out, "CSV file name inside --out-dir");

  auto* ldos = app.add_subcommand("ldos-check", "Green tensor LDOS identity residuals");
  auto* validate = app.add_subcommand("validate", "full identity suite, pass/fail report");
  for (auto* sub : {ldos, validate}) {
    add_common(sub, o);
    sub->add_option("--omega", o.omega, "angular frequency")->check(CLI::PositiveNumber);
    sub->add_option("--emitter", o.emitter, "emitter position x,y,z");
    sub->add_option("--dipole", o.dipole, "dipole dx,dy,dz");
    sub->add_option("--x", o.x, "first evaluation point x,y,z");
    sub->add_option("--y", o.y, "second evaluation point x,y,z");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qplas::kExitConfigError;
  }

  CLI::App* sub = app.get_subcommands().front();
  qplas::RunReport report;
  try {
    const qplas::SceneConfig scene = qplas::load_scene(o.scene);
    report = qplas::run(scene, sub->get_name(), to_flags(o, *sub));
  } catch (const qplas::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return qplas::kExitConfigError;
  }

  for (const auto& c : report.checks) std::cout << qplas::format_check(c) << "\n";
  if (report.report.contains("error"))
    std::cerr << "error: " << report.report["error"]["message"].get<std::string>() << "\n";
  for (const auto& p : report.outputs) std::cout << "wrote " << p.string() << "\n";
  return report.exit_code;
}
