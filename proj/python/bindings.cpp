#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qplas/ldos.hpp"
#include "qplas/run.hpp"
#include "qplas/version.hpp"

namespace py = pybind11;
using namespace qplas;

namespace {

// {region_id: [(omega0, omegap, gamma), ...]}
MaterialMap to_materials(const std::map<int, std::vector<std::tuple<double, double, double>>>& in) {
  MaterialMap out;
  for (const auto& [id, poles] : in) {
    PermittivityModel m{id, {}};
    for (const auto& [w0, wp, g] : poles) m.poles.push_back({w0, wp, g});
    m.validate();
    out[id] = m;
  }
  return out;
}

PermittivityModel to_model(const std::vector<std::tuple<double, double, double>>& poles) {
  PermittivityModel m{1, {}};
  for (const auto& [w0, wp, g] : poles) m.poles.push_back({w0, wp, g});
  m.validate();
  return m;
}

SolverOptions solver_options(double tol, const std::string& method) {
  SolverOptions o;
  o.tol = tol;
  o.method = parse_solver_method(method);
  return o;
}

py::dict rates_dict(const DecayRates& r) {
  py::dict d;
  d["gamma_e"] = r.gamma_e;
  d["gamma_m"] = r.gamma_m;
  d["gamma_m_direct"] = r.gamma_m_direct;
  d["gamma_total"] = r.gamma_total;
  d["gamma_via_imG"] = r.gamma_via_imG;
  d["gamma0"] = r.gamma0;
  return d;
}

}  // namespace

PYBIND11_MODULE(_qplas, m) {
  m.doc() = "Medium Green tensors, field coefficients and Purcell factors (internal units c = eps0 = hbar = 1)";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  m.def("vacuum_decay_rate", [](double w, double d2) { return vacuum_decay_rate(w, d2); },
        py::arg("omega"), py::arg("dipole_norm_sq"));

  m.def("eval_eps", [](const std::vector<std::tuple<double, double, double>>& poles, double w) {
    return eval_eps(to_model(poles), w);
  }, py::arg("poles"), py::arg("omega"));
  m.def("kk_residual", [](const std::vector<std::tuple<double, double, double>>& poles, double w,
                          int panels, int order) {
    return kk_residual(to_model(poles), w, PoleQuadrature{panels, order});
  }, py::arg("poles"), py::arg("omega"), py::arg("panels") = 256, py::arg("order") = 10);

  m.def("g0", &g0_closed, py::arg("x"), py::arg("y"), py::arg("omega"));
  m.def("self_term_coefficient", &self_term_coefficient, py::arg("voxel_volume"), py::arg("omega"));
  m.def("im_g0_spectral", [](const Vec3& x, const Vec3& y, double w, int nt, int np) {
    return im_g0_spectral(x, y, w, make_shell_quadrature(nt, np));
  }, py::arg("x"), py::arg("y"), py::arg("omega"), py::arg("n_theta") = 8, py::arg("n_phi") = 16);
  m.def("shell_quadrature", [](int nt, int np) {
    const auto q = make_shell_quadrature(nt, np);
    return py::make_tuple(q.nodes, q.weights);
  }, py::arg("n_theta") = 8, py::arg("n_phi") = 16);

  py::class_<VoxelGrid>(m, "VoxelGrid")
      .def_readonly("centers", &VoxelGrid::centers)
      .def_readonly("region", &VoxelGrid::region)
      .def_readonly("voxel_edge", &VoxelGrid::voxel_edge)
      .def("__len__", &VoxelGrid::size)
      .def("voxel_volume", &VoxelGrid::voxel_volume);

  m.def("sphere_grid", [](const Vec3& c, double r, double h, int region) {
    return build_grid(Sphere{c, r}, h, region);
  }, py::arg("center"), py::arg("radius"), py::arg("voxel_edge"), py::arg("region_id") = 1);
  m.def("box_grid", [](const Vec3& lo, const Vec3& hi, double h, int region) {
    return build_grid(Box{lo, hi}, h, region);
  }, py::arg("min_corner"), py::arg("max_corner"), py::arg("voxel_edge"), py::arg("region_id") = 1);

  py::class_<MediumSolver>(m, "MediumSolver")
      .def(py::init([](const VoxelGrid& g, const std::map<int, std::vector<std::tuple<double, double, double>>>& mats,
                       double w, double tol, const std::string& method) {
             return MediumSolver(g, to_materials(mats), w, solver_options(tol, method));
           }),
           py::arg("grid"), py::arg("materials"), py::arg("omega"), py::arg("tol") = 1e-10,
           py::arg("method") = "auto")
      .def_property_readonly("omega", &MediumSolver::omega)
      .def("green", &MediumSolver::green, py::arg("x"), py::arg("y"))
      .def("im_green_at", &MediumSolver::im_green_at, py::arg("x"))
      .def("dyson_residual", [](const MediumSolver& s, const Vec3& x, const Vec3& y) {
        return dyson_residual(s, x, y).relative();
      }, py::arg("x"), py::arg("y"))
      .def("e_coefficient", [](const MediumSolver& s, const Vec3& k, int sigma, char zeta,
                               const std::vector<Vec3>& pts, bool green_route) {
        const PlaneWaveMode mode{k, sigma >= 0 ? Polarization::Plus : Polarization::Minus,
                                 zeta == 's' ? Parity::Sin : Parity::Cos};
        return e_coefficient(s, mode, pts, green_route ? Route::Green : Route::Fredholm);
      }, py::arg("k"), py::arg("sigma"), py::arg("zeta"), py::arg("points"), py::arg("green_route") = false)
      .def("m_coefficient", [](const MediumSolver& s, std::size_t voxel, int j,
                               const std::vector<Vec3>& pts, bool green_route) {
        return m_coefficient(s, MedModeIndex{voxel, s.omega(), j}, pts,
                             green_route ? Route::Green : Route::Fredholm);
      }, py::arg("voxel"), py::arg("j"), py::arg("points"), py::arg("green_route") = true)
      .def("ldos_identity", [](const MediumSolver& s, const Vec3& x, const Vec3& y, int nt, int np) {
        const auto li = ldos_identity(s, x, y, make_shell_quadrature(nt, np));
        py::dict d;
        d["relative_absorption"] = li.relative_absorption();
        d["relative_m"] = li.relative_m();
        d["forms_difference"] = li.forms_difference();
        d["im_green"] = Dyadic(li.im_green);
        return d;
      }, py::arg("x"), py::arg("y"), py::arg("n_theta") = 8, py::arg("n_phi") = 16)
      .def("gamma_decomposed", [](const MediumSolver& s, const Vec3& ra, const Vec3& d, int nt, int np) {
        return rates_dict(gamma_decomposed(s, EmitterSpec{ra, s.omega(), d}, make_shell_quadrature(nt, np)));
      }, py::arg("r_a"), py::arg("d"), py::arg("n_theta") = 8, py::arg("n_phi") = 16)
      .def("purcell", [](const MediumSolver& s, const Vec3& ra, const Vec3& d) {
        return purcell(s, EmitterSpec{ra, s.omega(), d});
      }, py::arg("r_a"), py::arg("d"));

  m.def("load_scene", [](const std::filesystem::path& p) { return serialize(load_scene(p)); },
        py::arg("path"), "Canonical JSON text of a validated scene file.");
  m.def("config_hash", [](const std::filesystem::path& p) { return config_hash(load_scene(p)); },
        py::arg("path"));
  m.def("run", [](const std::filesystem::path& scene, const std::string& sub,
                  const std::filesystem::path& out_dir, unsigned threads) {
    RunFlags f;
    f.out_dir = out_dir;
    f.threads = threads;
    const RunReport r = run(load_scene(scene), sub, f);
    return py::make_tuple(r.exit_code, r.report.dump());
  }, py::arg("scene"), py::arg("subcommand"), py::arg("out_dir"), py::arg("threads") = 1,
        "Runs a CLI subcommand; returns (exit_code, report_json).");
}
